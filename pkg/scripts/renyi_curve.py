"""Renyi upper bound on log power as a function of the order s.

Prints the bound at each s on a grid, the optimized bound, and the exact log
power it must dominate, for each requested r.

    python3 scripts/renyi_curve.py --input tests/data/bernoulli.json --r 0.5,1
"""
import argparse
from dataclasses import dataclass, field

import numpy as np

from bhpower.core import llr_spectrum, load_pair
from bhpower.np_exact import beta_at_log_epsilon
from bhpower.renyi import beta_bound, renyi_curve


@dataclass
class CurveConfig:
    input: str
    r: list[float] = field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0])
    points: int = 19


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--input", required=True)
    ap.add_argument("--r", type=lambda s: [float(x) for x in s.split(",")])
    ap.add_argument("--points", type=int)
    cfg = CurveConfig(**{k: v for k, v in vars(ap.parse_args()).items() if v is not None})

    pair = load_pair(cfg.input)
    spectrum = llr_spectrum(pair)
    for r in cfg.r:
        best, s_star = beta_bound(pair, r)
        exact = beta_at_log_epsilon(spectrum, -r).log_beta
        print(f"r = {r:g}: exact log beta {exact:.6f}, bound {best:.6f} at s = {s_star:.6f}")
        for s in np.linspace(0.05, 0.95, cfg.points):
            c = renyi_curve(pair, r, float(s))
            print(f"  s={c.s:.3f}  D_s={c.D_s:.6f}  bound={c.bound_value:.6f}")


if __name__ == "__main__":
    main()
