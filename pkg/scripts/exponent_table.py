"""Exact error exponent against its large-deviation surrogate.

Tabulates E_n(r) = -(1/n) log beta(1 - e^{-n r}) on exact product spectra next
to the surrogate exponent (quadrature and Laplace), the measured slacks and
the resulting two-sided bound.

    python3 scripts/exponent_table.py --input tests/data/bernoulli.json --n 64,256,1024
"""
import argparse
import math
from dataclasses import dataclass, field

from bhpower.core import llr_spectrum, load_pair
from bhpower.largedev import E2n, RateModel, exponent_sandwich


@dataclass
class TableConfig:
    input: str
    r: list[float] = field(default_factory=lambda: [0.02, 0.05, 0.1, 0.2])
    n: list[int] = field(default_factory=lambda: [16, 64, 256, 1024])


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--input", required=True)
    ap.add_argument("--r", type=lambda s: [float(x) for x in s.split(",")])
    ap.add_argument("--n", type=lambda s: [int(x) for x in s.split(",")])
    cfg = TableConfig(**{k: v for k, v in vars(ap.parse_args()).items() if v is not None})

    base = llr_spectrum(load_pair(cfg.input))
    rate = RateModel(base)
    print(f"D = {rate.D:.6f} nats, sup E_1 = {rate.sup_rate:.6f} nats")
    header = ("r", "n", "E_n exact", "E2n quad", "E2n laplace", "lower", "upper")
    print("".join(f"{h:>13}" for h in header))
    for r in cfg.r:
        for n in cfg.n:
            out = exponent_sandwich(base, r, n, rate=rate)
            lap = E2n(rate, r, n, "laplace").E2n
            quad = E2n(rate, r, n, "quadrature").E2n
            vals = (r, n, out["En_exact"], quad, lap, out["lower"], out["upper"])
            print("".join(f"{v:>13}" if isinstance(v, int) or math.isinf(v) else f"{v:>13.6f}"
                          for v in vals))


if __name__ == "__main__":
    main()
