"""Regenerate the CLI golden files under tests/golden from the Bernoulli fixture.

Run after an intentional change to numerics or output format, then review the diff.
"""
from pathlib import Path

from bhpower.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "tests" / "data" / "bernoulli.json"
GOLDEN = ROOT / "tests" / "golden"

# name -> extra argv; exponent uses shorter blocks to keep the suite quick
CASES = {
    "exact.csv": ["exact"],
    "exact.json": ["exact", "--format", "json"],
    "verify.csv": ["verify"],
    "renyi.csv": ["renyi"],
    "gaussian.csv": ["gaussian"],
    "exponent.csv": ["exponent", "--n", "64,256"],
}


def argv_for(name):
    head, *rest = CASES[name]
    return [head, "--input", str(FIXTURE), *rest]


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name in CASES:
        code = main(argv_for(name) + ["--output", str(GOLDEN / name)])
        print(f"{name}: exit {code}")
