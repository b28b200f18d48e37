"""Input pairs and the log-likelihood-ratio spectrum.

Every power computation in the package runs on an :class:`LLRSpectrum`: the
law of ``L = ln(P/Q)`` under ``P``, stored as sorted distinct atoms with their
P-masses (kept as logs so that product spectra with astronomically small
masses stay representable), plus the two pieces of mass that have no finite
``L``:

* ``p_inf``    -- P-mass of outcomes with Q = 0 (``L = +inf``),
* ``q_orphan`` -- Q-mass of outcomes with P = 0 (never visible to ``F``).

The Q-mass of an atom is recovered by change of measure as ``p * exp(-z)``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp, ndtr

from .errors import (
    AtomExplosion,
    DegenerateVariance,
    DuplicateLabel,
    EmptySupport,
    LengthMismatch,
    NegativeMass,
    NotNormalized,
)

INPUT_SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
DERIVED_SUM_TOL = 1e-9
TIE_REL_TOL = 1e-14
DEFAULT_ATOM_CAP = 10**7


def atom_cap() -> int:
    """Product atom cap, overridable through ``BHT_ATOM_CAP``."""
    raw = os.environ.get("BHT_ATOM_CAP")
    return int(raw) if raw else DEFAULT_ATOM_CAP


@dataclass(frozen=True)
class DiscretePair:
    support: tuple[str, ...]
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.p.setflags(write=False)
        self.q.setflags(write=False)

    def __len__(self):
        return len(self.support)


def _check_distribution(name: str, x: np.ndarray) -> np.ndarray:
    if np.any(~np.isfinite(x)):
        raise NotNormalized(f"{name} contains non-finite entries")
    if np.any(x < 0):
        i = int(np.argmax(x < 0))
        raise NegativeMass(f"{name}[{i}] = {x[i]!r} is negative")
    total = math.fsum(x)
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise NotNormalized(f"{name} sums to {total!r}, not 1")
    if abs(total - 1.0) > 0.0:
        x = x / total
    return x


def validate_pair(support: Sequence, p: Sequence[float], q: Sequence[float]) -> DiscretePair:
    """Validate parallel lists and build a :class:`DiscretePair`.

    Sums off by at most 1e-9 are renormalized; anything further off raises
    :class:`NotNormalized`.
    """
    support = tuple(str(s) for s in support)
    if len(support) == 0:
        raise EmptySupport("support is empty")
    if not (len(support) == len(p) == len(q)):
        raise LengthMismatch(
            f"support, p and q have lengths {len(support)}, {len(p)}, {len(q)}"
        )
    if len(set(support)) != len(support):
        raise DuplicateLabel("support labels must be distinct")
    p_arr = _check_distribution("p", np.array(p, dtype=float))
    q_arr = _check_distribution("q", np.array(q, dtype=float))
    return DiscretePair(support, p_arr, q_arr)


def pair_from_arrays(p: Sequence[float], q: Sequence[float]) -> DiscretePair:
    """Convenience wrapper labelling outcomes ``0..k-1``."""
    return validate_pair([str(i) for i in range(len(p))], p, q)


@dataclass(frozen=True)
class LLRSpectrum:
    """Law of the log-likelihood ratio under P.

    ``z`` is strictly increasing and finite; ``log_p`` are the natural logs of
    the P-masses of the atoms.
    """

    z: np.ndarray
    log_p: np.ndarray
    p_inf: float = 0.0
    q_orphan: float = 0.0
    _p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=float)
        log_p = np.ascontiguousarray(self.log_p, dtype=float)
        if z.shape != log_p.shape or z.ndim != 1:
            raise LengthMismatch("z and log_p must be 1-D arrays of equal length")
        if z.size and (np.any(np.diff(z) <= 0) or not np.all(np.isfinite(z))):
            raise ValueError("atoms must be finite and strictly increasing in z")
        z.setflags(write=False)
        log_p.setflags(write=False)
        p = np.exp(log_p)
        p.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "log_p", log_p)
        object.__setattr__(self, "_p", p)

    @property
    def p(self) -> np.ndarray:
        return self._p

    @property
    def log_q(self) -> np.ndarray:
        """Logs of the Q-masses of the atoms (``log p - z``)."""
        return self.log_p - self.z

    @property
    def q(self) -> np.ndarray:
        return np.exp(self.log_q)

    @property
    def size(self) -> int:
        return int(self.z.size)

    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.z.tolist(), self.p.tolist()))

    def finite_mass(self) -> float:
        return float(math.fsum(self.p))

    def q_normalization(self) -> float:
        """``sum p e^{-z} + q_orphan``; equals 1 for a valid spectrum."""
        return float(math.fsum(self.q)) + self.q_orphan

    def check(self, tol: float = DERIVED_SUM_TOL) -> None:
        """Assert both normalizations; raises :class:`NotNormalized`."""
        p_total = self.finite_mass() + self.p_inf
        if abs(p_total - 1.0) > tol:
            raise NotNormalized(f"P-mass of spectrum is {p_total!r}")
        q_total = self.q_normalization()
        if abs(q_total - 1.0) > tol:
            raise NotNormalized(f"Q-mass of spectrum is {q_total!r}")


def _merge_atoms(z: np.ndarray, log_p: np.ndarray, scale: np.ndarray):
    """Sort and merge atoms whose z agree to ``TIE_REL_TOL`` relative to ``scale``.

    ``scale`` is the magnitude of the summands that produced each z, so sums
    that cancel to nearly zero still merge.
    """
    if z.size == 0:
        return z, log_p
    order = np.argsort(z, kind="stable")
    z, log_p, scale = z[order], log_p[order], scale[order]
    tol = TIE_REL_TOL * np.maximum(np.maximum(scale[1:], scale[:-1]), np.abs(z[1:]))
    starts = np.concatenate(([0], np.flatnonzero(np.diff(z) > tol) + 1))
    merged_log_p = np.logaddexp.reduceat(log_p, starts)
    return z[starts], merged_log_p


def llr_spectrum(pair: DiscretePair) -> LLRSpectrum:
    p, q = pair.p, pair.q
    both = (p > 0) & (q > 0)
    p_inf = float(math.fsum(p[(p > 0) & (q == 0)]))
    q_orphan = float(math.fsum(q[(q > 0) & (p == 0)]))
    pl = np.log(p[both].astype(np.longdouble))
    ql = np.log(q[both].astype(np.longdouble))
    z = (pl - ql).astype(float)
    log_p = pl.astype(float)
    z, log_p = _merge_atoms(z, log_p, np.abs(z))
    return LLRSpectrum(z, log_p, p_inf, q_orphan)


def convolve(a: LLRSpectrum, b: LLRSpectrum, cap: int | None = None) -> LLRSpectrum:
    """Spectrum of the product pair built from the pairs behind ``a`` and ``b``."""
    cap = atom_cap() if cap is None else cap
    if a.size * b.size > cap:
        raise AtomExplosion(f"{a.size}x{b.size} atom product exceeds cap {cap}")
    z = np.add.outer(a.z, b.z).ravel()
    log_p = np.add.outer(a.log_p, b.log_p).ravel()
    scale = np.add.outer(np.abs(a.z), np.abs(b.z)).ravel()
    z, log_p = _merge_atoms(z, log_p, scale)
    p_inf = 1.0 - (1.0 - a.p_inf) * (1.0 - b.p_inf)
    q_orphan = 1.0 - (1.0 - a.q_orphan) * (1.0 - b.q_orphan)
    return LLRSpectrum(z, log_p, p_inf, q_orphan)


def _compositions(n: int, k: int) -> np.ndarray:
    """All length-k nonnegative integer vectors summing to n (stars and bars)."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(list(combinations(range(n + k - 1), k - 1)), dtype=np.int64)
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), n + k - 1)])
    return np.diff(edges, axis=1) - 1


def iid_product(spectrum: LLRSpectrum, n: int, cap: int | None = None) -> LLRSpectrum:
    """Spectrum of ``(P^n, Q^n)`` built by enumerating the types of the base atoms."""
    if n < 1 or int(n) != n:
        raise ValueError(f"block length must be a positive integer, got {n!r}")
    n = int(n)
    if n == 1:
        return spectrum
    cap = atom_cap() if cap is None else cap
    k = spectrum.size
    p_inf = -math.expm1(n * math.log1p(-spectrum.p_inf)) if spectrum.p_inf < 1 else 1.0
    q_orphan = -math.expm1(n * math.log1p(-spectrum.q_orphan)) if spectrum.q_orphan < 1 else 1.0
    if k == 0:
        return LLRSpectrum(np.empty(0), np.empty(0), p_inf, q_orphan)
    n_types = math.comb(n + k - 1, k - 1)
    if n_types > cap:
        raise AtomExplosion(f"{n_types} product atoms for n={n}, k={k} exceed cap {cap}")
    counts = _compositions(n, k)
    zl = spectrum.z.astype(np.longdouble)
    z = (counts @ zl).astype(float)
    scale = (counts @ np.abs(zl)).astype(float)
    log_multinomial = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)
    log_p = log_multinomial + counts @ spectrum.log_p
    z, log_p = _merge_atoms(z, log_p, scale)
    return LLRSpectrum(z, log_p, p_inf, q_orphan)


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step CDF ``F(z) = P{L <= z}``."""

    z: np.ndarray
    values: np.ndarray
    log_values: np.ndarray

    def __call__(self, z):
        return evaluate(self, z)


def cdf(spectrum: LLRSpectrum) -> StepCdf:
    log_values = np.logaddexp.accumulate(spectrum.log_p) if spectrum.size else np.empty(0)
    values = np.minimum(np.cumsum(spectrum.p), 1.0 - spectrum.p_inf)
    return StepCdf(spectrum.z, values, log_values)


def evaluate(F: StepCdf, z):
    """``F(z)``; vectorized over ``z``."""
    idx = np.searchsorted(F.z, z, side="right")
    padded = np.concatenate(([0.0], F.values))
    out = padded[idx]
    return float(out) if np.ndim(out) == 0 else out


def log_evaluate(F: StepCdf, z):
    idx = np.searchsorted(F.z, z, side="right")
    padded = np.concatenate(([-np.inf], F.log_values))
    out = padded[idx]
    return float(out) if np.ndim(out) == 0 else out


def sup_gap(F: StepCdf, model) -> tuple[float, float]:
    """Smallest ``(d_l, d_h)`` with ``G - d_l <= F <= G + d_h`` everywhere.

    ``G`` is the normal CDF with mean ``model.D`` and variance ``model.V``.
    Both suprema sit at jumps of ``F``: ``G - F`` approaches its sup from the
    left of a jump, ``F - G`` attains its sup at the jump.
    """
    if not model.V > 0:
        raise DegenerateVariance(f"variance must be positive, got {model.V!r}")
    if F.z.size == 0:
        return 1.0, 0.0
    G = ndtr((F.z - model.D) / math.sqrt(model.V))
    before = np.concatenate(([0.0], F.values[:-1]))
    # mass missing at +inf shows up as G - F -> 1 - F(inf) on the right
    d_l = max(float(np.max(G - before)), 1.0 - float(F.values[-1]), 0.0)
    d_h = max(float(np.max(F.values - G)), 0.0)
    return d_l, d_h


# -- file formats -----------------------------------------------------------


class InputFormatError(ValueError):
    """Unreadable distribution file; message carries the line number."""


def load_pair(path: str | os.PathLike) -> DiscretePair:
    """Read a JSON (``support``/``p``/``q``) or CSV (``outcome,p,q``) file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return parse_csv(text, str(path))
    return parse_json(text, str(path))


def parse_json(text: str, source: str = "<json>") -> DiscretePair:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{source}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or not {"support", "p", "q"} <= doc.keys():
        raise InputFormatError(f"{source}:1: expected an object with keys support, p, q")
    for key in ("p", "q"):
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in doc[key]):
            raise InputFormatError(f"{source}:1: '{key}' must be a list of numbers")
    return validate_pair(doc["support"], doc["p"], doc["q"])


def parse_csv(text: str, source: str = "<csv>") -> DiscretePair:
    reader = csv.reader(io.StringIO(text))
    rows = [(i, row) for i, row in enumerate(reader, start=1) if row]
    if not rows or [c.strip() for c in rows[0][1]] != ["outcome", "p", "q"]:
        raise InputFormatError(f"{source}:1: header must be 'outcome,p,q'")
    support, p, q = [], [], []
    for lineno, row in rows[1:]:
        if len(row) != 3:
            raise InputFormatError(f"{source}:{lineno}: expected 3 fields, got {len(row)}")
        try:
            p.append(float(row[1]))
            q.append(float(row[2]))
        except ValueError as exc:
            raise InputFormatError(f"{source}:{lineno}: {exc}") from exc
        support.append(row[0].strip())
    return validate_pair(support, p, q)


def dump_pair_json(pair: DiscretePair) -> str:
    return json.dumps({"support": list(pair.support), "p": pair.p.tolist(), "q": pair.q.tolist()})


def dump_pair_csv(pair: DiscretePair) -> str:
    lines = ["outcome,p,q"]
    lines += [f"{s},{pi!r},{qi!r}" for s, pi, qi in zip(pair.support, pair.p.tolist(), pair.q.tolist())]
    return "\n".join(lines) + "\n"


def log_total(log_terms: np.ndarray) -> float:
    """``log(sum(exp(log_terms)))`` that returns ``-inf`` for an empty input."""
    if len(log_terms) == 0:
        return -math.inf
    return float(logsumexp(log_terms))
