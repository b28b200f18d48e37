"""Renyi divergences and the exponent-domain upper bound on the power.

For every order ``s`` in (0, 1) and type-I budget ``e^{-r}``::

    log beta(1 - e^{-r}) <= -D_s(P||Q) + s/(1-s) r - h_b(s)/(1-s)

with ``h_b`` the binary entropy in nats.  :func:`beta_bound` minimizes the
right side over ``s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr, logsumexp

from ._search import golden_min
from .core import DiscretePair, LLRSpectrum
from .errors import OrderOutOfRange

S_MARGIN = 1e-6
S_TOL = 1e-10
FALLBACK_STEP = 1e-4


@dataclass(frozen=True)
class RenyiCurve:
    s: float
    g_s: float
    D_s: float
    bound_value: float


def binary_entropy(s: float) -> float:
    """``h_b(s)`` in nats; zero at both endpoints."""
    return float(entr(s) + entr(1.0 - s))


def _overlap_logs(pair: DiscretePair | LLRSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """``(log P, log Q)`` over outcomes where both are positive."""
    if isinstance(pair, LLRSpectrum):
        return pair.log_p, pair.log_p - pair.z
    both = (pair.p > 0) & (pair.q > 0)
    return np.log(pair.p[both]), np.log(pair.q[both])


def _g_many(log_p: np.ndarray, log_q: np.ndarray, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if log_p.size == 0:
        return np.full(s.shape, -np.inf)
    return logsumexp(s[..., None] * log_p + (1.0 - s[..., None]) * log_q, axis=-1)


def _body_many(log_p, log_q, r: float, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    h = entr(s) + entr(1.0 - s)
    return (h - _g_many(log_p, log_q, s) - s * r) / (s - 1.0)


def g_s(pair: DiscretePair | LLRSpectrum, s: float) -> float:
    """``log sum_w P(w)^s Q(w)^{1-s}`` with ``0^s = 0`` (also at s = 0, 1).

    Accepts a pair or a spectrum; on a spectrum the sum runs over the finite
    atoms as ``sum p e^{-(1-s) z}``.
    """
    if not 0.0 <= s <= 1.0:
        raise OrderOutOfRange(f"order s must lie in [0, 1], got {s!r}")
    return float(_g_many(*_overlap_logs(pair), s))


def renyi_divergence(pair: DiscretePair | LLRSpectrum, s: float) -> float:
    if not 0.0 < s < 1.0:
        raise OrderOutOfRange(f"order s must lie in (0, 1), got {s!r}")
    g = g_s(pair, s)
    return math.inf if g == -math.inf else g / (s - 1.0)


def beta_bound_at_s(pair: DiscretePair | LLRSpectrum, r: float, s: float) -> float:
    """Right side of the exponent bound at a fixed order ``s``."""
    if not 0.0 < s < 1.0:
        raise OrderOutOfRange(f"order s must lie in (0, 1), got {s!r}")
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r!r}")
    D = renyi_divergence(pair, s)
    if math.isinf(D):
        return -math.inf
    return -D - s / (s - 1.0) * r + binary_entropy(s) / (s - 1.0)


def renyi_curve(pair: DiscretePair | LLRSpectrum, r: float, s: float) -> RenyiCurve:
    g = g_s(pair, s)
    return RenyiCurve(s, g, renyi_divergence(pair, s), beta_bound_at_s(pair, r, s))


def beta_bound(pair: DiscretePair | LLRSpectrum, r: float) -> tuple[float, float]:
    """``(min_s bound, argmin)`` over the open interval of orders."""
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r!r}")
    if g_s(pair, 0.5) == -math.inf:
        return -math.inf, 0.5

    log_p, log_q = _overlap_logs(pair)

    def body(s):
        return float(_body_many(log_p, log_q, r, s))

    lo, hi = S_MARGIN, 1.0 - S_MARGIN
    if -g_s(pair, 1.0) > r:
        # P puts more than 1 - e^{-r} on {Q = 0}: beta is 0 and the body
        # decreases without bound as s -> 1
        return -math.inf, hi
    s_star, best = min([golden_min(body, lo, hi, S_TOL), (lo, body(lo)), (hi, body(hi))],
                       key=lambda c: c[1])
    # unimodality guard: a coarse scan must not beat the golden-section result
    coarse = np.linspace(lo, hi, 201)
    coarse_vals = _body_many(log_p, log_q, r, coarse)
    if coarse_vals.min() < best - 1e-12:
        fine = np.arange(lo, hi, FALLBACK_STEP)
        vals = _body_many(log_p, log_q, r, fine)
        k = int(np.argmin(vals))
        a, b = fine[max(k - 1, 0)], fine[min(k + 1, fine.size - 1)]
        s_star, best = min([golden_min(body, a, b, S_TOL), (fine[k], vals[k])], key=lambda c: c[1])
    return float(best), float(s_star)
