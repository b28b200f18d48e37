"""The two variational formulas for the power and their optimality conditions.

Threshold form: beta(alpha) = max over lam >= 0 of
``sum min(Q, lam P) - lam (1 - alpha)``, maximized exactly at the lam with
``P{Q/P < lam} <= alpha <= P{Q/P <= lam}``.

CDF form: with ``F`` the CDF of ``L = ln P/Q`` under P and ``eps = 1 - alpha``,
beta = max over R of ``int_R^inf F(z) e^{-z} dz - e^{-R} eps``, maximized
exactly at the R with ``P{L < R} <= eps <= P{L <= R}``.

Both maxima are attained on an interval whenever the budget lands exactly on a
CDF flat; the functions here report the optimizer anchored at an atom, and any
other point of the interval gives the same value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LLRSpectrum, log_total
from .errors import NegativeLambda
from .np_exact import PowerResult, check_alpha, safe_exp

CONDITION_TOL = 1e-12


@dataclass(frozen=True)
class LambdaObjective:
    lam: float
    value: float


@dataclass(frozen=True)
class CdfObjective:
    R: float
    value: float


def _min_sum(spectrum: LLRSpectrum, lam: float) -> float:
    """``sum_w min(Q(w), lam P(w))``; outcomes with P = 0 or Q = 0 contribute 0."""
    if math.isinf(lam):
        return math.fsum(spectrum.q)
    return math.fsum(np.minimum(spectrum.q, lam * spectrum.p))


def objective_lambda(spectrum: LLRSpectrum, lam: float, alpha_accept: float) -> LambdaObjective:
    if not lam >= 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    alpha = check_alpha(alpha_accept)
    penalty = 0.0 if alpha == 1.0 else lam * (1.0 - alpha)
    return LambdaObjective(lam, _min_sum(spectrum, lam) - penalty)


def _ratio_masses(spectrum: LLRSpectrum, lam: float) -> tuple[float, float]:
    """``(P{Q/P < lam}, P{Q/P <= lam})`` with ratio ties detected in log space."""
    if lam == 0:
        return 0.0, spectrum.p_inf
    neg_z = -spectrum.z
    log_lam = math.log(lam) if math.isfinite(lam) else math.inf
    tie = np.abs(neg_z - log_lam) <= CONDITION_TOL * np.maximum(1.0, np.abs(neg_z))
    below = (neg_z < log_lam) & ~tie
    strict = spectrum.p_inf + math.fsum(spectrum.p[below])
    return strict, strict + math.fsum(spectrum.p[tie])


def check_lambda_optimality(spectrum: LLRSpectrum, lam: float, alpha_accept: float) -> bool:
    """Whether ``lam`` satisfies ``P{Q/P < lam} <= alpha <= P{Q/P <= lam}``."""
    if not lam >= 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    alpha = check_alpha(alpha_accept)
    strict, weak = _ratio_masses(spectrum, lam)
    return strict <= alpha + CONDITION_TOL and alpha <= weak + CONDITION_TOL


def optimal_lambda(spectrum: LLRSpectrum, alpha_accept: float) -> float:
    """Smallest atom ratio (or 0) whose weak cumulative P-mass reaches alpha."""
    alpha = check_alpha(alpha_accept)
    if alpha <= spectrum.p_inf or spectrum.size == 0:
        return 0.0
    ratios = np.exp(-spectrum.z[::-1])
    weak = spectrum.p_inf + np.cumsum(spectrum.p[::-1])
    j = min(int(np.searchsorted(weak, alpha, side="left")), spectrum.size - 1)
    return float(ratios[j])


def beta_variational_lambda(spectrum: LLRSpectrum, alpha_accept: float) -> PowerResult:
    lam = optimal_lambda(spectrum, alpha_accept)
    value = objective_lambda(spectrum, lam, alpha_accept).value
    log_beta = math.log(value) if value > 0 else -math.inf
    return PowerResult(value, log_beta, float(alpha_accept), lam=lam)


def tail_integral(spectrum: LLRSpectrum, R: float) -> float:
    """``int_R^inf F(z) e^{-z} dz`` via ``F(R) e^{-R} + Q{L > R}``.

    Atoms sitting exactly at ``R`` are counted in ``F(R)``, not in the tail.
    """
    at_or_below = spectrum.z <= R
    F_R = math.fsum(spectrum.p[at_or_below])
    head = F_R * safe_exp(-R) if F_R > 0 else 0.0
    return head + math.fsum(spectrum.q[~at_or_below])


def log_tail_integral(spectrum: LLRSpectrum, R: float) -> float:
    at_or_below = spectrum.z <= R
    terms = list(spectrum.log_q[~at_or_below])
    log_F = log_total(spectrum.log_p[at_or_below])
    if log_F > -math.inf:
        terms.append(log_F - R)
    return log_total(np.array(terms))


def tail_integral_quadrature(spectrum: LLRSpectrum, R: float) -> float:
    """The same integral, summed panel by panel over the flats of ``F``.

    On a flat ``[a, b)`` where ``F = c`` the integrand integrates to
    ``c (e^{-a} - e^{-b})``; the last flat runs to infinity.
    """
    z, cum = spectrum.z, np.cumsum(spectrum.p)
    k = int(np.searchsorted(z, R, side="right"))
    edges = [R] + z[k:].tolist() + [math.inf]
    levels = [float(cum[k - 1]) if k > 0 else 0.0] + cum[k:].tolist()
    pieces = []
    for a, b, c in zip(edges[:-1], edges[1:], levels):
        if c > 0:
            pieces.append(c * (safe_exp(-a) - (math.exp(-b) if b < math.inf else 0.0)))
    return math.fsum(pieces)


def objective_cdf(spectrum: LLRSpectrum, R: float, epsilon: float) -> CdfObjective:
    eps = check_alpha(epsilon, "epsilon")
    return CdfObjective(R, tail_integral(spectrum, R) - safe_exp(-R) * eps)


def optimal_R(spectrum: LLRSpectrum, epsilon: float) -> float:
    """First atom where ``F`` reaches ``epsilon``; ``+inf`` when ``F`` never does."""
    eps = check_alpha(epsilon, "epsilon")
    if spectrum.size == 0:
        return math.inf
    cum = np.cumsum(spectrum.p)
    j = int(np.searchsorted(cum, eps, side="left"))
    return float(spectrum.z[j]) if j < spectrum.size else math.inf


def check_R_optimality(spectrum: LLRSpectrum, R: float, epsilon: float) -> bool:
    """Whether ``P{L < R} <= epsilon <= P{L <= R}``."""
    eps = check_alpha(epsilon, "epsilon")
    strict = math.fsum(spectrum.p[spectrum.z < R])
    weak = math.fsum(spectrum.p[spectrum.z <= R])
    return strict <= eps + CONDITION_TOL and eps <= weak + CONDITION_TOL


def beta_variational_cdf(spectrum: LLRSpectrum, epsilon: float) -> PowerResult:
    """Power at type-I budget ``epsilon``, i.e. ``beta_exact`` at ``1 - epsilon``."""
    R = optimal_R(spectrum, epsilon)
    value = 0.0 if math.isinf(R) else objective_cdf(spectrum, R, epsilon).value
    log_beta = math.log(value) if value > 0 else -math.inf
    return PowerResult(value, log_beta, 1.0 - float(epsilon), R=R)


def sanity_q_tail(spectrum: LLRSpectrum, R: float) -> float:
    """``Q{L > R}``; outcomes with P = 0 have ``L = -inf`` and never count."""
    return math.fsum(spectrum.q[spectrum.z > R])
