"""Power of the optimal (Neyman-Pearson) randomized test, straight from the definition.

``beta(alpha)`` is the least Q-probability of an acceptance region whose
P-probability is at least ``alpha``.  The optimal region is filled greedily in
increasing order of Q/P: first the ``p_inf`` outcomes (Q = 0), then the finite
atoms from the largest ``z = ln P/Q`` down, with the atom that crosses the
budget taken fractionally.  This is the ground-truth route the other two
formulas are checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import LLRSpectrum
from .errors import AlphaOutOfRange

LINEAR_FLOOR = 1e-300
P_INF_GROUP = -1


@dataclass(frozen=True)
class OptimalTest:
    """Threshold ``lam`` on the Q/P scale and randomization weight ``delta``.

    ``boundary`` indexes the randomized atom, or is ``P_INF_GROUP`` when the
    threshold sits at ratio 0 and the randomization is over the Q = 0 outcomes.
    """

    lam: float
    log_lam: float
    delta: float
    achieved_alpha: float
    boundary: int


@dataclass(frozen=True)
class PowerResult:
    beta: float
    log_beta: float
    alpha_accept: float
    test: OptimalTest | None = None
    lam: float | None = None
    R: float | None = None

    @property
    def epsilon(self) -> float:
        return 1.0 - self.alpha_accept


def safe_exp(x: float) -> float:
    """``exp`` that saturates to ``inf`` instead of raising."""
    return math.exp(x) if x < 709.78 else math.inf


def check_alpha(alpha_accept: float, name: str = "alpha_accept") -> float:
    if not 0.0 <= alpha_accept <= 1.0:
        raise AlphaOutOfRange(f"{name} must lie in [0, 1], got {alpha_accept!r}")
    return float(alpha_accept)


def _accumulate(log_terms: list[np.ndarray]) -> tuple[float, float]:
    terms = np.concatenate([np.atleast_1d(t) for t in log_terms]) if log_terms else np.empty(0)
    terms = terms[terms > -np.inf]
    if terms.size == 0:
        return 0.0, -math.inf
    if np.all(terms > math.log(LINEAR_FLOOR)):
        beta = math.fsum(np.exp(terms))
        return beta, math.log(beta)
    log_beta = float(logsumexp(terms))
    return math.exp(log_beta), log_beta


def _p_inf_test(spectrum: LLRSpectrum, alpha: float) -> OptimalTest:
    delta = alpha / spectrum.p_inf if spectrum.p_inf > 0 else 0.0
    delta = min(delta, 1.0)
    return OptimalTest(0.0, -math.inf, delta, delta * spectrum.p_inf, P_INF_GROUP)


def np_test(spectrum: LLRSpectrum, alpha_accept: float) -> OptimalTest:
    alpha = check_alpha(alpha_accept)
    if alpha <= spectrum.p_inf or spectrum.size == 0:
        return _p_inf_test(spectrum, alpha)
    need = alpha - spectrum.p_inf
    p_desc = spectrum.p[::-1]
    cum = np.cumsum(p_desc)
    j = min(int(np.searchsorted(cum, need, side="left")), spectrum.size - 1)
    before = float(cum[j - 1]) if j > 0 else 0.0
    b = spectrum.size - 1 - j
    if before > 0.5:
        # deep in the budget: measure the rejected share from the low end, where sums are small
        below = math.fsum(spectrum.p[:b])
        delta = 1.0 - ((1.0 - alpha) - below) / p_desc[j]
    else:
        delta = (need - before) / p_desc[j]
    delta = float(min(max(delta, 0.0), 1.0))
    z_b = float(spectrum.z[b])
    achieved = float(spectrum.p_inf + before + delta * p_desc[j])
    return OptimalTest(safe_exp(-z_b), -z_b, delta, achieved, b)


def _beta_of_test(spectrum: LLRSpectrum, test: OptimalTest) -> tuple[float, float]:
    if test.boundary == P_INF_GROUP:
        return 0.0, -math.inf
    b = test.boundary
    log_q = spectrum.log_q
    terms = [log_q[b + 1:]]
    if test.delta > 0:
        terms.append(np.array([math.log(test.delta) + log_q[b]]))
    return _accumulate(terms)


def beta_exact(spectrum: LLRSpectrum, alpha_accept: float) -> PowerResult:
    """Power at acceptance level ``alpha_accept`` (``epsilon = 1 - alpha_accept``)."""
    test = np_test(spectrum, alpha_accept)
    beta, log_beta = _beta_of_test(spectrum, test)
    return PowerResult(beta, log_beta, float(alpha_accept), test=test, lam=test.lam)


def beta_at_log_epsilon(spectrum: LLRSpectrum, log_epsilon: float) -> PowerResult:
    """Power at type-I budget ``exp(log_epsilon)``, computed from the rejection side.

    Needed when the budget is far below double resolution near 1 (e.g.
    ``exp(-n r)`` for block lengths in the hundreds): atoms are rejected from
    the smallest ``z`` upward with every mass handled in log domain.
    """
    if log_epsilon > 0:
        raise AlphaOutOfRange(f"log_epsilon must be <= 0, got {log_epsilon!r}")
    alpha = -math.expm1(log_epsilon)
    if spectrum.size == 0:
        return PowerResult(0.0, -math.inf, alpha, test=_p_inf_test(spectrum, alpha), lam=0.0)
    log_cum = np.logaddexp.accumulate(spectrum.log_p)
    if log_epsilon >= log_cum[-1]:
        test = _p_inf_test(spectrum, alpha)
        return PowerResult(0.0, -math.inf, alpha, test=test, lam=0.0)
    b = int(np.searchsorted(log_cum, log_epsilon, side="left"))
    gap = log_epsilon - log_cum[b]
    # accepted share of the boundary atom: (F(z_b) - eps) / p_b
    log_delta = log_cum[b] + math.log1p(-math.exp(gap)) - spectrum.log_p[b] if gap < 0 else -math.inf
    delta = min(math.exp(log_delta), 1.0)
    log_q = spectrum.log_q
    terms = [log_q[b + 1:]]
    if log_delta > -math.inf:
        terms.append(np.array([log_delta + log_q[b]]))
    beta, log_beta = _accumulate(terms)
    z_b = float(spectrum.z[b])
    test = OptimalTest(safe_exp(-z_b), -z_b, delta, alpha, b)
    return PowerResult(beta, log_beta, alpha, test=test, lam=test.lam)


def replay(spectrum: LLRSpectrum, test: OptimalTest) -> tuple[float, float]:
    """Apply ``test`` to the spectrum; returns ``(P(accept), Q(accept))``.

    Acceptance is decided from the threshold alone: ratio Q/P below ``lam``
    accepted, equal to ``lam`` accepted with probability ``delta``.
    """
    if test.boundary == P_INF_GROUP:
        return test.delta * spectrum.p_inf, 0.0
    cut = -test.log_lam
    above = spectrum.z > cut
    at = spectrum.z == cut
    alpha = spectrum.p_inf + math.fsum(spectrum.p[above]) + test.delta * math.fsum(spectrum.p[at])
    beta = math.fsum(spectrum.q[above]) + test.delta * math.fsum(spectrum.q[at])
    return alpha, beta

