"""Gaussian surrogate for the LLR CDF.

If ``L ~ N(D, V)`` under P, the power at budget ``eps`` is available in closed
form: the optimal threshold is ``R = D + sqrt(V) Phi^{-1}(eps)`` and

    beta = e^{-D + V/2} Phi^C(Phi^{-1}(eps) + sqrt(V)).

When ``G - d_l <= F <= G + d_h`` uniformly, the true power is sandwiched
between the surrogate's power at shifted budgets:

    beta_G(eps + d_l) <= beta(eps) <= beta_G(eps - d_h).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, ndtr, ndtri

from .core import LLRSpectrum, StepCdf, sup_gap
from .errors import DegenerateVariance, DomainError, InfiniteLlr, NegativeArgument
from .np_exact import PowerResult, beta_exact, check_alpha

BERRY_ESSEEN_C = 0.4748


@dataclass(frozen=True)
class GaussianModel:
    D: float
    V: float
    d_l: float = 0.0
    d_h: float = 0.0

    @property
    def sd(self) -> float:
        return math.sqrt(self.V)

    def with_gaps(self, d_l: float, d_h: float) -> "GaussianModel":
        return GaussianModel(self.D, self.V, d_l, d_h)


@dataclass(frozen=True)
class SandwichResult:
    lower: float
    upper: float
    epsilon: float
    lower_degenerate: bool = False
    upper_degenerate: bool = False
    exact: float | None = None

    def contains(self, beta: float | None = None, tol: float = 0.0) -> bool:
        beta = self.exact if beta is None else beta
        return self.lower - tol <= beta <= self.upper + tol


def phi(t):
    return ndtr(t)


def phi_c(t):
    t = np.asarray(t, dtype=float)
    # ndtr flushes to zero near t = 37.5 while the subnormal range still has room
    out = np.where(t < 37.0, ndtr(-t), np.exp(log_ndtr(-np.maximum(t, 37.0))))
    return out if out.ndim else float(out)


def log_phi_c(t):
    """``log Phi^C(t)``, accurate far into the upper tail."""
    return log_ndtr(-np.asarray(t)) if np.ndim(t) else float(log_ndtr(-t))


def phi_inv(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"phi_inv needs p in (0, 1), got {p!r}")
    return float(ndtri(p))


def phi_c_envelope(t: float) -> tuple[float, float]:
    """Two-sided bound on ``Phi^C(t)`` for ``t >= 0``."""
    if t < 0:
        raise NegativeArgument(f"envelope needs t >= 0, got {t!r}")
    k = math.sqrt(2.0 / math.pi) * math.exp(-t * t / 2.0)
    return k / (t + math.sqrt(t * t + 4.0)), k / (t + math.sqrt(t * t + 8.0 / math.pi))


def _check_model(model: GaussianModel) -> None:
    if not model.V > 0:
        raise DegenerateVariance(f"variance must be positive, got {model.V!r}")


def _check_open_eps(epsilon: float) -> float:
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return float(epsilon)


def gaussian_R(model: GaussianModel, epsilon: float) -> float:
    _check_model(model)
    return model.D + model.sd * phi_inv(_check_open_eps(epsilon))


def gaussian_log_beta(model: GaussianModel, epsilon: float) -> float:
    _check_model(model)
    t = phi_inv(_check_open_eps(epsilon)) + model.sd
    return -model.D + model.V / 2.0 + log_phi_c(t)


def gaussian_beta(model: GaussianModel, epsilon: float) -> PowerResult:
    """Closed-form power of the Gaussian surrogate at type-I budget ``epsilon``."""
    log_beta = gaussian_log_beta(model, epsilon)
    return PowerResult(math.exp(log_beta), log_beta, 1.0 - epsilon, R=gaussian_R(model, epsilon))


def gaussian_beta_quadrature(model: GaussianModel, epsilon: float) -> float:
    """``int_R^inf e^{-z} N(z; D, V) dz`` by adaptive quadrature.

    Integrates in the standardized variable ``u = (z - D)/sqrt(V)`` and
    factors out ``e^{-D}`` so the integrand stays O(1).
    """
    R = gaussian_R(model, epsilon)
    sd = model.sd
    u0 = (R - model.D) / sd

    def integrand(u):
        return math.exp(-sd * u - u * u / 2.0) / math.sqrt(2.0 * math.pi)

    # the integrand peaks at u = -sd; split there so quad sees the bulk
    peak = -sd
    upper = max(u0, peak) + 40.0
    points = [peak] if u0 < peak < upper else None
    val, _ = integrate.quad(integrand, u0, upper, points=points, epsabs=0.0,
                            epsrel=1e-13, limit=500)
    return math.exp(-model.D) * val


def gaussian_beta_asymptotic(model: GaussianModel, epsilon: float) -> float:
    """Log of the large-V approximation ``e^{-D - sqrt(V) Phi^{-1}(eps)} / sqrt(V)``.

    Accurate only up to a multiplicative constant.
    """
    _check_model(model)
    return -model.D - model.sd * phi_inv(_check_open_eps(epsilon)) - 0.5 * math.log(model.V)


def sandwich(spectrum: LLRSpectrum | None, model: GaussianModel, epsilon: float) -> SandwichResult:
    """Bounds on the true power from a surrogate with additive CDF gaps.

    A side whose shifted budget leaves (0, 1) falls back to the trivial bound
    (0 below, 1 above).  When ``spectrum`` is given, its exact power at
    ``epsilon`` is attached for the containment check.
    """
    _check_model(model)
    eps = check_alpha(epsilon, "epsilon")
    lo_eps = eps + model.d_l
    hi_eps = eps - model.d_h
    lower_deg = lo_eps >= 1.0
    upper_deg = hi_eps <= 0.0
    lower = 0.0 if lower_deg else gaussian_beta(model, lo_eps).beta
    upper = 1.0 if upper_deg else gaussian_beta(model, hi_eps).beta
    exact = None if spectrum is None else beta_exact(spectrum, 1.0 - eps).beta
    return SandwichResult(lower, upper, eps, lower_deg, upper_deg, exact)


def moments(spectrum: LLRSpectrum) -> tuple[float, float, float]:
    """Mean, variance and third absolute central moment of L under P."""
    if spectrum.p_inf > 0:
        raise InfiniteLlr(f"L = +inf with P-probability {spectrum.p_inf!r}")
    p, z = spectrum.p, spectrum.z
    D = math.fsum(p * z)
    dev = z - D
    return D, math.fsum(p * dev**2), math.fsum(p * np.abs(dev) ** 3)


def matched_model(spectrum: LLRSpectrum, n: int = 1) -> GaussianModel:
    """Moment-matched surrogate for the n-fold product of ``spectrum``."""
    D, V, _ = moments(spectrum)
    return GaussianModel(n * D, n * V)


def berry_esseen_gap(spectrum: LLRSpectrum, n: int, C: float = BERRY_ESSEEN_C) -> float:
    """Uniform CDF gap ``C T / (V^{3/2} sqrt(n))`` for the n-fold i.i.d. sum.

    Valid as both ``d_l`` and ``d_h`` against the moment-matched surrogate.
    A degenerate L (V = 0, hence T = 0) gives gap 0.
    """
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n!r}")
    D, V, T = moments(spectrum)
    if V < 0:
        raise DegenerateVariance(f"variance must be nonnegative, got {V!r}")
    if V == 0:
        return 0.0
    return C * T / (V**1.5 * math.sqrt(n))


def measured_gaps(F: StepCdf, model: GaussianModel) -> GaussianModel:
    """``model`` with its gaps replaced by the exact sup-distance to ``F``."""
    d_l, d_h = sup_gap(F, model)
    return model.with_gaps(d_l, d_h)
