"""Large-deviation evaluation of the power for i.i.d. blocks.

With ``F_n(n z) ~ exp(-n E_1(z))`` (``E_1`` the Legendre transform of the
cumulant generating function of L under P), the CDF formula becomes

    beta(1 - e^{-n r}) ~ max_R f_n(r, R),
    f_n(r, R) = n int_R^inf e^{-n E_1(z)} e^{-n z} dz - e^{-n (R + r)},

and ``E2n(r) = -(1/n) log max_R f_n(r, R)``.  The maximizer solves
``E_1(R) = r`` on the branch ``R < D``.  Multiplicative slack between ``F_n``
and ``exp(-n E_1)`` turns into the two-sided bound

    E2n(r + d_h) - d_h <= E_n(r) <= E2n(r - d_l) + d_l.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline
from scipy.special import log_ndtr, logsumexp

from ._search import golden_max
from .core import LLRSpectrum, cdf, iid_product
from .errors import InfiniteLlr, OutOfRange
from .np_exact import beta_at_log_epsilon

T_TOL = 1e-13
R_TOL = 1e-12
GRID_POINTS = 4001
QUAD_RTOL = 1e-10


def _require_finite(spectrum: LLRSpectrum) -> None:
    if spectrum.p_inf > 0:
        raise InfiniteLlr(f"L = +inf with P-probability {spectrum.p_inf!r}")
    if spectrum.size == 0:
        raise InfiniteLlr("spectrum has no finite atoms")


def cgf(spectrum: LLRSpectrum, t: float) -> float:
    """``log E_P[e^{t L}]``."""
    _require_finite(spectrum)
    return float(logsumexp(spectrum.log_p + t * spectrum.z))


def _tilted(spectrum: LLRSpectrum, t: float) -> tuple[float, float, float]:
    """cgf and its first two derivatives at ``t``."""
    a = spectrum.log_p + t * spectrum.z
    c = float(logsumexp(a))
    w = np.exp(a - c)
    mean = float(np.dot(w, spectrum.z))
    var = float(np.dot(w, (spectrum.z - mean) ** 2))
    return c, mean, var


def _solve_t(spectrum: LLRSpectrum, z: float) -> float:
    """The ``t <= 0`` with tilted mean ``z`` (needs ``z_min < z < D``)."""
    lo = -1.0
    while _tilted(spectrum, lo)[1] > z:
        lo *= 2.0
        if lo < -1e12:
            raise OutOfRange(f"z = {z!r} is too close to the bottom of the support")
    return optimize.brentq(lambda t: _tilted(spectrum, t)[1] - z, lo, 0.0,
                           xtol=T_TOL, rtol=4 * np.finfo(float).eps)


def rate_function(spectrum: LLRSpectrum, z: float) -> float:
    """``E_1(z) = sup_{t <= 0} (t z - cgf(t))``; ``+inf`` below the support.

    The supremum is found as the root of the concave objective's derivative
    (tilted mean equals ``z``).
    """
    _require_finite(spectrum)
    z_min = float(spectrum.z[0])
    D = float(np.dot(spectrum.p, spectrum.z))
    if z < z_min:
        return math.inf
    if z == z_min:
        return -float(spectrum.log_p[0])
    if z >= D:
        return 0.0
    t = _solve_t(spectrum, z)
    return t * z - cgf(spectrum, t)


@dataclass(frozen=True)
class RateModel:
    """Rate function of one spectrum, tabulated once at construction.

    The table holds exact ``(z, E_1(z), E_1'(z) = t)`` triples over a grid in
    the tilt parameter; between grid points ``E_1`` is a cubic Hermite
    interpolant.  Construction is eager, so instances are read-only and safe
    to share.
    """

    spectrum: LLRSpectrum
    D: float = field(init=False)
    z_min: float = field(init=False)
    z_Q: float = field(init=False)
    _spline: CubicHermiteSpline = field(init=False, repr=False)
    _grid_lo: float = field(init=False, repr=False)

    def __post_init__(self):
        s = self.spectrum
        _require_finite(s)
        z_min = float(s.z[0])
        D = float(np.dot(s.p, s.z))
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "z_min", z_min)
        object.__setattr__(self, "z_Q", _tilted(s, -1.0)[1])
        if D - z_min <= 0:
            object.__setattr__(self, "_spline", None)
            object.__setattr__(self, "_grid_lo", D)
            return
        # push the tilt until the tilted mean is within 1e-6 of the support bottom
        T = 1.0
        while _tilted(s, -T)[1] - z_min > 1e-6 * (D - z_min) and T < 1e6:
            T *= 2.0
        # denser near t = 0 where the curvature in z is mild, sinh-spaced overall
        u = np.linspace(0.0, 1.0, GRID_POINTS)
        ts = -T * np.sinh(6.0 * u) / np.sinh(6.0)
        ts = ts[::-1]
        rows = [_tilted(s, t) for t in ts]
        zs = np.array([r[1] for r in rows])
        Es = ts * zs - np.array([r[0] for r in rows])
        keep = np.concatenate(([True], np.diff(zs) > 0))
        spline = CubicHermiteSpline(zs[keep], np.maximum(Es[keep], 0.0), ts[keep])
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_grid_lo", float(zs[keep][0]))

    @property
    def sup_rate(self) -> float:
        """``E_1(z_min) = -log P{L = z_min}``, the largest finite rate."""
        return -float(self.spectrum.log_p[0])

    def cgf(self, t: float) -> float:
        return cgf(self.spectrum, t)

    def exact(self, z: float) -> float:
        return rate_function(self.spectrum, z)

    def __call__(self, z: float) -> float:
        if z >= self.D:
            return 0.0
        if z < self.z_min:
            return math.inf
        if z < self._grid_lo or self._spline is None:
            return rate_function(self.spectrum, z)
        return float(self._spline(z))

    def slope(self, z: float) -> float:
        """``E_1'(z)``, i.e. the optimal tilt at ``z``."""
        if z >= self.D:
            return 0.0
        if self._spline is not None and z >= self._grid_lo:
            return float(self._spline(z, 1))
        return _solve_t(self.spectrum, z)

    def curvature(self, z: float) -> float:
        """``E_1''(z) = 1 / cgf''(t)``."""
        if z >= self.D:
            return 0.0
        t = self.slope(z)
        return 1.0 / _tilted(self.spectrum, t)[2]


def rate_model(spectrum: LLRSpectrum) -> RateModel:
    return RateModel(spectrum)


@dataclass(frozen=True)
class FnValue:
    value: float
    log_value: float
    log_integral: float


def _log_integral_quadrature(rate: RateModel, R: float, n: int) -> float:
    """``log( n int_R^inf e^{-n (E_1(z) + z)} dz )``."""
    top = max(R, rate.D)
    log_tail = -n * top  # the E_1 = 0 stretch integrates in closed form
    a = max(R, rate.z_min)
    if a >= rate.D:
        return log_tail
    m = min(max(a, rate.z_Q), rate.D)
    phi_min = rate(m) + m

    def integrand(z):
        return math.exp(-n * (rate(z) + z - phi_min))

    points = [m] if a < m < rate.D else None
    val, _ = integrate.quad(integrand, a, rate.D, points=points, epsabs=0.0,
                            epsrel=QUAD_RTOL, limit=1000)
    if val <= 0:
        return log_tail
    log_body = math.log(n) - n * phi_min + math.log(val)
    return float(np.logaddexp(log_body, log_tail))


def _log_integral_laplace(rate: RateModel, R: float, n: int) -> float:
    """Second-order Laplace evaluation of the same integral.

    Expands ``phi = E_1(z) + z`` to second order at its minimizer over
    ``[R, inf)``: the interior point ``z_Q`` (where ``E_1' = -1``) when it lies
    right of ``R``, otherwise the boundary ``R`` itself.  The truncated
    Gaussian integral is done exactly, so both regimes and the transition
    between them share one formula.
    """
    a = max(R, rate.z_min)
    if a >= rate.D:
        return -n * a
    m = max(a, rate.z_Q)
    slope = rate.slope(m) + 1.0
    curv = rate.curvature(m)
    lower = a - m
    # int_lower^inf exp(-n (slope u + curv u^2 / 2)) du
    s = math.sqrt(n * curv)
    log_gauss = (n * slope * slope / (2.0 * curv) + 0.5 * math.log(2.0 * math.pi / (n * curv))
                 + float(log_ndtr(-(s * (lower + slope / curv)))))
    return math.log(n) - n * (rate(m) + m) + log_gauss


def f_n(rate: RateModel, r: float, R: float, n: int, method: str = "quadrature") -> FnValue:
    """``f_n(r, R)`` in linear and log form (``log_value = -inf`` when ``f <= 0``)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if method == "quadrature":
        log_I = _log_integral_quadrature(rate, R, n)
    elif method == "laplace":
        log_I = _log_integral_laplace(rate, R, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    log_sub = -n * (R + r)
    if log_sub < log_I:
        log_value = log_I + math.log1p(-math.exp(log_sub - log_I))
        return FnValue(math.exp(log_value), log_value, log_I)
    value = math.exp(log_I) - math.exp(log_sub) if max(log_I, log_sub) < 700 else -math.inf
    return FnValue(value, -math.inf, log_I)


def optimal_R(rate: RateModel, r: float) -> float:
    """Root of ``E_1(R) = r`` on the branch ``R <= D``."""
    if r < 0:
        raise OutOfRange(f"r must be >= 0, got {r!r}")
    if r == 0:
        return rate.D
    if r >= rate.sup_rate:
        raise OutOfRange(f"r = {r!r} is not below sup E_1 = {rate.sup_rate!r}")
    return optimize.brentq(lambda z: rate.exact(z) - r, rate.z_min, rate.D,
                           xtol=R_TOL, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class ExponentResult:
    r: float
    n: int
    E2n: float
    R_star: float
    method: str = "quadrature"
    En_exact: float | None = None


def E2n(rate: RateModel, r: float, n: int, method: str = "quadrature") -> ExponentResult:
    """``-(1/n) log max_R f_n(r, R)``.

    For ``r <= 0`` the maximum is not positive (the budget ``e^{-n r}`` is at
    least 1, so nothing need be accepted) and the exponent is ``+inf``.
    """
    if r <= 0:
        return ExponentResult(r, n, math.inf, rate.D, method)
    R0 = rate.z_min if r >= rate.sup_rate else optimal_R(rate, r)
    base = f_n(rate, r, R0, n, method)
    scale = base.log_integral

    def scaled(R):
        v = f_n(rate, r, R, n, method)
        # f / exp(scale), kept finite where f <= 0
        return math.exp(v.log_integral - scale) - math.exp(min(-n * (R + r) - scale, 700.0))

    width = 0.02 * (rate.D - rate.z_min)
    lo, hi = max(rate.z_min, R0 - width), min(rate.D, R0 + width)
    R_best, s_best = golden_max(scaled, lo, hi, tol=1e-10)
    s0 = scaled(R0)
    if s0 >= s_best:
        R_best, s_best = R0, s0
    if s_best <= 0:
        return ExponentResult(r, n, math.inf, R_best, method)
    log_max = scale + math.log(s_best)
    return ExponentResult(r, n, -log_max / n, R_best, method)


def En_exact(spectrum: LLRSpectrum, r: float, n: int, cap: int | None = None) -> float:
    """``-(1/n) log beta(1 - e^{-n r})`` on the exact n-fold product spectrum."""
    if r < 0:
        raise OutOfRange(f"r must be >= 0, got {r!r}")
    product = iid_product(spectrum, n, cap)
    res = beta_at_log_epsilon(product, -n * r)
    return math.inf if res.log_beta == -math.inf else -res.log_beta / n


def measured_deltas(rate: RateModel, n: int, product: LLRSpectrum | None = None) -> tuple[float, float]:
    """Smallest ``(d_l, d_h)`` with ``e^{-n E_1 - n d_l} <= F_n(n z) <= e^{-n E_1 + n d_h}``.

    On each flat of ``F_n`` the lower slack peaks just left of the next jump
    and the upper slack at the jump itself, so scanning jumps suffices.  The
    upper side is never below 0 because ``F_n -> 1`` while ``E_1 = 0`` to the
    right of ``D``.
    """
    product = iid_product(rate.spectrum, n) if product is None else product
    F = cdf(product)
    u = product.z / n
    E = np.array([rate.exact(x) for x in u])
    log_F = F.log_values
    d_h = max(0.0, float(np.max(log_F / n + E)))
    left_of_next = np.append(E[1:], 0.0)
    d_l = max(0.0, float(np.max(-log_F / n - left_of_next)))
    return d_l, d_h


def exponent_sandwich(spectrum: LLRSpectrum, r: float, n: int, method: str = "quadrature",
                      rate: RateModel | None = None) -> dict:
    """Exact exponent, the measured slacks and both sides of the bound."""
    rate = RateModel(spectrum) if rate is None else rate
    product = iid_product(spectrum, n)
    d_l, d_h = measured_deltas(rate, n, product)
    exact = beta_at_log_epsilon(product, -n * r)
    En = math.inf if exact.log_beta == -math.inf else -exact.log_beta / n
    lower = E2n(rate, r + d_h, n, method).E2n - d_h
    upper = E2n(rate, r - d_l, n, method).E2n + d_l
    return {"En_exact": En, "delta_l": d_l, "delta_h": d_h, "lower": lower, "upper": upper}
