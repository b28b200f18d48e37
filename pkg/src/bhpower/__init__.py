"""Exact and approximate power of binary hypothesis tests on finite alphabets."""
from .core import (
    DiscretePair,
    LLRSpectrum,
    StepCdf,
    cdf,
    convolve,
    evaluate,
    iid_product,
    llr_spectrum,
    load_pair,
    pair_from_arrays,
    sup_gap,
    validate_pair,
)
from .gaussian import GaussianModel, gaussian_beta, sandwich
from .largedev import E2n, En_exact, RateModel
from .np_exact import OptimalTest, PowerResult, beta_exact, np_test
from .renyi import beta_bound, g_s, renyi_divergence
from .variational import beta_variational_cdf, beta_variational_lambda

__version__ = "0.1.0"
