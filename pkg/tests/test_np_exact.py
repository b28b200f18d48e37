import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bhpower import errors
from bhpower.core import iid_product, llr_spectrum, pair_from_arrays
from bhpower.np_exact import P_INF_GROUP, beta_at_log_epsilon, beta_exact, np_test, replay

from oracles import knapsack_beta, lp_beta, random_pair

ALPHAS = [k / 32 for k in range(33)]


def spectrum_of(p, q):
    return llr_spectrum(pair_from_arrays(p, q))


class TestExamples:
    def test_zero_budget(self, worked):
        t = np_test(worked, 0.0)
        assert t.delta == 0 and t.achieved_alpha == 0
        assert beta_exact(worked, 0.0).beta == 0

    def test_worked_boundary(self, worked):
        t = np_test(worked, 0.5)
        assert t.lam == pytest.approx(0.2, rel=1e-15)
        assert t.delta == 1.0
        assert t.boundary == worked.size - 1
        assert beta_exact(worked, 0.5).beta == pytest.approx(0.1, abs=1e-15)

    def test_full_budget(self, worked):
        r = beta_exact(worked, 1.0)
        assert r.beta == pytest.approx(1.0, abs=1e-15)
        assert r.test.achieved_alpha == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_equal_hypotheses(self, alpha):
        s = spectrum_of([0.2, 0.8], [0.2, 0.8])
        assert beta_exact(s, alpha).beta == pytest.approx(alpha, abs=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
    def test_disjoint(self, alpha):
        s = spectrum_of([0.5, 0.5, 0.0], [0.0, 0.0, 1.0])
        r = beta_exact(s, alpha)
        assert r.beta == 0.0 and r.log_beta == -math.inf
        assert r.test.boundary == P_INF_GROUP

    def test_q_orphan_never_accepted(self):
        s = spectrum_of([0.5, 0.5, 0.0], [0.25, 0.25, 0.5])
        assert beta_exact(s, 1.0).beta == pytest.approx(0.5, abs=1e-15)

    def test_alpha_out_of_range(self, worked):
        for a in (-1e-9, 1.0 + 1e-9, math.nan):
            with pytest.raises(errors.AlphaOutOfRange):
                beta_exact(worked, a)


class TestProperties:
    @pytest.mark.parametrize("seed", range(8))
    def test_monotone_convex_bounded(self, seed):
        rng = np.random.default_rng(seed)
        s = spectrum_of(*random_pair(rng, 9, zero_frac=0.2))
        grid = np.linspace(0, 1, 201)
        b = np.array([beta_exact(s, a).beta for a in grid])
        assert np.all((b >= 0) & (b <= 1))
        assert np.all(np.diff(b) >= -1e-15)
        assert np.all(b[:-2] + b[2:] - 2 * b[1:-1] >= -1e-12)
        assert np.all(b <= b[-1] + 1e-15)

    @pytest.mark.parametrize("seed", range(25))
    def test_knapsack_and_lp_oracles(self, seed):
        rng = np.random.default_rng(1000 + seed)
        k = int(rng.integers(1, 13))
        p, q = random_pair(rng, k, grid=64)
        s = spectrum_of(p, q)
        for a in ALPHAS:
            beta = beta_exact(s, a).beta
            assert beta == pytest.approx(knapsack_beta(p, q, a), abs=1e-12)
            if a in (0.25, 0.5, 0.75):
                assert beta == pytest.approx(lp_beta(p, q, a), abs=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_replay(self, seed):
        rng = np.random.default_rng(seed)
        s = spectrum_of(*random_pair(rng, 10, zero_frac=0.3))
        for a in np.linspace(0, 1, 41):
            r = beta_exact(s, a)
            assert 0 <= r.test.delta <= 1
            assert r.test.achieved_alpha == pytest.approx(a, abs=1e-12)
            alpha, beta = replay(s, r.test)
            assert alpha == pytest.approx(a, abs=1e-12)
            assert beta == pytest.approx(r.beta, abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.floats(0, 1))
    def test_knapsack_property(self, seed, alpha):
        rng = np.random.default_rng(seed)
        p, q = random_pair(rng, 6, zero_frac=0.3)
        assert beta_exact(spectrum_of(p, q), alpha).beta == pytest.approx(
            knapsack_beta(p, q, alpha), abs=1e-12)


class TestLogEpsilonRoute:
    @pytest.mark.parametrize("seed", range(6))
    def test_agrees_with_accept_side(self, seed):
        rng = np.random.default_rng(seed)
        s = spectrum_of(*random_pair(rng, 8, zero_frac=0.2))
        for eps in (1e-3, 0.05, 0.3, 0.7, 0.99):
            a = beta_exact(s, 1 - eps).beta
            b = beta_at_log_epsilon(s, math.log(eps)).beta
            assert b == pytest.approx(a, abs=1e-12)

    def test_tiny_budget_on_long_block(self, bernoulli):
        # at eps = e^{-n r} the accept-side budget 1 - eps rounds to 1
        n, r = 256, 0.05
        s = iid_product(bernoulli, n)
        res = beta_at_log_epsilon(s, -n * r)
        assert 0 < res.beta < 1
        # rejecting a sliver more than eps can only lower the power
        res2 = beta_at_log_epsilon(s, -n * r + 1e-3)
        assert res2.beta <= res.beta

    def test_budget_above_finite_mass(self):
        s = spectrum_of([0.5, 0.5], [0.0, 1.0])
        assert beta_at_log_epsilon(s, math.log(0.75)).beta == 0.0

    def test_positive_log_epsilon(self, worked):
        with pytest.raises(errors.AlphaOutOfRange):
            beta_at_log_epsilon(worked, 0.1)
