import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bhpower import errors
from bhpower.core import (
    cdf,
    convolve,
    dump_pair_csv,
    dump_pair_json,
    evaluate,
    iid_product,
    InputFormatError,
    llr_spectrum,
    load_pair,
    pair_from_arrays,
    parse_csv,
    parse_json,
    sup_gap,
    validate_pair,
)
from bhpower.gaussian import GaussianModel

from oracles import llr_cdf, product_pair, random_pair


def spectrum_of(p, q):
    return llr_spectrum(pair_from_arrays(p, q))


@st.composite
def pairs(draw, max_k=8):
    k = draw(st.integers(1, max_k))
    weights = st.lists(st.integers(0, 20), min_size=k, max_size=k).filter(lambda w: sum(w) > 0)
    wp, wq = draw(weights), draw(weights)
    return [w / sum(wp) for w in wp], [w / sum(wq) for w in wq]


class TestValidatePair:
    def test_well_formed(self):
        pair = validate_pair(["a", "b"], [0.5, 0.5], [0.9, 0.1])
        assert pair.support == ("a", "b")
        assert pair.q.tolist() == [0.9, 0.1]

    def test_q_not_normalized(self):
        with pytest.raises(errors.NotNormalized):
            validate_pair(["a"], [1.0], [0.7])

    def test_disjoint_supports_are_legal(self):
        pair = validate_pair(["a", "b"], [1.0, 0.0], [0.0, 1.0])
        assert len(pair) == 2

    @pytest.mark.parametrize(
        "support, p, q, exc",
        [
            ([], [], [], errors.EmptySupport),
            (["a", "b"], [0.5, 0.5], [1.0], errors.LengthMismatch),
            (["a", "b"], [1.5, -0.5], [0.5, 0.5], errors.NegativeMass),
            (["a", "a"], [0.5, 0.5], [0.5, 0.5], errors.DuplicateLabel),
            (["a", "b"], [0.5, 0.5 + 2e-9], [0.5, 0.5], errors.NotNormalized),
        ],
    )
    def test_errors(self, support, p, q, exc):
        with pytest.raises(exc):
            validate_pair(support, p, q)

    def test_small_drift_is_renormalized(self):
        pair = validate_pair(["a", "b"], [0.5, 0.5 + 5e-10], [0.5, 0.5])
        assert abs(math.fsum(pair.p) - 1.0) <= 1e-12


class TestSpectrum:
    def test_worked_atoms(self):
        s = spectrum_of([0.5, 0.5], [0.9, 0.1])
        assert s.z.tolist() == pytest.approx([math.log(5 / 9), math.log(5)], abs=1e-15)
        assert s.p.tolist() == pytest.approx([0.5, 0.5], abs=1e-15)
        assert s.p_inf == 0 and s.q_orphan == 0

    def test_identical_hypotheses(self):
        s = spectrum_of([0.5, 0.5], [0.5, 0.5])
        assert s.atoms() == [(0.0, 1.0)]

    def test_disjoint(self):
        s = spectrum_of([1.0, 0.0], [0.0, 1.0])
        assert s.size == 0 and s.p_inf == 1.0 and s.q_orphan == 1.0

    def test_merges_equal_ratios(self):
        s = spectrum_of([0.2, 0.4, 0.4], [0.1, 0.2, 0.7])
        assert s.size == 2
        assert s.p[1] == pytest.approx(0.6, abs=1e-15)

    @given(pairs())
    def test_normalizations(self, pq):
        s = spectrum_of(*pq)
        assert abs(s.finite_mass() + s.p_inf - 1) <= 1e-12
        assert abs(s.q_normalization() - 1) <= 1e-9
        assert np.all(np.diff(s.z) > 0) and np.all(s.p > 0)

    @given(pairs(), st.randoms())
    def test_permutation_invariance(self, pq, rnd):
        p, q = pq
        order = list(range(len(p)))
        rnd.shuffle(order)
        a = spectrum_of(p, q)
        b = spectrum_of([p[i] for i in order], [q[i] for i in order])
        assert np.allclose(a.z, b.z, rtol=0, atol=1e-14)
        assert np.allclose(a.p, b.p, rtol=0, atol=1e-15)
        assert a.p_inf == pytest.approx(b.p_inf, abs=1e-15)
        assert a.q_orphan == pytest.approx(b.q_orphan, abs=1e-15)


class TestProduct:
    def test_n1_identity(self, worked):
        assert iid_product(worked, 1) is worked

    def test_two_atom_square(self, worked):
        s2 = iid_product(worked, 2)
        a, b = math.log(5 / 9), math.log(5)
        assert s2.z.tolist() == pytest.approx([2 * a, a + b, 2 * b], abs=1e-14)
        assert s2.p.tolist() == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)

    def test_equal_hypotheses_stay_single(self):
        s = spectrum_of([0.3, 0.7], [0.3, 0.7])
        for n in (2, 7, 50):
            assert iid_product(s, n).atoms() == [(0.0, pytest.approx(1.0, abs=1e-12))]

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        p, q = random_pair(rng, 3, zero_frac=0.25)
        n = 4
        s = iid_product(spectrum_of(p, q), n)
        P, Q = product_pair(p, q, n)
        ref = llr_spectrum(pair_from_arrays(P, Q))
        assert s.size == ref.size
        assert np.allclose(s.z, ref.z, rtol=1e-12, atol=1e-12)
        assert np.allclose(s.p, ref.p, rtol=1e-10, atol=1e-15)
        assert s.p_inf == pytest.approx(ref.p_inf, abs=1e-12)
        assert s.q_orphan == pytest.approx(ref.q_orphan, abs=1e-12)

    @pytest.mark.parametrize("n, m", [(1, 1), (2, 3), (5, 8), (13, 20)])
    def test_additivity(self, n, m):
        s = spectrum_of([0.2, 0.3, 0.5], [0.4, 0.4, 0.2])
        whole = iid_product(s, n + m)
        split = convolve(iid_product(s, n), iid_product(s, m))
        assert whole.size == split.size
        assert np.allclose(whole.z, split.z, rtol=0, atol=1e-12)
        assert np.allclose(whole.p, split.p, rtol=0, atol=1e-12)

    def test_type_count_bound(self):
        s = spectrum_of([0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1])
        assert iid_product(s, 10).size <= math.comb(10 + 3, 3)

    def test_large_block_stays_normalized(self, bernoulli):
        s = iid_product(bernoulli, 1024)
        assert s.size == 1025
        s.check()
        assert s.log_p[0] == pytest.approx(1024 * math.log(0.5), rel=1e-13)

    def test_atom_cap(self, monkeypatch):
        s = spectrum_of([0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1])
        with pytest.raises(errors.AtomExplosion):
            iid_product(s, 100, cap=1000)
        monkeypatch.setenv("BHT_ATOM_CAP", "50")
        with pytest.raises(errors.AtomExplosion):
            iid_product(s, 10)

    def test_rejects_bad_n(self, worked):
        with pytest.raises(ValueError):
            iid_product(worked, 0)


class TestCdf:
    def test_equal_hypotheses(self):
        F = cdf(spectrum_of([0.5, 0.5], [0.5, 0.5]))
        assert evaluate(F, -1e-300) == 0 and evaluate(F, 0.0) == 1.0

    def test_worked_value(self, worked):
        assert evaluate(cdf(worked), 0.0) == pytest.approx(0.5, abs=1e-15)

    @given(pairs())
    def test_far_left_is_zero(self, pq):
        assert evaluate(cdf(spectrum_of(*pq)), -1e9) == 0.0

    @given(pairs())
    def test_monotone_and_total(self, pq):
        s = spectrum_of(*pq)
        F = cdf(s)
        assert np.all(np.diff(F.values) >= 0)
        if s.size:
            assert F.values[-1] == pytest.approx(1 - s.p_inf, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_outcome_sum(self, seed):
        rng = np.random.default_rng(seed)
        p, q = random_pair(rng, 12, zero_frac=0.2)
        F = cdf(spectrum_of(p, q))
        for z in rng.normal(0, 2, size=40):
            assert evaluate(F, z) == pytest.approx(llr_cdf(p, q, z), abs=1e-12)


class TestSupGap:
    def test_point_mass_against_standard_normal(self):
        F = cdf(spectrum_of([0.5, 0.5], [0.5, 0.5]))
        d_l, d_h = sup_gap(F, GaussianModel(0.0, 1.0))
        assert d_l == pytest.approx(0.5, abs=1e-15)
        assert d_h == pytest.approx(0.5, abs=1e-15)

    def test_far_shifted_mean(self, worked):
        d_l, _ = sup_gap(cdf(worked), GaussianModel(0.0, 1.0))
        _, d_h = sup_gap(cdf(worked), GaussianModel(60.0, 1.0))
        assert d_h == pytest.approx(1.0, abs=1e-12)
        assert d_l < 1

    def test_mass_at_infinity_counts_on_the_left_side(self):
        s = spectrum_of([0.5, 0.3, 0.2], [0.5, 0.5, 0.0])
        d_l, _ = sup_gap(cdf(s), GaussianModel(0.0, 1.0))
        assert d_l >= 0.2

    @pytest.mark.parametrize("seed", range(4))
    def test_dominates_dense_scan(self, seed):
        from scipy.special import ndtr

        rng = np.random.default_rng(seed)
        s = spectrum_of(*random_pair(rng, 8))
        F = cdf(s)
        model = GaussianModel(float(rng.normal()), float(rng.uniform(0.3, 3)))
        d_l, d_h = sup_gap(F, model)
        grid = np.linspace(-15, 15, 200001)
        G = ndtr((grid - model.D) / math.sqrt(model.V))
        Fg = evaluate(F, grid)
        assert np.max(G - Fg) <= d_l + 1e-15
        assert np.max(Fg - G) <= d_h + 1e-15
        # the scan approaches the exact sup from below
        assert np.max(G - Fg) >= d_l - 1e-3
        assert np.max(Fg - G) >= d_h - 1e-3

    def test_degenerate_variance(self, worked):
        with pytest.raises(errors.DegenerateVariance):
            sup_gap(cdf(worked), GaussianModel(0.0, 0.0))


class TestFiles:
    def test_json_round_trip(self, tmp_path):
        pair = validate_pair(["x", "y", "z"], [0.2, 0.3, 0.5], [0.1, 0.1, 0.8])
        path = tmp_path / "pair.json"
        path.write_text(dump_pair_json(pair))
        back = load_pair(path)
        assert back.support == pair.support and back.p.tolist() == pair.p.tolist()

    def test_csv_round_trip(self, tmp_path):
        pair = validate_pair(["x", "y"], [0.25, 0.75], [0.6, 0.4])
        path = tmp_path / "pair.csv"
        path.write_text(dump_pair_csv(pair))
        back = load_pair(path)
        assert back.q.tolist() == [0.6, 0.4]

    def test_json_syntax_error_has_line(self):
        with pytest.raises(InputFormatError, match=r":3:"):
            parse_json('{"support": ["a"],\n "p": [1.0],\n "q": [1.0,]}')

    def test_csv_bad_number_has_line(self):
        with pytest.raises(InputFormatError, match=r":3:"):
            parse_csv("outcome,p,q\na,0.5,0.5\nb,zero,0.5\n")

    def test_csv_bad_header(self):
        with pytest.raises(InputFormatError, match="header"):
            parse_csv("name,p,q\na,1,1\n")

    def test_json_missing_key(self):
        with pytest.raises(InputFormatError):
            parse_json('{"support": ["a"], "p": [1.0]}')
