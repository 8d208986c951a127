import math

import numpy as np
import pytest

from renyilab.codesim import (
    Codebook,
    EnsembleSpec,
    code_output_divergence,
    ensemble_moment_exact,
    exponent_estimate,
    packing_covering_stats,
    random_subset,
    sample_codebook,
    words_to_indices,
    _bsc_output_distribution,
    _log_output_distribution,
)
from renyilab.hypercube import bonami_beckner_apply, walsh_hadamard, xor_convolve
from renyilab.prob import Channel, FiniteDistribution, GuardExceededError, JointDistribution
from renyilab.resolvability import iid_exponent
from renyilab.types_method import ConditionalTypeVector, TypeVector, sequence_type

UNIF2 = FiniteDistribution.uniform(2)
LN2 = math.log(2.0)


class TestHypercube:
    def test_wht_involution(self):
        rng = np.random.default_rng(0)
        v = rng.random(16)
        assert np.allclose(walsh_hadamard(walsh_hadamard(v)) / 16, v)

    def test_xor_convolve_direct(self):
        rng = np.random.default_rng(1)
        a, b = rng.random(8), rng.random(8)
        direct = np.array([sum(a[z] * b[x ^ z] for z in range(8)) for x in range(8)])
        assert np.allclose(xor_convolve(a, b), direct)

    def test_bonami_beckner_single_coordinate(self):
        eps = 0.2
        f = np.array([1.0, 0.0])
        assert np.allclose(bonami_beckner_apply(f, eps), [0.8, 0.2])


class TestSampling:
    def test_iid_determinism_and_distribution(self):
        spec = EnsembleSpec(kind="iid", n=5, rate=0.6, QX=FiniteDistribution([0.2, 0.8]))
        a = sample_codebook(spec, seed=3, trial=7)
        b = sample_codebook(spec, seed=3, trial=7)
        assert np.array_equal(a.words, b.words)
        c = sample_codebook(spec, seed=3, trial=8)
        assert not np.array_equal(a.words, c.words)
        big = sample_codebook(EnsembleSpec(kind="iid", n=2000, rate=0.002,
                                           QX=FiniteDistribution([0.2, 0.8])), seed=0)
        frac = big.words.mean()
        assert abs(frac - 0.8) < 0.02

    def test_constant_composition_invariant(self):
        spec = EnsembleSpec(kind="constant_composition", n=4, rate=0.5, TX=TypeVector(4, (2, 2)))
        cb = sample_codebook(spec, seed=1)
        for w in cb.words:
            assert sequence_type(w, 2).counts == (2, 2)

    def test_typical_membership(self):
        spec = EnsembleSpec(kind="typical", n=20, rate=0.3, QX=UNIF2, delta=0.2)
        cb = sample_codebook(spec, seed=5)
        for w in cb.words:
            frac = w.mean()
            assert abs(frac - 0.5) <= 0.2 * 0.5 + 1e-12

    def test_typical_empty_raises(self):
        with pytest.raises(GuardExceededError):
            sample_codebook(EnsembleSpec(kind="typical", n=3, rate=0.4,
                                         QX=FiniteDistribution([0.5, 0.5]), delta=0.01), seed=0)

    def test_composite_structure(self):
        spec = EnsembleSpec(kind="composite", n=8, rate=0.8, QX=UNIF2, delta=0.2)
        cb = sample_codebook(spec, seed=2)
        assert cb.M == spec.M
        assert cb.meta["typical_words"] >= 1
        assert cb.meta.get("spread_types", 0) >= 1

    def test_m_and_effective_rate(self):
        spec = EnsembleSpec(kind="iid", n=6, rate=0.5, QX=UNIF2)
        assert spec.M == math.ceil(math.exp(3.0) - 1e-9)
        assert spec.effective_rate == pytest.approx(math.log(spec.M) / 6)


class TestOutputDivergence:
    def test_fast_path_matches_general(self):
        spec = EnsembleSpec(kind="iid", n=6, rate=0.5, QX=FiniteDistribution([0.3, 0.7]))
        cb = sample_codebook(spec, seed=11)
        W = Channel.bsc(0.23)
        fast = _bsc_output_distribution(cb, 0.23)
        general = np.exp(_log_output_distribution(cb, W))
        assert np.allclose(fast, general, atol=1e-14)

    def test_full_cube_codebook_uniform_output(self):
        words = np.array([[b >> 1 & 1, b & 1] for b in range(4)])
        cb = Codebook(n=2, words=words, ensemble="manual", seed=0)
        d = code_output_divergence(cb, Channel.bsc(0.2), UNIF2, 2.0)
        assert d == pytest.approx(0.0, abs=1e-12)

    def test_single_codeword_tensor_row(self):
        cb = Codebook(n=3, words=np.array([[0, 1, 0]]), ensemble="manual", seed=0)
        W = Channel.bsc(0.2)
        d = code_output_divergence(cb, W, UNIF2, 2.0)
        # product structure: 3x the single-letter divergence of a row
        from renyilab.prob import renyi_divergence
        d1 = renyi_divergence(W.row(0), UNIF2, 2.0)
        assert d == pytest.approx(3 * d1, abs=1e-12)

    def test_balanced_pair_symmetry(self):
        cb = Codebook(n=1, words=np.array([[0], [1]]), ensemble="manual", seed=0)
        d = code_output_divergence(cb, Channel.bsc(0.2), UNIF2, 2.0)
        assert d == pytest.approx(0.0, abs=1e-14)

    def test_reverse_direction(self):
        cb = Codebook(n=2, words=np.array([[0, 0]]), ensemble="manual", seed=0)
        d = code_output_divergence(cb, Channel.bsc(0.2), UNIF2, 2.0, direction="reverse")
        assert d > 0

    def test_multiset_multiplicity(self):
        # repeated codewords weight the mixture
        cb1 = Codebook(n=1, words=np.array([[0], [0], [1]]), ensemble="m", seed=0)
        q = _bsc_output_distribution(cb1, 0.1)
        want = (2 * np.array([0.9, 0.1]) + np.array([0.1, 0.9])) / 3
        assert np.allclose(q, want)

    def test_guard(self):
        cb = Codebook(n=30, words=np.zeros((1, 30), dtype=int), ensemble="m", seed=0)
        with pytest.raises(GuardExceededError):
            code_output_divergence(cb, Channel.bsc(0.2), UNIF2, 2.0)


class TestEnsembleMoment:
    def test_single_codeword(self):
        from renyilab.prob import renyi_divergence
        QX = FiniteDistribution([0.3, 0.7])
        W = Channel.bsc(0.1)
        got = ensemble_moment_exact(QX, W, UNIF2, 1, 3.0)
        # M=1: E = sum_x QX(x) e^{2 D_3(W_x||P)}: rows are symmetric here
        want = math.log(sum(QX.atoms[x] * sum(W.rows[x] ** 3 * UNIF2.atoms ** (-2))
                            for x in range(2)))
        assert got == pytest.approx(want, abs=1e-12)

    def test_independent_channel(self):
        W = Channel(np.array([[0.5, 0.5], [0.5, 0.5]]))
        got = ensemble_moment_exact(UNIF2, W, UNIF2, 3, 2.0)
        assert got == pytest.approx(0.0, abs=1e-12)

    def test_hand_enumerated_four_codebooks(self):
        got = ensemble_moment_exact(UNIF2, Channel.bsc(0.2), UNIF2, 2, 2.0)
        assert got == pytest.approx(math.log(1.18), abs=1e-12)

    def test_guard(self):
        with pytest.raises(GuardExceededError):
            ensemble_moment_exact(UNIF2, Channel.bsc(0.1), UNIF2, 25, 2.0)


class TestExponentEstimate:
    def test_slope_tracks_prediction(self):
        W = Channel.bsc(0.2)
        joint = JointDistribution.dsbs(0.2)
        R = 0.95 * LN2
        pred = iid_exponent(joint, 2.0, R).exponent
        rep = exponent_estimate(W, UNIF2, UNIF2, R, range(6, 13), 2.0, trials=60, seed=9,
                                predicted=pred)
        assert not rep.degenerate
        assert rep.slope == pytest.approx(pred, rel=0.3)

    def test_degenerate_flag(self):
        W = Channel(np.array([[0.5, 0.5], [0.5, 0.5]]))  # independent: divergence 0
        rep = exponent_estimate(W, UNIF2, UNIF2, 0.5, [4, 5, 6], 2.0, trials=30, seed=1)
        assert rep.degenerate

    def test_no_decay_below_threshold(self):
        # R below D_q: moments stay bounded away from 1, slope near zero
        W = Channel.bsc(0.05)
        rep = exponent_estimate(W, UNIF2, UNIF2, 0.1 * LN2, [6, 8, 10], 2.0, trials=40, seed=2)
        per = [rep.per_n[n][0] for n in (6, 8, 10)]
        assert min(per) > 0.1  # divergence not vanishing
        if not math.isnan(rep.slope):
            assert rep.slope < 0.05

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            exponent_estimate(Channel.bsc(0.1), UNIF2, UNIF2, 0.5, [4], 2.0, trials=5, seed=0)


class TestPackingCovering:
    def test_whole_type_class_deterministic(self):
        # codebook = the whole type class makes phi deterministic
        n = 6
        txy = ConditionalTypeVector(n, ((2, 1), (1, 2)))
        R = math.log(math.comb(6, 3)) / n  # M = |T_TX| = 20
        rep = packing_covering_stats(txy, R, 0.05, trials=3, seed=4)
        assert rep.M == 20
        # E[phi] = M |T_{X|Y}(y)| / |T_X| = |T_{X|Y}(y)| = C(3,1)*C(3,1) = 9
        assert rep.expected_phi == pytest.approx(9.0, rel=1e-12)
        # every permutation draw is a member of the class; phi varies by draw
        # multiplicity but its mean matches exactly
        assert rep.empirical_mean_phi == pytest.approx(9.0, abs=1.0)

    def test_mean_matches_formula(self):
        n = 10
        txy = ConditionalTypeVector(n, ((4, 1), (1, 4)))
        rep = packing_covering_stats(txy, 0.5, 0.05, trials=40, seed=5)
        # E over trials and y of phi should sit within 3 standard errors
        se = math.sqrt(rep.expected_phi / (40 * 1))
        assert abs(rep.empirical_mean_phi - rep.expected_phi) <= 4 * se + 0.3

    def test_regimes(self):
        n = 8
        prod = ConditionalTypeVector(n, ((2, 2), (2, 2)))
        rep = packing_covering_stats(prod, 0.5, 0.05, trials=10, seed=6)
        assert rep.regime == "covering"
        dep = ConditionalTypeVector(n, ((3, 1), (1, 3)))
        rep2 = packing_covering_stats(dep, 0.1, 0.02, trials=10, seed=6)
        assert rep2.regime == "packing"


class TestRandomSubset:
    def test_extremes(self):
        full = random_subset(4, 4.0, seed=0)
        assert full.size == 16 and np.array_equal(full, np.arange(16))
        single = random_subset(4, 0.0, seed=0)
        assert single.size == 1

    def test_determinism_and_uniqueness(self):
        a = random_subset(10, 6.0, seed=3)
        b = random_subset(10, 6.0, seed=3)
        assert np.array_equal(a, b)
        assert a.size == 64 == np.unique(a).size

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            random_subset(4, 5.0, seed=0)

    def test_plugin_size_exponent(self):
        from renyilab.prob import binary_renyi
        n = 14
        log_size = math.ceil(n * (1 - binary_renyi(0.1, 2.0).entropy_bits))
        idx = random_subset(n, float(log_size), seed=0)
        assert idx.size == 2**10


class TestIndices:
    def test_row_major_order(self):
        words = np.array([[1, 0, 1]])
        assert words_to_indices(words, 2)[0] == 5
        words3 = np.array([[2, 1]])
        assert words_to_indices(words3, 3)[0] == 7
