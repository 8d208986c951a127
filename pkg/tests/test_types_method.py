import math

import numpy as np
import pytest

from renyilab.prob import FiniteDistribution, GuardExceededError
from renyilab.types_method import (
    ConditionalTypeVector,
    TypeVector,
    count_types,
    enumerate_conditional_types,
    enumerate_types,
    joint_sequence_type,
    log_multinomial,
    nearest_type,
    sequence_type,
    type_statistics,
)


class TestEnumeration:
    def test_small_binary(self):
        got = [t.counts for t in enumerate_types(2, 2)]
        assert got == [(0, 2), (1, 1), (2, 0)]

    def test_point_masses(self):
        got = [t.counts for t in enumerate_types(1, 3)]
        assert got == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]

    def test_count_formula(self):
        assert count_types(4, 2) == 5
        assert len(list(enumerate_types(4, 2))) == 5
        assert len(list(enumerate_types(5, 3))) == count_types(5, 3)

    def test_lexicographic_and_deterministic(self):
        a = [t.counts for t in enumerate_types(5, 3)]
        assert a == sorted(a)
        assert a == [t.counts for t in enumerate_types(5, 3)]

    def test_guard(self):
        with pytest.raises(GuardExceededError):
            list(enumerate_types(10**6, 6))

    def test_conditional_rows_lazy_and_consistent(self):
        tx = TypeVector(3, (2, 1))
        cts = list(enumerate_conditional_types(tx, 2))
        assert len(cts) == count_types(2, 2) * count_types(1, 2)
        assert all(ct.matches_input(tx) for ct in cts)


class TestStatistics:
    def test_point_mass_type(self):
        P = FiniteDistribution([0.2, 0.8])
        st = type_statistics(TypeVector(4, (0, 4)), P)
        assert st.log_class_size == pytest.approx(0.0, abs=1e-14)
        assert st.log_prob == pytest.approx(4 * math.log(0.8), abs=1e-13)

    def test_binomial_count(self):
        st = type_statistics(TypeVector(4, (2, 2)), FiniteDistribution.uniform(2))
        assert math.exp(st.log_class_size) == pytest.approx(6.0, abs=1e-10)
        assert st.entropy == pytest.approx(math.log(2), abs=1e-14)

    def test_counts_sum_to_power(self):
        for n, k in ((6, 2), (5, 3)):
            total = sum(math.exp(type_statistics(t, FiniteDistribution.uniform(k)).log_class_size)
                        for t in enumerate_types(n, k))
            assert total == pytest.approx(k**n, rel=1e-10)

    def test_probability_partition(self):
        P = FiniteDistribution([0.2, 0.5, 0.3])
        mass = sum(math.exp(type_statistics(t, P).log_prob) for t in enumerate_types(7, 3))
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_zero_mass_symbol(self):
        st = type_statistics(TypeVector(3, (2, 1)), FiniteDistribution([1.0, 0.0]))
        assert st.log_prob == -math.inf

    def test_log_multinomial_exact(self):
        assert log_multinomial((2, 2)) == pytest.approx(math.log(6), abs=1e-12)
        assert log_multinomial((3, 1, 1)) == pytest.approx(math.log(20), abs=1e-12)


class TestSequenceTypes:
    def test_examples(self):
        assert sequence_type([0, 0, 1, 1]).counts == (2, 2)
        assert sequence_type([0, 0, 0]).counts == (3,)
        assert sequence_type([2, 0, 1], 3).counts == (1, 1, 1)

    def test_symbol_out_of_range(self):
        with pytest.raises(ValueError):
            sequence_type([0, 3], alphabet_size=2)

    def test_joint_type(self):
        ct = joint_sequence_type([0, 1, 0], [1, 1, 0], 2, 2)
        assert ct.counts == ((1, 1), (0, 1))
        assert ct.matches_input(sequence_type([0, 1, 0]))


class TestNearestType:
    def test_already_a_type(self):
        T = nearest_type(FiniteDistribution([1 / 3, 2 / 3]), 3)
        assert T.counts == (1, 2)

    def test_tie_break(self):
        assert nearest_type(FiniteDistribution([0.5, 0.5]), 3).counts == (1, 2)

    def test_error_bound_random(self):
        rng = np.random.default_rng(17)
        for n in range(1, 51):
            for _ in range(20):
                k = int(rng.integers(2, 6))
                p = rng.dirichlet(np.ones(k))
                T = nearest_type(FiniteDistribution(p), n)
                err = np.max(np.abs(p - np.asarray(T.counts) / n))
                assert err <= k / (2 * n) + 1e-12


class TestValidation:
    def test_type_vector_checks_total(self):
        with pytest.raises(ValueError):
            TypeVector(3, (1, 1))
        with pytest.raises(ValueError):
            TypeVector(2, (-1, 3))

    def test_conditional_total(self):
        with pytest.raises(ValueError):
            ConditionalTypeVector(3, ((1, 1), (0, 0)))
