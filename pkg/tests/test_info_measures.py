"""Tests for entropies, divergences and information density."""

import math

import numpy as np
import pytest

from wiretap_workbench.exceptions import ValidationError
from wiretap_workbench.info_measures import (
    binary_divergence,
    binary_entropy,
    bits_to_json,
    conditional_entropy,
    entropy,
    information_density,
    information_density_matrix,
    information_density_sequence,
    mutual_information,
    relative_entropy,
    renyi_divergence,
    renyi_divergence_limit,
)
from wiretap_workbench.probability_core import (
    BINARY,
    JointPmf,
    SequenceIndex,
    bernoulli,
    binary_symmetric_channel,
    joint_from_channel,
    make_pmf,
)


class TestEntropy:
    def test_uniform(self, uniform_binary):
        assert entropy(uniform_binary) == pytest.approx(1.0, abs=1e-12)
        assert entropy(make_pmf([1, 1, 1, 1])) == pytest.approx(2.0, abs=1e-12)

    def test_point_mass(self):
        assert entropy(bernoulli(1.0)) == 0.0

    def test_binary_entropy_edges(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("x", [1e-6, 0.01, 0.1, 0.3, 0.5, 0.9, 1.0])
    def test_binary_entropy_upper_bound(self, x):
        assert binary_entropy(x) <= x * math.log2(math.e / x) + 1e-12

    def test_conditional_entropy(self, uniform_binary):
        joint = joint_from_channel(uniform_binary, binary_symmetric_channel(0.1))
        assert conditional_entropy(joint) == pytest.approx(binary_entropy(0.1), abs=1e-12)


class TestRelativeEntropy:
    def test_known_value(self):
        expected = 0.5 + 0.5 * math.log2(2.0 / 3.0)
        assert relative_entropy(bernoulli(0.5), bernoulli(0.25)) == pytest.approx(
            expected, abs=1e-12
        )

    def test_self_divergence_zero(self):
        p = make_pmf([1, 2, 3])
        assert relative_entropy(p, p) == 0.0

    def test_infinite_when_not_absolutely_continuous(self):
        assert relative_entropy(bernoulli(0.5), bernoulli(0.0)) == math.inf
        assert bits_to_json(math.inf) == "inf"

    def test_binary_divergence_matches(self):
        assert binary_divergence(0.5, 0.25) == pytest.approx(
            relative_entropy(bernoulli(0.5), bernoulli(0.25)), abs=1e-15
        )

    def test_binary_divergence_limits(self):
        assert binary_divergence(0.0, 0.5) == pytest.approx(1.0, abs=1e-12)
        assert binary_divergence(0.5, 0.0) == math.inf


class TestMutualInformation:
    def test_bsc_with_skewed_input(self):
        joint = joint_from_channel(bernoulli(0.3), binary_symmetric_channel(0.1))
        expected = binary_entropy(0.34) - binary_entropy(0.1)
        assert mutual_information(joint) == pytest.approx(expected, abs=1e-12)

    def test_independent_is_zero(self, independent_joint):
        assert mutual_information(independent_joint) == 0.0

    def test_identity(self, identity_joint):
        assert mutual_information(identity_joint) == pytest.approx(1.0, abs=1e-12)


class TestRenyi:
    def test_order_two_known_value(self):
        value = renyi_divergence(bernoulli(0.5), bernoulli(0.25), 2.0)
        assert value == pytest.approx(math.log2(4.0 / 3.0), abs=1e-12)

    def test_rejects_order_one(self):
        with pytest.raises(ValidationError):
            renyi_divergence(bernoulli(0.5), bernoulli(0.25), 1.0)

    def test_monotone_in_order(self):
        gamma, pi = make_pmf([1, 2, 5]), make_pmf([3, 3, 1])
        values = [renyi_divergence(gamma, pi, a) for a in (1.01, 1.5, 2.0, 4.0, 16.0)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_monotone_in_order_random_pairs(self, rng):
        orders = (1.05, 1.5, 2.0, 3.0, 8.0)
        for _ in range(200):
            size = int(rng.integers(2, 6))
            gamma = make_pmf(rng.dirichlet(np.ones(size)))
            pi = make_pmf(rng.dirichlet(np.ones(size)))
            values = [renyi_divergence(gamma, pi, a) for a in orders]
            assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))

    def test_approaches_relative_entropy(self):
        gamma, pi = make_pmf([1, 2, 5]), make_pmf([3, 3, 1])
        near_one = renyi_divergence(gamma, pi, 1.0 + 1e-7)
        assert near_one == pytest.approx(renyi_divergence_limit(gamma, pi), abs=1e-6)

    def test_infinite(self):
        assert renyi_divergence(bernoulli(0.5), bernoulli(1.0), 2.0) == math.inf

    def test_identity_joint_constant(self, identity_joint):
        gamma = identity_joint.flatten()
        pi = identity_joint.product_of_marginals().flatten()
        for alpha in (1.5, 3.0, 50.0):
            assert renyi_divergence(gamma, pi, alpha) == pytest.approx(1.0, abs=1e-12)


class TestInformationDensity:
    def test_bsc_value(self, uniform_binary, bsc01):
        joint = joint_from_channel(uniform_binary, bsc01)
        assert information_density(joint, "0", "0") == pytest.approx(
            math.log2(0.9 / 0.5), abs=1e-12
        )

    def test_expectation_is_mutual_information(self, bsc02_joint):
        density = information_density_matrix(bsc02_joint)
        expected = float(np.sum(bsc02_joint.table * density))
        assert expected == pytest.approx(mutual_information(bsc02_joint), abs=1e-12)

    def test_zero_mass_cell(self, identity_joint):
        assert information_density_matrix(identity_joint)[0, 1] == -math.inf

    def test_zero_marginal_rejected(self):
        joint = JointPmf(BINARY, BINARY, np.array([[0.5, 0.5], [0.0, 0.0]]))
        with pytest.raises(ValidationError, match="zero marginal"):
            information_density(joint, "1", "0")

    def test_sequence_is_sum(self, bsc02_joint):
        u = SequenceIndex.from_symbols(BINARY, "0110")
        v = SequenceIndex.from_symbols(BINARY, "0100")
        per_letter = [information_density(bsc02_joint, a, b) for a, b in zip("0110", "0100")]
        assert information_density_sequence(bsc02_joint, u, v) == pytest.approx(
            sum(per_letter), abs=1e-12
        )

    def test_sequence_length_mismatch(self, bsc02_joint):
        with pytest.raises(ValidationError):
            information_density_sequence(
                bsc02_joint, SequenceIndex(BINARY, (0, 1)), SequenceIndex(BINARY, (0,))
            )
