"""Tests for exact soft-covering experiments."""

import math

import numpy as np
import pytest

from wiretap_workbench.exceptions import CapExceededError, ValidationError
from wiretap_workbench.exponents import (
    ExponentParams,
    beta_alpha_epsilon,
    epsilon_alpha_delta,
    expected_divergence_bound,
    maximize_beta,
)
from wiretap_workbench.info_measures import information_density_matrix, mutual_information
from wiretap_workbench.probability_core import (
    all_sequences,
    bernoulli,
    binary_symmetric_channel,
    identity_channel,
    joint_from_channel,
)
from wiretap_workbench.soft_covering_sim import (
    Codebook,
    EnsembleRunner,
    atypicality_probability,
    codebook_size,
    ensemble_experiment,
    expected_divergence_jensen,
    induced_distribution,
    sample_codebook,
    soft_covering_divergence,
    split_distribution,
    split_report,
    trial_seed,
)


class TestCodebook:
    def test_size_rounding(self):
        assert codebook_size(10, 0.15) == 4
        assert codebook_size(8, 0.8) == 2**6

    def test_sampling_deterministic(self, uniform_binary):
        first = sample_codebook(uniform_binary, 8, 0.5, seed=42)
        second = sample_codebook(uniform_binary, 8, 0.5, seed=42)
        np.testing.assert_array_equal(first.codewords, second.codewords)
        assert first.size == 16
        assert first.realized_rate == pytest.approx(0.5)

    def test_seed_changes_codebook(self, uniform_binary):
        first = sample_codebook(uniform_binary, 10, 0.5, seed=1)
        second = sample_codebook(uniform_binary, 10, 0.5, seed=2)
        assert not np.array_equal(first.codewords, second.codewords)

    def test_codeword_cap(self, uniform_binary):
        with pytest.raises(CapExceededError):
            sample_codebook(uniform_binary, 30, 1.0, seed=0, cap=2**10)

    def test_rejects_zero_rate(self, uniform_binary):
        with pytest.raises(ValidationError):
            sample_codebook(uniform_binary, 8, 0.0, seed=0)

    def test_codewords_read_only(self, uniform_binary):
        cb = sample_codebook(uniform_binary, 4, 0.5, seed=0)
        with pytest.raises(ValueError):
            cb.codewords[0, 0] = 1


class TestInducedDistribution:
    def test_single_codeword_identity(self, uniform_binary, noiseless_binary):
        cb = Codebook(uniform_binary, 4, 0.0, np.array([[0, 1, 1, 0]]), seed=0)
        result = soft_covering_divergence(induced_distribution(cb, noiseless_binary), uniform_binary)
        assert result.value == pytest.approx(4.0, abs=1e-12)
        assert result.value <= result.cap + 1e-12

    def test_full_codebook_identity(self, uniform_binary, noiseless_binary):
        cb = Codebook(uniform_binary, 3, 1.0, all_sequences(2, 3), seed=0)
        ind = induced_distribution(cb, noiseless_binary)
        np.testing.assert_allclose(ind.probs, np.full(8, 0.125))
        assert soft_covering_divergence(ind, uniform_binary).value == pytest.approx(0.0, abs=1e-12)

    def test_sums_to_one(self, uniform_binary, bsc01):
        cb = sample_codebook(uniform_binary, 8, 0.5, seed=3)
        assert induced_distribution(cb, bsc01).total() == pytest.approx(1.0, abs=1e-12)

    def test_sparse_matches_dense(self, uniform_binary):
        ch = binary_symmetric_channel(0.2)
        qv = joint_from_channel(uniform_binary, ch).col_marginal()
        cb = sample_codebook(uniform_binary, 6, 0.5, seed=5)
        dense = soft_covering_divergence(induced_distribution(cb, ch), qv)
        sparse = soft_covering_divergence(induced_distribution(cb, ch, sparse=True), qv)
        assert sparse.value == pytest.approx(dense.value, abs=1e-12)

    def test_dense_cap(self, uniform_binary, bsc01):
        cb = sample_codebook(uniform_binary, 12, 0.25, seed=0)
        with pytest.raises(CapExceededError, match="sparse"):
            induced_distribution(cb, bsc01, cap=2**10)

    def test_not_absolutely_continuous(self, uniform_binary, noiseless_binary):
        cb = Codebook(uniform_binary, 2, 0.0, np.array([[1, 0]]), seed=0)
        result = soft_covering_divergence(
            induced_distribution(cb, noiseless_binary), bernoulli(0.0)
        )
        assert result.value == math.inf
        assert result.offending_sequence == ("1", "0")

    def test_alphabet_mismatch(self, uniform_binary):
        from wiretap_workbench.probability_core import Alphabet
        from wiretap_workbench.exceptions import AlphabetMismatchError

        cb = Codebook(uniform_binary, 2, 0.0, np.array([[1, 0]]), seed=0)
        with pytest.raises(AlphabetMismatchError):
            induced_distribution(cb, identity_channel(Alphabet.of_size(3)))


class TestSplitReport:
    def test_no_atypical_mass_matches_exact(self, uniform_binary, bsc02_joint):
        ch = bsc02_joint.to_channel()
        cb = sample_codebook(uniform_binary, 8, 0.5, seed=9)
        report = split_report(cb, ch, bsc02_joint, eps=100.0)
        assert report.p2_mass == 0.0
        assert report.split_bound == pytest.approx(report.exact_divergence, abs=1e-9)

    @pytest.mark.parametrize("eps", [0.0, 0.05, 0.2])
    def test_bound_holds(self, uniform_binary, bsc02_joint, eps):
        ch = bsc02_joint.to_channel()
        cb = sample_codebook(uniform_binary, 8, 0.8, seed=21)
        report = split_report(cb, ch, bsc02_joint, eps=eps)
        assert report.exact_divergence <= report.split_bound + 1e-9
        assert report.delta2_max <= report.delta2_cap
        assert 0.0 <= report.p2_mass <= 1.0

    def test_exact_matches_direct_divergence(self, uniform_binary, bsc02_joint):
        ch = bsc02_joint.to_channel()
        cb = sample_codebook(uniform_binary, 8, 0.8, seed=4)
        report = split_report(cb, ch, bsc02_joint, eps=0.1)
        direct = soft_covering_divergence(induced_distribution(cb, ch), bsc02_joint.col_marginal())
        assert report.exact_divergence == pytest.approx(direct.value, abs=1e-10)

    def test_with_delta_attaches_thresholds(self, uniform_binary, bsc02_joint):
        ch = bsc02_joint.to_channel()
        cb = sample_codebook(uniform_binary, 10, 0.8, seed=2)
        report = split_report(cb, ch, bsc02_joint, delta=0.1)
        assert report.p2_threshold is not None
        assert report.delta1_threshold is not None
        assert set(report.prediction) == {"alpha", "beta", "epsilon", "threshold"}
        assert isinstance(report.in_good_set, bool)
        assert report.to_dict()["in_good_set"] == report.in_good_set

    def test_needs_eps_or_delta(self, uniform_binary, bsc02_joint):
        cb = sample_codebook(uniform_binary, 4, 0.5, seed=0)
        with pytest.raises(ValidationError):
            split_report(cb, bsc02_joint.to_channel(), bsc02_joint)

    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.4])
    def test_parts_sum_to_induced_distribution(self, uniform_binary, bsc02_joint, eps):
        ch = bsc02_joint.to_channel()
        cb = sample_codebook(uniform_binary, 8, 0.6, seed=17)
        p1, p2 = split_distribution(cb, ch, bsc02_joint, eps)
        assert np.all(p1 >= 0.0) and np.all(p2 >= 0.0)
        np.testing.assert_allclose(p1 + p2, induced_distribution(cb, ch).probs, rtol=0, atol=1e-14)

    @pytest.mark.parametrize("n", [4, 6, 8])
    @pytest.mark.parametrize("rate", [0.6, 0.9])
    def test_bound_holds_across_codebooks(self, uniform_binary, bsc02_joint, n, rate):
        ch = bsc02_joint.to_channel()
        realized = codebook_size(n, rate).bit_length() - 1
        params = ExponentParams(joint=bsc02_joint, rate=realized / n, delta=0.1, n=n)
        tuned = max(0.0, epsilon_alpha_delta(params, maximize_beta(params).alpha_star))
        for seed in range(100):
            cb = sample_codebook(uniform_binary, n, rate, seed=seed)
            for eps in (0.05, tuned):
                report = split_report(cb, ch, bsc02_joint, eps=eps, check=False)
                assert report.exact_divergence <= report.split_bound + 1e-9


class TestAtypicality:
    def test_identity_joint(self, identity_joint):
        assert atypicality_probability(identity_joint, 6, 0.0) == pytest.approx(1.0)
        assert atypicality_probability(identity_joint, 6, 0.1) == 0.0

    def test_matches_brute_force(self, bsc02_joint):
        n, eps = 4, 0.1
        density = information_density_matrix(bsc02_joint)
        threshold = mutual_information(bsc02_joint) + eps
        total = 0.0
        for cells in all_sequences(4, n):
            rows, cols = cells // 2, cells % 2
            mass = float(np.prod(bsc02_joint.table[rows, cols]))
            if density[rows, cols].sum() >= n * threshold - 1e-12 * n:
                total += mass
        assert atypicality_probability(bsc02_joint, n, eps) == pytest.approx(total, abs=1e-12)

    def test_below_chernoff_bound(self, bsc02_joint):
        n, eps = 8, 0.3
        params = ExponentParams(joint=bsc02_joint, rate=0.5, delta=0.1, n=n)
        exact = atypicality_probability(bsc02_joint, n, eps)
        assert exact == pytest.approx(0.8**n, rel=1e-9)
        for alpha in (1.25, 1.5, 2.0, 3.0):
            beta = beta_alpha_epsilon(params, alpha, eps)
            assert exact <= 2.0 ** (-n * beta) + 1e-12

    def test_mean_atypical_mass_over_codebooks(self):
        n, eps, trials = 6, 0.2, 200
        qu, ch = bernoulli(0.3), binary_symmetric_channel(0.2)
        joint = joint_from_channel(qu, ch)
        masses = np.array(
            [
                split_report(sample_codebook(qu, n, 0.5, seed=s), ch, joint, eps=eps).p2_mass
                for s in range(trials)
            ]
        )
        exact = atypicality_probability(joint, n, eps)
        spread = 4.0 * masses.std(ddof=1) / math.sqrt(trials)
        assert abs(masses.mean() - exact) <= spread + 1e-12

        params = ExponentParams(joint=joint, rate=0.5, delta=0.1, n=n)
        chernoff = min(2.0 ** (-n * beta_alpha_epsilon(params, a, eps)) for a in (1.5, 2.0, 3.0))
        assert masses.mean() <= chernoff + spread


class TestJensenBound:
    def test_single_codeword(self, bsc02_joint):
        n = 5
        expected = n * mutual_information(bsc02_joint)
        assert expected_divergence_jensen(bsc02_joint, n, 1) == pytest.approx(expected, abs=1e-12)

    def test_independent_joint_is_zero(self, independent_joint):
        assert expected_divergence_jensen(independent_joint, 6, 16) == pytest.approx(0.0, abs=1e-15)

    def test_decreases_with_codebook_size(self, bsc02_joint):
        values = [expected_divergence_jensen(bsc02_joint, 8, 2**k) for k in range(0, 12, 2)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_above_ensemble_mean(self, uniform_binary, bsc02_joint):
        ch = bsc02_joint.to_channel()
        n, rate = 8, 0.6
        divergences = [
            soft_covering_divergence(
                induced_distribution(sample_codebook(uniform_binary, n, rate, seed=s), ch),
                bsc02_joint.col_marginal(),
            ).value
            for s in range(100)
        ]
        bound = expected_divergence_jensen(bsc02_joint, n, codebook_size(n, rate))
        spread = 4.0 * np.std(divergences, ddof=1) / math.sqrt(len(divergences))
        assert np.mean(divergences) <= bound + spread


class TestEnsemble:
    def test_trial_seeds_distinct(self):
        seeds = {trial_seed(7, n, t) for n in (4, 5) for t in range(10)}
        assert len(seeds) == 20

    def test_deterministic_across_threads(self, uniform_binary):
        ch = binary_symmetric_channel(0.2)
        single = EnsembleRunner(threads=1).run(uniform_binary, ch, 0.8, 0.1, [4, 6], 6, seed=13)
        pooled = EnsembleRunner(threads=3).run(uniform_binary, ch, 0.8, 0.1, [4, 6], 6, seed=13)
        assert [r.divergence for r in single.trials] == [r.divergence for r in pooled.trials]
        assert single.to_dict() == pooled.to_dict()

    def test_rows_and_records(self, uniform_binary):
        ch = binary_symmetric_channel(0.2)
        result = ensemble_experiment(uniform_binary, ch, 0.8, 0.1, [4, 6], trials=5, seed=1)
        assert [row.n for row in result.rows] == [4, 6]
        assert len(result.trials) == 10
        for row in result.rows:
            assert row.mean <= row.max
            assert 0.0 <= row.exceed_fraction <= 1.0
        assert set(result.trials[0].to_row()) >= {"n", "trial", "seed", "divergence"}

    def test_dense_cap_checked_up_front(self, uniform_binary, bsc01):
        runner = EnsembleRunner(cap_dense=2**8)
        with pytest.raises(CapExceededError):
            runner.run(uniform_binary, bsc01, 0.5, 0.1, [4, 10], 2, seed=0)

    @pytest.mark.slow
    def test_failure_fraction_within_bound(self, uniform_binary, bsc02_joint):
        ch = bsc02_joint.to_channel()
        qv = bsc02_joint.col_marginal()
        result = EnsembleRunner().run(uniform_binary, ch, 0.9, 0.5, [10, 11], 200, seed=3)
        for row in result.rows:
            assert row.failure_bound.raw < 1.0
            assert row.within_failure_bound is True
            assert row.exceed_fraction <= row.failure_bound.value

            divergences = [t.divergence for t in result.trials if t.n == row.n]
            spread = 4.0 * np.std(divergences, ddof=1) / math.sqrt(len(divergences))
            jensen = expected_divergence_jensen(bsc02_joint, row.n, codebook_size(row.n, 0.9))
            gamma1 = -math.log(jensen) / row.n
            gamma2 = math.log(-math.log(row.failure_bound.raw)) / row.n
            assert row.mean <= jensen + spread
            assert jensen <= expected_divergence_bound(gamma1, gamma2, row.n, qv) + 1e-12

    @pytest.mark.slow
    def test_divergence_decays_above_mutual_information(self, uniform_binary):
        ch = binary_symmetric_channel(0.2)
        result = EnsembleRunner().run(uniform_binary, ch, 0.8, 0.1, [6, 8, 10, 12], 50, seed=1)
        assert result.slope() <= -0.05
        for row in result.rows:
            assert row.within_failure_bound in (None, True)

    @pytest.mark.slow
    def test_divergence_grows_below_mutual_information(self, uniform_binary):
        ch = binary_symmetric_channel(0.2)
        result = EnsembleRunner().run(uniform_binary, ch, 0.15, 0.0, [6, 8, 10, 12], 50, seed=1)
        assert result.slope() >= -0.01
