"""Tests for alphabets, PMFs, channels, sequences and typicality."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from wiretap_workbench.exceptions import AlphabetMismatchError, ValidationError
from wiretap_workbench.probability_core import (
    BINARY,
    Alphabet,
    Channel,
    JointPmf,
    Pmf,
    SequenceIndex,
    all_sequences,
    bernoulli,
    binary_symmetric_channel,
    channel_output_pmf,
    empirical_pmf,
    is_letter_typical,
    joint_from_channel,
    joint_from_dict,
    joint_typicality_test,
    load_channel,
    load_joint,
    load_pmf,
    make_pmf,
    make_rational_pmf,
    product_pmf,
    product_probability,
    sequence_channel_rows,
    sequences_to_int,
    useless_channel,
    wilson_interval,
)
from wiretap_workbench.secrecy_capacity import erasure_channel


class TestAlphabet:
    def test_of_size(self):
        assert Alphabet.of_size(3).symbols == ("0", "1", "2")

    def test_rejects_duplicates(self):
        with pytest.raises(ValidationError):
            Alphabet(("a", "a"))

    def test_erasure_symbol_last(self):
        augmented = BINARY.with_erasure()
        assert augmented.symbols[-1] == "?"
        assert augmented.has_erasure
        with pytest.raises(ValidationError):
            augmented.with_erasure()

    def test_product_order(self):
        pairs = BINARY.product(Alphabet.of_size(3))
        assert pairs.size == 6
        assert pairs.symbols[1] == "0,1"
        assert pairs.symbols[3] == "1,0"

    def test_require_same(self):
        with pytest.raises(AlphabetMismatchError):
            BINARY.require_same(Alphabet(("a", "b")))


class TestPmf:
    def test_make_pmf_normalises(self):
        p = make_pmf([1, 1])
        np.testing.assert_allclose(p.probs, [0.5, 0.5])

    def test_make_pmf_support(self):
        p = make_pmf([2, 0, 2])
        assert p.support().tolist() == [0, 2]
        assert p.min_support_probability() == 0.5

    def test_make_pmf_negative_names_index(self):
        with pytest.raises(ValidationError, match="index 1"):
            make_pmf([1.0, -0.5, 1.0])

    def test_make_pmf_all_zero(self):
        with pytest.raises(ValidationError):
            make_pmf([0, 0, 0])

    def test_near_normalised_input_accepted(self):
        p = Pmf(BINARY, np.array([0.3, 0.7000000000001]))
        assert abs(math.fsum(p.probs) - 1.0) <= 1e-12

    def test_renormalises_with_flag(self):
        p = Pmf(BINARY, np.array([0.3, 0.8]))
        assert p.renormalized
        assert abs(math.fsum(p.probs) - 1.0) <= 1e-12

    def test_probs_are_read_only(self):
        p = make_pmf([1, 3])
        with pytest.raises(ValueError):
            p.probs[0] = 0.9

    def test_bernoulli_convention(self):
        p = bernoulli(0.25)
        assert p["1"] == 0.25
        assert p["0"] == 0.75

    def test_rational_pmf_exact(self):
        p = make_rational_pmf([1, 2])
        assert p.probs == (Fraction(1, 3), Fraction(2, 3))
        with pytest.raises(ValidationError):
            make_rational_pmf([1, -1, 2])


class TestChannel:
    def test_rows_validated(self):
        with pytest.raises(ValidationError, match="row 1"):
            Channel(BINARY, BINARY, np.array([[0.5, 0.5], [-0.1, 1.1]]))

    def test_shape_checked(self):
        with pytest.raises(ValidationError):
            Channel(BINARY, BINARY, np.ones((3, 2)) / 2)

    def test_erasure_output(self):
        output = channel_output_pmf(erasure_channel(0.7, BINARY), bernoulli(0.4))
        np.testing.assert_allclose(output.probs, [0.42, 0.28, 0.30], atol=1e-12)
        assert output.alphabet.symbols == ("0", "1", "?")

    def test_output_alphabet_mismatch(self):
        with pytest.raises(AlphabetMismatchError):
            channel_output_pmf(binary_symmetric_channel(0.1), make_pmf([1, 1, 1]))

    def test_useless_channel_rows(self):
        output = make_pmf([1, 3])
        ch = useless_channel(Alphabet.of_size(3), output)
        for row in ch.rows:
            assert row.allclose(output)

    def test_relabel_inputs(self):
        ch = binary_symmetric_channel(0.2).relabel_inputs([1, 0])
        assert ch.input_alphabet.symbols == ("1", "0")
        np.testing.assert_allclose(ch.matrix, [[0.2, 0.8], [0.8, 0.2]])


class TestJointPmf:
    def test_marginals_and_conditional(self, uniform_binary):
        joint = joint_from_channel(uniform_binary, binary_symmetric_channel(0.1))
        np.testing.assert_allclose(joint.row_marginal().probs, [0.5, 0.5])
        np.testing.assert_allclose(joint.conditional("0").probs, [0.9, 0.1])

    def test_conditional_zero_row(self):
        joint = JointPmf(BINARY, BINARY, np.array([[0.5, 0.5], [0.0, 0.0]]))
        with pytest.raises(ValidationError, match="zero"):
            joint.conditional("1")
        with pytest.raises(ValidationError):
            joint.to_channel()

    def test_to_channel_round_trip(self, uniform_binary):
        ch = binary_symmetric_channel(0.3)
        np.testing.assert_allclose(
            joint_from_channel(uniform_binary, ch).to_channel().matrix, ch.matrix
        )

    def test_from_dict_with_input(self):
        joint = joint_from_dict(
            {
                "input_alphabet": ["0", "1"],
                "output_alphabet": ["0", "1"],
                "input": [0.25, 0.75],
                "rows": [[1, 0], [0, 1]],
            }
        )
        np.testing.assert_allclose(joint.table, [[0.25, 0.0], [0.0, 0.75]])

    def test_from_dict_incomplete(self):
        with pytest.raises(ValidationError):
            joint_from_dict({"rows": [[1.0]]})


class TestSequences:
    def test_int_round_trip(self):
        seq = SequenceIndex.from_int(Alphabet.of_size(3), 4, 50)
        assert seq.value == (1, 2, 1, 2)
        assert seq.to_int() == 50

    def test_from_int_out_of_range(self):
        with pytest.raises(ValidationError):
            SequenceIndex.from_int(BINARY, 3, 8)

    def test_all_sequences_lexicographic(self):
        sequences = all_sequences(2, 3)
        assert sequences.shape == (8, 3)
        assert sequences[5].tolist() == [1, 0, 1]
        np.testing.assert_array_equal(sequences_to_int(sequences, 2), np.arange(8))

    def test_substring(self):
        seq = SequenceIndex.from_symbols(BINARY, "0110")
        assert seq.substring([1, 3]).symbols() == ("1", "0")

    def test_product_probability(self, uniform_binary):
        seq = SequenceIndex.from_symbols(BINARY, "010")
        assert product_probability(uniform_binary, seq) == 0.125
        assert product_probability(bernoulli(0.25), SequenceIndex(BINARY, (1, 1))) == 0.0625

    def test_product_probability_underflow(self):
        seq = SequenceIndex(BINARY, (1,) * 520)
        value = product_probability(bernoulli(0.25), seq)
        assert value > 0.0
        assert value == pytest.approx(math.exp(520 * math.log(0.25)), rel=1e-6)

    def test_product_probability_sums_to_one(self):
        p = bernoulli(0.3)
        for n in range(13):
            total = math.fsum(
                product_probability(p, SequenceIndex.from_int(BINARY, n, number)) for number in range(2**n)
            )
            assert total == pytest.approx(1.0, abs=1e-12)

        ternary = make_pmf([0.5, 0.3, 0.2])
        for n in range(1, 7):
            total = math.fsum(
                product_probability(ternary, SequenceIndex.from_int(ternary.alphabet, n, number))
                for number in range(3**n)
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_product_pmf_matches_product_probability(self):
        p = bernoulli(0.3)
        table = product_pmf(p, 3)
        for number in range(8):
            seq = SequenceIndex.from_int(BINARY, 3, number)
            assert table[number] == pytest.approx(product_probability(p, seq), rel=1e-12)

    def test_sequence_channel_rows_stochastic(self, rng):
        codewords = rng.integers(0, 2, size=(5, 4))
        rows = sequence_channel_rows(codewords, binary_symmetric_channel(0.2))
        assert rows.shape == (5, 16)
        np.testing.assert_allclose(rows.sum(axis=1), 1.0)

    def test_sequence_channel_rows_empty_word(self):
        rows = sequence_channel_rows(np.zeros((3, 0), dtype=int), binary_symmetric_channel(0.2))
        np.testing.assert_array_equal(rows, np.ones((3, 1)))

    def test_empirical_pmf(self):
        seq = SequenceIndex(Alphabet.of_size(3), (0, 1, 1, 1, 2))
        np.testing.assert_allclose(empirical_pmf(seq).probs, [0.2, 0.6, 0.2])


class TestTypicality:
    def test_exact_rational_boundary(self):
        p = make_rational_pmf([1, 1])
        seq = SequenceIndex.from_symbols(BINARY, "0001")
        assert not is_letter_typical(seq, p, Fraction(2, 5))
        assert is_letter_typical(seq, p, Fraction(1, 2))

    def test_zero_probability_symbol_not_typical(self):
        seq = SequenceIndex.from_symbols(BINARY, "01")
        assert not is_letter_typical(seq, bernoulli(0.0), 10.0)

    def test_negative_eps(self, uniform_binary):
        with pytest.raises(ValidationError):
            is_letter_typical(SequenceIndex(BINARY, (0,)), uniform_binary, -0.1)

    def test_joint_typicality(self, identity_joint):
        u = SequenceIndex.from_symbols(BINARY, "0110")
        assert joint_typicality_test(u, u, identity_joint, 0.0)
        v = SequenceIndex.from_symbols(BINARY, "0111")
        assert not joint_typicality_test(u, v, identity_joint, 0.5)


class TestWilson:
    @pytest.mark.parametrize("successes, trials", [(0, 10), (5, 10), (10, 10), (37, 1000)])
    def test_contains_estimate(self, successes, trials):
        low, high = wilson_interval(successes, trials)
        assert 0.0 <= low <= successes / trials <= high <= 1.0


class TestLoaders:
    def test_load_files(self, tmp_path):
        pmf_path = tmp_path / "p.json"
        pmf_path.write_text(json.dumps({"alphabet": ["a", "b"], "probs": [0.25, 0.75]}))
        assert load_pmf(pmf_path)["b"] == 0.75

        ch = binary_symmetric_channel(0.1)
        ch_path = tmp_path / "ch.json"
        ch_path.write_text(json.dumps(ch.to_dict()))
        np.testing.assert_allclose(load_channel(ch_path).matrix, ch.matrix)

        joint_path = tmp_path / "j.json"
        joint_path.write_text(json.dumps({"input": [0.5, 0.5], **ch.to_dict()}))
        np.testing.assert_allclose(load_joint(joint_path).table, [[0.45, 0.05], [0.05, 0.45]])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_pmf(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="Invalid JSON"):
            load_channel(path)
