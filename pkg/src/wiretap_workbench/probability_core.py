"""
Finite-alphabet probability primitives.

PMFs, channels (stochastic matrices), joint PMFs, length-n sequences with
their lexicographic integer encoding, product extensions, empirical types and
letter-typicality. Every object is immutable after construction.
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from .exceptions import AlphabetMismatchError, ValidationError
from .validators import Validators

logger = logging.getLogger(__name__)

ERASURE_SYMBOL = "?"
NORMALIZATION_TOLERANCE = 1e-12
# Below this many nats a plain product of probabilities underflows.
UNDERFLOW_LOG_THRESHOLD = -700.0
# Absolute slack for float comparisons in the typicality test.
TYPICALITY_SLACK = 1e-12


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Alphabet:
    """Ordered list of distinct symbol labels."""

    symbols: Tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise ValidationError("Alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ValidationError(f"Alphabet symbols must be unique: {list(symbols)}")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def of_size(cls, size: int) -> "Alphabet":
        """Alphabet {'0', '1', ..., str(size-1)}."""
        return cls(tuple(str(i) for i in range(Validators.validate_count(size, "size"))))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: Any) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise ValidationError(f"Symbol {symbol!r} not in alphabet {list(self.symbols)}")

    @property
    def has_erasure(self) -> bool:
        return ERASURE_SYMBOL in self.symbols

    def with_erasure(self) -> "Alphabet":
        """The augmented alphabet X ∪ {?}; the erasure symbol comes last."""
        if self.has_erasure:
            raise ValidationError("Alphabet already contains the erasure symbol")
        return Alphabet(self.symbols + (ERASURE_SYMBOL,))

    def product(self, other: "Alphabet") -> "Alphabet":
        """Pair alphabet in row-major order: index = i * |other| + j."""
        return Alphabet(tuple(f"{a},{b}" for a in self.symbols for b in other.symbols))

    def require_same(self, other: "Alphabet") -> None:
        if self.symbols != other.symbols:
            raise AlphabetMismatchError(self.symbols, other.symbols)


BINARY = Alphabet(("0", "1"))


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over an alphabet.

    Inputs whose sum is farther than 1e-12 from one are renormalised and the
    `renormalized` flag is set.
    """

    alphabet: Alphabet
    probs: np.ndarray
    renormalized: bool = False

    def __post_init__(self):
        probs = Validators.validate_weights(self.probs)
        if probs.size != self.alphabet.size:
            raise ValidationError(
                f"Pmf has {probs.size} entries for an alphabet of {self.alphabet.size}"
            )

        renormalized = self.renormalized
        total = math.fsum(probs)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            logger.warning(f"Pmf sums to {total!r}; renormalising")
            probs = probs / total
            renormalized = True

        object.__setattr__(self, "probs", _freeze(probs))
        object.__setattr__(self, "renormalized", renormalized)

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Pmf":
        return cls(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))

    @classmethod
    def point_mass(cls, alphabet: Alphabet, symbol: Any) -> "Pmf":
        probs = np.zeros(alphabet.size)
        probs[alphabet.index(symbol)] = 1.0
        return cls(alphabet, probs)

    @property
    def size(self) -> int:
        return self.alphabet.size

    def __getitem__(self, symbol: Any) -> float:
        return float(self.probs[self.alphabet.index(symbol)])

    def support(self) -> np.ndarray:
        """Indices with strictly positive probability."""
        return np.flatnonzero(self.probs > 0)

    def min_support_probability(self) -> float:
        """μ = min over the support."""
        return float(self.probs[self.support()].min())

    def allclose(self, other: "Pmf", atol: float = 1e-12) -> bool:
        return self.alphabet == other.alphabet and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"alphabet": list(self.alphabet.symbols), "probs": self.probs.tolist()}


@dataclass(frozen=True)
class RationalPmf:
    """Exact rational PMF, used where typicality must be decided exactly."""

    alphabet: Alphabet
    probs: Tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        if len(probs) != self.alphabet.size:
            raise ValidationError("RationalPmf length does not match its alphabet")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValidationError("RationalPmf must be non-negative and sum to exactly 1")
        object.__setattr__(self, "probs", probs)

    def to_pmf(self) -> Pmf:
        return Pmf(self.alphabet, np.array([float(p) for p in self.probs]))


def make_pmf(weights: Sequence[float], alphabet: Optional[Alphabet] = None) -> Pmf:
    """Normalise a non-negative weight vector into a Pmf.

    Raises:
        ValidationError: negative weight (naming its index) or all-zero vector
    """
    array = Validators.validate_weights(weights)
    alphabet = alphabet or Alphabet.of_size(array.size)
    return Pmf(alphabet, array / math.fsum(array))


def make_rational_pmf(
    weights: Sequence[Union[int, Fraction]], alphabet: Optional[Alphabet] = None
) -> RationalPmf:
    """Exact normalisation of integer or rational weights."""
    fractions = [Fraction(w) for w in weights]
    for index, value in enumerate(fractions):
        if value < 0:
            raise ValidationError(f"Weight at index {index} is negative: {value}")
    total = sum(fractions)
    if total == 0:
        raise ValidationError("At least one weight must be positive")
    alphabet = alphabet or Alphabet.of_size(len(fractions))
    return RationalPmf(alphabet, tuple(f / total for f in fractions))


def bernoulli(p: float) -> Pmf:
    """Ber(p) over {'0', '1'} with P('1') = p."""
    p = Validators.validate_unit_interval(p, "p")
    return Pmf(BINARY, np.array([1.0 - p, p]))


@dataclass(frozen=True, eq=False)
class Channel:
    """Stochastic matrix: row x is the output PMF given input x."""

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        expected = (self.input_alphabet.size, self.output_alphabet.size)
        if matrix.shape != expected:
            raise ValidationError(f"Channel matrix shape {matrix.shape}, expected {expected}")

        rows = []
        for index, row in enumerate(matrix):
            try:
                rows.append(Pmf(self.output_alphabet, row).probs)
            except ValidationError as e:
                raise ValidationError(f"Channel row {index} invalid: {e.message}")

        object.__setattr__(self, "matrix", _freeze(np.vstack(rows)))

    @classmethod
    def from_rows(
        cls, input_alphabet: Alphabet, output_alphabet: Alphabet, rows: Sequence[Pmf]
    ) -> "Channel":
        for row in rows:
            output_alphabet.require_same(row.alphabet)
        return cls(input_alphabet, output_alphabet, np.vstack([r.probs for r in rows]))

    @property
    def rows(self) -> Tuple[Pmf, ...]:
        return tuple(Pmf(self.output_alphabet, row) for row in self.matrix)

    def relabel_inputs(self, permutation: Sequence[int]) -> "Channel":
        """Channel whose input i behaves like this channel's input permutation[i]."""
        permutation = list(permutation)
        return Channel(
            Alphabet(tuple(self.input_alphabet.symbols[i] for i in permutation)),
            self.output_alphabet,
            self.matrix[permutation],
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_alphabet": list(self.input_alphabet.symbols),
            "output_alphabet": list(self.output_alphabet.symbols),
            "rows": self.matrix.tolist(),
        }


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint PMF over row x column alphabets."""

    row_alphabet: Alphabet
    col_alphabet: Alphabet
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        expected = (self.row_alphabet.size, self.col_alphabet.size)
        if table.shape != expected:
            raise ValidationError(f"Joint table shape {table.shape}, expected {expected}")
        flat = Pmf(self.row_alphabet.product(self.col_alphabet), table.ravel())
        object.__setattr__(self, "table", _freeze(flat.probs.reshape(expected)))

    def row_marginal(self) -> Pmf:
        return Pmf(self.row_alphabet, self.table.sum(axis=1))

    def col_marginal(self) -> Pmf:
        return Pmf(self.col_alphabet, self.table.sum(axis=0))

    def conditional(self, row_symbol: Any) -> Pmf:
        """Column PMF given a row symbol; only defined on positive-mass rows."""
        row = self.table[self.row_alphabet.index(row_symbol)]
        mass = row.sum()
        if mass <= 0:
            raise ValidationError(f"Row {row_symbol!r} has zero marginal mass")
        return Pmf(self.col_alphabet, row / mass)

    def to_channel(self) -> Channel:
        """Q_{col|row}; every row must carry positive mass."""
        marginal = self.table.sum(axis=1)
        if np.any(marginal <= 0):
            zero_rows = [self.row_alphabet.symbols[i] for i in np.flatnonzero(marginal <= 0)]
            raise ValidationError(f"Conditional undefined on zero-mass rows {zero_rows}")
        return Channel(self.row_alphabet, self.col_alphabet, self.table / marginal[:, None])

    def flatten(self) -> Pmf:
        return Pmf(self.row_alphabet.product(self.col_alphabet), self.table.ravel())

    def product_of_marginals(self) -> "JointPmf":
        return JointPmf(
            self.row_alphabet,
            self.col_alphabet,
            np.outer(self.table.sum(axis=1), self.table.sum(axis=0)),
        )

    def transpose(self) -> "JointPmf":
        return JointPmf(self.col_alphabet, self.row_alphabet, self.table.T)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "row_alphabet": list(self.row_alphabet.symbols),
            "col_alphabet": list(self.col_alphabet.symbols),
            "table": self.table.tolist(),
        }


def joint_from_channel(input_pmf: Pmf, channel: Channel) -> JointPmf:
    """Q_{U,V}(u, v) = Q_U(u) Q_{V|U}(v|u)."""
    channel.input_alphabet.require_same(input_pmf.alphabet)
    return JointPmf(
        channel.input_alphabet,
        channel.output_alphabet,
        input_pmf.probs[:, None] * channel.matrix,
    )


@dataclass(frozen=True)
class SequenceIndex:
    """A length-n sequence over an alphabet, stored as symbol indices."""

    alphabet: Alphabet
    value: Tuple[int, ...]

    def __post_init__(self):
        value = tuple(int(v) for v in self.value)
        if any(v < 0 or v >= self.alphabet.size for v in value):
            raise ValidationError(f"Sequence {value} has indices outside the alphabet")
        object.__setattr__(self, "value", value)

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, symbols: Iterable[Any]) -> "SequenceIndex":
        return cls(alphabet, tuple(alphabet.index(s) for s in symbols))

    @classmethod
    def from_int(cls, alphabet: Alphabet, n: int, number: int) -> "SequenceIndex":
        """Decode the lexicographic integer; the first symbol is most significant."""
        n = Validators.validate_blocklength(n, minimum=0)
        size = alphabet.size
        if not 0 <= number < size**n:
            raise ValidationError(f"Sequence number {number} outside [0, {size}^{n})")
        digits = []
        for _ in range(n):
            number, digit = divmod(number, size)
            digits.append(digit)
        return cls(alphabet, tuple(reversed(digits)))

    @property
    def n(self) -> int:
        return len(self.value)

    def to_int(self) -> int:
        number = 0
        for digit in self.value:
            number = number * self.alphabet.size + digit
        return number

    def symbols(self) -> Tuple[str, ...]:
        return tuple(self.alphabet.symbols[v] for v in self.value)

    def substring(self, positions: Sequence[int]) -> "SequenceIndex":
        """x^S = (x_i)_{i in S}."""
        return SequenceIndex(self.alphabet, tuple(self.value[i] for i in positions))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.value, dtype=np.int64)


def all_sequences(size: int, n: int) -> np.ndarray:
    """All size**n sequences as rows of symbol indices, lexicographic order."""
    numbers = np.arange(size**n, dtype=np.int64)
    powers = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (numbers[:, None] // powers[None, :]) % size


def sequences_to_int(sequences: np.ndarray, size: int) -> np.ndarray:
    """Vectorised lexicographic encoding of rows of symbol indices."""
    sequences = np.atleast_2d(sequences)
    powers = size ** np.arange(sequences.shape[1] - 1, -1, -1, dtype=np.int64)
    return sequences.astype(np.int64) @ powers


def product_pmf(p: Pmf, n: int) -> np.ndarray:
    """P^n over all |alphabet|^n sequences in lexicographic order."""
    probs = np.ones(1)
    for _ in range(n):
        probs = np.outer(probs, p.probs).ravel()
    return probs


def sequence_channel_rows(
    codewords: np.ndarray,
    channel: Union[Channel, Sequence[Channel]],
) -> np.ndarray:
    """Exact Q^n(y | x_k) for every codeword row x_k and every output sequence y.

    `channel` is either one memoryless channel or one channel per position (all
    sharing an output alphabet). Returns shape (K, |Y|^n), lexicographic in y.
    """
    codewords = np.atleast_2d(np.asarray(codewords, dtype=np.int64))
    count, n = codewords.shape
    channels = [channel] * n if isinstance(channel, Channel) else list(channel)
    if len(channels) != n:
        raise ValidationError(f"Need {n} per-position channels, got {len(channels)}")

    rows = np.ones((count, 1))
    for t, ch in enumerate(channels):
        step = ch.matrix[codewords[:, t]]
        rows = (rows[:, :, None] * step[:, None, :]).reshape(count, -1)
    return rows


def product_probability(p: Pmf, seq: SequenceIndex) -> float:
    """∏ p(seq_i); accumulated in log-space when the product would underflow."""
    p.alphabet.require_same(seq.alphabet)
    factors = p.probs[seq.as_array()]
    if seq.n == 0:
        return 1.0
    if np.any(factors == 0):
        return 0.0

    if seq.n * math.log(factors.min()) < UNDERFLOW_LOG_THRESHOLD:
        return math.exp(math.fsum(np.log(factors)))
    return float(np.prod(factors))


def channel_output_pmf(ch: Channel, input_pmf: Pmf) -> Pmf:
    """output(v) = Σ_u input(u) ch(v|u)."""
    ch.input_alphabet.require_same(input_pmf.alphabet)
    return Pmf(ch.output_alphabet, input_pmf.probs @ ch.matrix)


def symbol_counts(seq: SequenceIndex) -> np.ndarray:
    return np.bincount(seq.as_array(), minlength=seq.alphabet.size)


def empirical_pmf(seq: SequenceIndex) -> Pmf:
    """ν(x) = N(x|seq) / n."""
    Validators.validate_blocklength(seq.n)
    return Pmf(seq.alphabet, symbol_counts(seq) / seq.n)


def typical_mask(counts: np.ndarray, probs: np.ndarray, n: int, eps: float) -> np.ndarray:
    """Vectorised letter-typicality on rows of symbol counts.

    A row is typical iff |N(x)/n - p(x)| <= eps p(x) for every x, so symbols
    with p(x) = 0 must not occur.
    """
    counts = np.atleast_2d(counts)
    deviation = np.abs(counts / n - probs[None, :])
    return np.all(deviation <= eps * probs[None, :] + TYPICALITY_SLACK, axis=1)


def is_letter_typical(
    seq: SequenceIndex, p: Union[Pmf, RationalPmf], eps: Union[float, Fraction]
) -> bool:
    """Letter-typicality of `seq` under `p` with multiplicative tolerance eps.

    With a RationalPmf (and a rational eps) the decision is exact.
    """
    if eps < 0:
        raise ValidationError(f"Typicality tolerance must be non-negative, got {eps}")
    p.alphabet.require_same(seq.alphabet)
    n = Validators.validate_blocklength(seq.n)
    counts = symbol_counts(seq)

    if isinstance(p, RationalPmf):
        eps = Fraction(eps)
        return all(
            abs(Fraction(int(c), n) - q) <= eps * q for c, q in zip(counts, p.probs)
        )

    return bool(typical_mask(counts, p.probs, n, float(eps))[0])


def pair_sequence(useq: SequenceIndex, vseq: SequenceIndex) -> SequenceIndex:
    """The sequence of pairs (u_t, v_t) over the product alphabet."""
    if useq.n != vseq.n:
        raise ValidationError(f"Sequence lengths differ: {useq.n} vs {vseq.n}")
    size = vseq.alphabet.size
    return SequenceIndex(
        useq.alphabet.product(vseq.alphabet),
        tuple(u * size + v for u, v in zip(useq.value, vseq.value)),
    )


def joint_typicality_test(
    useq: SequenceIndex, vseq: SequenceIndex, joint: JointPmf, eps: float
) -> bool:
    """Letter-typicality of the pair sequence under the joint PMF."""
    joint.row_alphabet.require_same(useq.alphabet)
    joint.col_alphabet.require_same(vseq.alphabet)
    return is_letter_typical(pair_sequence(useq, vseq), joint.flatten(), eps)


def binary_symmetric_channel(crossover: float) -> Channel:
    p = Validators.validate_unit_interval(crossover, "crossover")
    return Channel(BINARY, BINARY, np.array([[1 - p, p], [p, 1 - p]]))


def identity_channel(alphabet: Alphabet) -> Channel:
    return Channel(alphabet, alphabet, np.eye(alphabet.size))


def useless_channel(input_alphabet: Alphabet, output: Pmf) -> Channel:
    """Every input row equals `output`."""
    return Channel(
        input_alphabet,
        output.alphabet,
        np.tile(output.probs, (input_alphabet.size, 1)),
    )


def wilson_interval(
    successes: int, trials: int, confidence: float = 0.99
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    trials = Validators.validate_count(trials, "trials")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    phat = successes / trials
    denominator = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    half /= denominator
    return max(0.0, centre - half), min(1.0, centre + half)


# JSON documents -------------------------------------------------------------


def _read_json(path: Union[str, Path]) -> Dict[str, Any]:
    path = Validators.validate_file_path(str(path))
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in {path}: {e}")


def pmf_from_dict(document: Dict[str, Any]) -> Pmf:
    try:
        return Pmf(Alphabet(tuple(document["alphabet"])), np.asarray(document["probs"]))
    except KeyError as e:
        raise ValidationError(f"PMF document missing field {e}")


def channel_from_dict(document: Dict[str, Any]) -> Channel:
    """{"input_alphabet": [...], "output_alphabet": [...], "rows": [[...], ...]}."""
    try:
        return Channel(
            Alphabet(tuple(document["input_alphabet"])),
            Alphabet(tuple(document["output_alphabet"])),
            np.asarray(document["rows"], dtype=float),
        )
    except KeyError as e:
        raise ValidationError(f"Channel document missing field {e}")


def joint_from_dict(document: Dict[str, Any]) -> JointPmf:
    """Either an explicit table or an input PMF plus a channel ("input" key)."""
    if "table" in document:
        try:
            return JointPmf(
                Alphabet(tuple(document["row_alphabet"])),
                Alphabet(tuple(document["col_alphabet"])),
                np.asarray(document["table"], dtype=float),
            )
        except KeyError as e:
            raise ValidationError(f"Joint document missing field {e}")

    if "input" in document and "rows" in document:
        channel = channel_from_dict(document)
        probs = np.asarray(document["input"], dtype=float)
        return joint_from_channel(Pmf(channel.input_alphabet, probs), channel)

    raise ValidationError("Joint document needs 'table' or 'input' + channel rows")


def load_pmf(path: Union[str, Path]) -> Pmf:
    return pmf_from_dict(_read_json(path))


def load_channel(path: Union[str, Path]) -> Channel:
    return channel_from_dict(_read_json(path))


def load_joint(path: Union[str, Path]) -> JointPmf:
    return joint_from_dict(_read_json(path))
