"""
Wiretap code simulation.

Builds random wiretap codes {x(m, w)}, encodes and decodes them, evaluates
their error probabilities, and computes the semantic-security metric exactly:
against a noisy eavesdropper channel (type I) and against every choice of
observed positions (type II).
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import rel_entr

from .config import DEFAULT_BA_TOLERANCE, DEFAULT_CODEBOOK_CAP, DEFAULT_DENSE_CAP, DEFAULT_SUBSET_CAP
from .exceptions import CapExceededError, InvariantViolationError, ValidationError
from .info_measures import LN2, Bits, binary_divergence, entropy, mutual_information, mutual_information_array
from .probability_core import (
    Alphabet,
    Channel,
    JointPmf,
    Pmf,
    SequenceIndex,
    all_sequences,
    channel_output_pmf,
    identity_channel,
    joint_from_channel,
    product_pmf,
    sequence_channel_rows,
    typical_mask,
    wilson_interval,
)
from .secrecy_capacity import SecrecyCapacitySolver
from .validators import Validators

logger = logging.getLogger(__name__)

DECODING_FAILURE = "e"
DEFAULT_EPS_SCALE = 0.2
DEFAULT_MC_TRIALS = 10_000
LEAKAGE_SLACK = 1e-9


def default_typicality_eps(joint_xy: JointPmf) -> float:
    """0.2 (1 - largest joint cell), the decoder's default tolerance."""
    return DEFAULT_EPS_SCALE * (1.0 - float(joint_xy.table.max()))


@dataclass(frozen=True, eq=False)
class WiretapCode:
    """Codewords x(m, w) as a read-only (|M|, |W|, n) array of symbol indices.

    With a prefix channel the stored codewords are over U and each letter is
    passed through Q_{X|U} at encoding time.
    """

    source: Pmf
    codewords: np.ndarray
    prefix: Optional[Channel] = None
    typicality_eps: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        codewords = np.array(self.codewords, dtype=np.int64, ndmin=3)
        if codewords.size and (codewords.min() < 0 or codewords.max() >= self.source.size):
            raise ValidationError("Codeword symbols fall outside the source alphabet")
        if self.prefix is not None:
            self.prefix.input_alphabet.require_same(self.source.alphabet)
        codewords.setflags(write=False)
        object.__setattr__(self, "codewords", codewords)

    @property
    def n(self) -> int:
        return self.codewords.shape[2]

    @property
    def message_count(self) -> int:
        return self.codewords.shape[0]

    @property
    def randomness_count(self) -> int:
        return self.codewords.shape[1]

    @property
    def rate(self) -> float:
        return math.log2(self.message_count) / self.n

    @property
    def rate_tilde(self) -> float:
        return math.log2(self.randomness_count) / self.n

    @property
    def symbol_channel(self) -> Channel:
        """Stored symbol -> transmitted X symbol (identity without a prefix)."""
        return self.prefix if self.prefix is not None else identity_channel(self.source.alphabet)

    @property
    def x_alphabet(self) -> Alphabet:
        return self.symbol_channel.output_alphabet

    @property
    def input_pmf(self) -> Pmf:
        """Q_X: the source PMF, or its image through the prefix channel."""
        return channel_output_pmf(self.symbol_channel, self.source)

    def flat_codewords(self) -> np.ndarray:
        return self.codewords.reshape(-1, self.n)

    def with_messages(self, messages: Sequence[int]) -> "WiretapCode":
        return WiretapCode(
            source=self.source,
            codewords=self.codewords[list(messages)],
            prefix=self.prefix,
            typicality_eps=self.typicality_eps,
            seed=self.seed,
        )


@dataclass
class ErrorReport:
    per_message: List[float]
    mode: str
    trials: Optional[int] = None
    intervals: Optional[List[Tuple[float, float]]] = None

    @property
    def maximum(self) -> float:
        return max(self.per_message)

    @property
    def average(self) -> float:
        return math.fsum(self.per_message) / len(self.per_message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "per_message": self.per_message,
            "average": self.average,
            "maximum": self.maximum,
            "trials": self.trials,
            "wilson_99": [list(i) for i in self.intervals] if self.intervals else None,
        }


@dataclass
class ExpurgationResult:
    code: WiretapCode
    kept_messages: List[int]
    unchanged: bool

    @property
    def realized_rate(self) -> float:
        return self.code.rate


@dataclass
class LeakageReport:
    """Exact semantic-security metric of one observation channel m -> Z."""

    per_message_divergence: List[Bits]
    exact_sem: Bits
    uniform_leakage: Bits
    optimal_message_pmf: List[float]

    @property
    def max_message(self) -> int:
        return int(np.argmax(self.per_message_divergence))

    @property
    def max_divergence(self) -> Bits:
        return max(self.per_message_divergence)

    @property
    def bound_check(self) -> bool:
        return self.exact_sem <= self.max_divergence + LEAKAGE_SLACK

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exact_sem": self.exact_sem,
            "uniform_leakage": self.uniform_leakage,
            "per_message_divergence": self.per_message_divergence,
            "max_message": self.max_message,
            "max_divergence": self.max_divergence,
            "bound_check": self.bound_check,
            "optimal_message_pmf": self.optimal_message_pmf,
        }


@dataclass
class SubsetLeakage:
    mu: int
    per_subset: Dict[Tuple[int, ...], LeakageReport] = field(default_factory=dict)
    sampled: bool = False

    @property
    def max_over_subsets(self) -> Bits:
        return max(r.exact_sem for r in self.per_subset.values())

    @property
    def max_divergence(self) -> Bits:
        return max(r.max_divergence for r in self.per_subset.values())

    @property
    def worst_subset(self) -> Tuple[int, ...]:
        return max(self.per_subset, key=lambda s: self.per_subset[s].exact_sem)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu": self.mu,
            "sampled": self.sampled,
            "subsets_evaluated": len(self.per_subset),
            "max_over_subsets": self.max_over_subsets,
            "max_divergence": self.max_divergence,
            "worst_subset": list(self.worst_subset),
        }

    def to_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for subset, report in self.per_subset.items():
            for m, divergence in enumerate(report.per_message_divergence):
                rows.append(
                    {
                        "subset": " ".join(str(i) for i in subset),
                        "message": m,
                        "divergence": divergence,
                        "exact_sem": report.exact_sem,
                    }
                )
        return rows


@dataclass(frozen=True)
class RateConstraints:
    reliability_margin: Bits
    secrecy_margin: Bits

    @property
    def reliable(self) -> bool:
        """R + R_tilde < I(X;Y)."""
        return self.reliability_margin > 0

    @property
    def secure(self) -> bool:
        return self.secrecy_margin > 0


@dataclass(frozen=True)
class DecompositionCheck:
    full_divergence: Bits
    substring_divergence: Bits

    @property
    def difference(self) -> float:
        return abs(self.full_divergence - self.substring_divergence)


@dataclass(frozen=True)
class SanovBound:
    n: int
    delta: float
    binary_divergence: Bits
    value: float


def build_wiretap_code(
    source: Pmf,
    n: int,
    R: float,
    R_tilde: float,
    eps: Optional[float] = None,
    seed: int = 0,
    prefix: Optional[Channel] = None,
    cap: int = DEFAULT_CODEBOOK_CAP,
) -> WiretapCode:
    """2^{round(nR)} x 2^{round(nR~)} codewords drawn i.i.d. from `source`."""
    n = Validators.validate_blocklength(n)
    R = Validators.validate_non_negative(R, "R")
    R_tilde = Validators.validate_non_negative(R_tilde, "R_tilde")
    seed = Validators.validate_seed(seed)
    if eps is not None:
        Validators.validate_non_negative(eps, "eps")

    m_exp, w_exp = int(round(n * R)), int(round(n * R_tilde))
    if m_exp + w_exp > 62 or 2 ** (m_exp + w_exp) > cap:
        raise CapExceededError("wiretap codebook", 2 ** (m_exp + w_exp), cap)

    rng = np.random.Generator(np.random.Philox(seed))
    codewords = rng.choice(source.size, size=(2**m_exp, 2**w_exp, n), p=source.probs)
    code = WiretapCode(source=source, codewords=codewords, prefix=prefix, typicality_eps=eps, seed=seed)
    logger.debug(
        f"Wiretap code n={n}: |M|={code.message_count} (R={code.rate:.4f}), "
        f"|W|={code.randomness_count} (R~={code.rate_tilde:.4f})"
    )
    return code


def _check_indices(code: WiretapCode, m: int, w: int) -> None:
    if not 0 <= m < code.message_count:
        raise ValidationError(f"Message {m} outside [0, {code.message_count})")
    if not 0 <= w < code.randomness_count:
        raise ValidationError(f"Randomness index {w} outside [0, {code.randomness_count})")


def _sample_through(matrix: np.ndarray, symbols: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Pass an integer array of input symbols through a channel letter by letter."""
    cumulative = np.cumsum(matrix, axis=1)
    draws = rng.random(symbols.shape)
    outputs = (cumulative[symbols] < draws[..., None]).sum(axis=-1)
    return np.minimum(outputs, matrix.shape[1] - 1)


def encode_many(
    code: WiretapCode, m: int, w: int, count: int, rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """`count` independent encodings of (m, w) as a (count, n) array over X."""
    _check_indices(code, m, w)
    stored = np.broadcast_to(code.codewords[m, w], (count, code.n))
    if code.prefix is None:
        return np.array(stored)
    return _sample_through(code.prefix.matrix, stored, rng or np.random.default_rng())


def encode(
    code: WiretapCode, m: int, w: int, rng: Optional[np.random.Generator] = None
) -> SequenceIndex:
    """The stored codeword x(m, w), or its random image through the prefix channel."""
    return SequenceIndex(code.x_alphabet, tuple(encode_many(code, m, w, 1, rng)[0]))


def _decode_batch(code: WiretapCode, ys: np.ndarray, joint_xy: JointPmf) -> np.ndarray:
    """Decoded message per output row, -1 where decoding fails."""
    ys = np.atleast_2d(ys)
    flat = code.flat_codewords()
    if flat.shape[0] == 0:
        return np.full(ys.shape[0], -1)

    eps = code.typicality_eps
    if eps is None:
        eps = default_typicality_eps(joint_xy)
    y_size = joint_xy.col_alphabet.size
    cells = joint_xy.row_alphabet.size * y_size
    probs = joint_xy.table.ravel()

    decoded = np.full(ys.shape[0], -1)
    block = max(1, 2**20 // max(flat.shape[0] * code.n, 1))
    for start in range(0, ys.shape[0], block):
        chunk = ys[start : start + block]
        # pair cell index for every (codeword, output, position)
        pairs = flat[:, None, :] * y_size + chunk[None, :, :]
        counts = np.stack([(pairs == c).sum(axis=-1) for c in range(cells)], axis=-1)
        mask = typical_mask(counts.reshape(-1, cells), probs, code.n, eps)
        mask = mask.reshape(flat.shape[0], chunk.shape[0])
        # exactly one typical pair (m, w); the message is its row in the flat codebook
        unique = mask.sum(axis=0) == 1
        winners = np.argmax(mask, axis=0) // code.randomness_count
        decoded[start : start + block] = np.where(unique, winners, -1)
    return decoded


def decode(code: WiretapCode, y: SequenceIndex, joint_xy: JointPmf) -> Union[int, str]:
    """m of the unique pair (m, w) jointly typical with y, else "e"."""
    if y.n != code.n:
        raise ValidationError(f"Output length {y.n} differs from blocklength {code.n}")
    joint_xy.row_alphabet.require_same(code.source.alphabet)
    joint_xy.col_alphabet.require_same(y.alphabet)
    result = int(_decode_batch(code, y.as_array()[None, :], joint_xy)[0])
    return DECODING_FAILURE if result < 0 else result


def _effective_channel(code: WiretapCode, channel: Channel) -> Channel:
    """Stored symbol -> channel output, folding in the prefix channel."""
    if code.prefix is None:
        return channel
    return Channel(code.source.alphabet, channel.output_alphabet, code.prefix.matrix @ channel.matrix)


def decoding_joint(code: WiretapCode, main: Channel) -> JointPmf:
    """Q_{X,Y} (or Q_{U,Y} with a prefix) used by the typicality decoder."""
    return joint_from_channel(code.source, _effective_channel(code, main))


def error_probabilities(
    code: WiretapCode,
    main: Channel,
    mode: str = "exact",
    joint_xy: Optional[JointPmf] = None,
    trials: int = DEFAULT_MC_TRIALS,
    seed: int = 0,
    cap: int = DEFAULT_DENSE_CAP,
) -> ErrorReport:
    """Per-message decoding error e_m averaged over w, exactly or by Monte Carlo."""
    joint_xy = joint_xy or decoding_joint(code, main)
    effective = _effective_channel(code, main)
    y_size = main.output_alphabet.size

    if mode == "exact":
        entries = y_size**code.n
        if entries > cap:
            raise CapExceededError("exact error enumeration", entries, cap, "use monte_carlo mode")
        decoded = _decode_batch(code, all_sequences(y_size, code.n), joint_xy)
        errors = []
        for m in range(code.message_count):
            rows = sequence_channel_rows(code.codewords[m], effective)
            wrong = rows[:, decoded != m].sum(axis=1)
            errors.append(min(1.0, math.fsum(wrong) / code.randomness_count))
        return ErrorReport(per_message=errors, mode="exact")

    if mode == "monte_carlo":
        trials = Validators.validate_count(trials, "trials")
        rng = np.random.Generator(np.random.Philox(Validators.validate_seed(seed)))
        errors, intervals = [], []
        for m in range(code.message_count):
            ws = rng.integers(code.randomness_count, size=trials)
            stored = code.codewords[m][ws]
            ys = _sample_through(effective.matrix, stored, rng)
            failures = int(np.count_nonzero(_decode_batch(code, ys, joint_xy) != m))
            errors.append(failures / trials)
            intervals.append(wilson_interval(failures, trials))
        return ErrorReport(per_message=errors, mode="monte_carlo", trials=trials, intervals=intervals)

    raise ValidationError(f"Unknown error mode {mode!r}; use exact or monte_carlo")


def expurgate(code: WiretapCode, error_vector: Sequence[float]) -> ExpurgationResult:
    """Keep the ceil(|M|/2) messages with the smallest error, ties by index."""
    if len(error_vector) != code.message_count:
        raise ValidationError(
            f"Error vector has {len(error_vector)} entries for {code.message_count} messages"
        )
    if code.message_count == 1:
        logger.warning("Expurgation of a single-message code leaves it unchanged")
        return ExpurgationResult(code=code, kept_messages=[0], unchanged=True)

    keep = math.ceil(code.message_count / 2)
    order = np.argsort(np.asarray(error_vector, dtype=float), kind="stable")
    kept = sorted(int(m) for m in order[:keep])
    result = ExpurgationResult(code=code.with_messages(kept), kept_messages=kept, unchanged=False)
    logger.info(f"Expurgated to {keep} messages, rate {code.rate:.4f} -> {result.realized_rate:.4f}")
    return result


def _leakage(
    conditionals: np.ndarray, reference: np.ndarray, solver: SecrecyCapacitySolver
) -> LeakageReport:
    divergences = []
    for row in conditionals:
        if np.any((row > 0) & (reference <= 0)):
            divergences.append(math.inf)
        else:
            divergences.append(max(0.0, math.fsum(rel_entr(row, reference)) / LN2))

    p, sem, _ = solver.blahut_arimoto(conditionals)
    uniform = np.full(conditionals.shape[0], 1.0 / conditionals.shape[0])
    report = LeakageReport(
        per_message_divergence=divergences,
        exact_sem=max(0.0, sem),
        uniform_leakage=max(0.0, mutual_information_array(uniform, conditionals)),
        optimal_message_pmf=p.tolist(),
    )
    if not report.bound_check:
        raise InvariantViolationError("Sem <= max_m D", report.exact_sem, report.max_divergence)
    return report


def eavesdropper_conditionals_wtc1(code: WiretapCode, eave: Channel, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """P_{Z|M=m}(z) = 2^{-nR~} Σ_w Q^n_{Z|X}(z | x(m, w)), one row per message."""
    entries = eave.output_alphabet.size**code.n
    if entries > cap:
        raise CapExceededError("eavesdropper output enumeration", entries, cap)
    effective = _effective_channel(code, eave)
    return np.vstack(
        [sequence_channel_rows(code.codewords[m], effective).mean(axis=0) for m in range(code.message_count)]
    )


def ss_metric_wtc1(
    code: WiretapCode,
    eave: Channel,
    cap: int = DEFAULT_DENSE_CAP,
    ba_tolerance: float = DEFAULT_BA_TOLERANCE,
) -> LeakageReport:
    """Exact max over P_M of I(M;Z) plus per-message divergences to Q_Z^n."""
    eave.input_alphabet.require_same(code.x_alphabet)
    conditionals = eavesdropper_conditionals_wtc1(code, eave, cap)
    reference = product_pmf(channel_output_pmf(eave, code.input_pmf), code.n)
    report = _leakage(conditionals, reference, SecrecyCapacitySolver(ba_tolerance=ba_tolerance))
    logger.info(f"WTC I leakage: Sem={report.exact_sem:.6e} bits, max D={report.max_divergence:.6e}")
    return report


def eavesdropper_conditional_wtc2(code: WiretapCode, S: Sequence[int], m: int) -> np.ndarray:
    """Distribution of the observed substring x(m, W)^S over X^{|S|}."""
    positions = list(S)
    if len(set(positions)) != len(positions) or any(not 0 <= i < code.n for i in positions):
        raise ValidationError(f"Invalid observation set {positions} for n={code.n}")
    if not 0 <= m < code.message_count:
        raise ValidationError(f"Message {m} outside [0, {code.message_count})")
    observed = code.codewords[m][:, positions]
    return sequence_channel_rows(observed, code.symbol_channel).mean(axis=0)


def _subsets(n: int, mu: int, mode: str, samples: int, seed: int) -> Tuple[List[Tuple[int, ...]], bool]:
    if mode == "exhaustive":
        return list(itertools.combinations(range(n), mu)), False
    rng = np.random.Generator(np.random.Philox(seed))
    chosen: Dict[Tuple[int, ...], None] = {}
    for _ in range(samples):
        chosen[tuple(sorted(int(i) for i in rng.choice(n, mu, replace=False)))] = None
    return list(chosen), True


def ss_metric_wtc2(
    code: WiretapCode,
    alpha: float,
    mode: str = "exhaustive",
    samples: int = 1000,
    seed: int = 0,
    cap_subsets: int = DEFAULT_SUBSET_CAP,
    cap_dense: int = DEFAULT_DENSE_CAP,
    threads: int = 1,
    ba_tolerance: float = DEFAULT_BA_TOLERANCE,
) -> SubsetLeakage:
    """Leakage to an eavesdropper observing floor(alpha n) chosen positions.

    Exhaustive mode evaluates every subset; sampled mode evaluates `samples`
    random subsets and marks the result as sampled.
    """
    alpha = Validators.validate_unit_interval(alpha, "alpha")
    mu = int(math.floor(alpha * code.n))
    x_size = code.x_alphabet.size
    if x_size**mu > cap_dense:
        raise CapExceededError("observed substring enumeration", x_size**mu, cap_dense)

    if mode not in ("exhaustive", "sampled"):
        raise ValidationError(f"Unknown subset mode {mode!r}; use exhaustive or sampled")
    evaluations = math.comb(code.n, mu) * code.message_count
    if mode == "exhaustive" and evaluations > cap_subsets:
        raise CapExceededError(
            "exhaustive subset evaluation", evaluations, cap_subsets, "use sampled mode"
        )

    subsets, sampled = _subsets(code.n, mu, mode, samples, seed)
    if sampled:
        logger.warning(f"Sampled {len(subsets)} of {math.comb(code.n, mu)} subsets; maximum is partial")

    reference = product_pmf(code.input_pmf, mu)
    solver = SecrecyCapacitySolver(ba_tolerance=ba_tolerance)

    def evaluate(subset: Tuple[int, ...]) -> LeakageReport:
        conditionals = np.vstack(
            [eavesdropper_conditional_wtc2(code, subset, m) for m in range(code.message_count)]
        )
        return _leakage(conditionals, reference, solver)

    with ThreadPoolExecutor(max_workers=Validators.validate_count(threads, "threads")) as pool:
        reports = list(pool.map(evaluate, subsets))

    result = SubsetLeakage(mu=mu, per_subset=dict(zip(subsets, reports)), sampled=sampled)
    logger.info(
        f"WTC II leakage mu={mu}: max Sem={result.max_over_subsets:.6e} bits over "
        f"{len(subsets)} subsets"
    )
    return result


def full_observation_divergence(
    code: WiretapCode, S: Sequence[int], m: int, cap: int = DEFAULT_DENSE_CAP
) -> DecompositionCheck:
    """D over all of Z^n against the reference Gamma^(S), next to the substring form.

    Outside S every position is the erasure symbol under both distributions.
    """
    positions = set(S)
    x_alphabet = code.x_alphabet
    z_alphabet = x_alphabet.with_erasure()
    entries = z_alphabet.size**code.n
    if entries > cap:
        raise CapExceededError("full observation enumeration", entries, cap)

    symbol = code.symbol_channel.matrix
    observe = np.hstack([symbol, np.zeros((symbol.shape[0], 1))])
    erase = np.hstack([np.zeros_like(symbol), np.ones((symbol.shape[0], 1))])
    channels = [
        Channel(code.source.alphabet, z_alphabet, observe if i in positions else erase)
        for i in range(code.n)
    ]
    conditional = sequence_channel_rows(code.codewords[m], channels).mean(axis=0)

    qx = code.input_pmf.probs
    observed_ref = np.append(qx, 0.0)
    erased_ref = np.append(np.zeros_like(qx), 1.0)
    reference = np.ones(1)
    for i in range(code.n):
        reference = np.outer(reference, observed_ref if i in positions else erased_ref).ravel()

    substring = eavesdropper_conditional_wtc2(code, sorted(positions), m)
    substring_ref = product_pmf(code.input_pmf, len(positions))

    def divergence(p: np.ndarray, q: np.ndarray) -> Bits:
        if np.any((p > 0) & (q <= 0)):
            return math.inf
        return max(0.0, math.fsum(rel_entr(p, q)) / LN2)

    return DecompositionCheck(
        full_divergence=divergence(conditional, reference),
        substring_divergence=divergence(substring, substring_ref),
    )


def rate_constraints(
    qx: Pmf,
    main: Channel,
    R: float,
    R_tilde: float,
    eave: Optional[Channel] = None,
    alpha: Optional[float] = None,
) -> RateConstraints:
    """Reliability R + R~ < I(X;Y); secrecy R~ > I(X;Z) (type I) or R~ > alpha H(X) (type II)."""
    if (eave is None) == (alpha is None):
        raise ValidationError("rate_constraints needs exactly one of eave or alpha")
    reliability = mutual_information(joint_from_channel(qx, main)) - R - R_tilde
    if eave is not None:
        leakage_rate = mutual_information(joint_from_channel(qx, eave))
    else:
        leakage_rate = Validators.validate_unit_interval(alpha, "alpha") * entropy(qx)
    return RateConstraints(reliability_margin=reliability, secrecy_margin=R_tilde - leakage_rate)


def sanov_bound(
    n: int, alpha: float, beta: float, x_alphabet_size: int, delta: Optional[float] = None
) -> SanovBound:
    """(n+1)^2 2^{-n D_b(delta, beta)} n log2(|X| + 1), delta defaulting to (alpha+beta)/2."""
    n = Validators.validate_blocklength(n)
    alpha = Validators.validate_unit_interval(alpha, "alpha")
    beta = Validators.validate_unit_interval(beta, "beta")
    if beta >= alpha:
        raise ValidationError(f"beta must be below alpha, got beta={beta}, alpha={alpha}")
    delta = (alpha + beta) / 2.0 if delta is None else delta
    if not beta <= delta <= alpha:
        raise ValidationError(f"delta must lie in [beta, alpha], got {delta}")

    d_b = binary_divergence(delta, beta)
    log2_value = (
        2.0 * math.log2(n + 1)
        - n * d_b
        + math.log2(n * math.log2(Validators.validate_count(x_alphabet_size, "x_alphabet_size") + 1))
    )
    return SanovBound(n=n, delta=delta, binary_divergence=d_b, value=2.0**log2_value)


def sanov_crossover(
    alpha: float,
    beta: float,
    x_alphabet_size: int,
    threshold: float,
    delta: Optional[float] = None,
    n_max: int = 10**6,
) -> Optional[int]:
    """Smallest n whose Sanov bound falls below `threshold`."""
    threshold = Validators.validate_positive(threshold, "threshold")
    for n in range(1, n_max + 1):
        if sanov_bound(n, alpha, beta, x_alphabet_size, delta).value < threshold:
            return n
    return None
