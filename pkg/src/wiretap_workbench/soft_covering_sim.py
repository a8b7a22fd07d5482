"""
Exact finite-blocklength soft-covering experiments.

A random codebook of 2^{round(nR)} i.i.d. Q_U^n codewords is pushed through a
memoryless channel; the induced output distribution over all |V|^n sequences
is computed exactly and compared with Q_V^n. The typical/atypical split of the
induced distribution and the per-codebook divergence bound are evaluated on the
same enumeration.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from .config import DEFAULT_ALPHA_GRID_POINTS, DEFAULT_CODEBOOK_CAP, DEFAULT_DENSE_CAP
from .exceptions import CapExceededError, InvariantViolationError, ValidationError
from .exponents import (
    BoundValue,
    ExponentParams,
    beta_alpha_delta,
    c_alpha_delta,
    c_delta,
    epsilon_alpha_delta,
    failure_probability_bound,
    gamma_delta,
    good_set_thresholds,
    maximize_beta,
)
from .info_measures import LN2, Bits, binary_entropy, information_density_matrix, mutual_information
from .probability_core import (
    Alphabet,
    Channel,
    JointPmf,
    Pmf,
    SequenceIndex,
    joint_from_channel,
    product_pmf,
    sequence_channel_rows,
    wilson_interval,
)
from .validators import Validators

logger = logging.getLogger(__name__)

# Upper bound on the number of float entries materialised per codeword chunk.
CHUNK_ENTRIES = 2**22
# Slack on the divergence <= split bound check.
BOUND_SLACK = 1e-9
# Information-density sums within this distance of the threshold count as atypical.
TYPICAL_SET_SLACK = 1e-12


def codebook_size(n: int, rate: float) -> int:
    """|W| = 2^{round(nR)}."""
    return 2 ** int(round(n * rate))


@dataclass(frozen=True, eq=False)
class Codebook:
    """Codewords as a read-only (|W|, n) array of U-symbol indices."""

    qu: Pmf
    n: int
    rate: float
    codewords: np.ndarray
    seed: int

    def __post_init__(self):
        codewords = np.array(self.codewords, dtype=np.int64, ndmin=2)
        if codewords.shape[1] != self.n:
            raise ValidationError(f"Codewords have length {codewords.shape[1]}, expected {self.n}")
        codewords.setflags(write=False)
        object.__setattr__(self, "codewords", codewords)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def realized_rate(self) -> float:
        """log2 |W| / n, used in every exponent formula."""
        return math.log2(self.size) / self.n

    def codeword(self, w: int) -> SequenceIndex:
        return SequenceIndex(self.qu.alphabet, tuple(self.codewords[w]))


@dataclass(frozen=True, eq=False)
class InducedDistribution:
    """P_V^{(B_n)} over V^n, dense vector or sparse {sequence integer: mass} map."""

    n: int
    v_alphabet: Alphabet
    probs: Optional[np.ndarray] = None
    sparse: Optional[Dict[int, float]] = None

    @property
    def is_dense(self) -> bool:
        return self.probs is not None

    def items(self) -> Iterator[Tuple[int, float]]:
        """(sequence integer, mass) pairs with positive mass, in integer order."""
        if self.is_dense:
            for index in np.flatnonzero(self.probs > 0):
                yield int(index), float(self.probs[index])
        else:
            for index in sorted(self.sparse):
                yield index, self.sparse[index]

    def total(self) -> float:
        return math.fsum(mass for _, mass in self.items())


@dataclass(frozen=True)
class DivergenceResult:
    value: Bits
    cap: Bits
    offending_sequence: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class SplitReport:
    """Typical/atypical split of one codebook's induced distribution."""

    eps: float
    p2_mass: float
    delta1_max: float
    delta2_max: float
    delta2_cap: float
    split_bound: Bits
    exact_divergence: Bits
    p2_threshold: Optional[float] = None
    delta1_threshold: Optional[float] = None
    prediction: Optional[Dict[str, float]] = None

    @property
    def in_good_set(self) -> Optional[bool]:
        """Membership in the set of good codebooks, when thresholds are known."""
        if self.p2_threshold is None:
            return None
        return (
            self.p2_mass < self.p2_threshold
            and self.delta1_max < self.delta1_threshold
            and self.delta2_max <= self.delta2_cap * (1.0 + 1e-12)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "p2_mass": self.p2_mass,
            "delta1_max": self.delta1_max,
            "delta2_max": self.delta2_max,
            "delta2_cap": self.delta2_cap,
            "split_bound": self.split_bound,
            "exact_divergence": self.exact_divergence,
            "p2_threshold": self.p2_threshold,
            "delta1_threshold": self.delta1_threshold,
            "in_good_set": self.in_good_set,
            "prediction": self.prediction,
        }


def sample_codebook(
    qu: Pmf, n: int, R: float, seed: int, cap: int = DEFAULT_CODEBOOK_CAP
) -> Codebook:
    """Draw 2^{round(nR)} codewords i.i.d. from qu with a Philox generator."""
    n = Validators.validate_blocklength(n)
    R = Validators.validate_positive(R, "rate")
    seed = Validators.validate_seed(seed)

    exponent = int(round(n * R))
    if exponent > 62 or 2**exponent > cap:
        raise CapExceededError("codebook", 2**exponent, cap, "lower the rate or blocklength")

    rng = np.random.Generator(np.random.Philox(seed))
    codewords = rng.choice(qu.size, size=(2**exponent, n), p=qu.probs)
    return Codebook(qu=qu, n=n, rate=R, codewords=codewords, seed=seed)


def _chunks(count: int, width: int) -> Iterator[slice]:
    step = max(1, CHUNK_ENTRIES // max(width, 1))
    for start in range(0, count, step):
        yield slice(start, min(start + step, count))


def _dense_entries(size: int, n: int, cap: int) -> int:
    entries = size**n
    if entries > cap:
        raise CapExceededError(
            "dense enumeration of output sequences", entries, cap, "use sparse mode"
        )
    return entries


def _sparse_induced(cb: Codebook, ch: Channel) -> Dict[int, float]:
    size = ch.output_alphabet.size
    supports = [np.flatnonzero(row > 0) for row in ch.matrix]
    weight = 1.0 / cb.size
    accumulator: Dict[int, float] = {}

    for codeword in cb.codewords:
        letters = [supports[x] for x in codeword]
        for outputs in itertools.product(*letters):
            index = 0
            mass = weight
            for x, y in zip(codeword, outputs):
                index = index * size + int(y)
                mass *= ch.matrix[x, y]
            accumulator[index] = accumulator.get(index, 0.0) + mass
    return accumulator


def induced_distribution(
    cb: Codebook,
    ch: Channel,
    cap: int = DEFAULT_DENSE_CAP,
    sparse: bool = False,
) -> InducedDistribution:
    """P(v) = 2^{-nR} Σ_w Q^n(v | u(w)) over every output sequence.

    Raises:
        CapExceededError: |V|^n above the dense cap and sparse mode not requested
    """
    cb.qu.alphabet.require_same(ch.input_alphabet)
    size = ch.output_alphabet.size

    if sparse:
        logger.debug(f"Sparse induced distribution: n={cb.n}, |W|={cb.size}")
        return InducedDistribution(cb.n, ch.output_alphabet, sparse=_sparse_induced(cb, ch))

    width = _dense_entries(size, cb.n, cap)
    probs = np.zeros(width)
    for block in _chunks(cb.size, width):
        probs += sequence_channel_rows(cb.codewords[block], ch).sum(axis=0)
    probs /= cb.size
    return InducedDistribution(cb.n, ch.output_alphabet, probs=probs)


def _sequence_probability(qv: Pmf, index: int, n: int) -> float:
    size = qv.size
    mass = 1.0
    for _ in range(n):
        index, digit = divmod(index, size)
        mass *= qv.probs[digit]
    return mass


def soft_covering_divergence(ind: InducedDistribution, qv: Pmf) -> DivergenceResult:
    """Exact D(P_V^{(B_n)} || Q_V^n) in bits, plus the a.s. cap n log2(1/mu_V).

    Terms are summed with fsum in sequence-integer order.
    """
    qv.alphabet.require_same(ind.v_alphabet)
    cap = ind.n * -math.log2(qv.min_support_probability())

    terms = []
    reference = product_pmf(qv, ind.n) if ind.is_dense else None
    for index, mass in ind.items():
        q = reference[index] if reference is not None else _sequence_probability(qv, index, ind.n)
        if q <= 0:
            offending = SequenceIndex.from_int(ind.v_alphabet, ind.n, index).symbols()
            logger.warning(f"Induced mass on a Q_V^n-null sequence {offending}")
            return DivergenceResult(value=math.inf, cap=cap, offending_sequence=offending)
        terms.append(float(rel_entr(mass, q)))

    return DivergenceResult(value=max(0.0, math.fsum(terms) / LN2), cap=cap)


def _atypical(density_sums: np.ndarray, n: int, threshold: float) -> np.ndarray:
    """(1/n) i(u, v) >= I + eps, i.e. outside the typical set A_eps."""
    return density_sums >= n * threshold - TYPICAL_SET_SLACK * n


def split_distribution(
    cb: Codebook, ch: Channel, joint: JointPmf, eps: float, cap: int = DEFAULT_DENSE_CAP
) -> Tuple[np.ndarray, np.ndarray]:
    """P_1 (typical part) and P_2 (atypical part) of the induced distribution.

    Both are dense over all |V|^n output sequences and P_1 + P_2 = P_{V^n|C}.
    """
    joint.row_alphabet.require_same(cb.qu.alphabet)
    joint.col_alphabet.require_same(ch.output_alphabet)
    eps = Validators.validate_non_negative(eps, "eps")
    width = _dense_entries(ch.output_alphabet.size, cb.n, cap)
    density = information_density_matrix(joint)
    threshold = mutual_information(joint) + eps

    p1 = np.zeros(width)
    p2 = np.zeros(width)
    for block in _chunks(cb.size, width):
        codewords = cb.codewords[block]
        count = codewords.shape[0]
        rows = np.ones((count, 1))
        sums = np.zeros((count, 1))
        for t in range(cb.n):
            rows = (rows[:, :, None] * ch.matrix[codewords[:, t]][:, None, :]).reshape(count, -1)
            sums = (sums[:, :, None] + density[codewords[:, t]][:, None, :]).reshape(count, -1)
        atypical = _atypical(sums, cb.n, threshold)
        p2 += np.where(atypical, rows, 0.0).sum(axis=0)
        p1 += np.where(atypical, 0.0, rows).sum(axis=0)
    return p1 / cb.size, p2 / cb.size


def split_report(
    cb: Codebook,
    ch: Channel,
    joint: JointPmf,
    eps: Optional[float] = None,
    delta: Optional[float] = None,
    alpha: Optional[float] = None,
    cap: int = DEFAULT_DENSE_CAP,
    check: bool = True,
) -> SplitReport:
    """Split the induced distribution by the typical set A_eps and bound D.

    When `delta` is given the good-codebook thresholds and the exponent
    prediction c_{alpha,delta} n 2^{-n beta_{alpha,delta}} are attached; `eps`
    then defaults to eps_{alpha,delta} at the grid-optimal alpha.
    """
    qv = joint.col_marginal()
    params = None
    if delta is not None:
        params = ExponentParams(joint=joint, rate=cb.realized_rate, delta=delta, n=cb.n)
        if alpha is None:
            alpha = maximize_beta(params).alpha_star
        if eps is None:
            eps = max(0.0, epsilon_alpha_delta(params, alpha))
    if eps is None:
        raise ValidationError("split_report needs eps or delta")
    eps = Validators.validate_non_negative(eps, "eps")
    p1, p2 = split_distribution(cb, ch, joint, eps, cap)

    reference = product_pmf(qv, cb.n)
    positive = reference > 0
    if np.any((p1 + p2 > 0) & ~positive):
        raise ValidationError("Induced distribution is not absolutely continuous w.r.t. Q_V^n")

    with np.errstate(divide="ignore", invalid="ignore"):
        delta1 = np.where(positive, p1 / reference, 0.0)
        delta2 = np.where(positive, p2 / reference, 0.0)

    p1_mass = min(1.0, math.fsum(p1))
    p2_mass = min(1.0, max(0.0, math.fsum(p2)))
    term1 = math.fsum(rel_entr(p1, reference)) / LN2
    term2 = math.fsum(rel_entr(p2, reference)) / LN2
    bound = binary_entropy(p1_mass) + term1 + term2
    exact = max(0.0, math.fsum(rel_entr(p1 + p2, reference)) / LN2)

    if check and exact > bound + BOUND_SLACK:
        raise InvariantViolationError("divergence <= split bound", exact, bound)

    report = SplitReport(
        eps=eps,
        p2_mass=p2_mass,
        delta1_max=float(delta1.max()),
        delta2_max=float(delta2.max()),
        delta2_cap=2.0 ** (cb.n * -math.log2(qv.min_support_probability())),
        split_bound=bound,
        exact_divergence=exact,
    )

    if params is not None:
        thresholds = good_set_thresholds(params, alpha)
        beta = beta_alpha_delta(params, alpha)
        report = replace(
            report,
            p2_threshold=thresholds.p2_threshold,
            delta1_threshold=thresholds.delta1_threshold,
            prediction={
                "alpha": alpha,
                "beta": beta,
                "epsilon": eps,
                "threshold": c_alpha_delta(qv, params, alpha) * cb.n * 2.0 ** (-cb.n * beta),
            },
        )
    return report


def _type_compositions(n: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _type_compositions(n - first, parts - 1):
            yield (first,) + rest


def _joint_types(joint: JointPmf, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Log-probability and information-density sum of every joint type.

    Only positive-mass cells enter; the density sum of a pair sequence depends
    on it only through its type.
    """
    flat = joint.table.ravel()
    cells = np.flatnonzero(flat > 0)
    densities = information_density_matrix(joint).ravel()[cells]
    log_probs = np.log(flat[cells])
    log_n_fact = math.lgamma(n + 1)

    log_masses, sums = [], []
    for counts in _type_compositions(n, cells.size):
        counts_arr = np.asarray(counts)
        log_masses.append(
            log_n_fact - sum(math.lgamma(c + 1) for c in counts) + float(counts_arr @ log_probs)
        )
        sums.append(float(counts_arr @ densities))
    return np.asarray(log_masses), np.asarray(sums)


def atypicality_probability(joint: JointPmf, n: int, eps: float) -> float:
    """Exact P_{Q^n_{U,V}}((U, V) not in A_eps), by joint-type enumeration."""
    n = Validators.validate_blocklength(n)
    eps = Validators.validate_non_negative(eps, "eps")
    log_masses, sums = _joint_types(joint, n)
    atypical = _atypical(sums, n, mutual_information(joint) + eps)
    return min(1.0, math.fsum(np.exp(log_masses[atypical])))


def expected_divergence_jensen(joint: JointPmf, n: int, words: int) -> Bits:
    """Upper bound on E_C[D(P_{V^n|C} || Q_V^n)] for i.i.d. codebooks of `words` codewords.

    E_{Q^n_{U,V}}[log2(1 + (2^{i(U^n;V^n)} - 1) / |W|)], evaluated exactly over
    joint types.
    """
    n = Validators.validate_blocklength(n)
    size = Validators.validate_count(words, "words")
    log_masses, sums = _joint_types(joint, n)
    rest = math.log2((size - 1) / size) if size > 1 else -math.inf
    values = np.logaddexp2(sums - math.log2(size), rest)
    return max(0.0, math.fsum(np.exp(log_masses) * values))


@dataclass(frozen=True)
class TrialRecord:
    n: int
    trial: int
    seed: int
    codebook_size: int
    divergence: Bits
    threshold: float
    exceeded: bool

    def to_row(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "trial": self.trial,
            "seed": self.seed,
            "codebook_size": self.codebook_size,
            "divergence": self.divergence,
            "threshold": self.threshold,
            "exceeded": int(self.exceeded),
        }


@dataclass(frozen=True)
class EnsembleRow:
    """Per-blocklength summary over all trials."""

    n: int
    realized_rate: float
    mean: Bits
    median: Bits
    max: Bits
    gamma_delta: Bits
    c_delta: float
    threshold: float
    exceed_fraction: float
    exceed_interval: Tuple[float, float]
    failure_bound: Optional[BoundValue]

    @property
    def within_failure_bound(self) -> Optional[bool]:
        if self.failure_bound is None or self.failure_bound.raw >= 1.0:
            return None
        return self.exceed_fraction <= self.failure_bound.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "realized_rate": self.realized_rate,
            "mean_divergence": self.mean,
            "median_divergence": self.median,
            "max_divergence": self.max,
            "gamma_delta": self.gamma_delta,
            "c_delta": self.c_delta,
            "threshold": self.threshold,
            "exceed_fraction": self.exceed_fraction,
            "exceed_wilson_99": list(self.exceed_interval),
            "failure_bound": self.failure_bound.to_dict() if self.failure_bound else None,
            "within_failure_bound": self.within_failure_bound,
        }


@dataclass
class EnsembleResult:
    rate: float
    delta: float
    seed: int
    rows: List[EnsembleRow] = field(default_factory=list)
    trials: List[TrialRecord] = field(default_factory=list)

    def slope(self) -> float:
        """Least-squares slope of log2(mean D) against n."""
        if len(self.rows) < 2:
            raise ValidationError("Slope needs at least two blocklengths")
        ns = np.array([row.n for row in self.rows], dtype=float)
        means = np.maximum([row.mean for row in self.rows], np.finfo(float).tiny)
        return float(np.polyfit(ns, np.log2(means), 1)[0])

    def to_dict(self) -> Dict[str, Any]:
        summary = {
            "rate": self.rate,
            "delta": self.delta,
            "seed": self.seed,
            "rows": [row.to_dict() for row in self.rows],
        }
        if len(self.rows) >= 2:
            summary["slope_log2_mean_divergence"] = self.slope()
        return summary


def trial_seed(seed: int, n: int, trial: int) -> int:
    """Seed of one trial, derived from (seed, n, trial) alone."""
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1, dtype=np.uint64)[0])


class EnsembleRunner:
    """Runs independent codebook trials and summarises them per blocklength."""

    def __init__(
        self,
        threads: int = 1,
        cap_dense: int = DEFAULT_DENSE_CAP,
        cap_codebook: int = DEFAULT_CODEBOOK_CAP,
        grid_points: int = DEFAULT_ALPHA_GRID_POINTS,
    ):
        self.threads = Validators.validate_count(threads, "threads")
        self.cap_dense = cap_dense
        self.cap_codebook = cap_codebook
        self.grid_points = grid_points
        self.logger = logging.getLogger(__name__)

    def _run_trial(
        self, qu: Pmf, ch: Channel, qv: Pmf, R: float, n: int, trial: int, seed: int, threshold: float
    ) -> TrialRecord:
        cb = sample_codebook(qu, n, R, trial_seed(seed, n, trial), cap=self.cap_codebook)
        ind = induced_distribution(cb, ch, cap=self.cap_dense)
        divergence = soft_covering_divergence(ind, qv).value
        self.logger.debug(f"n={n} trial={trial} D={divergence:.6e}")
        return TrialRecord(
            n=n,
            trial=trial,
            seed=cb.seed,
            codebook_size=cb.size,
            divergence=divergence,
            threshold=threshold,
            exceeded=divergence > threshold,
        )

    def run(
        self,
        qu: Pmf,
        ch: Channel,
        R: float,
        delta: float,
        n_list: Sequence[int],
        trials: int,
        seed: int,
    ) -> EnsembleResult:
        trials = Validators.validate_count(trials, "trials")
        seed = Validators.validate_seed(seed)
        delta = Validators.validate_non_negative(delta, "delta")
        joint = joint_from_channel(qu, ch)
        qv = joint.col_marginal()

        for n in n_list:
            _dense_entries(ch.output_alphabet.size, Validators.validate_blocklength(n), self.cap_dense)

        result = EnsembleResult(rate=R, delta=delta, seed=seed)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for n in n_list:
                realized = math.log2(codebook_size(n, R)) / n
                params = ExponentParams(joint=joint, rate=realized, delta=delta, n=n)
                gamma = gamma_delta(params, self.grid_points)
                coefficient = c_delta(qv, params, self.grid_points)
                threshold = coefficient * n * 2.0 ** (-n * gamma)

                records = list(
                    pool.map(
                        lambda t: self._run_trial(qu, ch, qv, R, n, t, seed, threshold),
                        range(trials),
                    )
                )
                divergences = np.array([r.divergence for r in records])
                exceedances = sum(r.exceeded for r in records)

                row = EnsembleRow(
                    n=n,
                    realized_rate=realized,
                    mean=float(divergences.mean()),
                    median=float(np.median(divergences)),
                    max=float(divergences.max()),
                    gamma_delta=gamma,
                    c_delta=coefficient,
                    threshold=threshold,
                    exceed_fraction=exceedances / trials,
                    exceed_interval=wilson_interval(exceedances, trials),
                    failure_bound=failure_probability_bound(n, delta, qv.size) if delta > 0 else None,
                )
                result.rows.append(row)
                result.trials.extend(records)
                self.logger.info(
                    f"Ensemble n={n}: mean D={row.mean:.4e} bits, "
                    f"{exceedances}/{trials} above threshold {threshold:.4e}"
                )

        return result


def ensemble_experiment(
    qu: Pmf,
    ch: Channel,
    R: float,
    delta: float,
    n_list: Sequence[int],
    trials: int,
    seed: int,
    threads: int = 1,
    cap_dense: int = DEFAULT_DENSE_CAP,
) -> EnsembleResult:
    """Exact divergence of `trials` independent codebooks at each n in n_list."""
    return EnsembleRunner(threads=threads, cap_dense=cap_dense).run(
        qu, ch, R, delta, n_list, trials, seed
    )
