"""
Closed-form soft-covering exponents and concentration bounds.

Everything here is evaluated from a joint PMF Q_{U,V}, a rate R and a slack
delta: the Rényi-divergence exponents of the atypical mass, the optimised
exponent gamma_delta with its coefficient c_delta, the doubly-exponential
failure bound, the Chernoff bound in both forms and the expected-divergence
bound. Probability bounds are clamped to [0, 1] with the raw value kept.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT_ALPHA_GRID_POINTS
from .exceptions import ValidationError
from .info_measures import LN2, LOG2_E, Bits, mutual_information, renyi_divergence_array
from .probability_core import JointPmf, Pmf, wilson_interval
from .validators import Validators

logger = logging.getLogger(__name__)

# Range of alpha - 1 searched for the supremum over alpha.
ALPHA_MINUS_ONE_RANGE = (1e-4, 1e4)
# Beyond this many nats the doubly-exponential term is treated as zero.
MAX_LOG_NATS = 1e300


@dataclass(frozen=True)
class ExponentParams:
    """Q_{U,V}, rate R, slack delta and optional blocklength n."""

    joint: JointPmf
    rate: float
    delta: float
    n: Optional[int] = None

    def __post_init__(self):
        Validators.validate_non_negative(self.rate, "rate")
        Validators.validate_non_negative(self.delta, "delta")
        if self.n is not None:
            Validators.validate_blocklength(self.n)

    @cached_property
    def mutual_info(self) -> Bits:
        return mutual_information(self.joint)

    @cached_property
    def output_pmf(self) -> Pmf:
        return self.joint.col_marginal()

    def d_alpha(self, alphas) -> np.ndarray:
        """d_alpha(Q_{U,V}, Q_U Q_V) for an array of orders."""
        product = self.joint.product_of_marginals()
        return renyi_divergence_array(self.joint.table, product.table, alphas)


@dataclass(frozen=True)
class AlphaSearch:
    """Outcome of the supremum over alpha of beta_{alpha,delta}."""

    alpha_star: float
    grid_value: Bits
    value: Bits
    clamped: bool


@dataclass(frozen=True)
class ExponentReport:
    alpha_star: Optional[float]
    epsilon: Optional[Bits]
    beta: Optional[Bits]
    gamma_delta: Bits
    c_delta: float
    gamma_star: Bits
    failure_bound: Optional["BoundValue"]
    mutual_info: Bits
    rate: float
    delta: float
    n: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha_star": self.alpha_star,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "gamma_delta": self.gamma_delta,
            "c_delta": self.c_delta,
            "gamma_star": self.gamma_star,
            "failure_bound": self.failure_bound.to_dict() if self.failure_bound else None,
            "mutual_information": self.mutual_info,
            "rate": self.rate,
            "delta": self.delta,
            "n": self.n,
        }


@dataclass(frozen=True)
class BoundValue:
    """A probability bound: clamped value, raw value and natural log of raw."""

    value: float
    raw: float
    log_raw: float

    @property
    def clamped(self) -> bool:
        return self.raw > 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "raw": self.raw,
            "log_raw": self.log_raw,
            "clamped": self.clamped,
        }


@dataclass(frozen=True)
class ChernoffBounds:
    ratio: float
    exact: float
    quadratic: Optional[float]

    @property
    def quadratic_dominates(self) -> Optional[bool]:
        """Quadratic form >= exact form; only defined for c/mu in [1, 2]."""
        if self.quadratic is None:
            return None
        return self.exact <= self.quadratic * (1.0 + 1e-12)


@dataclass(frozen=True)
class GoodSetThresholds:
    """Thresholds defining the set of good codebooks at one alpha."""

    alpha: float
    beta: Bits
    p2_threshold: float
    delta1_threshold: float
    delta2_cap: float


def _bound_from_log(log_raw: float) -> BoundValue:
    raw = math.exp(log_raw) if log_raw < 709.0 else math.inf
    return BoundValue(value=min(1.0, raw), raw=raw, log_raw=log_raw)


def _exp2(x: float) -> float:
    return math.exp(x * LN2) if x * LN2 < 709.0 else math.inf


def epsilon_alpha_delta(params: ExponentParams, alpha: float) -> Bits:
    """eps = [(R - delta)/2 + (alpha - 1) d_alpha] / [1/2 + alpha - 1] - I."""
    alpha = Validators.validate_renyi_order(alpha)
    d_alpha = float(params.d_alpha(alpha)[0])
    if math.isinf(d_alpha):
        return math.inf
    numerator = 0.5 * (params.rate - params.delta) + (alpha - 1.0) * d_alpha
    return numerator / (0.5 + alpha - 1.0) - params.mutual_info


def beta_alpha_epsilon(params: ExponentParams, alpha: float, eps: float) -> Bits:
    """Exponent of the expected atypical mass: (alpha - 1)(I + eps - d_alpha)."""
    alpha = Validators.validate_renyi_order(alpha)
    d_alpha = float(params.d_alpha(alpha)[0])
    if math.isinf(d_alpha):
        return -math.inf
    return (alpha - 1.0) * (params.mutual_info + eps - d_alpha)


def _beta_values(params: ExponentParams, alphas: np.ndarray) -> np.ndarray:
    d_alpha = params.d_alpha(alphas)
    values = (alphas - 1.0) / (2.0 * alphas - 1.0) * (params.rate - params.delta - d_alpha)
    return np.where(np.isinf(d_alpha), -np.inf, values)


def beta_alpha_delta(params: ExponentParams, alpha: float) -> Bits:
    """beta = ((alpha - 1)/(2 alpha - 1))(R - delta - d_alpha); may be negative."""
    alpha = Validators.validate_renyi_order(alpha)
    return float(_beta_values(params, np.array([alpha]))[0])


def alpha_grid(points: int = DEFAULT_ALPHA_GRID_POINTS) -> np.ndarray:
    """Logarithmic grid with alpha - 1 spanning ALPHA_MINUS_ONE_RANGE."""
    low, high = ALPHA_MINUS_ONE_RANGE
    return 1.0 + np.logspace(math.log10(low), math.log10(high), points)


def maximize_beta(
    params: ExponentParams, grid_points: int = DEFAULT_ALPHA_GRID_POINTS
) -> AlphaSearch:
    """Grid search over alpha plus a bounded refinement around the best point.

    Grid points where d_alpha is infinite are skipped. The reported alpha_star
    is the grid argmax; `value` is the refined supremum clamped at 0.
    """
    alphas = alpha_grid(grid_points)
    values = _beta_values(params, alphas)
    finite = np.isfinite(values)
    if not np.any(finite):
        logger.warning("d_alpha is infinite on the whole alpha grid; gamma_delta = 0")
        return AlphaSearch(alpha_star=float(alphas[0]), grid_value=-math.inf, value=0.0, clamped=True)

    best = int(np.argmax(np.where(finite, values, -np.inf)))
    grid_value = float(values[best])

    log_offsets = np.log10(alphas - 1.0)
    low = log_offsets[max(best - 1, 0)]
    high = log_offsets[min(best + 1, alphas.size - 1)]

    def negative_beta(t: float) -> float:
        value = _beta_values(params, np.array([1.0 + 10.0**t]))[0]
        return -value if np.isfinite(value) else math.inf

    refined = grid_value
    if high > low:
        result = minimize_scalar(negative_beta, bounds=(low, high), method="bounded")
        if np.isfinite(result.fun):
            refined = max(grid_value, -float(result.fun))

    return AlphaSearch(
        alpha_star=float(alphas[best]),
        grid_value=grid_value,
        value=max(refined, 0.0),
        clamped=refined <= 0.0,
    )


def gamma_delta(
    params: ExponentParams, grid_points: int = DEFAULT_ALPHA_GRID_POINTS
) -> Bits:
    """sup over alpha > 1 of beta_{alpha,delta}, clamped at 0.

    Equals 0 whenever delta >= R - I(U;V), since d_alpha >= I(U;V).
    """
    if params.delta >= params.rate - params.mutual_info:
        return 0.0
    return maximize_beta(params, grid_points).value


def gamma_star(params: ExponentParams, grid_points: int = DEFAULT_ALPHA_GRID_POINTS) -> Bits:
    """Best achievable exponent: gamma_delta at delta -> 0."""
    return gamma_delta(replace(params, delta=0.0), grid_points)


def _log2_max_inverse(qv: Pmf) -> float:
    return -math.log2(qv.min_support_probability())


def c_alpha_delta(qv: Pmf, params: ExponentParams, alpha: float) -> float:
    """c_{alpha,delta} = 3 log e + 2 beta_{alpha,delta} + 2 log max 1/Q_V, in bits."""
    beta = beta_alpha_delta(params, alpha)
    return 3.0 * LOG2_E + 2.0 * beta + 2.0 * _log2_max_inverse(qv)


def c_delta(
    qv: Pmf, params: ExponentParams, grid_points: int = DEFAULT_ALPHA_GRID_POINTS
) -> float:
    """c_delta with gamma_delta in place of beta; the max runs over supp(Q_V)."""
    return 3.0 * LOG2_E + 2.0 * gamma_delta(params, grid_points) + 2.0 * _log2_max_inverse(qv)


def failure_probability_bound(n: int, delta: float, v_alphabet_size: int) -> BoundValue:
    """(1 + |V|^n) exp(-2^{n delta} / 3), clamped to 1."""
    n = Validators.validate_blocklength(n)
    delta = Validators.validate_positive(delta, "delta")
    size = Validators.validate_count(v_alphabet_size, "v_alphabet_size")

    log_prefactor = float(np.logaddexp(0.0, n * math.log(size)))
    decay = _exp2(n * delta) / 3.0
    log_raw = log_prefactor - min(decay, MAX_LOG_NATS)
    return _bound_from_log(log_raw)


def smallest_informative_n(delta: float, v_alphabet_size: int, n_max: int = 10**4) -> Optional[int]:
    """Smallest n whose unclamped failure bound is below 1, if any up to n_max."""
    for n in range(1, n_max + 1):
        if failure_probability_bound(n, delta, v_alphabet_size).raw < 1.0:
            return n
    return None


def chernoff_bound(M: int, mu: float, B: float, c: float) -> ChernoffBounds:
    """Both Chernoff bounds on P((1/M) Σ X_m >= c) for X_m in [0, B], E X_m <= mu.

    The exact form holds for every c/mu >= 1; the quadratic form only for
    c/mu in [1, 2] and is None outside it.
    """
    M = Validators.validate_count(M, "M")
    mu = Validators.validate_positive(mu, "mu")
    B = Validators.validate_positive(B, "B")
    if mu > B:
        raise ValidationError(f"mu must not exceed B: mu={mu}, B={B}")
    ratio = Validators.validate_positive(c, "c") / mu
    if ratio < 1.0:
        raise ValidationError(f"c/mu must be at least 1, got {ratio}")

    scale = M * mu / B
    exact = math.exp(-scale * (ratio * (math.log(ratio) - 1.0) + 1.0))
    quadratic = None
    if ratio <= 2.0:
        quadratic = math.exp(-scale / 3.0 * (ratio - 1.0) ** 2)
    return ChernoffBounds(ratio=ratio, exact=exact, quadratic=quadratic)


@dataclass(frozen=True)
class ChernoffExperiment:
    M: int
    p: float
    ratio: float
    trials: int
    exceedances: int
    bounds: ChernoffBounds
    interval: tuple

    @property
    def empirical(self) -> float:
        return self.exceedances / self.trials

    def to_dict(self) -> Dict[str, Any]:
        return {
            "M": self.M,
            "p": self.p,
            "c_over_mu": self.ratio,
            "trials": self.trials,
            "exceedances": self.exceedances,
            "empirical": self.empirical,
            "wilson_99": list(self.interval),
            "exact_bound": self.bounds.exact,
            "quadratic_bound": self.bounds.quadratic,
        }


def chernoff_monte_carlo(
    M: int, p: float, ratio: float, trials: int, seed: int
) -> ChernoffExperiment:
    """Empirical P((1/M) Σ X_m >= ratio * p) for i.i.d. Bernoulli(p) variables."""
    trials = Validators.validate_count(trials, "trials")
    bounds = chernoff_bound(M, p, 1.0, ratio * p)
    rng = np.random.Generator(np.random.Philox(Validators.validate_seed(seed)))

    # Σ X_m >= M c; the guard keeps integer thresholds from rounding away
    threshold = math.ceil(M * ratio * p - 1e-9)
    sums = rng.binomial(M, p, size=trials)
    exceedances = int(np.count_nonzero(sums >= threshold))

    logger.debug(f"Chernoff MC: M={M}, p={p}, c/mu={ratio}, {exceedances}/{trials} exceed")
    return ChernoffExperiment(
        M=M,
        p=p,
        ratio=ratio,
        trials=trials,
        exceedances=exceedances,
        bounds=bounds,
        interval=wilson_interval(exceedances, trials),
    )


def expected_divergence_bound(gamma1: float, gamma2: float, n: int, qv: Pmf) -> float:
    """e^{-n gamma1} + n log2(1/mu_V) e^{-e^{n gamma2}}."""
    gamma1 = Validators.validate_positive(gamma1, "gamma1")
    gamma2 = Validators.validate_positive(gamma2, "gamma2")
    n = Validators.validate_blocklength(n)
    mu_v = float(qv.probs.min())
    if mu_v <= 0:
        raise ValidationError(
            "Q_V has zero-probability symbols; restrict it to its support first"
        )

    inner = n * gamma2
    second = 0.0 if inner > 700 else math.exp(-math.exp(inner))
    return math.exp(-n * gamma1) + n * math.log2(1.0 / mu_v) * second


def good_set_thresholds(params: ExponentParams, alpha: float) -> GoodSetThresholds:
    """Thresholds for the set of good codebooks at blocklength params.n."""
    if params.n is None:
        raise ValidationError("good_set_thresholds needs a blocklength")
    beta = beta_alpha_delta(params, alpha)
    decay = _exp2(-params.n * beta)
    return GoodSetThresholds(
        alpha=alpha,
        beta=beta,
        p2_threshold=2.0 * decay,
        delta1_threshold=1.0 + decay,
        delta2_cap=_exp2(params.n * _log2_max_inverse(params.output_pmf)),
    )


def exponent_report(
    params: ExponentParams,
    qv: Optional[Pmf] = None,
    grid_points: int = DEFAULT_ALPHA_GRID_POINTS,
) -> ExponentReport:
    """Assemble every exponent for one (Q_{U,V}, R, delta, n)."""
    qv = qv or params.output_pmf
    gamma = gamma_delta(params, grid_points)
    alpha_star = epsilon = beta = None

    if params.delta < params.rate - params.mutual_info:
        search = maximize_beta(params, grid_points)
        alpha_star = search.alpha_star
        epsilon = epsilon_alpha_delta(params, alpha_star)
        beta = beta_alpha_delta(params, alpha_star)
    else:
        logger.warning(
            f"delta={params.delta} outside (0, R - I) = (0, {params.rate - params.mutual_info:.6g}); "
            "exponents clamped to 0"
        )

    failure = None
    if params.n is not None and params.delta > 0:
        failure = failure_probability_bound(params.n, params.delta, qv.size)
        if failure.clamped:
            logger.info(f"Failure bound clamped at n={params.n}: raw={failure.raw:.3e}")

    return ExponentReport(
        alpha_star=alpha_star,
        epsilon=epsilon,
        beta=beta,
        gamma_delta=gamma,
        c_delta=c_delta(qv, params, grid_points),
        gamma_star=gamma_star(params, grid_points),
        failure_bound=failure,
        mutual_info=params.mutual_info,
        rate=params.rate,
        delta=params.delta,
        n=params.n,
    )


def beta_curve(
    params: ExponentParams, grid_points: int = DEFAULT_ALPHA_GRID_POINTS
) -> List[Dict[str, Any]]:
    """Rows (alpha, d_alpha, beta_{alpha,delta}, eps_{alpha,delta}) for plotting."""
    alphas = alpha_grid(grid_points)
    d_alpha = params.d_alpha(alphas)
    betas = _beta_values(params, alphas)
    rows = []
    for alpha, d, b in zip(alphas, d_alpha, betas):
        if math.isinf(d):
            eps = math.inf
        else:
            eps = (0.5 * (params.rate - params.delta) + (alpha - 1.0) * d) / (
                alpha - 0.5
            ) - params.mutual_info
        rows.append(
            {
                "alpha": float(alpha),
                "d_alpha": float(d),
                "beta_alpha_delta": float(b),
                "epsilon_alpha_delta": float(eps),
            }
        )
    return rows
