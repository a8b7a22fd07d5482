"""
Semantic-security capacities of the wiretap channels.

WTC I:  max over Q_{U,X} of I(U;Y) - I(U;Z)
WTC II: max over Q_{U,X} of I(U;Y) - alpha I(U;X)

Both are maximised by projected gradient ascent on the joint Q_{U,X} from
many random starts, cross-checked against a dense grid when the alphabets are
small. The channel capacity itself (the alpha = 0 anchor) comes from
Blahut-Arimoto.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr, xlogy

from .config import (
    DEFAULT_BA_MAX_ITER,
    DEFAULT_BA_TOLERANCE,
    DEFAULT_OPTIMIZER_MAX_ITER,
    DEFAULT_RESTARTS,
)
from .exceptions import ConvergenceError, InvariantViolationError, ValidationError
from .info_measures import LN2, LOG2_E, Bits, mutual_information, mutual_information_array
from .probability_core import Alphabet, Channel, JointPmf, Pmf, identity_channel
from .validators import Validators

logger = logging.getLogger(__name__)

# Below this the optimizer is flagged against the grid oracle.
GRID_FLAG_TOLERANCE = 1e-4
# Largest number of grid points evaluated by the dense oracle.
GRID_POINT_BUDGET = 200_000
# Alphabet sizes for which the dense oracle runs.
GRID_MAX_CARDINALITY = 3
PROJECTED_GRADIENT_TOL = 1e-9
ARMIJO_SIGMA = 1e-4
LOG_FLOOR = 1e-300
SHAPE_TOLERANCE = 1e-6
ERASURE_TOLERANCE = 1e-12


@dataclass
class CapacityResult:
    """Optimal value in bits/symbol with the joint Q_{U,X} attaining it."""

    value: Bits
    maximizer: Optional[JointPmf]
    u_cardinality_used: int
    optimizer_trace: List[Dict[str, Any]] = field(default_factory=list)
    input_pmf: Optional[Pmf] = None
    flagged: bool = False
    grid_value: Optional[Bits] = None
    restarts: int = 0
    iterations: int = 0
    strict_value: Optional[Bits] = None

    @property
    def strict_difference(self) -> Optional[Bits]:
        """Value lost when |U| is restricted to one less than used."""
        if self.strict_value is None:
            return None
        return self.value - self.strict_value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "u_cardinality_used": self.u_cardinality_used,
            "maximizer": self.maximizer.to_dict() if self.maximizer else None,
            "input_pmf": self.input_pmf.to_dict() if self.input_pmf else None,
            "flagged": self.flagged,
            "grid_value": self.grid_value,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "strict_value": self.strict_value,
            "strict_difference": self.strict_difference,
        }


@dataclass(frozen=True)
class WiretapSpec:
    """Main channel plus either an eavesdropper channel or a fraction alpha."""

    main_channel: Channel
    eavesdropper: Optional[Channel] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if (self.eavesdropper is None) == (self.alpha is None):
            raise ValidationError("WiretapSpec needs exactly one of eavesdropper or alpha")
        if self.alpha is not None:
            Validators.validate_unit_interval(self.alpha, "alpha")
        else:
            self.main_channel.input_alphabet.require_same(self.eavesdropper.input_alphabet)

    @property
    def is_type_two(self) -> bool:
        return self.alpha is not None


@dataclass(frozen=True)
class ErasureReductionReport:
    beta: float
    eavesdropper_information: Bits
    scaled_information: Bits

    @property
    def difference(self) -> float:
        return abs(self.eavesdropper_information - self.scaled_information)


@dataclass
class CurvePoint:
    alpha: float
    result: CapacityResult


@dataclass
class CapacityCurve:
    points: List[CurvePoint]
    output_size: int

    @property
    def values(self) -> np.ndarray:
        return np.array([p.result.value for p in self.points])

    @property
    def non_increasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= SHAPE_TOLERANCE))

    @property
    def convex(self) -> bool:
        """Second differences >= -tol, assuming an evenly spaced grid."""
        if len(self.points) < 3:
            return True
        return bool(np.all(np.diff(self.values, n=2) >= -SHAPE_TOLERANCE))

    @property
    def bounded(self) -> bool:
        return bool(np.all(self.values <= math.log2(self.output_size) + SHAPE_TOLERANCE))

    @property
    def flagged(self) -> bool:
        return any(p.result.flagged for p in self.points)

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "alpha": p.alpha,
                "value": p.result.value,
                "grid_value": p.result.grid_value,
                "flagged": int(p.result.flagged),
            }
            for p in self.points
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": self.to_rows(),
            "non_increasing": self.non_increasing,
            "convex": self.convex,
            "bounded_by_log_output": self.bounded,
            "flagged": self.flagged,
        }


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    shape = v.shape
    flat = v.ravel()
    ordered = np.sort(flat)[::-1]
    cumulative = np.cumsum(ordered) - 1.0
    index = np.arange(1, flat.size + 1)
    rho = index[ordered - cumulative / index > 0][-1]
    theta = cumulative[rho - 1] / rho
    return np.maximum(flat - theta, 0.0).reshape(shape)


def _information(joint_ux: np.ndarray, matrix: np.ndarray) -> Bits:
    """Σ P log P - Σ P_U log P_U - Σ P_out log P_out for P = J W (any J >= 0)."""
    joint = joint_ux @ matrix
    rows = joint.sum(axis=-1)
    cols = joint.sum(axis=-2)
    return (
        np.sum(xlogy(joint, joint), axis=(-2, -1))
        - np.sum(xlogy(rows, rows), axis=-1)
        - np.sum(xlogy(cols, cols), axis=-1)
    ) / LN2


def _information_gradient(joint_ux: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """d/dJ[u,x] of _information(J, W) = Σ_y W[x,y] log2(P[u,y] / (P_U[u] P_out[y])) - log2 e.

    On an empty U row, P[u,y]/P_U[u] is replaced by its directional limit W[x,y].
    """
    joint = joint_ux @ matrix
    pu = joint_ux.sum(axis=1)
    pout = np.maximum(joint.sum(axis=0), LOG_FLOOR)

    with np.errstate(divide="ignore", invalid="ignore"):
        conditional = np.where(pu[:, None] > 0, joint / pu[:, None], 0.0)
    # shape (U, X, Y)
    conditional = np.where(
        (pu > 0)[:, None, None], conditional[:, None, :], matrix[None, :, :]
    )
    log_terms = np.log2(np.maximum(conditional, LOG_FLOOR)) - np.log2(pout)[None, None, :]
    weighted = np.where(matrix[None, :, :] > 0, matrix[None, :, :] * log_terms, 0.0)
    return weighted.sum(axis=2) - LOG2_E


def secrecy_objective(
    joint_ux: np.ndarray, main: np.ndarray, eave: np.ndarray, weight: float
) -> Bits:
    """I(U;Y) - weight I(U;Z) with Y = X through main and Z = X through eave."""
    return float(_information(joint_ux, main) - weight * _information(joint_ux, eave))


def secrecy_gradient(
    joint_ux: np.ndarray, main: np.ndarray, eave: np.ndarray, weight: float
) -> np.ndarray:
    """Analytic gradient of secrecy_objective with respect to joint_ux."""
    return _information_gradient(joint_ux, main) - weight * _information_gradient(joint_ux, eave)


class ProjectedAscent:
    """Projected gradient ascent on the simplex with Armijo backtracking."""

    def __init__(
        self,
        objective: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        max_iter: int = DEFAULT_OPTIMIZER_MAX_ITER,
        tol: float = PROJECTED_GRADIENT_TOL,
    ):
        self.objective = objective
        self.gradient = gradient
        self.max_iter = max_iter
        self.tol = tol

    def run(self, start: np.ndarray) -> Tuple[np.ndarray, float, int]:
        point = project_simplex(start)
        value = self.objective(point)
        step = 1.0

        for iteration in range(1, self.max_iter + 1):
            grad = self.gradient(point)
            if np.linalg.norm(project_simplex(point + grad) - point) < self.tol:
                return point, value, iteration

            while True:
                candidate = project_simplex(point + step * grad)
                candidate_value = self.objective(candidate)
                ascent = float(np.sum(grad * (candidate - point)))
                if candidate_value >= value + ARMIJO_SIGMA * ascent:
                    break
                step *= 0.5
                if step < 1e-20:
                    return point, value, iteration

            improvement = candidate_value - value
            point, value = candidate, candidate_value
            step = min(step * 2.0, 1e4)
            if improvement < 1e-15:
                return point, value, iteration

        return point, value, self.max_iter


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length `parts` summing to `total`."""
    if parts == 1:
        return np.array([[total]])
    blocks = []
    for first in range(total + 1):
        rest = _compositions(total - first, parts - 1)
        blocks.append(np.hstack([np.full((rest.shape[0], 1), first), rest]))
    return np.vstack(blocks)


def _grid_resolution(cells: int) -> int:
    resolution = 1
    while math.comb(resolution + 1 + cells - 1, cells - 1) <= GRID_POINT_BUDGET:
        resolution += 1
    return resolution


def _random_joint(rng: np.random.Generator, u_card: int, x_size: int) -> np.ndarray:
    qu = rng.dirichlet(np.ones(u_card))
    conditional = rng.dirichlet(np.ones(x_size), size=u_card)
    return qu[:, None] * conditional


class SecrecyCapacitySolver:
    """Blahut-Arimoto plus multi-start projected ascent for the SS capacities."""

    def __init__(
        self,
        restarts: int = DEFAULT_RESTARTS,
        max_iter: int = DEFAULT_OPTIMIZER_MAX_ITER,
        ba_tolerance: float = DEFAULT_BA_TOLERANCE,
        ba_max_iter: int = DEFAULT_BA_MAX_ITER,
        threads: int = 1,
        seed: int = 0,
    ):
        self.restarts = Validators.validate_count(restarts, "restarts")
        self.max_iter = Validators.validate_count(max_iter, "max_iter")
        self.ba_tolerance = ba_tolerance
        self.ba_max_iter = ba_max_iter
        self.threads = Validators.validate_count(threads, "threads")
        self.seed = Validators.validate_seed(seed)
        self.logger = logging.getLogger(__name__)

    # Blahut-Arimoto -------------------------------------------------------

    def blahut_arimoto(self, matrix: np.ndarray) -> Tuple[np.ndarray, Bits, int]:
        """Capacity-achieving input of a row-stochastic matrix.

        Stops once max_x D(W_x || q) - log2 Σ p_x 2^{D(W_x || q)} < tolerance.
        """
        matrix = np.asarray(matrix, dtype=float)
        p = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
        width = math.inf

        for iteration in range(1, self.ba_max_iter + 1):
            q = p @ matrix
            divergences = rel_entr(matrix, q[None, :]).sum(axis=1) / LN2
            lower = math.log2(float(np.sum(p * np.exp2(divergences))))
            upper = float(divergences.max())
            width = upper - lower
            if width < self.ba_tolerance:
                return p, mutual_information_array(p, matrix), iteration
            p = p * np.exp2(divergences - upper)
            p /= p.sum()

        self.logger.error(f"Blahut-Arimoto stalled with bracket width {width:.3e}")
        raise ConvergenceError("Blahut-Arimoto", self.ba_max_iter, width)

    def ba_capacity(self, ch: Channel) -> CapacityResult:
        p, value, iterations = self.blahut_arimoto(ch.matrix)
        input_pmf = Pmf(ch.input_alphabet, p)
        self.logger.debug(f"Capacity {value:.9f} bits after {iterations} iterations")
        return CapacityResult(
            value=max(0.0, value),
            maximizer=JointPmf(ch.input_alphabet, ch.input_alphabet, np.diag(input_pmf.probs)),
            u_cardinality_used=ch.input_alphabet.size,
            optimizer_trace=[{"solver": "blahut_arimoto", "iterations": iterations}],
            input_pmf=input_pmf,
            iterations=iterations,
        )

    # Secrecy objectives -------------------------------------------------

    def _grid_oracle(
        self, main: np.ndarray, eave: np.ndarray, weight: float, u_card: int
    ) -> Tuple[float, np.ndarray]:
        x_size = main.shape[0]
        cells = u_card * x_size
        resolution = _grid_resolution(cells)
        grid = _compositions(resolution, cells).reshape(-1, u_card, x_size) / resolution
        values = _information(grid, main) - weight * _information(grid, eave)
        best = int(np.argmax(values))
        return float(values[best]), grid[best]

    def _restart(
        self, index: int, main: np.ndarray, eave: np.ndarray, weight: float, u_card: int,
        start: Optional[np.ndarray],
    ) -> Tuple[float, int, np.ndarray, int]:
        if start is None:
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, index]))
            start = _random_joint(rng, u_card, main.shape[0])
        ascent = ProjectedAscent(
            lambda j: secrecy_objective(j, main, eave, weight),
            lambda j: secrecy_gradient(j, main, eave, weight),
            max_iter=self.max_iter,
        )
        point, value, iterations = ascent.run(start)
        return value, index, point, iterations

    def maximize(
        self,
        main: Channel,
        eave: Channel,
        weight: float,
        u_card: Optional[int] = None,
        warm_start: Optional[np.ndarray] = None,
    ) -> CapacityResult:
        """max over Q_{U,X} of I(U;Y) - weight I(U;Z)."""
        main.input_alphabet.require_same(eave.input_alphabet)
        x_alphabet = main.input_alphabet
        u_card = Validators.validate_count(u_card or x_alphabet.size, "u_card")
        W, V = main.matrix, eave.matrix

        starts: List[Optional[np.ndarray]] = [None] * self.restarts
        if warm_start is not None and warm_start.shape == (u_card, x_alphabet.size):
            starts.append(warm_start)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            outcomes = list(
                pool.map(
                    lambda item: self._restart(item[0], W, V, weight, u_card, item[1]),
                    enumerate(starts),
                )
            )

        # highest value; ties go to the lexicographically smallest Q_{U,X}
        best_value, best_index, best_point, _ = max(
            outcomes, key=lambda o: (round(o[0], 12), tuple(-np.round(o[2].ravel(), 12)))
        )
        total_iterations = sum(o[3] for o in outcomes)
        trace = [{"restart": o[1], "value": o[0], "iterations": o[3]} for o in outcomes]

        grid_value = None
        flagged = False
        if x_alphabet.size <= GRID_MAX_CARDINALITY and u_card <= GRID_MAX_CARDINALITY:
            grid_value, grid_point = self._grid_oracle(W, V, weight, u_card)
            if best_value < grid_value - GRID_FLAG_TOLERANCE:
                flagged = True
                self.logger.warning(
                    f"Optimizer value {best_value:.6f} below grid oracle {grid_value:.6f}"
                )
            if grid_value > best_value:
                best_value, best_point = grid_value, grid_point

        # U independent of X always attains 0
        if best_value < 0.0:
            best_value = 0.0
            best_point = np.full((u_card, x_alphabet.size), 1.0 / (u_card * x_alphabet.size))

        return CapacityResult(
            value=best_value,
            maximizer=JointPmf(Alphabet.of_size(u_card), x_alphabet, best_point),
            u_cardinality_used=u_card,
            optimizer_trace=trace,
            flagged=flagged,
            grid_value=grid_value,
            restarts=len(starts),
            iterations=total_iterations,
        )

    def _with_strict(self, result: CapacityResult, compute: Callable[[int], CapacityResult]) -> CapacityResult:
        if result.u_cardinality_used > 1:
            result.strict_value = compute(result.u_cardinality_used - 1).value
        return result

    def wtc2_ss_capacity(
        self,
        main: Channel,
        alpha: float,
        u_card: Optional[int] = None,
        compare_strict: bool = False,
        warm_start: Optional[np.ndarray] = None,
    ) -> CapacityResult:
        """C_Sem(alpha) = max [I(U;Y) - alpha I(U;X)]."""
        alpha = Validators.validate_unit_interval(alpha, "alpha")
        x_alphabet = main.input_alphabet
        card = u_card or x_alphabet.size

        if alpha == 0.0:
            result = self.ba_capacity(main)
            result.u_cardinality_used = card
        elif alpha == 1.0:
            result = CapacityResult(
                value=0.0,
                maximizer=JointPmf(
                    Alphabet.of_size(card),
                    x_alphabet,
                    np.full((card, x_alphabet.size), 1.0 / (card * x_alphabet.size)),
                ),
                u_cardinality_used=card,
            )
        else:
            result = self.maximize(main, identity_channel(x_alphabet), alpha, card, warm_start)

        self.logger.info(f"WTC II SS-capacity at alpha={alpha}: {result.value:.9f} bits")
        if compare_strict:
            result = self._with_strict(
                result, lambda k: self.wtc2_ss_capacity(main, alpha, k, warm_start=None)
            )
        return result

    def wtc1_ss_capacity(
        self,
        main: Channel,
        eave: Channel,
        u_card: Optional[int] = None,
        compare_strict: bool = False,
    ) -> CapacityResult:
        """C_Sem = max [I(U;Y) - I(U;Z)] over U - X - (Y, Z)."""
        result = self.maximize(main, eave, 1.0, u_card)
        self.logger.info(f"WTC I SS-capacity: {result.value:.9f} bits")
        if compare_strict:
            result = self._with_strict(result, lambda k: self.maximize(main, eave, 1.0, k))
        return result

    def capacity_curve(
        self, main: Channel, alpha_grid: Sequence[float], u_card: Optional[int] = None
    ) -> CapacityCurve:
        """C(alpha) over a grid, each point warm-started from its predecessor."""
        points = []
        previous = None
        for alpha in alpha_grid:
            result = self.wtc2_ss_capacity(main, alpha, u_card, warm_start=previous)
            if result.maximizer is not None and 0.0 < alpha < 1.0:
                previous = np.array(result.maximizer.table)
            points.append(CurvePoint(alpha=float(alpha), result=result))

        curve = CapacityCurve(points=points, output_size=main.output_alphabet.size)
        if not (curve.non_increasing and curve.convex):
            self.logger.warning("Capacity curve failed the monotonicity or convexity check")
        return curve

    def wtc2_direct_rate(self, main: Channel, alpha: float) -> CapacityResult:
        """max over Q_X of I(X;Y) - alpha H(X), the rate without a prefix channel."""
        alpha = Validators.validate_unit_interval(alpha, "alpha")
        W = main.matrix

        def objective(p: np.ndarray) -> float:
            return float(_information(np.diag(p), W) - alpha * (-np.sum(xlogy(p, p)) / LN2))

        def gradient(p: np.ndarray) -> np.ndarray:
            info = np.diagonal(_information_gradient(np.diag(p), W))
            entropy = -np.log2(np.maximum(p, LOG_FLOOR)) - LOG2_E
            return info - alpha * entropy

        ascent = ProjectedAscent(objective, gradient, max_iter=self.max_iter)
        best_value, best_p = -math.inf, None
        for index in range(self.restarts):
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, index]))
            point, value, _ = ascent.run(rng.dirichlet(np.ones(W.shape[0])))
            if value > best_value + 1e-12:
                best_value, best_p = value, point

        input_pmf = Pmf(main.input_alphabet, best_p)
        return CapacityResult(
            value=max(0.0, best_value),
            maximizer=JointPmf(main.input_alphabet, main.input_alphabet, np.diag(input_pmf.probs)),
            u_cardinality_used=main.input_alphabet.size,
            input_pmf=input_pmf,
            restarts=self.restarts,
        )


def erasure_channel(beta: float, x_alphabet: Alphabet) -> Channel:
    """Row x carries beta on x and 1 - beta on the erasure symbol."""
    beta = Validators.validate_unit_interval(beta, "beta")
    size = x_alphabet.size
    matrix = np.hstack([beta * np.eye(size), np.full((size, 1), 1.0 - beta)])
    return Channel(x_alphabet, x_alphabet.with_erasure(), matrix)


def erasure_reduction_check(joint_ux: JointPmf, beta: float) -> ErasureReductionReport:
    """I(U;Z) against beta I(U;X) for Z the erasure-channel output of X."""
    channel = erasure_channel(beta, joint_ux.col_alphabet)
    joint_uz = JointPmf(
        joint_ux.row_alphabet, channel.output_alphabet, joint_ux.table @ channel.matrix
    )
    report = ErasureReductionReport(
        beta=beta,
        eavesdropper_information=mutual_information(joint_uz),
        scaled_information=beta * mutual_information(joint_ux),
    )
    if report.difference >= ERASURE_TOLERANCE:
        raise InvariantViolationError(
            "I(U;Z) = beta I(U;X)", report.eavesdropper_information, report.scaled_information
        )
    return report


def ba_capacity(ch: Channel, tolerance: float = DEFAULT_BA_TOLERANCE) -> CapacityResult:
    """Channel capacity by Blahut-Arimoto."""
    return SecrecyCapacitySolver(ba_tolerance=tolerance).ba_capacity(ch)


def wtc2_ss_capacity(main: Channel, alpha: float, u_card: Optional[int] = None, **kwargs) -> CapacityResult:
    return SecrecyCapacitySolver(**kwargs).wtc2_ss_capacity(main, alpha, u_card)


def wtc1_ss_capacity(main: Channel, eave: Channel, u_card: Optional[int] = None, **kwargs) -> CapacityResult:
    return SecrecyCapacitySolver(**kwargs).wtc1_ss_capacity(main, eave, u_card)


def capacity_curve(
    main: Channel, alpha_grid: Sequence[float], u_card: Optional[int] = None, **kwargs
) -> CapacityCurve:
    return SecrecyCapacitySolver(**kwargs).capacity_curve(main, alpha_grid, u_card)


def wtc2_direct_rate(main: Channel, alpha: float, **kwargs) -> CapacityResult:
    return SecrecyCapacitySolver(**kwargs).wtc2_direct_rate(main, alpha)
