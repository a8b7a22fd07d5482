"""
Information measures in bits.

Entropy, relative entropy, mutual information, Rényi divergence, information
density and the binary divergence. Infinite divergences are returned as
``math.inf``, never as an overflowed float.
"""

import math
from typing import Any, Union

import numpy as np
from scipy.special import logsumexp, rel_entr, xlogy

from .exceptions import ValidationError
from .probability_core import JointPmf, Pmf, SequenceIndex
from .validators import Validators

Bits = float

LN2 = math.log(2.0)
LOG2_E = 1.0 / LN2


def entropy_array(probs: np.ndarray) -> Bits:
    return max(0.0, -float(np.sum(xlogy(probs, probs))) / LN2)


def relative_entropy_array(p: np.ndarray, q: np.ndarray) -> Bits:
    """D(p || q) for aligned probability arrays of any shape."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p > 0) & (q <= 0)):
        return math.inf
    return max(0.0, math.fsum(rel_entr(p, q).ravel()) / LN2)


def mutual_information_array(p_in: np.ndarray, channel_matrix: np.ndarray) -> Bits:
    """I(X;Y) for an input vector and a row-stochastic matrix.

    Uses I = Σ P log P - Σ P_X log P_X - Σ P_Y log P_Y, which stays well defined
    for any non-negative input vector (gradient checks step off the simplex).
    """
    joint = np.asarray(p_in, dtype=float)[:, None] * channel_matrix
    return (
        float(np.sum(xlogy(joint, joint)))
        - float(np.sum(xlogy(joint.sum(axis=1), joint.sum(axis=1))))
        - float(np.sum(xlogy(joint.sum(axis=0), joint.sum(axis=0))))
    ) / LN2


def joint_mutual_information_array(table: np.ndarray) -> Bits:
    table = np.asarray(table, dtype=float)
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    return max(0.0, relative_entropy_array(table, np.outer(rows, cols)))


def entropy(p: Pmf) -> Bits:
    """H(p) = -Σ p log2 p over the support."""
    return entropy_array(p.probs)


def binary_entropy(x: float) -> Bits:
    """h(x) with h(0) = h(1) = 0."""
    x = Validators.validate_unit_interval(x, "x")
    return entropy_array(np.array([x, 1.0 - x]))


def relative_entropy(p: Pmf, q: Pmf) -> Bits:
    """D(p || q); +inf when supp(p) is not contained in supp(q)."""
    p.alphabet.require_same(q.alphabet)
    return relative_entropy_array(p.probs, q.probs)


def mutual_information(j: JointPmf) -> Bits:
    """I(U;V) = D(Q_UV || Q_U Q_V)."""
    return joint_mutual_information_array(j.table)


def conditional_entropy(j: JointPmf) -> Bits:
    """H(col | row) = H(row, col) - H(row)."""
    return max(0.0, entropy_array(j.table) - entropy_array(j.table.sum(axis=1)))


def renyi_divergence_array(
    gamma: np.ndarray, pi: np.ndarray, alphas: Union[float, np.ndarray]
) -> np.ndarray:
    """d_alpha(gamma, pi) for one or many orders alpha > 1.

    Evaluated as logsumexp over the support of gamma of
    ln gamma + (alpha - 1)(ln gamma - ln pi).
    """
    gamma = np.asarray(gamma, dtype=float).ravel()
    pi = np.asarray(pi, dtype=float).ravel()
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))

    support = gamma > 0
    if np.any(pi[support] <= 0):
        return np.full(alphas.shape, math.inf)

    log_gamma = np.log(gamma[support])
    log_ratio = log_gamma - np.log(pi[support])
    orders = alphas - 1.0
    exponents = log_gamma[None, :] + orders[:, None] * log_ratio[None, :]
    values = logsumexp(exponents, axis=1) / (orders * LN2)
    return np.maximum(values, 0.0)


def renyi_divergence(gamma: Pmf, pi: Pmf, alpha: float) -> Bits:
    """Rényi divergence of order alpha > 1 in bits."""
    alpha = Validators.validate_renyi_order(alpha)
    gamma.alphabet.require_same(pi.alphabet)
    return float(renyi_divergence_array(gamma.probs, pi.probs, alpha)[0])


def renyi_divergence_limit(gamma: Pmf, pi: Pmf) -> Bits:
    """The alpha -> 1 limit, which is the relative entropy."""
    return relative_entropy(gamma, pi)


def information_density_matrix(j: JointPmf) -> np.ndarray:
    """i(u, v) = log2(Q_{V|U}(v|u) / Q_V(v)) for every cell.

    Cells with zero joint mass hold -inf.
    """
    table = j.table
    product = np.outer(table.sum(axis=1), table.sum(axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.where(table > 0, np.log2(table) - np.log2(product), -np.inf)
    return density


def information_density(j: JointPmf, u: Any, v: Any) -> Bits:
    """Pointwise information density of one symbol pair."""
    ui = j.row_alphabet.index(u)
    vi = j.col_alphabet.index(v)
    if j.table[ui].sum() <= 0:
        raise ValidationError(f"Row symbol {u!r} has zero marginal probability")
    if j.table[:, vi].sum() <= 0:
        raise ValidationError(f"Column symbol {v!r} has zero marginal probability")
    return float(information_density_matrix(j)[ui, vi])


def information_density_sequence(
    j: JointPmf, useq: SequenceIndex, vseq: SequenceIndex
) -> Bits:
    """i_{Q^n}(u, v) = Σ_t i_Q(u_t, v_t)."""
    j.row_alphabet.require_same(useq.alphabet)
    j.col_alphabet.require_same(vseq.alphabet)
    if useq.n != vseq.n:
        raise ValidationError(f"Sequence lengths differ: {useq.n} vs {vseq.n}")
    for u in set(useq.value):
        if j.table[u].sum() <= 0:
            raise ValidationError(f"Row symbol index {u} has zero marginal probability")

    density = information_density_matrix(j)
    return float(sum(density[u, v] for u, v in zip(useq.value, vseq.value)))


def binary_divergence(delta: float, beta: float) -> Bits:
    """D_b(delta, beta) = D(Ber(delta) || Ber(beta)); boundary values by limits."""
    delta = Validators.validate_unit_interval(delta, "delta")
    beta = Validators.validate_unit_interval(beta, "beta")
    return relative_entropy_array(
        np.array([delta, 1.0 - delta]), np.array([beta, 1.0 - beta])
    )


def bits_to_json(value: Bits) -> Union[float, str]:
    """JSON form of a bit value: infinities become "inf"/"-inf"."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)
