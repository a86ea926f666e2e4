"""Kirkwood-Dirac distributions: standard, extended, coarse-grained, and conditioned.

Axis convention: axis 0 is the basis whose projector acts first on the state, so for
two bases ``values[i, j] = <f_j|a_i><a_i|rho|f_j>`` with A on axis 0 and F on axis 1.
For k bases, ``values[i_1, ..., i_k] = Tr(P^(k)_{i_k} ... P^(1)_{i_1} rho)``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    ConsistencyError,
    DensityOperator,
    EigenspacePartition,
    InvariantError,
    Ket,
    KDQError,
    OrthonormalBasis,
    PreconditionError,
    as_density,
    check_dims,
    resolve_tol,
)

TOL_SUM = 1e-9
TOL_CONSISTENCY = 1e-9


def kd_array(rho: np.ndarray, basis_mats: Sequence[np.ndarray]) -> np.ndarray:
    """Extended KD tensor from raw arrays via overlap products.

    ``rho`` has shape (..., d, d) and each basis matrix (..., d, d) with basis vectors
    as columns; leading axes broadcast, so this doubles as the batched kernel.
    Entry (i_1..i_k) = <a1_i1|rho|ak_ik> * prod_n <a(n+1)_i(n+1)|a(n)_i(n)>.
    """
    k = len(basis_mats)
    first, last = basis_mats[0], basis_mats[-1]
    corner = np.conj(np.swapaxes(first, -1, -2)) @ rho @ last  # [i1, ik]
    letters = string.ascii_lowercase[:k]
    operands = [corner]
    subs = [f"...{letters[0]}{letters[-1]}"]
    for n in range(k - 1):
        # overlap[i_{n+1}, i_n] = <a^{(n+1)}_{i_{n+1}} | a^{(n)}_{i_n}>
        ov = np.conj(np.swapaxes(basis_mats[n + 1], -1, -2)) @ basis_mats[n]
        operands.append(ov)
        subs.append(f"...{letters[n + 1]}{letters[n]}")
    expr = ",".join(subs) + "->..." + letters
    return np.einsum(expr, *operands, optimize=True)


@dataclass(frozen=True, eq=False)
class KDDistribution:
    """Complex quasiprobability tensor plus the bases and state it came from.

    ``partitions`` holds, per axis, ``None`` for a fine-grained axis or the
    EigenspacePartition the axis was coarse-grained over.
    """

    values: np.ndarray
    bases: tuple[OrthonormalBasis, ...]
    state: DensityOperator
    partitions: tuple[EigenspacePartition | None, ...] | None = None
    conditioned: bool = False
    postselection_probability: float | None = None

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=complex, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bases", tuple(self.bases))
        parts = self.partitions
        if parts is None:
            parts = (None,) * vals.ndim
        object.__setattr__(self, "partitions", tuple(parts))
        if len(self.partitions) != vals.ndim:
            raise InvariantError("one partition slot per axis")
        if not self.conditioned and vals.ndim < 2:
            raise InvariantError("k >= 2 for unconditioned distributions")
        total = complex(vals.sum())
        if abs(total - 1.0) > TOL_SUM:
            raise InvariantError("entries sum to 1", f"got {total!r}")
        if not self.conditioned:
            big = float(np.max(np.abs(vals)))
            if big > 1.0 + TOL_SUM:
                raise InvariantError("|q| <= 1 for unconditioned entries", f"max |q| = {big!r}")

    @property
    def k(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def is_coarse(self) -> bool:
        return any(p is not None for p in self.partitions)


def _bases_and_state(state, bases: Sequence[OrthonormalBasis]) -> tuple[DensityOperator, tuple[OrthonormalBasis, ...]]:
    rho = as_density(state)
    bases = tuple(bases)
    check_dims(rho, *bases)
    return rho, bases


def compute_kd(state: Ket | DensityOperator, A: OrthonormalBasis, F: OrthonormalBasis) -> KDDistribution:
    """Two-basis KD distribution q[i, j] = <f_j|a_i><a_i|rho|f_j>."""
    rho, bases = _bases_and_state(state, (A, F))
    vals = kd_array(rho.matrix, [A.matrix, F.matrix])
    return KDDistribution(vals, bases, rho)


def compute_extended_kd(state: Ket | DensityOperator, bases: Sequence[OrthonormalBasis]) -> KDDistribution:
    if len(bases) < 2:
        raise KDQError(f"need at least 2 bases, got {len(bases)}")
    rho, bases = _bases_and_state(state, bases)
    vals = kd_array(rho.matrix, [b.matrix for b in bases])
    return KDDistribution(vals, bases, rho)


def marginalize(dist: KDDistribution, keep: tuple[int, int]) -> KDDistribution:
    """Sum out every axis except ``keep = (alpha, beta)`` with alpha < beta."""
    alpha, beta = keep
    if not (0 <= alpha < beta < dist.k):
        raise KDQError(f"invalid axes {keep} for k = {dist.k}")
    drop = tuple(ax for ax in range(dist.k) if ax not in (alpha, beta))
    vals = dist.values.sum(axis=drop) if drop else dist.values
    bases = (dist.bases[alpha], dist.bases[beta]) if len(dist.bases) == dist.k else dist.bases
    return KDDistribution(
        vals,
        bases,
        dist.state,
        partitions=(dist.partitions[alpha], dist.partitions[beta]),
        conditioned=dist.conditioned,
        postselection_probability=dist.postselection_probability,
    )


def marginal_probabilities(dist: KDDistribution, axis: int, tol: float | None = None) -> np.ndarray:
    """Born probabilities recovered by summing the distribution over all other axes.

    Only the first and last axes are Born marginals; interior axes are refused.
    """
    tol = resolve_tol(tol)
    if axis < 0:
        axis += dist.k
    if axis not in (0, dist.k - 1):
        raise PreconditionError(f"axis {axis} is interior; its marginal is not a Born distribution")
    other = tuple(ax for ax in range(dist.k) if ax != axis)
    sums = dist.values.sum(axis=other) if other else dist.values
    if np.max(np.abs(sums.imag)) > tol:
        raise ConsistencyError(f"marginal has imaginary residue {np.max(np.abs(sums.imag)):.3e}")
    probs = sums.real
    if np.min(probs) < -tol:
        raise ConsistencyError(f"marginal has negative entry {np.min(probs):.3e}")
    return probs


def reconstruct_from_table(
    table: np.ndarray,
    A: OrthonormalBasis,
    B: OrthonormalBasis,
    state: DensityOperator | None = None,
    *,
    tol: float | None = None,
    use_convention: bool = True,
) -> tuple[DensityOperator, np.ndarray]:
    """Rebuild rho = sum_ij |a_i><b_j| q_ij / <b_j|a_i> from a two-axis table.

    Where <b_j|a_i> vanishes the coefficient is by convention <a_i|rho|b_j>, which
    only the state itself can supply; without ``state`` such tables are refused.
    With ``use_convention=False`` those terms are dropped instead (for A = B this
    leaves the diagonal of Born probabilities).  Returns the state and the boolean
    mask of entries where the convention was applied.
    """
    tol = resolve_tol(tol)
    check_dims(A, B)
    a, b = A.matrix, B.matrix
    table = np.asarray(table, dtype=complex)
    if table.shape != (A.dim, B.dim):
        raise KDQError(f"table shape {table.shape} does not match bases of dim {A.dim}")
    overlap = (b.conj().T @ a).T  # overlap[i, j] = <b_j|a_i>
    mask = np.abs(overlap) <= tol
    coeff = table / np.where(mask, 1.0, overlap)
    if use_convention and np.any(mask):
        if state is None:
            raise PreconditionError("zero overlaps present: the substitution convention needs the state")
        coeff = np.where(mask, a.conj().T @ state.matrix @ b, coeff)
    else:
        coeff = np.where(mask, 0.0, coeff)
    return DensityOperator(a @ coeff @ b.conj().T), mask


def reconstruct_state(
    dist: KDDistribution,
    *,
    tol: float | None = None,
    use_convention: bool = True,
    with_mask: bool = False,
):
    """Rebuild the state from the (first, last) marginal of ``dist``.

    See :func:`reconstruct_from_table`; the attached state supplies the
    zero-overlap entries.  ``with_mask=True`` returns ``(rho, mask)``.
    """
    if dist.conditioned:
        raise PreconditionError("a conditioned distribution does not represent a state")
    if dist.is_coarse:
        raise PreconditionError("reconstruction needs fine-grained first and last axes")
    pair = marginalize(dist, (0, dist.k - 1)) if dist.k > 2 else dist
    rho, mask = reconstruct_from_table(
        pair.values, dist.bases[0], dist.bases[-1], dist.state, tol=tol, use_convention=use_convention
    )
    if with_mask:
        return rho, mask
    return rho


@dataclass(frozen=True)
class PostselectionOutcome:
    """Outcome set on the last axis; ``axis`` defaults to -1 (the last)."""

    indices: tuple[int, ...]
    axis: int = -1

    def __post_init__(self) -> None:
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if not idx:
            raise InvariantError("postselection indices are non-empty")
        object.__setattr__(self, "indices", idx)


def _last_axis_projector(dist: KDDistribution, indices: Sequence[int]) -> np.ndarray:
    basis = dist.bases[-1]
    part = dist.partitions[-1]
    cols: list[int] = []
    for i in indices:
        cols.extend(part.blocks[i] if part is not None else (i,))
    v = basis.matrix[:, cols]
    return v @ v.conj().T


def condition_on(dist: KDDistribution, outcome: PostselectionOutcome, tol: float | None = None) -> KDDistribution:
    """Condition on a postselected outcome set of the last axis (Bayes-like renormalization)."""
    tol = resolve_tol(tol)
    last = dist.k - 1
    axis = outcome.axis + dist.k if outcome.axis < 0 else outcome.axis
    if axis != last:
        raise PreconditionError("conditioning is only defined on the last axis")
    if dist.conditioned:
        raise PreconditionError("distribution is already conditioned")
    n_last = dist.shape[last]
    if outcome.indices[0] < 0 or outcome.indices[-1] >= n_last:
        raise InvariantError("postselection indices within range", f"{outcome.indices} for axis length {n_last}")
    selected = dist.values.take(list(outcome.indices), axis=last).sum(axis=last)
    p_sum = complex(selected.sum())
    p_trace = complex(np.trace(_last_axis_projector(dist, outcome.indices) @ dist.state.matrix))
    if abs(p_sum - p_trace) > TOL_CONSISTENCY:
        raise ConsistencyError(f"p(F|rho) mismatch: sum {p_sum!r} vs trace {p_trace!r}")
    if p_trace.real <= tol:
        raise PreconditionError(f"postselection probability {p_trace.real:.3e} is zero; conditioning undefined")
    p = p_trace.real
    return KDDistribution(
        selected / p,
        dist.bases[:last],
        dist.state,
        partitions=dist.partitions[:last],
        conditioned=True,
        postselection_probability=p,
    )


def _coarse_sum(values: np.ndarray, part: EigenspacePartition | None, axis: int) -> np.ndarray:
    if part is None:
        return values
    ind = part.indicator()
    return np.moveaxis(np.tensordot(ind, values, axes=([1], [axis])), 0, axis)


def coarse_grain(
    state: Ket | DensityOperator,
    partA: EigenspacePartition,
    partF: EigenspacePartition,
    basisA: OrthonormalBasis,
    basisF: OrthonormalBasis,
) -> KDDistribution:
    """Q[l, k] = Tr(F_k A_l rho), summing the fine distribution over each eigenspace."""
    rho, _ = _bases_and_state(state, (basisA, basisF))
    check_dims(partA, partF, basisA)
    fine = kd_array(rho.matrix, [basisA.matrix, basisF.matrix])
    vals = _coarse_sum(_coarse_sum(fine, partA, 0), partF, 1)
    return KDDistribution(vals, (basisA, basisF), rho, partitions=(partA, partF))


def one_sided_coarse_grain(
    state: Ket | DensityOperator,
    A: OrthonormalBasis,
    partF: EigenspacePartition,
    basisF: OrthonormalBasis,
) -> KDDistribution:
    """Q[i, k] = Tr(F_k |a_i><a_i| rho): fine on A, coarse on F."""
    rho, _ = _bases_and_state(state, (A, basisF))
    check_dims(partF, A)
    fine = kd_array(rho.matrix, [A.matrix, basisF.matrix])
    vals = _coarse_sum(fine, partF, 1)
    return KDDistribution(vals, (A, basisF), rho, partitions=(None, partF))


def kd_from_partitions(
    state: Ket | DensityOperator,
    bases: Sequence[OrthonormalBasis],
    partitions: Sequence[EigenspacePartition | None],
) -> KDDistribution:
    """Dispatch helper: fine, one-sided or two-sided coarse distribution for two bases."""
    if len(bases) != 2 or len(partitions) != 2:
        raise KDQError("coarse-graining is defined for exactly two bases")
    pa, pf = partitions
    if pa is None and pf is None:
        return compute_kd(state, *bases)
    if pa is None:
        return one_sided_coarse_grain(state, bases[0], pf, bases[1])
    if pf is None:
        pf = EigenspacePartition.singletons(bases[1].dim)
    return coarse_grain(state, pa, pf, bases[0], bases[1])

