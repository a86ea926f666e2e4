"""Sufficient conditions for KD nonclassicality and direct classification.

The theorem checks are one-sided: ``True`` certifies nonclassicality, ``False`` is
inconclusive and never a claim of classicality.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    TOL_COMMUTE,
    TOL_PARALLEL,
    DensityOperator,
    EigenspacePartition,
    Ket,
    KDQError,
    Observable,
    OrthonormalBasis,
    PreconditionError,
    as_density,
    check_dims,
    commutator,
    observable_matrix,
    resolve_tol,
)
from .kd import KDDistribution


@dataclass(frozen=True)
class SupportCounts:
    """Integers entering the classicality inequality 2 N_A + 2 N_F <= 3 d + n_par - 3 n_bar_par."""

    d: int
    N_A: int
    N_F: int
    n_par: int
    n_bar_par: int
    coarse: bool = False

    def __post_init__(self) -> None:
        if not (0 <= self.N_A <= self.d and 0 <= self.N_F <= self.d):
            raise KDQError(f"support counts out of range: {self}")
        if not (0 <= self.n_par + self.n_bar_par <= self.d):
            raise KDQError(f"parallel counts out of range: {self}")

    @property
    def lhs(self) -> int:
        return 2 * self.N_A + 2 * self.N_F

    @property
    def rhs(self) -> int:
        return 3 * self.d + self.n_par - 3 * self.n_bar_par

    @property
    def saturated(self) -> bool:
        """The classical inequality holds with equality."""
        return self.lhs == self.rhs

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "N_A": self.N_A,
            "N_F": self.N_F,
            "n_par": self.n_par,
            "n_bar_par": self.n_bar_par,
            "coarse": self.coarse,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "saturated": self.saturated,
        }


class Label(str, Enum):
    CLASSICAL = "Classical"
    NEGATIVE = "Negative"
    NONREAL = "Nonreal"
    NEGATIVE_AND_NONREAL = "NegativeAndNonreal"


@dataclass(frozen=True)
class Verdict:
    label: Label
    max_negative_real: float  # most negative real part, 0.0 if none is negative
    max_abs_imag: float
    zero_count: int

    @property
    def is_classical(self) -> bool:
        return self.label is Label.CLASSICAL

    def as_dict(self) -> dict:
        return {
            "label": self.label.value,
            "max_negative_real": self.max_negative_real,
            "max_abs_imag": self.max_abs_imag,
            "zero_count": self.zero_count,
        }


def classify_array(values: np.ndarray, tol: float) -> Label:
    negative = bool(np.any(values.real < -tol))
    nonreal = bool(np.any(np.abs(values.imag) > tol))
    if negative and nonreal:
        return Label.NEGATIVE_AND_NONREAL
    if negative:
        return Label.NEGATIVE
    if nonreal:
        return Label.NONREAL
    return Label.CLASSICAL


def classify(dist: KDDistribution | np.ndarray, tol: float | None = None) -> Verdict:
    tol = resolve_tol(tol)
    values = dist.values if isinstance(dist, KDDistribution) else np.asarray(dist, dtype=complex)
    return Verdict(
        label=classify_array(values, tol),
        max_negative_real=float(min(0.0, np.min(values.real))),
        max_abs_imag=float(np.max(np.abs(values.imag))),
        zero_count=int(np.count_nonzero(np.abs(values) <= tol)),
    )


def _pure_ket(psi: Ket | DensityOperator) -> Ket:
    if isinstance(psi, Ket):
        return psi
    # The theorems are stated for pure states; mixed input is refused, not purified.
    return psi.to_ket()


def support_counts_array(psi: np.ndarray, a: np.ndarray, f: np.ndarray, tol: float) -> tuple[int, int, int, int]:
    """(N_A, N_F, n_par, n_bar_par) from raw vectors; basis vectors are columns."""
    amp_a = np.abs(a.conj().T @ psi)
    amp_f = np.abs(f.conj().T @ psi)
    parallel = np.any(np.abs(a.conj().T @ f) > 1.0 - TOL_PARALLEL, axis=1)
    nonzero_a = amp_a > tol
    return (
        int(np.count_nonzero(nonzero_a)),
        int(np.count_nonzero(amp_f > tol)),
        int(np.count_nonzero(parallel & nonzero_a)),
        int(np.count_nonzero(parallel & ~nonzero_a)),
    )


def support_counts(
    psi: Ket | DensityOperator, A: OrthonormalBasis, F: OrthonormalBasis, tol: float | None = None
) -> SupportCounts:
    tol = resolve_tol(tol)
    ket = _pure_ket(psi)
    d = check_dims(ket, A, F)
    n_a, n_f, n_par, n_bar = support_counts_array(ket.amplitudes, A.matrix, F.matrix, tol)
    return SupportCounts(d, n_a, n_f, n_par, n_bar)


def thm1_sufficient_nonclassical(counts: SupportCounts) -> bool:
    if counts.coarse:
        raise PreconditionError("fine-grained counts required; use coarse_thm_check for coarse counts")
    return counts.lhs > counts.rhs


def corollary1_check(dist: KDDistribution, tol: float | None = None) -> bool:
    """True when no quasiprobability vanishes, which certifies nonclassicality."""
    tol = resolve_tol(tol)
    if dist.k != 2:
        raise PreconditionError(f"corollary applies to k = 2 distributions, got k = {dist.k}")
    return bool(np.all(np.abs(dist.values) > tol))


def _block_projections(psi: np.ndarray, part: EigenspacePartition, basis: OrthonormalBasis) -> list[np.ndarray]:
    return [part.block_projector(basis, l) @ psi for l in range(part.n_blocks)]


def coarse_support_counts(
    psi: Ket | DensityOperator,
    partA: EigenspacePartition,
    partF: EigenspacePartition,
    basisA: OrthonormalBasis,
    basisF: OrthonormalBasis,
    tol: float | None = None,
) -> SupportCounts:
    """Counts over eigenspace projections A_l|psi>, F_k|psi>.

    n_par counts distinct l whose normalized nonzero projection is parallel to at least
    one normalized nonzero F-projection.  A block with zero projection counts toward
    n_bar_par when its eigenspace coincides with an F eigenspace; for singleton
    partitions this reduces exactly to the fine-grained counts.
    """
    tol = resolve_tol(tol)
    ket = _pure_ket(psi)
    d = check_dims(ket, partA, partF, basisA, basisF)
    v = ket.amplitudes
    pa = _block_projections(v, partA, basisA)
    pf = _block_projections(v, partF, basisF)
    norm_a = [float(np.linalg.norm(x)) for x in pa]
    norm_f = [float(np.linalg.norm(x)) for x in pf]
    unit_f = [x / n for x, n in zip(pf, norm_f) if n > tol]
    projs_f = [partF.block_projector(basisF, k) for k in range(partF.n_blocks)]
    n_par = n_bar = 0
    for l, (x, n) in enumerate(zip(pa, norm_a)):
        if n > tol:
            u = x / n
            if any(abs(np.vdot(u, w)) > 1.0 - TOL_PARALLEL for w in unit_f):
                n_par += 1
        else:
            proj_a = partA.block_projector(basisA, l)
            if any(np.max(np.abs(proj_a - pk)) <= tol for pk in projs_f):
                n_bar += 1
    return SupportCounts(
        d,
        sum(n > tol for n in norm_a),
        sum(n > tol for n in norm_f),
        n_par,
        n_bar,
        coarse=True,
    )


def coarse_thm_check(counts: SupportCounts) -> bool:
    if not counts.coarse:
        raise PreconditionError("coarse counts required; use thm1_sufficient_nonclassical for fine counts")
    return counts.lhs > counts.rhs


def corollary2_check(
    dist: KDDistribution,
    partA: EigenspacePartition,
    partF: EigenspacePartition,
    tol: float | None = None,
) -> bool:
    """Coarse analogue of the no-zeros corollary.

    Requires one observable nondegenerate and the other not completely degenerate.
    """
    tol = resolve_tol(tol)
    if not (partA.is_trivial or partF.is_trivial):
        raise PreconditionError("corollary needs at least one nondegenerate observable")
    if partA.n_blocks < 2 or partF.n_blocks < 2:
        raise PreconditionError("corollary needs the degenerate observable to have at least two eigenspaces")
    return bool(np.all(np.abs(dist.values) > tol))


@dataclass(frozen=True)
class CommutationReport:
    """Which pairs among (rho, A, F) commute (max-entry norm of the commutator <= tol)."""

    rho_A: bool
    rho_F: bool
    A_F: bool

    @property
    def any_commute(self) -> bool:
        return self.rho_A or self.rho_F or self.A_F

    def as_dict(self) -> dict:
        return {"rho_A_commute": self.rho_A, "rho_F_commute": self.rho_F, "A_F_commute": self.A_F}


def commutation_report(
    state: Ket | DensityOperator, A: Observable, F: Observable, tol: float = TOL_COMMUTE
) -> CommutationReport:
    rho = as_density(state)
    check_dims(rho, A, F)
    ma, mf, r = observable_matrix(A), observable_matrix(F), rho.matrix

    def vanishes(x, y) -> bool:
        return float(np.max(np.abs(commutator(x, y)))) <= tol

    return CommutationReport(vanishes(r, ma), vanishes(r, mf), vanishes(ma, mf))
