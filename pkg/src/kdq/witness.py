"""Hermitian witnesses whose half-expectations are the real / imaginary parts of KD entries.

H = i Pa Pf - i Pf Pa and G = Pa Pf + Pf Pa for rank-1 projectors, and the coarse
analogues R, S with Pf replaced by an eigenspace projector F_k.  Each has exactly two
nonzero eigenvalues, available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import DimensionMismatchError, Ket, KDQError, PreconditionError

# Overlaps (or p^a_F) this close to 0 or 1 are refused: the closed-form vectors become ill-conditioned.
DEGENERACY_MARGIN = 1e-6
TOL_RESIDUAL = 1e-8


class WitnessKind(str, Enum):
    H = "H"  # imaginary part, rank-1 pair
    G = "G"  # real part, rank-1 pair
    R = "R"  # imaginary part, coarse
    S = "S"  # real part, coarse


@dataclass(frozen=True, eq=False)
class WitnessEigenpairs:
    operator: np.ndarray
    nonzero_eigenvalues: tuple[float, float]  # (lambda_plus, lambda_minus)
    eigenvectors: tuple[Ket, Ket]
    kind: WitnessKind

    def __post_init__(self) -> None:
        lp, lm = self.nonzero_eigenvalues
        for lam, v in zip(self.nonzero_eigenvalues, self.eigenvectors):
            res = float(np.linalg.norm(self.operator @ v.amplitudes - lam * v.amplitudes))
            if res > TOL_RESIDUAL:
                raise KDQError(f"witness eigenpair residual {res:.3e} exceeds {TOL_RESIDUAL}")
        if self.kind in (WitnessKind.G, WitnessKind.S) and not lp > 0 > lm:
            raise KDQError("real-part witness needs lambda+ > 0 > lambda-")
        if self.kind in (WitnessKind.H, WitnessKind.R) and abs(lp + lm) > TOL_RESIDUAL:
            raise KDQError("imaginary-part witness needs lambda+ = -lambda-")

    @property
    def plus(self) -> tuple[float, Ket]:
        return self.nonzero_eigenvalues[0], self.eigenvectors[0]

    @property
    def minus(self) -> tuple[float, Ket]:
        return self.nonzero_eigenvalues[1], self.eigenvectors[1]

    def half_expectation(self, rho: np.ndarray) -> float:
        """0.5 Tr(W rho): the KD entry component this witness encodes."""
        return float(0.5 * np.real(np.trace(self.operator @ rho)))


def _check(a: Ket, other_dim: int) -> None:
    if a.dim != other_dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {other_dim}")


def _refuse_degenerate(x: float, what: str) -> None:
    if x <= DEGENERACY_MARGIN or x >= 1.0 - DEGENERACY_MARGIN:
        raise PreconditionError(
            f"{what} = {x:.3e} is (numerically) 0 or 1: the witness eigenstructure is degenerate; "
            "diagonalize the operator directly instead"
        )


def _ket(v: np.ndarray) -> Ket:
    return Ket(v / np.linalg.norm(v))


def imag_witness(a: Ket, f: Ket) -> WitnessEigenpairs:
    _check(a, f.dim)
    ov = complex(np.vdot(a.amplitudes, f.amplitudes))
    m = abs(ov)
    _refuse_degenerate(m, "|<a|f>|")
    pa = np.outer(a.amplitudes, a.amplitudes.conj())
    pf = np.outer(f.amplitudes, f.amplitudes.conj())
    op = 1j * pa @ pf - 1j * pf @ pa
    phase = np.exp(1j * np.angle(ov))
    s = np.sqrt(1.0 - m * m)
    vals, vecs = [], []
    for sign in (1.0, -1.0):
        vals.append(sign * m * s)
        v = ((-sign - 1j * m / s) * phase * a.amplitudes + 1j / s * f.amplitudes) / np.sqrt(2.0)
        vecs.append(_ket(v))
    return WitnessEigenpairs(op, (vals[0], vals[1]), (vecs[0], vecs[1]), WitnessKind.H)


def real_witness(a: Ket, f: Ket) -> WitnessEigenpairs:
    _check(a, f.dim)
    ov = complex(np.vdot(a.amplitudes, f.amplitudes))
    m = abs(ov)
    _refuse_degenerate(m, "|<a|f>|")
    pa = np.outer(a.amplitudes, a.amplitudes.conj())
    pf = np.outer(f.amplitudes, f.amplitudes.conj())
    op = pa @ pf + pf @ pa
    phase = np.exp(1j * np.angle(ov))
    vals = (m * (m + 1.0), m * (m - 1.0))
    # printed (|f> +- e^{i arg} |a>)/sqrt(2) is not unit norm; renormalized here
    vecs = tuple(_ket(f.amplitudes + sign * phase * a.amplitudes) for sign in (1.0, -1.0))
    return WitnessEigenpairs(op, vals, vecs, WitnessKind.G)


def _block_setup(a: Ket, F_block: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    F_block = np.asarray(F_block, dtype=complex)
    if F_block.shape != (a.dim, a.dim):
        raise DimensionMismatchError(f"projector shape {F_block.shape} does not match dim {a.dim}")
    if np.max(np.abs(F_block @ F_block - F_block)) > 1e-9 or np.max(np.abs(F_block - F_block.conj().T)) > 1e-9:
        raise KDQError("F_block must be an orthogonal projector")
    pa = np.outer(a.amplitudes, a.amplitudes.conj())
    p = float(np.real(np.trace(pa @ F_block)))
    _refuse_degenerate(p, "p^a_F = Tr(P_a F)")
    return pa, F_block, p


def coarse_imag_witness(a: Ket, F_block: np.ndarray) -> WitnessEigenpairs:
    pa, fk, p = _block_setup(a, F_block)
    op = 1j * pa @ fk - 1j * fk @ pa
    fa = fk @ a.amplitudes
    r = np.sqrt(p - p * p)
    vals, vecs = [], []
    for sign in (1.0, -1.0):
        vals.append(sign * r)
        v = ((-sign / np.sqrt(p) + 1j / np.sqrt(1 - p)) * fa - 1j / np.sqrt(1 - p) * a.amplitudes) / np.sqrt(2.0)
        vecs.append(_ket(v))
    return WitnessEigenpairs(op, (vals[0], vals[1]), (vecs[0], vecs[1]), WitnessKind.R)


def coarse_real_witness(a: Ket, F_block: np.ndarray) -> WitnessEigenpairs:
    pa, fk, p = _block_setup(a, F_block)
    op = pa @ fk + fk @ pa
    fa = fk @ a.amplitudes
    vals = (p + np.sqrt(p), p - np.sqrt(p))
    vecs = tuple(_ket(a.amplitudes + sign / np.sqrt(p) * fa) for sign in (1.0, -1.0))
    return WitnessEigenpairs(op, vals, vecs, WitnessKind.S)


def tailor_state(witness: WitnessEigenpairs, target: float) -> Ket:
    """Real superposition cos(t) v+ + sin(t) v- whose half-expectation equals ``target``."""
    lp, lm = witness.nonzero_eigenvalues
    lo, hi = lm / 2.0, lp / 2.0
    if not lo - 1e-12 <= target <= hi + 1e-12:
        raise PreconditionError(f"target {target} outside achievable interval [{lo}, {hi}]")
    cos2 = float(np.clip((2.0 * target - lm) / (lp - lm), 0.0, 1.0))
    c, s = np.sqrt(cos2), np.sqrt(1.0 - cos2)
    vp, vm = (v.amplitudes for v in witness.eigenvectors)
    return _ket(c * vp + s * vm)


def witness_by_kind(kind: str, a: Ket, f: Ket | np.ndarray) -> WitnessEigenpairs:
    kind = WitnessKind(kind)
    if kind is WitnessKind.H:
        return imag_witness(a, f)
    if kind is WitnessKind.G:
        return real_witness(a, f)
    if kind is WitnessKind.R:
        return coarse_imag_witness(a, f)
    return coarse_real_witness(a, f)
