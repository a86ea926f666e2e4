"""Foundational state, basis and observable types plus small dense linear algebra.

Every type here is a frozen dataclass wrapping read-only numpy arrays.  Validation
happens once at construction; the array-level helpers (``*_array`` functions and
the ``matrix`` attributes) are what the batched scan code works with directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL_NORM = 1e-10
TOL_HERMITIAN = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-8
TOL_ORTHONORMAL = 1e-10
# Threshold for "this overlap / amplitude / quasiprobability is zero".
TOL_ZERO = 1e-9
# |<a|f>| above 1 - TOL_PARALLEL counts as parallel.
TOL_PARALLEL = 1e-9
TOL_COMMUTE = 1e-9
# Eigenvalues closer than this are treated as one degenerate eigenspace.
TOL_DEGENERATE = 1e-9


class KDQError(ValueError):
    """Base class for domain errors raised by this package."""


class DimensionMismatchError(KDQError):
    pass


class InvariantError(KDQError):
    """An input object violates one of its type invariants."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class PreconditionError(KDQError):
    pass


class ConsistencyError(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""


def resolve_tol(tol: float | None) -> float:
    if tol is None:
        return TOL_ZERO
    if not tol > 0:
        raise KDQError(f"tolerance must be positive, got {tol!r}")
    return float(tol)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit vector in C^d (d >= 2)."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise InvariantError("ket amplitudes must be one-dimensional")
        if amps.size < 2:
            raise InvariantError("dim >= 2", f"got dim {amps.size}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > TOL_NORM:
            raise InvariantError("sum |amplitude|^2 = 1", f"got {norm2!r}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex] | np.ndarray) -> Ket:
        v = np.asarray(amplitudes, dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise InvariantError("ket must be nonzero")
        return cls(v / n)

    @classmethod
    def basis_state(cls, d: int, index: int) -> Ket:
        v = np.zeros(d, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityOperator:
        return DensityOperator.from_ket(self)

    def __repr__(self) -> str:
        return f"Ket(dim={self.dim}, amplitudes={np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite d x d matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantError("density matrix must be square", f"shape {m.shape}")
        if m.shape[0] < 2:
            raise InvariantError("dim >= 2", f"got dim {m.shape[0]}")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > TOL_HERMITIAN:
            raise InvariantError("Hermitian", f"max|M - M^dagger| = {herm:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TOL_TRACE:
            raise InvariantError("trace = 1", f"got {tr!r}")
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -TOL_PSD:
            raise InvariantError("positive semidefinite", f"smallest eigenvalue {lam_min:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def from_ket(cls, psi: Ket) -> DensityOperator:
        v = psi.amplitudes
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> DensityOperator:
        return cls(np.eye(d, dtype=complex) / d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity() - 1.0) <= tol

    def to_ket(self, tol: float = 1e-9) -> Ket:
        """Return the state vector of a pure state (phase fixed so the largest amplitude is real positive)."""
        if not self.is_pure(tol):
            raise PreconditionError("state is mixed; a pure state is required")
        w, v = np.linalg.eigh(self.matrix)
        vec = v[:, -1]
        k = int(np.argmax(np.abs(vec)))
        vec = vec * np.exp(-1j * np.angle(vec[k]))
        return Ket.normalized(vec)


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Ordered orthonormal basis, stored as the columns of a unitary matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantError("basis must have d vectors of dimension d", f"shape {m.shape}")
        if m.shape[0] < 2:
            raise InvariantError("dim >= 2", f"got dim {m.shape[0]}")
        gram = m.conj().T @ m
        err = float(np.max(np.abs(gram - np.eye(m.shape[0]))))
        if err > TOL_ORTHONORMAL:
            raise InvariantError("orthonormal: |<v_i|v_j> - delta_ij| <= 1e-10", f"max deviation {err:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def from_kets(cls, kets: Iterable[Ket]) -> OrthonormalBasis:
        return cls(np.column_stack([k.amplitudes for k in kets]))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[complex]] | np.ndarray) -> OrthonormalBasis:
        """Build from a sequence of (not necessarily normalized) vectors."""
        cols = [np.asarray(c, dtype=complex) for c in columns]
        return cls(np.column_stack([c / np.linalg.norm(c) for c in cols]))

    @classmethod
    def computational(cls, d: int) -> OrthonormalBasis:
        return cls(np.eye(d, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def vectors(self) -> tuple[Ket, ...]:
        return tuple(Ket(self.matrix[:, i]) for i in range(self.dim))

    def __getitem__(self, index: int) -> Ket:
        return Ket(self.matrix[:, index])

    def __len__(self) -> int:
        return self.dim


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable given by an eigenbasis and real eigenvalues."""

    basis: OrthonormalBasis
    eigenvalues: tuple[float, ...]

    def __post_init__(self) -> None:
        ev = tuple(float(x) for x in self.eigenvalues)
        if len(ev) != self.basis.dim:
            raise InvariantError("length(eigenvalues) = d", f"{len(ev)} != {self.basis.dim}")
        object.__setattr__(self, "eigenvalues", ev)

    @classmethod
    def nondegenerate(cls, basis: OrthonormalBasis) -> Observable:
        """Observable with eigenvalues 0, 1, ..., d-1 on ``basis``."""
        return cls(basis, tuple(float(i) for i in range(basis.dim)))

    @property
    def dim(self) -> int:
        return self.basis.dim

    def partition(self, tol: float = TOL_DEGENERATE) -> EigenspacePartition:
        """Group basis indices by (numerically) equal eigenvalue, in order of first appearance."""
        blocks: list[list[int]] = []
        labels: list[float] = []
        for i, lam in enumerate(self.eigenvalues):
            for b, lab in zip(blocks, labels):
                if abs(lam - lab) <= tol:
                    b.append(i)
                    break
            else:
                blocks.append([i])
                labels.append(lam)
        return EigenspacePartition(self.dim, tuple(tuple(b) for b in blocks), tuple(labels))


@dataclass(frozen=True)
class EigenspacePartition:
    """Partition of basis indices {0..d-1} into labelled degenerate eigenspaces."""

    dim: int
    blocks: tuple[tuple[int, ...], ...]
    labels: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        labels = tuple(float(x) for x in self.labels) if self.labels else tuple(float(i) for i in range(len(blocks)))
        if any(len(b) == 0 for b in blocks):
            raise InvariantError("blocks are non-empty")
        flat = [i for b in blocks for i in b]
        if sorted(flat) != list(range(self.dim)):
            raise InvariantError("blocks are disjoint and cover {0..d-1}", f"got {blocks}")
        if len(labels) != len(blocks):
            raise InvariantError("one label per block")
        if len(set(labels)) != len(labels):
            raise InvariantError("distinct blocks carry distinct labels")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def singletons(cls, d: int) -> EigenspacePartition:
        return cls(d, tuple((i,) for i in range(d)))

    @classmethod
    def single_block(cls, d: int) -> EigenspacePartition:
        return cls(d, (tuple(range(d)),))

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def is_trivial(self) -> bool:
        """True when every block is a singleton (nondegenerate observable)."""
        return all(len(b) == 1 for b in self.blocks)

    def block_projector(self, basis: OrthonormalBasis, block: int) -> np.ndarray:
        if basis.dim != self.dim:
            raise DimensionMismatchError(f"partition dim {self.dim} != basis dim {basis.dim}")
        cols = basis.matrix[:, list(self.blocks[block])]
        return cols @ cols.conj().T

    def indicator(self) -> np.ndarray:
        """0/1 matrix of shape (n_blocks, d) with a 1 where index i lies in block l."""
        m = np.zeros((self.n_blocks, self.dim))
        for l, b in enumerate(self.blocks):
            m[l, list(b)] = 1.0
        return m


def check_dims(*objs) -> int:
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def as_density(state: Ket | DensityOperator) -> DensityOperator:
    if isinstance(state, Ket):
        return DensityOperator.from_ket(state)
    return state


def inner_product(u: Ket, v: Ket) -> complex:
    """<u|v>, conjugate-linear in the first argument."""
    check_dims(u, v)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def projector(basis: OrthonormalBasis, index: int) -> np.ndarray:
    if not 0 <= index < basis.dim:
        raise KDQError(f"index {index} out of range for dim {basis.dim}")
    v = basis.matrix[:, index]
    return np.outer(v, v.conj())


def observable_matrix(obs: Observable) -> np.ndarray:
    U = obs.basis.matrix
    return (U * np.asarray(obs.eigenvalues)) @ U.conj().T


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def haar_random_unitary_array(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar unitaries from QR of a complex Ginibre matrix with the R diagonal phases divided out.

    ``size`` adds a leading batch axis.
    """
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def haar_random_ket_array(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_random_unitary(d: int, seed: int | np.random.Generator) -> np.ndarray:
    if d < 2:
        raise KDQError(f"d must be >= 2, got {d}")
    return haar_random_unitary_array(d, _rng(seed))


def haar_random_ket(d: int, seed: int | np.random.Generator) -> Ket:
    if d < 2:
        raise KDQError(f"d must be >= 2, got {d}")
    return Ket(haar_random_ket_array(d, _rng(seed)))


def haar_random_basis(d: int, seed: int | np.random.Generator) -> OrthonormalBasis:
    return OrthonormalBasis(haar_random_unitary(d, seed))
