"""Mutually unbiased bases and the instances that attain the nonclassicality maximum."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import DimensionMismatchError, InvariantError, Ket, KDQError, OrthonormalBasis

TOL_MUB = 1e-9
TOL_REAL = 1e-10


def is_mutually_unbiased(B1: OrthonormalBasis, B2: OrthonormalBasis, tol: float = TOL_MUB) -> bool:
    if B1.dim != B2.dim:
        raise DimensionMismatchError(f"dimension mismatch: {B1.dim} vs {B2.dim}")
    overlaps = np.abs(B1.matrix.conj().T @ B2.matrix)
    return bool(np.all(np.abs(overlaps - 1.0 / np.sqrt(B1.dim)) <= tol))


@dataclass(frozen=True, eq=False)
class MubFamily:
    bases: tuple[OrthonormalBasis, ...]

    def __post_init__(self) -> None:
        bases = tuple(self.bases)
        if len(bases) < 2:
            raise InvariantError("a MUB family has at least two bases")
        for b1, b2 in itertools.combinations(bases, 2):
            if not is_mutually_unbiased(b1, b2):
                raise InvariantError("pairwise unbiased: |<alpha_j|beta_k>| = 1/sqrt(d)")
        object.__setattr__(self, "bases", bases)

    @property
    def dim(self) -> int:
        return self.bases[0].dim

    @property
    def real_flag(self) -> bool:
        """All amplitudes real in the shared reference (computational) basis."""
        return all(float(np.max(np.abs(b.matrix.imag))) <= TOL_REAL for b in self.bases)

    def __len__(self) -> int:
        return len(self.bases)

    def __getitem__(self, i: int) -> OrthonormalBasis:
        return self.bases[i]


def fourier_basis(d: int) -> OrthonormalBasis:
    """Columns exp(2 pi i j k / d) / sqrt(d); unbiased with the computational basis."""
    if d < 2:
        raise KDQError(f"d must be >= 2, got {d}")
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return OrthonormalBasis(np.exp(2j * np.pi * j * k / d) / np.sqrt(d))


def fourier_pair(d: int) -> MubFamily:
    return MubFamily((OrthonormalBasis.computational(d), fourier_basis(d)))


def pauli_mub_triplet() -> MubFamily:
    """Eigenbases of sigma_z, sigma_x, sigma_y, in that order."""
    s = 1 / np.sqrt(2)
    z = np.eye(2, dtype=complex)
    x = np.array([[s, s], [s, -s]], dtype=complex)
    y = np.array([[s, s], [1j * s, -1j * s]], dtype=complex)
    return MubFamily((OrthonormalBasis(z), OrthonormalBasis(x), OrthonormalBasis(y)))


def hadamard_hadamard() -> np.ndarray:
    h = np.array([[1, 1], [1, -1]], dtype=float) / np.sqrt(2)
    return np.kron(h, h)


def _sign_columns(reference: np.ndarray) -> list[tuple[int, ...]]:
    """+-1 columns (first entry +1) that are unbiased with every column of ``reference``."""
    d = reference.shape[0]
    out = []
    for signs in itertools.product((-1, 1), repeat=d - 1):
        s = (1,) + signs
        v = np.array(s, dtype=float) / np.sqrt(d)
        if np.all(np.abs(np.abs(reference.T @ v) - 1 / np.sqrt(d)) <= 1e-12):
            out.append(s)
    return sorted(out)


def search_real_third_basis(reference: np.ndarray) -> np.ndarray | None:
    """Lexicographically smallest ordered set of d mutually orthogonal sign columns unbiased to ``reference``.

    Columns are compared with -1 < +1 and fixed to a leading +1.  Backtracking prunes
    any partial set with a non-orthogonal pair.
    """
    d = reference.shape[0]
    cands = _sign_columns(reference)

    def extend(chosen: list[tuple[int, ...]]) -> list[tuple[int, ...]] | None:
        if len(chosen) == d:
            return chosen
        for c in cands:
            if c in chosen:
                continue
            if all(np.dot(c, other) == 0 for other in chosen):
                found = extend(chosen + [c])
                if found is not None:
                    return found
        return None

    cols = extend([])
    if cols is None:
        return None
    return np.array(cols, dtype=float).T / np.sqrt(d)


@lru_cache(maxsize=None)
def _real4_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    hh = hadamard_hadamard()
    third = search_real_third_basis(hh)
    assert third is not None
    return np.eye(4), hh, third


def real_mub_triplet_d4() -> MubFamily:
    """Computational basis, Hadamard x Hadamard, and a searched third real basis in d = 4."""
    return MubFamily(tuple(OrthonormalBasis(m) for m in _real4_matrices()))


def max_nonclassical_instance(triplet: MubFamily, k: int) -> tuple[Ket, tuple[OrthonormalBasis, ...]]:
    """State and k bases attaining the maximum total nonclassicality.

    The state is element 0 of the first basis.  The last basis is the second family
    member when k is even and the third when k is odd, alternating towards the first
    basis; in effect basis n (1-indexed) is member 2 for even n, member 3 for odd n.
    """
    if len(triplet) < 3:
        raise KDQError("a triplet of MUBs is required")
    if k < 2:
        raise KDQError(f"k must be >= 2, got {k}")
    psi = triplet[0][0]
    bases = tuple(triplet[1] if n % 2 == 0 else triplet[2] for n in range(1, k + 1))
    return psi, bases


def family_by_name(name: str, d: int | None = None) -> MubFamily:
    if name == "fourier":
        if d is None:
            raise KDQError("fourier family needs a dimension")
        return fourier_pair(d)
    if name == "pauli":
        if d not in (None, 2):
            raise KDQError("pauli family is d = 2")
        return pauli_mub_triplet()
    if name == "real4":
        if d not in (None, 4):
            raise KDQError("real4 family is d = 4")
        return real_mub_triplet_d4()
    raise KDQError(f"unknown MUB family {name!r}")


def all_unbiased(bases: Sequence[OrthonormalBasis]) -> bool:
    return all(is_mutually_unbiased(a, b) for a, b in itertools.combinations(bases, 2))
