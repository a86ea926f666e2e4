"""Nonclassicality measures (total, negativity, imaginarity) and the maximal-value bound."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DensityOperator, Ket, OrthonormalBasis, as_density, check_dims
from .kd import KDDistribution

TOL_SATURATION = 1e-8
TOL_CONDITIONS = 1e-9


@dataclass(frozen=True)
class NonclassicalityReport:
    total: float
    negativity: float
    imaginarity: float
    bound: float | None  # None for conditioned distributions, where no bound applies
    saturates_bound: bool

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "negativity": self.negativity,
            "imaginarity": self.imaginarity,
            "bound": self.bound,
            "saturates_bound": self.saturates_bound,
        }


def measures_array(values: np.ndarray, axes=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(total, negativity, imaginarity) summed over ``axes`` (all axes by default)."""
    total = np.abs(values).sum(axis=axes) - 1.0
    negativity = np.abs(values.real).sum(axis=axes) - 1.0
    imaginarity = np.abs(values.imag).sum(axis=axes)
    return total, negativity, imaginarity


def thm2_bound(d: int, k: int) -> float:
    """Maximum total nonclassicality d**((k-1)/2) - 1."""
    if d < 2 or k < 2:
        raise ValueError(f"need d >= 2 and k >= 2, got d={d}, k={k}")
    return float(d ** ((k - 1) / 2) - 1.0)


def nonclassicality_measures(dist: KDDistribution | np.ndarray, d: int | None = None) -> NonclassicalityReport:
    """Measures of a distribution.  Raw arrays need ``d`` for the bound (else it is None)."""
    if isinstance(dist, KDDistribution):
        values, conditioned, d = dist.values, dist.conditioned, dist.dim
    else:
        values, conditioned = np.asarray(dist, dtype=complex), False
    total, neg, imag = (float(x) for x in measures_array(values))
    if conditioned or d is None:
        return NonclassicalityReport(total, neg, imag, None, False)
    bound = thm2_bound(d, values.ndim)
    return NonclassicalityReport(total, neg, imag, bound, abs(total - bound) <= TOL_SATURATION)


@dataclass(frozen=True)
class MaxConditions:
    """Diagnostics for the two conditions under which the bound is attained."""

    adjacent_unbiased: tuple[bool, ...]
    pure: bool
    unbiased_to_first: bool
    unbiased_to_last: bool

    @property
    def condition_i(self) -> bool:
        return all(self.adjacent_unbiased)

    @property
    def condition_ii(self) -> bool:
        return self.pure and self.unbiased_to_first and self.unbiased_to_last

    @property
    def satisfied(self) -> bool:
        return self.condition_i and self.condition_ii

    def __bool__(self) -> bool:
        return self.satisfied


def _unbiased(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    d = a.shape[0]
    return bool(np.all(np.abs(np.abs(a.conj().T @ b) - 1.0 / np.sqrt(d)) <= tol))


def check_max_conditions(
    state: Ket | DensityOperator, bases: Sequence[OrthonormalBasis], tol: float = TOL_CONDITIONS
) -> MaxConditions:
    rho = as_density(state)
    d = check_dims(rho, *bases)
    adjacent = tuple(_unbiased(bases[n].matrix, bases[n + 1].matrix, tol) for n in range(len(bases) - 1))
    pure = rho.is_pure(tol)
    first = last = False
    if pure:
        psi = rho.to_ket(tol).amplitudes
        target = 1.0 / np.sqrt(d)
        first = bool(np.all(np.abs(np.abs(bases[0].matrix.conj().T @ psi) - target) <= tol))
        last = bool(np.all(np.abs(np.abs(bases[-1].matrix.conj().T @ psi) - target) <= tol))
    return MaxConditions(adjacent, pure, first, last)
