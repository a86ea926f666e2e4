"""Depolarization and convex mixing, and how they dilute KD nonclassicality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ConsistencyError, DensityOperator, Ket, KDQError, OrthonormalBasis, as_density, check_dims
from .kd import compute_kd, kd_array
from .measures import NonclassicalityReport, nonclassicality_measures

TOL_WEIGHTS = 1e-10
TOL_NEGATIVITY = 1e-10
# Bisection predicate: summed negative parts, free of the cancellation in -1 + sum|Re q|.
TOL_NEGATIVE_PART = 1e-14
TOL_BISECTION = 1e-8
TOL_SWEEP = 1e-9


def depolarize(state: Ket | DensityOperator, p: float) -> DensityOperator:
    """p rho + (1 - p) 1/d."""
    if not 0.0 <= p <= 1.0:
        raise KDQError(f"p must lie in [0, 1], got {p}")
    rho = as_density(state)
    return DensityOperator(p * rho.matrix + (1.0 - p) * np.eye(rho.dim) / rho.dim)


def convex_mix(states: Sequence[Ket | DensityOperator], weights: Sequence[float]) -> DensityOperator:
    w = np.asarray(weights, dtype=float)
    rhos = [as_density(s) for s in states]
    if len(rhos) == 0 or len(rhos) != w.size:
        raise KDQError("need one weight per state and at least one state")
    check_dims(*rhos)
    if np.any(w < 0) or abs(w.sum() - 1.0) > TOL_WEIGHTS:
        raise KDQError(f"weights must be a probability vector, got {w.tolist()}")
    return DensityOperator(sum(wi * r.matrix for wi, r in zip(w, rhos)))


def analytic_negativity_threshold(state0: Ket | DensityOperator, A: OrthonormalBasis, F: OrthonormalBasis) -> float | None:
    """Largest p with no negative entry, from the per-entry affine crossings.

    Re q(p) = p Re q0 + (1 - p) c with c = |<f|a>|^2 / d >= 0, so a cell with
    Re q0 < 0 turns negative above p = c / (c - Re q0).  The threshold is the
    smallest such crossing.
    """
    rho = as_density(state0)
    d = check_dims(rho, A, F)
    q0 = compute_kd(rho, A, F).values
    c = np.abs(A.matrix.conj().T @ F.matrix) ** 2 / d
    if float(np.abs(q0.real).sum() - 1.0) <= TOL_NEGATIVITY:
        return None
    neg = q0.real < 0
    crossings = c[neg] / (c[neg] - q0.real[neg])
    return float(np.min(crossings))


def negativity_threshold(
    state0: Ket | DensityOperator,
    A: OrthonormalBasis,
    F: OrthonormalBasis,
    tol: float = TOL_BISECTION,
) -> float | None:
    """Largest depolarization parameter p with no negative entry, by bisection to ``tol``.

    Returns None when the undepolarized distribution has negativity <= 1e-10.  Each
    Re q is affine in p and nonnegative at p = 0, so the negative-part sum is zero
    exactly on an interval [0, p*].  The bisection tests that sum against a roundoff
    tolerance instead of the aggregated negativity, whose 1e-10 floor would shift p*
    by up to 1e-10 / slope.
    """
    rho = as_density(state0)
    check_dims(rho, A, F)

    def real_parts(p: float) -> np.ndarray:
        return kd_array(depolarize(rho, p).matrix, [A.matrix, F.matrix]).real

    if float(np.abs(real_parts(1.0)).sum() - 1.0) <= TOL_NEGATIVITY:
        return None
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(np.maximum(-real_parts(mid), 0.0).sum()) <= TOL_NEGATIVE_PART:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class DepolarizationSweep:
    p_values: tuple[float, ...]
    reports: tuple[NonclassicalityReport, ...]
    negativity_threshold: float | None

    def rows(self) -> list[tuple[float, float, float, float]]:
        return [(p, r.total, r.negativity, r.imaginarity) for p, r in zip(self.p_values, self.reports)]


def depolarization_sweep(
    state0: Ket | DensityOperator,
    A: OrthonormalBasis,
    F: OrthonormalBasis,
    p_values: Sequence[float],
) -> DepolarizationSweep:
    """Measures of the depolarized state's KD distribution at each p.

    Checks the dilution relations: total(p) <= p total(1), negativity(p) <= p negativity(1)
    and imaginarity(p) = p imaginarity(1).
    """
    rho = as_density(state0)
    ps = tuple(float(p) for p in sorted(p_values))
    ref = nonclassicality_measures(compute_kd(rho, A, F))
    reports = []
    for p in ps:
        r = nonclassicality_measures(compute_kd(depolarize(rho, p), A, F))
        if r.total > p * ref.total + TOL_SWEEP:
            raise ConsistencyError(f"total {r.total} exceeds p * total(1) at p = {p}")
        if r.negativity > p * ref.negativity + TOL_SWEEP:
            raise ConsistencyError(f"negativity {r.negativity} exceeds p * negativity(1) at p = {p}")
        if abs(r.imaginarity - p * ref.imaginarity) > TOL_SWEEP:
            raise ConsistencyError(f"imaginarity not linear in p at p = {p}")
        reports.append(r)
    return DepolarizationSweep(ps, tuple(reports), negativity_threshold(rho, A, F))


def parse_p_range(spec: str) -> list[float]:
    """'start:stop:step' (inclusive stop) or a comma-separated list."""
    if ":" in spec:
        start, stop, step = (float(x) for x in spec.split(":"))
        if step <= 0 or stop < start:
            raise KDQError(f"bad range {spec!r}")
        n = int(round((stop - start) / step)) + 1
        return [float(x) for x in np.linspace(start, start + (n - 1) * step, n)]
    return [float(x) for x in spec.split(",") if x.strip()]
