"""Independent evaluation paths and seed-pinned falsification scans.

``kd_by_trace`` evaluates quasiprobabilities as traces of explicit dense projector
products and shares no code with :mod:`kdq.kd`.  The scans sample many random
instances and count violations of a claimed property; they are falsification
harnesses, not proofs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import classicality as cl
from .core import (
    DensityOperator,
    EigenspacePartition,
    Ket,
    KDQError,
    Observable,
    OrthonormalBasis,
    TOL_ZERO,
    as_density,
    check_dims,
    haar_random_ket_array,
    haar_random_unitary_array,
)
from .kd import kd_array
from .measures import measures_array, thm2_bound
from .mubs import fourier_basis, max_nonclassical_instance, pauli_mub_triplet, real_mub_triplet_d4

TOL_BOUND = 1e-9
TOL_INNER = 1e-12
CHUNK = 10_000


@dataclass(frozen=True)
class ScanResult:
    samples: int
    max_observed: float
    violations: int
    seed: int
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_observed": self.max_observed,
            "violations": self.violations,
            "seed": self.seed,
            "details": self.details,
        }


def _threads() -> int:
    env = os.environ.get("KDQ_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _chunked(samples: int, seed: int, work: Callable[[int, np.random.Generator], object]) -> list:
    """Split ``samples`` into fixed chunks with sub-seeds spawned from ``seed``.

    The chunking and seeds do not depend on the thread count, so results are
    reproducible however many workers run.
    """
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(n, np.random.default_rng(s)) for n, s in zip(sizes, children)]
    workers = min(_threads(), len(jobs)) or 1
    if workers == 1:
        return [work(n, rng) for n, rng in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


def kd_by_trace(
    state: Ket | DensityOperator,
    bases: Sequence[OrthonormalBasis],
    partitions: Sequence[EigenspacePartition | None] | None = None,
) -> np.ndarray:
    """Tr(P^(k)_{i_k} ... P^(1)_{i_1} rho) with each P a dense (block) projector matrix."""
    rho = as_density(state).matrix
    check_dims(as_density(state), *bases)
    if partitions is None:
        partitions = [None] * len(bases)
    projs = []
    for basis, part in zip(bases, partitions):
        m = basis.matrix
        if part is None:
            projs.append([np.outer(m[:, i], m[:, i].conj()) for i in range(basis.dim)])
        else:
            cols = [m[:, list(b)] for b in part.blocks]
            projs.append([c @ c.conj().T for c in cols])
    shape = tuple(len(p) for p in projs)
    out = np.empty(shape, dtype=complex)
    for idx in product(*(range(n) for n in shape)):
        op = rho
        for axis, i in enumerate(idx):
            op = projs[axis][i] @ op
        out[idx] = np.trace(op)
    return out


def _random_bases(rng: np.random.Generator, n: int, k: int, d: int) -> list[np.ndarray]:
    return [haar_random_unitary_array(d, rng, size=n) for _ in range(k)]


def _random_states(rng: np.random.Generator, n: int, d: int, mixed: bool) -> np.ndarray:
    psi = haar_random_ket_array(d, rng, size=n)
    rho = psi[:, :, None] * psi[:, None, :].conj()
    if not mixed:
        return rho
    phi = haar_random_ket_array(d, rng, size=n)
    w = rng.uniform(size=n)[:, None, None]
    return w * rho + (1 - w) * (phi[:, :, None] * phi[:, None, :].conj())


def saturating_instance(d: int, k: int) -> tuple[Ket, tuple[OrthonormalBasis, ...]]:
    """A (state, bases) pair attaining the maximal total nonclassicality.

    d = 2 uses the Pauli triplet and d = 4 the real triplet.  For odd d the bases
    alternate Fourier / computational and the state is the chirp exp(2 pi i j^2 / d),
    which is unbiased to both (Gauss sums have modulus sqrt(d) for odd d).
    """
    if d == 2:
        return max_nonclassical_instance(pauli_mub_triplet(), k)
    if d == 4:
        return max_nonclassical_instance(real_mub_triplet_d4(), k)
    if d % 2 == 1:
        j = np.arange(d)
        psi = Ket(np.exp(2j * np.pi * j * j / d) / np.sqrt(d))
        comp, four = OrthonormalBasis.computational(d), fourier_basis(d)
        return psi, tuple(four if n % 2 == 0 else comp for n in range(k))
    raise KDQError(f"no saturating construction available for d = {d}")


def bound_scan(
    d: int,
    k: int,
    samples: int,
    seed: int,
    *,
    inject: bool = False,
    mixed: bool = False,
) -> ScanResult:
    """Haar-random (state, k bases) draws; counts totals above d^((k-1)/2) - 1 + 1e-9."""
    if d < 2 or k < 2:
        raise KDQError(f"need d >= 2 and k >= 2, got d={d}, k={k}")
    bound = thm2_bound(d, k)
    axes = tuple(range(1, k + 1))

    def work(n: int, rng: np.random.Generator) -> tuple[float, int]:
        rho = _random_states(rng, n, d, mixed)
        q = kd_array(rho, _random_bases(rng, n, k, d))
        total, _, _ = measures_array(q, axes)
        return float(total.max()), int(np.count_nonzero(total > bound + TOL_BOUND))

    parts = _chunked(samples, seed, work)
    max_obs = max(p[0] for p in parts)
    violations = sum(p[1] for p in parts)
    details = {"d": d, "k": k, "bound": bound, "max_random": max_obs}
    if inject:
        psi, bases = saturating_instance(d, k)
        rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
        q = kd_array(rho, [b.matrix for b in bases])
        injected = float(np.abs(q).sum() - 1.0)
        details["injected_total"] = injected
        violations += int(injected > bound + TOL_BOUND)
        max_obs = max(max_obs, injected)
        samples += 1
    return ScanResult(samples, max_obs, violations, seed, details)


def _check_nonpositive(vectors: np.ndarray) -> bool:
    g = vectors.conj() @ vectors.T
    off = ~np.eye(len(vectors), dtype=bool)
    return bool(np.all(g.real[off] <= TOL_INNER) and np.all(np.abs(g.imag[off]) <= TOL_INNER))


def nonpositive_witness(n: int) -> np.ndarray:
    """The 2n vectors {+e_i, -e_i}, whose pairwise inner products are all <= 0."""
    eye = np.eye(n, dtype=complex)
    return np.concatenate([eye, -eye])


def nonpositive_set_search(n: int, trials: int, seed: int, rounds: int | None = None) -> ScanResult:
    """Randomized greedy growth of sets of nonzero vectors in C^n with pairwise inner products <= 0.

    Each trial draws a random unitary frame and a global phase; candidates are random
    real combinations, signed frame vectors, or negated sums of the current set, all
    carried by the trial's frame and phase so inner products stay real.  A candidate
    is kept when its inner product with every member has real part <= 1e-12 and
    imaginary part of magnitude <= 1e-12.  Trials are run in vectorized batches.
    """
    if n < 1:
        raise KDQError(f"n must be >= 1, got {n}")
    rounds = rounds if rounds is not None else 8 * n + 4
    cap = 2 * n + 2

    def work(t: int, rng: np.random.Generator) -> tuple[int, int, np.ndarray]:
        frames = haar_random_unitary_array(n, rng, size=t) if n > 1 else np.ones((t, 1, 1), complex)
        phases = np.exp(2j * np.pi * rng.uniform(size=t))
        sets = np.zeros((t, cap, n))  # real coordinates in the trial frame
        sizes = np.zeros(t, dtype=int)
        rows = np.arange(t)
        for _ in range(rounds):
            kind = rng.integers(0, 3, size=t)
            gauss = rng.standard_normal((t, n))
            signed = np.zeros((t, n))
            signed[rows, rng.integers(0, n, size=t)] = rng.choice([-1.0, 1.0], size=t)
            weights = rng.uniform(size=(t, cap)) * (np.arange(cap)[None, :] < sizes[:, None])
            negsum = -np.einsum("tc,tcn->tn", weights, sets) + 0.1 * rng.standard_normal((t, n)) * rng.integers(0, 2, size=(t, 1))
            cand = np.where(kind[:, None] == 0, gauss, np.where(kind[:, None] == 1, signed, negsum))
            nonzero = np.linalg.norm(cand, axis=1) > 1e-9
            # inner products computed on the complex embedded vectors
            emb_c = phases[:, None] * np.einsum("tij,tj->ti", frames, cand)
            emb_s = phases[:, None, None] * np.einsum("tij,tcj->tci", frames, sets)
            ips = np.einsum("tci,ti->tc", emb_s.conj(), emb_c)
            active = np.arange(cap)[None, :] < sizes[:, None]
            ok = (ips.real <= TOL_INNER) & (np.abs(ips.imag) <= TOL_INNER)
            accept = nonzero & np.all(ok | ~active, axis=1) & (sizes < cap)
            sets[rows[accept], sizes[accept]] = cand[accept]
            sizes = sizes + accept
        best = int(np.argmax(sizes))
        best_vecs = phases[best] * (frames[best] @ sets[best, : sizes[best]].T).T
        return int(sizes.max()), int(np.count_nonzero(sizes > 2 * n)), best_vecs

    parts = _chunked(trials, seed, work)
    max_size = max(p[0] for p in parts)
    violations = sum(p[1] for p in parts)
    best = max(parts, key=lambda p: p[0])[2]
    witness = nonpositive_witness(n)
    details = {
        "n": n,
        "limit": 2 * n,
        "witness_size": len(witness),
        "witness_valid": _check_nonpositive(witness),
        "best_set_valid": _check_nonpositive(best) if len(best) else True,
    }
    return ScanResult(trials, float(max_size), violations, seed, details)


def jensen_saturation_check(basis: OrthonormalBasis, psi: Ket, tol: float = 1e-8) -> tuple[float, bool]:
    """(sum_i |<b_i|psi>|, saturated) where the sum is at most sqrt(d)."""
    check_dims(basis, psi)
    amps = np.abs(basis.matrix.conj().T @ psi.amplitudes)
    saturated = bool(np.all(np.abs(amps - 1.0 / np.sqrt(basis.dim)) <= tol))
    return float(amps.sum()), saturated


def jensen_scan(d: int, samples: int, seed: int) -> ScanResult:
    bound = np.sqrt(d)

    def work(n: int, rng: np.random.Generator) -> tuple[float, int]:
        u = haar_random_unitary_array(d, rng, size=n)
        psi = haar_random_ket_array(d, rng, size=n)
        sums = np.abs(np.einsum("tji,tj->ti", u.conj(), psi)).sum(axis=1)
        return float(sums.max()), int(np.count_nonzero(sums > bound + TOL_BOUND))

    parts = _chunked(samples, seed, work)
    return ScanResult(samples, max(p[0] for p in parts), sum(p[1] for p in parts), seed, {"d": d, "bound": float(bound)})


@dataclass(frozen=True, eq=False)
class ClassicalInstance:
    psi: Ket
    A: Observable
    F: Observable
    label: str


def _example_instances() -> list[ClassicalInstance]:
    from .fixtures import load_example

    out = []
    for name in ("ex1", "ex2"):
        ex = load_example(name)
        out.append(ClassicalInstance(ex.psi, ex.obs_A, ex.obs_F, name))
    return out


def _block_instance(d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random (psi, A, F) arrays with a classical but pairwise-noncommuting KD distribution.

    Two constructions, each in the computational frame before a random global unitary:
      * rotated block: F rotates a block S1 (|S1| >= 2) and equals A elsewhere; psi has
        >= 2 nonzero amplitudes, all outside S1 (generalizes worked example 1).
      * aligned projection: psi has positive amplitudes; F contains psi's normalized
        projection onto S1 and an orthonormal completion of S1 orthogonal to it, and
        equals A outside S1 (generalizes worked example 2).
    """
    perm = rng.permutation(d)
    if d >= 4 and rng.uniform() < 0.5:
        m = int(rng.integers(2, d - 1))
        s1, s2 = perm[:m], perm[m:]
        f = np.eye(d, dtype=complex)
        f[np.ix_(s1, s1)] = haar_random_unitary_array(m, rng)
        psi = np.zeros(d, dtype=complex)
        psi[s2] = rng.uniform(0.2, 1.0, size=len(s2)) * np.exp(2j * np.pi * rng.uniform(size=len(s2)))
    else:
        m = int(rng.integers(2, d))
        s1 = perm[:m]
        psi = rng.uniform(0.2, 1.0, size=d).astype(complex)
        f = np.eye(d, dtype=complex)
        block = np.zeros((m, m), dtype=complex)
        block[:, 0] = psi[s1] / np.linalg.norm(psi[s1])
        rest = rng.standard_normal((m, m - 1)) + 1j * rng.standard_normal((m, m - 1))
        q, _ = np.linalg.qr(np.column_stack([block[:, 0], rest]))
        q[:, 0] = block[:, 0]
        f[np.ix_(s1, s1)] = q
    psi /= np.linalg.norm(psi)
    a = np.eye(d, dtype=complex)
    # random phases on basis vectors leave the distribution unchanged
    a = a * np.exp(2j * np.pi * rng.uniform(size=d))[None, :]
    f = f * np.exp(2j * np.pi * rng.uniform(size=d))[None, :]
    v = haar_random_unitary_array(d, rng)
    return v @ psi, v @ a, v @ f


def classical_noncommuting_search(d: int, samples: int, seed: int, tol: float = TOL_ZERO) -> list[ClassicalInstance]:
    """Triples (psi, A, F) whose KD distribution is Classical although rho, A, F pairwise fail to commute."""
    if d < 3:
        raise KDQError(f"structured constructions need d >= 3, got {d}")
    found = [inst for inst in _example_instances() if inst.psi.dim == d]
    rng = np.random.default_rng(seed)
    for s in range(samples):
        psi, a, f = _block_instance(d, rng)
        ket = Ket(psi)
        A = Observable(OrthonormalBasis(a), tuple(rng.permutation(d) + 1.0))
        F = Observable(OrthonormalBasis(f), tuple(rng.permutation(d) + 1.0))
        q = kd_array(np.outer(psi, psi.conj()), [a, f])
        if not cl.classify(q, tol).is_classical:
            continue
        if cl.commutation_report(ket, A, F).any_commute:
            continue
        found.append(ClassicalInstance(ket, A, F, f"random-{s}"))
    return found


def thm1_soundness_scan(d: int, samples: int, seed: int, tol: float = TOL_ZERO) -> ScanResult:
    """Haar-random pure triples: the theorem must never certify a Classical distribution.

    Counts (a) certified-but-Classical cases and (b) Classical cases violating the
    classical inequality; both are logically the same failure seen from two sides.
    """
    rng = np.random.default_rng(seed)
    psi = haar_random_ket_array(d, rng, size=samples)
    a = haar_random_unitary_array(d, rng, size=samples)
    f = haar_random_unitary_array(d, rng, size=samples)
    rho = psi[:, :, None] * psi[:, None, :].conj()
    q = kd_array(rho, [a, f])
    certified = classical = bad_cert = bad_classical = 0
    max_margin = -np.inf
    for t in range(samples):
        n_a, n_f, n_par, n_bar = cl.support_counts_array(psi[t], a[t], f[t], tol)
        counts = cl.SupportCounts(d, n_a, n_f, n_par, n_bar)
        cert = cl.thm1_sufficient_nonclassical(counts)
        is_classical = cl.classify_array(q[t], tol) is cl.Label.CLASSICAL
        certified += cert
        classical += is_classical
        bad_cert += cert and is_classical
        bad_classical += is_classical and counts.lhs > counts.rhs
        max_margin = max(max_margin, counts.lhs - counts.rhs)
    return ScanResult(
        samples,
        float(max_margin),
        bad_cert + bad_classical,
        seed,
        {"d": d, "certified": certified, "classical": classical},
    )


def _random_partition(d: int, rng: np.random.Generator) -> EigenspacePartition:
    labels = rng.integers(0, rng.integers(1, d + 1), size=d)
    blocks = [tuple(int(i) for i in np.flatnonzero(labels == v)) for v in np.unique(labels)]
    return EigenspacePartition(d, tuple(blocks))


def coarse_soundness_scan(d: int, samples: int, seed: int, tol: float = TOL_ZERO) -> ScanResult:
    """Random partitions of Haar bases: a coarse certificate must never meet a Classical distribution."""
    from .kd import coarse_grain

    rng = np.random.default_rng(seed)
    violations = certified = 0
    for _ in range(samples):
        psi = Ket(haar_random_ket_array(d, rng))
        A = OrthonormalBasis(haar_random_unitary_array(d, rng))
        F = OrthonormalBasis(haar_random_unitary_array(d, rng))
        pa, pf = _random_partition(d, rng), _random_partition(d, rng)
        counts = cl.coarse_support_counts(psi, pa, pf, A, F, tol)
        cert = cl.coarse_thm_check(counts)
        certified += cert
        if cert and cl.classify(coarse_grain(psi, pa, pf, A, F), tol).is_classical:
            violations += 1
    return ScanResult(samples, float(certified), violations, seed, {"d": d, "certified": certified})


@dataclass(frozen=True, eq=False)
class AmplificationInstance:
    psi: Ket
    A: OrthonormalBasis
    F: OrthonormalBasis
    outcome: tuple[int, ...]
    max_abs_conditional: float
    postselection_probability: float


def amplification_search(d: int, trials: int, seed: int) -> AmplificationInstance:
    """Gradient-free random search for a postselection whose conditional |q| exceeds 1.

    Tries every single-outcome postselection on the last basis and keeps the instance
    with the largest conditional magnitude.
    """
    rng = np.random.default_rng(seed)
    psi = haar_random_ket_array(d, rng, size=trials)
    a = haar_random_unitary_array(d, rng, size=trials)
    f = haar_random_unitary_array(d, rng, size=trials)
    q = kd_array(psi[:, :, None] * psi[:, None, :].conj(), [a, f])
    p = np.abs(np.einsum("tji,tj->ti", f.conj(), psi)) ** 2  # p[t, j] = |<f_j|psi>|^2
    ratio = np.abs(q) / np.maximum(p[:, None, :], 1e-300)
    ratio = np.where(p[:, None, :] > 1e-3, ratio, 0.0)  # keep postselection probabilities well-defined
    flat = int(np.argmax(ratio))
    t, _, j = np.unravel_index(flat, ratio.shape)
    return AmplificationInstance(
        Ket(psi[t]),
        OrthonormalBasis(a[t]),
        OrthonormalBasis(f[t]),
        (int(j),),
        float(ratio[t].max()),
        float(p[t, j]),
    )


def oracle_agreement(d: int, k: int, samples: int, seed: int) -> ScanResult:
    """Max entrywise |kd_by_trace - kd_array| over random mixed instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        rho = _random_states(rng, 1, d, mixed=True)[0]
        bases = [OrthonormalBasis(haar_random_unitary_array(d, rng)) for _ in range(k)]
        a = kd_by_trace(DensityOperator(rho), bases)
        b = kd_array(rho, [x.matrix for x in bases])
        worst = max(worst, float(np.max(np.abs(a - b))))
    return ScanResult(samples, worst, int(worst > 1e-10), seed, {"d": d, "k": k})
