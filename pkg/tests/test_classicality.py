import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdq import classicality as cl
from kdq.core import (
    DensityOperator,
    EigenspacePartition,
    Ket,
    Observable,
    OrthonormalBasis,
    PreconditionError,
    haar_random_ket_array,
    haar_random_unitary_array,
)
from kdq.fixtures import load_example
from kdq.kd import coarse_grain, compute_extended_kd, compute_kd, one_sided_coarse_grain
from kdq.oracle import classical_noncommuting_search

from conftest import random_basis, random_ket, random_mixed


def counts_of(name):
    ex = load_example(name)
    return cl.support_counts(ex.psi, ex.A, ex.F)


def brute_counts(psi, a, f, tol=1e-9):
    """Direct reading of the definitions, one vector at a time."""
    n_a = sum(abs(np.vdot(a[:, i], psi)) > tol for i in range(len(psi)))
    n_f = sum(abs(np.vdot(f[:, j], psi)) > tol for j in range(len(psi)))
    n_par = n_bar = 0
    for i in range(len(psi)):
        parallel = any(abs(np.vdot(a[:, i], f[:, j])) > 1 - 1e-9 for j in range(len(psi)))
        if parallel and abs(np.vdot(a[:, i], psi)) > tol:
            n_par += 1
        elif parallel:
            n_bar += 1
    return n_a, n_f, n_par, n_bar


class TestSupportCounts:
    def test_ex1(self):
        c = counts_of("ex1")
        assert (c.d, c.N_A, c.N_F, c.n_par, c.n_bar_par) == (4, 2, 2, 2, 0)
        assert (c.lhs, c.rhs) == (8, 14)
        assert not cl.thm1_sufficient_nonclassical(c)

    def test_ex2_saturates(self):
        c = counts_of("ex2")
        assert (c.N_A, c.N_F, c.n_par, c.n_bar_par) == (4, 2, 0, 0)
        assert c.lhs == c.rhs == 12 and c.saturated
        assert not cl.thm1_sufficient_nonclassical(c)

    def test_ex3_certified(self):
        c = counts_of("ex3")
        assert (c.N_A, c.N_F, c.n_par, c.n_bar_par) == (4, 4, 0, 0)
        assert (c.lhs, c.rhs) == (16, 12)
        assert cl.thm1_sufficient_nonclassical(c)

    def test_same_basis_basis_state(self):
        A = OrthonormalBasis.computational(5)
        c = cl.support_counts(A[0], A, A)
        assert (c.N_A, c.N_F, c.n_par, c.n_bar_par) == (1, 1, 1, 4)

    def test_mixed_refused(self, rng):
        with pytest.raises(PreconditionError):
            cl.support_counts(random_mixed(3, rng), random_basis(3, rng), random_basis(3, rng))

    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_matches_definition_on_structured_instances(self, d, seed):
        rng = np.random.default_rng(seed)
        # sparse state and partially shared bases so every count is exercised
        psi = np.zeros(d, dtype=complex)
        support = rng.choice(d, size=int(rng.integers(1, d + 1)), replace=False)
        psi[support] = haar_random_ket_array(len(support), rng) if len(support) > 1 else 1.0
        f = np.eye(d, dtype=complex)
        m = int(rng.integers(0, d + 1))
        if m >= 2:
            f[:m, :m] = haar_random_unitary_array(m, rng)
        f = f[:, rng.permutation(d)]
        got = cl.support_counts_array(psi, np.eye(d), f, 1e-9)
        assert got == brute_counts(psi, np.eye(d), f)

    def test_coarse_counts_rejected_by_fine_check(self):
        with pytest.raises(PreconditionError):
            cl.thm1_sufficient_nonclassical(cl.SupportCounts(2, 1, 1, 0, 0, coarse=True))


class TestClassify:
    def test_table_verdicts(self):
        assert cl.classify(load_example("ex1").table).label is cl.Label.CLASSICAL
        v3 = cl.classify(load_example("ex3").table)
        assert v3.label is cl.Label.NEGATIVE and v3.max_negative_real == pytest.approx(-1 / 8)
        v4 = cl.classify(load_example("ex4").table)
        assert v4.label is cl.Label.NONREAL and v4.max_abs_imag == pytest.approx(1 / 4)

    def test_both(self):
        assert cl.classify(np.array([[-0.1 + 0.1j, 0.6], [0.5 - 0.1j, 0.0]])).label is cl.Label.NEGATIVE_AND_NONREAL

    def test_tolerance(self):
        q = np.array([[0.5 - 1e-12, 0.5], [1e-12, 0.0]])
        q[1, 1] = -1e-12
        assert cl.classify(q).is_classical
        assert not cl.classify(q, tol=1e-13).is_classical

    def test_zero_count(self):
        assert cl.classify(load_example("ex1").table).zero_count == 14


class TestCorollary1:
    def test_tables(self):
        ex4, ex1 = load_example("ex4"), load_example("ex1")
        assert cl.corollary1_check(compute_kd(ex4.psi, ex4.A, ex4.F))
        assert not cl.corollary1_check(compute_kd(ex1.psi, ex1.A, ex1.F))

    def test_same_basis_has_zeros(self, rng):
        A = random_basis(3, rng)
        assert not cl.corollary1_check(compute_kd(random_ket(3, rng), A, A))

    def test_needs_k2(self, rng):
        q = compute_extended_kd(random_ket(2, rng), [random_basis(2, rng)] * 3)
        with pytest.raises(PreconditionError):
            cl.corollary1_check(q)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_sound_on_random(self, rng, d):
        for _ in range(300):
            q = compute_kd(random_ket(d, rng), random_basis(d, rng), random_basis(d, rng))
            if cl.corollary1_check(q):
                assert not cl.classify(q).is_classical


class TestCoarseCounts:
    def test_singletons_reduce_to_fine(self, example):
        s = EigenspacePartition.singletons(example.psi.dim)
        coarse = cl.coarse_support_counts(example.psi, s, s, example.A, example.F)
        fine = cl.support_counts(example.psi, example.A, example.F)
        assert (coarse.N_A, coarse.N_F, coarse.n_par, coarse.n_bar_par) == (fine.N_A, fine.N_F, fine.n_par, fine.n_bar_par)
        assert coarse.coarse
        assert cl.coarse_thm_check(coarse) == cl.thm1_sufficient_nonclassical(fine)

    def test_one_block_f(self, rng):
        psi = random_ket(4, rng)
        counts = cl.coarse_support_counts(
            psi, EigenspacePartition.singletons(4), EigenspacePartition.single_block(4), random_basis(4, rng), random_basis(4, rng)
        )
        assert counts.N_F == 1

    def test_one_block_both_not_certified(self, rng):
        one = EigenspacePartition.single_block(3)
        counts = cl.coarse_support_counts(random_ket(3, rng), one, one, random_basis(3, rng), random_basis(3, rng))
        assert (counts.N_A, counts.N_F, counts.n_par) == (1, 1, 1)
        assert not cl.coarse_thm_check(counts)

    def test_ex2_blocks_by_explicit_projection(self):
        ex = load_example("ex2")
        pa = EigenspacePartition.singletons(4)
        pf = EigenspacePartition(4, ((0, 1), (2, 3)))
        counts = cl.coarse_support_counts(ex.psi, pa, pf, ex.A, ex.F)
        v = ex.psi.amplitudes
        proj_f = [pf.block_projector(ex.F, k) @ v for k in range(2)]
        proj_a = [pa.block_projector(ex.A, l) @ v for l in range(4)]
        n_f = sum(np.linalg.norm(x) > 1e-9 for x in proj_f)
        n_a = sum(np.linalg.norm(x) > 1e-9 for x in proj_a)
        par = sum(
            any(abs(np.vdot(x / np.linalg.norm(x), y / np.linalg.norm(y))) > 1 - 1e-9 for y in proj_f if np.linalg.norm(y) > 1e-9)
            for x in proj_a
            if np.linalg.norm(x) > 1e-9
        )
        assert (counts.N_A, counts.N_F, counts.n_par) == (n_a, n_f, par)

    def test_fine_counts_rejected_by_coarse_check(self):
        with pytest.raises(PreconditionError):
            cl.coarse_thm_check(cl.SupportCounts(2, 1, 1, 0, 0))


class TestCorollary2:
    def test_random_d3_certificates_are_sound(self, rng):
        pf = EigenspacePartition(3, ((0, 2), (1,)))
        s = EigenspacePartition.singletons(3)
        certified = 0
        for _ in range(200):
            psi, A, F = random_ket(3, rng), random_basis(3, rng), random_basis(3, rng)
            q = coarse_grain(psi, s, pf, A, F)
            if cl.corollary2_check(q, s, pf):
                certified += 1
                assert not cl.classify(q).is_classical
        assert certified > 150

    def test_zero_entry_gives_false(self):
        ex = load_example("ex1")
        pf = EigenspacePartition(4, ((0, 1), (2, 3)))
        s = EigenspacePartition.singletons(4)
        q = one_sided_coarse_grain(ex.psi, ex.A, pf, ex.F)
        assert not cl.corollary2_check(q, s, pf)

    def test_both_degenerate_refused(self, rng):
        p = EigenspacePartition(4, ((0, 1), (2, 3)))
        q = coarse_grain(random_ket(4, rng), p, p, random_basis(4, rng), random_basis(4, rng))
        with pytest.raises(PreconditionError):
            cl.corollary2_check(q, p, p)

    def test_completely_degenerate_refused(self, rng):
        s, one = EigenspacePartition.singletons(3), EigenspacePartition.single_block(3)
        q = coarse_grain(random_ket(3, rng), s, one, random_basis(3, rng), random_basis(3, rng))
        with pytest.raises(PreconditionError):
            cl.corollary2_check(q, s, one)


class TestCommutation:
    def test_ex1_pairwise_noncommuting_yet_classical(self):
        ex = load_example("ex1")
        report = cl.commutation_report(ex.psi, ex.obs_A, ex.obs_F)
        assert not report.any_commute
        assert cl.classify(compute_kd(ex.psi, ex.A, ex.F)).is_classical

    def test_same_basis_commutes(self, rng):
        A = Observable.nondegenerate(random_basis(3, rng))
        assert cl.commutation_report(random_ket(3, rng), A, A).A_F

    def test_diagonal_state_commutes_with_a(self, rng):
        A = random_basis(3, rng)
        w = rng.dirichlet(np.ones(3))
        rho = DensityOperator(A.matrix @ np.diag(w) @ A.matrix.conj().T)
        report = cl.commutation_report(rho, Observable.nondegenerate(A), Observable.nondegenerate(random_basis(3, rng)))
        assert report.rho_A and not report.A_F

    def test_commuting_pair_implies_classical(self, rng):
        for _ in range(50):
            A = random_basis(3, rng)
            w = rng.dirichlet(np.ones(3))
            rho = DensityOperator(A.matrix @ np.diag(w) @ A.matrix.conj().T)
            F = random_basis(3, rng)
            report = cl.commutation_report(rho, Observable.nondegenerate(A), Observable.nondegenerate(F))
            assert report.any_commute
            assert cl.classify(compute_kd(rho, A, F)).is_classical


class TestClassicalNoncommutingSearch:
    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_found_instances_are_valid(self, d):
        found = classical_noncommuting_search(d, 50, seed=d)
        assert len(found) >= 10
        for inst in found:
            q = compute_kd(inst.psi, inst.A.basis, inst.F.basis)
            assert cl.classify(q).is_classical
            assert not cl.commutation_report(inst.psi, inst.A, inst.F).any_commute
            counts = cl.support_counts(inst.psi, inst.A.basis, inst.F.basis)
            assert counts.lhs <= counts.rhs
