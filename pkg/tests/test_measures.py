import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdq.core import DensityOperator, Ket, OrthonormalBasis, haar_random_unitary_array
from kdq.fixtures import load_example
from kdq.kd import PostselectionOutcome, compute_extended_kd, compute_kd, condition_on
from kdq.measures import check_max_conditions, nonclassicality_measures, thm2_bound
from kdq.mubs import fourier_pair, max_nonclassical_instance, pauli_mub_triplet, real_mub_triplet_d4

from conftest import random_basis, random_ket, random_mixed


def report_for(name):
    ex = load_example(name)
    return nonclassicality_measures(compute_kd(ex.psi, ex.A, ex.F))


class TestWorkedExamples:
    def test_ex3(self):
        r = report_for("ex3")
        assert r.total == pytest.approx(1.0, abs=1e-10)
        assert r.negativity == pytest.approx(1.0, abs=1e-10)
        assert r.imaginarity == pytest.approx(0.0, abs=1e-10)
        assert r.bound == 1.0 and r.saturates_bound

    def test_ex4(self):
        r = report_for("ex4")
        assert r.total == pytest.approx(np.sqrt(2) - 1, abs=1e-10)
        assert r.negativity == pytest.approx(0.0, abs=1e-10)
        assert r.imaginarity == pytest.approx(1.0, abs=1e-10)
        assert r.saturates_bound

    @pytest.mark.parametrize("name", ["ex1", "ex2"])
    def test_classical_tables_are_zero(self, name):
        r = report_for(name)
        assert max(abs(r.total), abs(r.negativity), abs(r.imaginarity)) <= 1e-12
        assert not r.saturates_bound


@pytest.mark.parametrize("d, k, expected", [(4, 2, 1.0), (2, 2, np.sqrt(2) - 1), (2, 3, 1.0), (3, 3, 2.0), (9, 2, 2.0)])
def test_bound_values(d, k, expected):
    assert thm2_bound(d, k) == pytest.approx(expected, abs=1e-15)


class TestMaxConditions:
    @pytest.mark.parametrize("name", ["ex3", "ex4"])
    def test_examples_satisfy(self, name):
        ex = load_example(name)
        cond = check_max_conditions(ex.psi, [ex.A, ex.F])
        assert cond.satisfied
        assert report_for(name).saturates_bound

    def test_basis_state_fails_condition_ii(self):
        fam = fourier_pair(3)
        cond = check_max_conditions(fam[0][0], list(fam.bases))
        assert cond.condition_i and not cond.condition_ii
        r = nonclassicality_measures(compute_kd(fam[0][0], *fam.bases))
        assert r.total < r.bound - 1e-3

    @pytest.mark.parametrize("family", [pauli_mub_triplet, real_mub_triplet_d4])
    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_constructed_instances_saturate(self, family, k):
        psi, bases = max_nonclassical_instance(family(), k)
        assert check_max_conditions(psi, bases).satisfied
        r = nonclassicality_measures(compute_extended_kd(psi, bases))
        assert abs(r.total - r.bound) <= 1e-10

    def test_perturbation_strictly_reduces(self, rng):
        psi, bases = max_nonclassical_instance(real_mub_triplet_d4(), 2)
        for _ in range(20):
            h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            h = (h + h.conj().T) / 2
            h /= np.linalg.norm(h, 2)
            w, v = np.linalg.eigh(h)
            u = v @ np.diag(np.exp(0.1j * w)) @ v.conj().T
            moved = Ket(u @ psi.amplitudes)
            r = nonclassicality_measures(compute_extended_kd(moved, bases))
            if check_max_conditions(moved, bases).satisfied:
                continue
            assert r.total < r.bound - 1e-4

    def test_mixture_of_maximizers_is_below(self, rng):
        # distinct saturating pure states: the Fourier-type states unbiased to both bases
        fam = real_mub_triplet_d4()
        bases = [fam[1], fam[2]]
        maximizers = [fam[0][i] for i in range(4)]
        for i in range(4):
            assert nonclassicality_measures(compute_kd(maximizers[i], *bases)).saturates_bound
        w = rng.dirichlet(np.ones(4))
        rho = DensityOperator(sum(wi * m.density().matrix for wi, m in zip(w, maximizers)))
        r = nonclassicality_measures(compute_kd(rho, *bases))
        assert r.total < r.bound - 1e-6
        assert not check_max_conditions(rho, bases).satisfied


class TestRelations:
    @given(st.integers(2, 5), st.integers(2, 3), st.integers(0, 2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_report_invariants(self, d, k, seed):
        rng = np.random.default_rng(seed)
        rho = random_mixed(d, rng)
        bases = [OrthonormalBasis(haar_random_unitary_array(d, rng)) for _ in range(k)]
        r = nonclassicality_measures(compute_extended_kd(rho, bases))
        assert r.total >= -1e-9
        assert r.negativity <= r.total + 1e-9
        assert 0 <= r.imaginarity < r.total + 1 + 1e-9
        assert r.total <= r.bound + 1e-9

    def test_real_negative_only_means_negativity_is_total(self):
        psi, bases = max_nonclassical_instance(real_mub_triplet_d4(), 3)
        r = nonclassicality_measures(compute_extended_kd(psi, bases))
        assert r.imaginarity <= 1e-10
        assert abs(r.negativity - r.total) <= 1e-12

    def test_conditioned_has_no_bound(self, rng):
        q = compute_kd(random_ket(3, rng), random_basis(3, rng), random_basis(3, rng))
        r = nonclassicality_measures(condition_on(q, PostselectionOutcome((0,))))
        assert r.bound is None and not r.saturates_bound

    def test_raw_array_without_dimension(self):
        r = nonclassicality_measures(load_example("ex3").table)
        assert r.bound is None and r.total == pytest.approx(1.0)
