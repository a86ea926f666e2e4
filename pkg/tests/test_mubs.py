import itertools

import numpy as np
import pytest

from kdq.core import InvariantError, KDQError, OrthonormalBasis
from kdq.fixtures import load_example
from kdq.kd import compute_extended_kd, compute_kd
from kdq.measures import nonclassicality_measures
from kdq.mubs import (
    MubFamily,
    all_unbiased,
    family_by_name,
    fourier_basis,
    hadamard_hadamard,
    is_mutually_unbiased,
    max_nonclassical_instance,
    pauli_mub_triplet,
    real_mub_triplet_d4,
)


def exhaustive_real_third_bases():
    """Every 4x4 sign matrix S/2 with orthogonal columns, unbiased to H x H, columns sign-fixed and sorted."""
    hh = hadamard_hadamard()
    found = set()
    for bits in range(2**16):
        s = np.array([1 if (bits >> n) & 1 else -1 for n in range(16)], dtype=float).reshape(4, 4)
        if not np.array_equal(s.T @ s, 4 * np.eye(4)):
            continue
        m = s / 2
        if not np.allclose(np.abs(hh.T @ m), 0.5, atol=1e-12):
            continue
        cols = sorted(tuple(int(x) for x in s[:, j] * s[0, j]) for j in range(4))
        found.add(tuple(cols))
    return found


class TestFourier:
    @pytest.mark.parametrize("d", [2, 3, 4, 5, 7])
    def test_unitary_and_unbiased(self, d):
        f = fourier_basis(d)
        assert np.allclose(np.abs(f.matrix), 1 / np.sqrt(d), atol=1e-12)
        assert is_mutually_unbiased(OrthonormalBasis.computational(d), f)

    def test_d2_is_plus_minus(self):
        s = 1 / np.sqrt(2)
        assert np.allclose(fourier_basis(2).matrix, [[s, s], [s, -s]])

    def test_first_amplitude_positive(self):
        assert np.all(fourier_basis(6).matrix[0].real > 0)

    def test_small_d_refused(self):
        with pytest.raises(KDQError):
            fourier_basis(1)


class TestPauli:
    def test_pairwise_unbiased_and_complex(self):
        fam = pauli_mub_triplet()
        assert all_unbiased(fam.bases)
        assert not fam.real_flag

    def test_first_two_bases_and_y_state_give_example4_table(self):
        fam = pauli_mub_triplet()
        ex = load_example("ex4")
        q = compute_kd(fam[2][0], fam[0], fam[1])
        assert np.max(np.abs(q.values - ex.table)) <= 1e-12


class TestReal4:
    def test_real_and_unbiased(self):
        fam = real_mub_triplet_d4()
        assert fam.real_flag and len(fam) == 3
        overlaps = [np.abs(a.matrix.T @ b.matrix) for a, b in itertools.combinations(fam.bases, 2)]
        assert np.allclose(overlaps, 0.5, atol=1e-12)

    def test_second_basis_is_hadamard_square(self):
        assert np.allclose(real_mub_triplet_d4()[1].matrix, hadamard_hadamard())

    def test_third_basis_matches_exhaustive_oracle(self):
        solutions = exhaustive_real_third_bases()
        assert solutions
        third = real_mub_triplet_d4()[2].matrix.real * 2
        cols = tuple(tuple(int(round(x)) for x in third[:, j]) for j in range(4))
        assert cols in solutions
        assert cols == min(solutions)

    def test_expected_columns(self):
        third = real_mub_triplet_d4()[2].matrix.real * 2
        assert third.T.tolist() == [[1, -1, -1, -1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]]

    def test_ex3_instance_from_triplet(self):
        fam = real_mub_triplet_d4()
        psi, bases = max_nonclassical_instance(fam, 2)
        r = nonclassicality_measures(compute_kd(psi, *bases))
        assert r.total == pytest.approx(1.0, abs=1e-10)
        assert r.negativity == pytest.approx(1.0, abs=1e-10)


class TestFamilies:
    def test_non_unbiased_rejected(self):
        with pytest.raises(InvariantError):
            MubFamily((OrthonormalBasis.computational(2), OrthonormalBasis.computational(2)))

    def test_same_basis_not_unbiased(self):
        b = fourier_basis(3)
        assert not is_mutually_unbiased(b, b)

    def test_ex2_f_not_unbiased(self):
        ex = load_example("ex2")
        assert not is_mutually_unbiased(OrthonormalBasis.computational(4), ex.F)

    @pytest.mark.parametrize("k, expected", [(2, np.sqrt(2) - 1), (3, 1.0), (4, 2 * np.sqrt(2) - 1)])
    def test_pauli_instance_values(self, k, expected):
        psi, bases = max_nonclassical_instance(pauli_mub_triplet(), k)
        assert nonclassicality_measures(compute_extended_kd(psi, bases)).total == pytest.approx(expected, abs=1e-10)

    def test_parity_rule(self):
        fam = pauli_mub_triplet()
        _, bases = max_nonclassical_instance(fam, 3)
        assert bases == (fam[2], fam[1], fam[2])
        _, bases = max_nonclassical_instance(fam, 2)
        assert bases == (fam[2], fam[1])

    def test_by_name(self):
        assert family_by_name("fourier", 5).dim == 5
        assert family_by_name("real4").dim == 4
        with pytest.raises(KDQError):
            family_by_name("pauli", 3)
        with pytest.raises(KDQError):
            family_by_name("nope", 2)
