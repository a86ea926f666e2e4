import numpy as np
import pytest

from kdq.core import DensityOperator, Ket, OrthonormalBasis, haar_random_ket_array, haar_random_unitary_array
from kdq.fixtures import NAMES, load_example


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=NAMES)
def example(request):
    return load_example(request.param)


def random_ket(d, rng):
    return Ket(haar_random_ket_array(d, rng))


def random_basis(d, rng):
    return OrthonormalBasis(haar_random_unitary_array(d, rng))


def random_mixed(d, rng, rank=None):
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def brute_kd(rho, bases):
    """Sum over explicit index tuples of <a1|rho|ak> prod <a(n+1)|a(n)>, written as plain loops."""
    import itertools

    d = rho.shape[0]
    k = len(bases)
    out = np.zeros((d,) * k, dtype=complex)
    for idx in itertools.product(range(d), repeat=k):
        vecs = [bases[n][:, idx[n]] for n in range(k)]
        val = np.vdot(vecs[0], rho @ vecs[-1])
        for n in range(k - 1):
            val *= np.vdot(vecs[n + 1], vecs[n])
        out[idx] = val
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
