import math

import numpy as np
import pytest
from scipy import stats

from densecode.sampling import (
    Seed,
    bounded_schmidt_state,
    haar_isometry,
    haar_state,
    haar_unitary,
    waterfill,
)
from densecode.states import schmidt_decompose, von_neumann_entropy


def page_mean_bits(m, n):
    """Average entanglement entropy of a Haar state on C^m x C^n, m >= n."""
    return (sum(1.0 / k for k in range(m + 1, m * n + 1)) - (n - 1) / (2 * m)) / math.log(2)


def test_unitarity():
    u = haar_unitary(7, Seed(1))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(7), atol=1e-12)
    v = haar_isometry(7, 3, Seed(1))
    np.testing.assert_allclose(v.conj().T @ v, np.eye(3), atol=1e-12)


def test_seed_streams_are_deterministic_and_distinct():
    a = haar_unitary(4, Seed(5).stream(2))
    np.testing.assert_array_equal(a, haar_unitary(4, Seed(5).stream(2)))
    assert not np.allclose(a, haar_unitary(4, Seed(5).stream(3)))
    assert not np.allclose(a, haar_unitary(4, Seed(5).stream(2).child(0)))
    with pytest.raises(ValueError):
        Seed(-1)


def test_u00_beta_marginal():
    d = 16
    x = np.array([abs(haar_unitary(d, Seed(3).stream(i))[0, 0]) ** 2 for i in range(2000)])
    ks = stats.kstest(x, "beta", args=(1, d - 1))
    assert ks.statistic < 1.63 / math.sqrt(len(x))   # 1% critical value


def test_page_average_two_qubits():
    s = [von_neumann_entropy(haar_state((2, 2), Seed(4).stream(i)).reduced([1])) for i in range(5000)]
    assert abs(page_mean_bits(2, 2) - 0.4808) < 1e-3
    assert abs(np.mean(s) - page_mean_bits(2, 2)) < 0.02


def test_page_deficit_64_8():
    s = [von_neumann_entropy(haar_state((64, 8), Seed(6).stream(i)).reduced([1])) for i in range(500)]
    oracle = 8 / (2 * 64 * math.log(2))
    assert abs((3 - np.mean(s)) - oracle) < 0.02
    assert abs((3 - page_mean_bits(64, 8)) - oracle) < 0.01


def test_waterfill():
    mu = waterfill([0.7, 0.2, 0.1], 0.5)
    np.testing.assert_allclose(mu, [0.5, 1 / 3, 1 / 6])
    np.testing.assert_allclose(waterfill([0.3, 0.3, 0.4], 0.5), [0.3, 0.3, 0.4])
    with pytest.raises(ValueError):
        waterfill([1.0, 0.0, 0.0], 0.5)


def test_bounded_schmidt_cap():
    for i in range(50):
        psi = bounded_schmidt_state(4, 8, 0.5, Seed(7).stream(i))
        assert schmidt_decompose(psi, [0]).lambdas[0] <= 0.5 + 1e-10
    with pytest.raises(ValueError):
        bounded_schmidt_state(2, 8, 0.25, Seed(0))
