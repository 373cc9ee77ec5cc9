import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densecode.linalg import (
    HilbertSpace,
    apply_on_subsystems,
    embed_on_subsystems,
    partial_trace,
    permute_subsystems,
    polar_isometry,
    support_projector,
    tensor_product,
    trace_norm,
)
from conftest import random_density, random_ket


def ptrace_oracle(op, dims, keep):
    """Index-sum partial trace: loop over every matrix element."""
    n = len(dims)
    keep = sorted(keep)
    out_dims = [dims[k] for k in keep]
    dk = int(np.prod(out_dims)) if keep else 1
    out = np.zeros((dk, dk), dtype=complex)
    t = op.reshape(tuple(dims) * 2)
    for left in itertools.product(*[range(d) for d in dims]):
        for right in itertools.product(*[range(d) for d in dims]):
            if any(left[k] != right[k] for k in range(n) if k not in keep):
                continue
            i = np.ravel_multi_index([left[k] for k in keep], out_dims) if keep else 0
            j = np.ravel_multi_index([right[k] for k in keep], out_dims) if keep else 0
            out[i, j] += t[left + right]
    return out


def perm_matrix(dims, perm):
    """Explicit permutation matrix sending |i_0..i_{n-1}> to |i_perm[0]..i_perm[n-1]>."""
    dims = list(dims)
    new_dims = [dims[p] for p in perm]
    D = int(np.prod(dims))
    P = np.zeros((D, D))
    for idx in itertools.product(*[range(d) for d in dims]):
        new = [idx[p] for p in perm]
        P[np.ravel_multi_index(new, new_dims), np.ravel_multi_index(idx, dims)] = 1
    return P


def test_hilbert_space_algebra():
    h = HilbertSpace((2, 3)) * HilbertSpace((4,))
    assert h.dims == (2, 3, 4)
    assert h.total_dim == 24
    assert h.sub([0, 2]).dims == (2, 4)
    with pytest.raises(ValueError):
        HilbertSpace((2, 0))


def test_partial_trace_against_index_sum(rng):
    for dims in [(2, 3), (3, 2, 2), (2, 2, 2)]:
        rho = random_density(rng, int(np.prod(dims)))
        for r in range(len(dims) + 1):
            for keep in itertools.combinations(range(len(dims)), r):
                np.testing.assert_allclose(partial_trace(rho, dims, keep),
                                           ptrace_oracle(rho, dims, keep), atol=1e-12)


def test_partial_trace_of_ket(rng):
    psi = random_ket(rng, 12)
    np.testing.assert_allclose(partial_trace(psi, (3, 4), [1]),
                               ptrace_oracle(np.outer(psi, psi.conj()), (3, 4), [1]), atol=1e-12)


def test_partial_trace_bad_subsystem():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 2), [2])


def test_permute_matches_permutation_matrix(rng):
    dims = (2, 3, 2)
    for perm in itertools.permutations(range(3)):
        P = perm_matrix(dims, perm)
        v = random_ket(rng, 12)
        np.testing.assert_allclose(permute_subsystems(v, dims, perm), P @ v, atol=1e-12)
        rho = random_density(rng, 12)
        np.testing.assert_allclose(permute_subsystems(rho, dims, perm), P @ rho @ P.T, atol=1e-12)


def test_embed_matches_kron_and_permutation(rng):
    dims = (2, 3, 2)
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    # op on subsystems (2, 0): build kron(op, I_3) on order (2, 0, 1), then permute back
    big = np.kron(op, np.eye(3))
    P = perm_matrix((2, 2, 3), [1, 2, 0])   # (2,0,1) order -> (0,1,2) order
    expected = P @ big @ P.T
    np.testing.assert_allclose(embed_on_subsystems(op, dims, [2, 0]), expected, atol=1e-12)
    v = random_ket(rng, 12)
    np.testing.assert_allclose(apply_on_subsystems(op, v, dims, [2, 0]), expected @ v, atol=1e-12)


def test_tensor_product_kinds():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    np.testing.assert_allclose(tensor_product(a, b), [0, 1, 0, 0])
    with pytest.raises(ValueError):
        tensor_product(a, np.eye(2))


def test_support_projector_and_polar(rng):
    rho = random_density(rng, 5, rank=2)
    p = support_projector(rho)
    np.testing.assert_allclose(p @ p, p, atol=1e-10)
    assert round(np.trace(p).real) == 2
    with pytest.raises(ValueError):
        support_projector(np.array([[0, 1], [0, 0]]))
    m = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    w = polar_isometry(m)
    np.testing.assert_allclose(w.conj().T @ w, np.eye(3), atol=1e-12)
    assert abs(np.trace(w.conj().T @ m).real - trace_norm(m)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_partial_trace_preserves_trace(dims, seed):
    r = np.random.default_rng(seed)
    rho = random_density(r, int(np.prod(dims)))
    keep = [k for k in range(len(dims)) if r.random() < 0.5]
    red = partial_trace(rho, dims, keep)
    assert abs(np.trace(red) - 1) < 1e-10
    np.testing.assert_allclose(red, red.conj().T, atol=1e-12)
