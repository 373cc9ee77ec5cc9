"""Dense complex algebra on explicitly dimensioned composite spaces.

Ordering convention (used everywhere in the package): a composite space with
subsystem dimensions ``dims = (d_0, ..., d_{k-1})`` is flattened row-major,
so subsystem 0 varies slowest. Basis index ``(i_0, ..., i_{k-1})`` maps to
``np.ravel_multi_index(i, dims)``. Kets are 1-d arrays, operators 2-d arrays;
the dimension list always travels alongside as a separate argument.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered subsystem dimensions of a composite space."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive, got {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def __mul__(self, other: "HilbertSpace") -> "HilbertSpace":
        return HilbertSpace(self.dims + other.dims)

    def sub(self, idx: Iterable[int]) -> "HilbertSpace":
        return HilbertSpace(tuple(self.dims[i] for i in idx))


def as_dims(space) -> tuple[int, ...]:
    if isinstance(space, HilbertSpace):
        return space.dims
    return HilbertSpace(tuple(space)).dims


def _check_subsystems(idx: Sequence[int], n: int, what: str) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated subsystem index in {what}: {idx}")
    for i in idx:
        if not 0 <= i < n:
            raise ValueError(f"subsystem index {i} out of range for {n} subsystems")
    return idx


def tensor_product(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of kets or of operators, leftmost factor slowest."""
    if not factors:
        raise ValueError("need at least one factor")
    ndims = {np.ndim(f) for f in factors}
    if len(ndims) != 1:
        raise ValueError("cannot mix kets and operators in a tensor product")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def permute_subsystems(x: np.ndarray, dims, perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems so that new subsystem ``k`` is old subsystem ``perm[k]``.

    Works for kets (1-d) and operators (2-d).
    """
    dims = as_dims(dims)
    perm = _check_subsystems(perm, len(dims), "perm")
    if len(perm) != len(dims):
        raise ValueError("perm must list every subsystem exactly once")
    x = np.asarray(x)
    total = int(np.prod(dims))
    if x.ndim == 1:
        return x.reshape(dims).transpose(perm).reshape(total)
    k = len(dims)
    axes = list(perm) + [k + p for p in perm]
    return x.reshape(dims + dims).transpose(axes).reshape(total, total)


def partial_trace(op: np.ndarray, dims, keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not in ``keep``.

    The kept subsystems stay in their original relative order. A 1-d input is
    treated as the ket ``|v>`` and reduced without forming ``|v><v|``.
    """
    dims = as_dims(dims)
    keep = tuple(sorted(_check_subsystems(keep, len(dims), "keep")))
    gone = tuple(i for i in range(len(dims)) if i not in keep)
    dk = int(np.prod([dims[i] for i in keep]))
    dt = int(np.prod([dims[i] for i in gone]))
    x = np.asarray(op, dtype=complex)
    if x.ndim == 1:
        m = permute_subsystems(x, dims, keep + gone).reshape(dk, dt)
        return m @ m.conj().T
    x = permute_subsystems(x, dims, keep + gone).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", x)


def embed_on_subsystems(op: np.ndarray, dims, targets: Sequence[int]) -> np.ndarray:
    """Operator acting as ``op`` on ``targets`` (in that order) and trivially elsewhere."""
    dims = as_dims(dims)
    targets = _check_subsystems(targets, len(dims), "targets")
    op = np.asarray(op, dtype=complex)
    dt = int(np.prod([dims[i] for i in targets]))
    if op.shape != (dt, dt):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {dt}")
    rest = tuple(i for i in range(len(dims)) if i not in targets)
    dr = int(np.prod([dims[i] for i in rest]))
    full = np.kron(op, np.eye(dr))
    order = targets + rest
    inverse = tuple(int(i) for i in np.argsort(order))
    return permute_subsystems(full, tuple(dims[i] for i in order), inverse)


def apply_on_subsystems(op: np.ndarray, vec: np.ndarray, dims, targets: Sequence[int]) -> np.ndarray:
    """``embed_on_subsystems(op, dims, targets) @ vec`` without building the big matrix."""
    dims = as_dims(dims)
    targets = _check_subsystems(targets, len(dims), "targets")
    rest = tuple(i for i in range(len(dims)) if i not in targets)
    order = targets + rest
    dt = int(np.prod([dims[i] for i in targets]))
    m = permute_subsystems(np.asarray(vec, dtype=complex), dims, order).reshape(dt, -1)
    out = (np.asarray(op) @ m).reshape(-1)
    inverse = tuple(int(i) for i in np.argsort(order))
    return permute_subsystems(out, tuple(dims[i] for i in order), inverse)


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, rtol=0, atol=tol)


def eigh_psd(op: np.ndarray, tol: float = HERMITIAN_TOL):
    """Hermitian eigendecomposition, eigenvalues ascending."""
    op = np.asarray(op, dtype=complex)
    if not is_hermitian(op, tol):
        raise ValueError("operator is not Hermitian within tolerance")
    return np.linalg.eigh((op + op.conj().T) / 2)


def support_projector(op: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Orthogonal projector onto the eigenvectors of ``op`` with eigenvalue > ``tol``."""
    w, v = eigh_psd(op, tol)
    sel = v[:, w > tol]
    return sel @ sel.conj().T


def sqrtm_psd(op: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    w, v = eigh_psd(op, tol)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def polar_isometry(m: np.ndarray) -> np.ndarray:
    """Isometric factor ``W`` of the polar decomposition ``m = W P`` (tall ``m``)."""
    u, _, vh = np.linalg.svd(m, full_matrices=False)
    return u @ vh


def trace_norm(op: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(op, compute_uv=False)))


def basis_vector(index: int, dim: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[index] = 1.0
    return e
