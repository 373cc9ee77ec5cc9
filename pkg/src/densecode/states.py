"""Pure and mixed states, Schmidt decompositions, entropy, fidelity, majorization."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    HERMITIAN_TOL,
    HilbertSpace,
    as_dims,
    partial_trace,
    permute_subsystems,
    polar_isometry,
    sqrtm_psd,
)

NORM_TOL = 1e-10
EIG_ZERO = 1e-12
NEG_CLIP = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on a composite space."""

    vector: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = as_dims(self.dims)
        vec = np.asarray(self.vector, dtype=complex).reshape(-1)
        if vec.size != int(np.prod(dims)):
            raise ValueError(f"vector length {vec.size} does not match dims {dims}")
        if abs(np.linalg.norm(vec) - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(vec)!r})")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, vector, dims) -> "PureState":
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / norm, dims)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.dims)

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.vector, self.vector.conj()), self.dims)

    def reduced(self, keep: Sequence[int]) -> "DensityOperator":
        keep = sorted(keep)
        return DensityOperator(partial_trace(self.vector, self.dims, keep),
                               tuple(self.dims[i] for i in keep))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.vector, other.vector))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    _spectrum: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        dims = as_dims(self.dims)
        m = np.asarray(self.matrix, dtype=complex)
        d = int(np.prod(dims))
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        if not np.allclose(m, m.conj().T, rtol=0, atol=HERMITIAN_TOL):
            raise ValueError("density operator is not Hermitian")
        m = (m + m.conj().T) / 2
        if abs(np.trace(m).real - 1.0) > HERMITIAN_TOL * max(1, d):
            raise ValueError(f"density operator trace is {np.trace(m).real!r}, not 1")
        w = np.linalg.eigvalsh(m)
        if w[0] < -NEG_CLIP:
            raise ValueError(f"density operator has negative eigenvalue {w[0]!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "_spectrum", w)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.dims)

    def spectrum(self) -> np.ndarray:
        """Eigenvalues, descending, clipped at zero and renormalized."""
        w = np.clip(self._spectrum[::-1], 0.0, None)
        return w / w.sum()

    def reduced(self, keep: Sequence[int]) -> "DensityOperator":
        keep = sorted(keep)
        return DensityOperator(partial_trace(self.matrix, self.dims, keep),
                               tuple(self.dims[i] for i in keep))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityOperator":
        return cls(np.eye(d) / d, (d,))


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``psi = sum_i coefficients[i] |left_i>|right_i>``, coefficients descending."""

    coefficients: np.ndarray
    left_basis: np.ndarray   # columns
    right_basis: np.ndarray  # columns
    left_dims: tuple[int, ...]
    right_dims: tuple[int, ...]

    @property
    def lambdas(self) -> np.ndarray:
        return self.coefficients**2

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.coefficients > 1e-12))

    def reconstruct(self) -> np.ndarray:
        """Amplitudes in (left, right) subsystem order."""
        m = (self.left_basis * self.coefficients) @ self.right_basis.T
        return m.reshape(-1)


def schmidt_decompose(psi: PureState, cut: Sequence[int]) -> SchmidtDecomposition:
    """Schmidt decomposition across ``cut`` | rest.

    Computed from the SVD of the amplitude matrix; ``reconstruct()`` returns
    amplitudes with the ``cut`` subsystems first.
    """
    n = len(psi.dims)
    cut = tuple(sorted(int(i) for i in cut))
    if not cut or len(cut) == n or len(set(cut)) != len(cut) or not all(0 <= i < n for i in cut):
        raise ValueError(f"cut must be a proper nonempty subset of range({n}), got {cut}")
    rest = tuple(i for i in range(n) if i not in cut)
    left_dims = tuple(psi.dims[i] for i in cut)
    right_dims = tuple(psi.dims[i] for i in rest)
    m = permute_subsystems(psi.vector, psi.dims, cut + rest).reshape(
        int(np.prod(left_dims)), int(np.prod(right_dims)))
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return SchmidtDecomposition(s, u, vh.T, left_dims, right_dims)


def entropy_of_spectrum(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_ZERO]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: DensityOperator) -> float:
    """S(rho) = -Tr rho log2 rho, in bits."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho, (np.shape(rho)[0],))
    return max(0.0, entropy_of_spectrum(rho.spectrum()))


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2."""
    if rho.dims != sigma.dims:
        raise ValueError(f"space mismatch: {rho.dims} vs {sigma.dims}")
    s = np.linalg.svd(sqrtm_psd(rho.matrix) @ sqrtm_psd(sigma.matrix), compute_uv=False)
    return float(min(1.0, max(0.0, np.sum(s) ** 2)))


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Full trace norm ||rho - sigma||_1 (between 0 and 2)."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix))))


def pure_trace_distance(a: PureState, b: PureState) -> float:
    """||a - b||_1 for the projectors of two pure states."""
    f = min(1.0, abs(a.overlap(b)) ** 2)
    return 2.0 * float(np.sqrt(1.0 - f))


def maximally_entangled(d: int) -> PureState:
    """(1/sqrt d) sum_i |i>|i> on dims (d, d)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    v = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return PureState(v, (d, d))


def majorizes(p, q, tol: float = 1e-9) -> bool:
    """True when every descending partial sum of ``p`` dominates that of ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(p < -tol) or np.any(q < -tol):
        raise ValueError("spectra must be nonnegative")
    for v in (p, q):
        if abs(v.sum() - 1.0) > tol:
            raise ValueError(f"spectrum sums to {v.sum()!r}, not 1")
    n = max(len(p), len(q))
    p = np.sort(np.pad(p, (0, n - len(p))))[::-1]
    q = np.sort(np.pad(q, (0, n - len(q))))[::-1]
    return bool(np.all(np.cumsum(p) >= np.cumsum(q) - tol))


def closest_maximally_entangled_purification(psi: PureState, b_cut: Sequence[int]):
    """Maximally entangled state (across rest | b_cut) nearest to ``psi``.

    Returns ``(phi, overlap)`` where ``phi`` has its ``b_cut`` reduction equal
    to the maximally mixed state and ``overlap = |<psi|phi>|`` is as large as
    possible; ``overlap**2`` equals F(psi_B, I/d_B). ``phi`` uses the same
    subsystem order as ``psi``.

    Writing ``psi = sum M[r, b] |r>|b>``, every candidate is ``W / sqrt(d_B)``
    for an isometry ``W``; the optimum is the polar factor of ``M``.
    """
    n = len(psi.dims)
    b_cut = tuple(sorted(int(i) for i in b_cut))
    if not b_cut or len(b_cut) == n or not all(0 <= i < n for i in b_cut):
        raise ValueError(f"b_cut must be a proper nonempty subset of range({n})")
    rest = tuple(i for i in range(n) if i not in b_cut)
    d_b = int(np.prod([psi.dims[i] for i in b_cut]))
    d_r = int(np.prod([psi.dims[i] for i in rest]))
    if d_r < d_b:
        raise ValueError(f"no maximally entangled purification: dim(rest)={d_r} < d_B={d_b}")
    order = rest + b_cut
    m = permute_subsystems(psi.vector, psi.dims, order).reshape(d_r, d_b)
    w = polar_isometry(m)
    phi_vec = w.reshape(-1) / np.sqrt(d_b)
    inverse = tuple(int(i) for i in np.argsort(order))
    phi_vec = permute_subsystems(phi_vec, tuple(psi.dims[i] for i in order), inverse)
    phi = PureState.normalized(phi_vec, psi.dims)
    return phi, abs(psi.overlap(phi))
