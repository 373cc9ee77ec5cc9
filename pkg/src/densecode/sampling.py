"""Seeded Haar sampling: unitaries, isometries, pure states, capped Schmidt spectra.

Every sampler takes a :class:`Seed` (or an existing ``numpy.random.Generator``).
A ``Seed`` names one stream of a counter-based Philox generator, so trials
indexed by ``stream_id`` are reproducible independently of execution order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .linalg import as_dims
from .states import PureState, schmidt_decompose

UINT64 = 2**64


@dataclass(frozen=True)
class Seed:
    """Root seed plus stream id; ``path`` addresses nested sub-streams."""

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        for v in (self.seed, self.stream_id, *self.path):
            if not 0 <= int(v) < UINT64:
                raise ValueError(f"seed components must be 64-bit unsigned, got {v}")

    def stream(self, stream_id: int) -> "Seed":
        return Seed(self.seed, int(stream_id))

    def child(self, *keys: int) -> "Seed":
        return Seed(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(ss))


RandomSource = Union[Seed, np.random.Generator, int]


def as_generator(source: RandomSource) -> np.random.Generator:
    if isinstance(source, np.random.Generator):
        return source
    if isinstance(source, Seed):
        return source.rng()
    return Seed(int(source)).rng()


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_isometry(d: int, k: int, seed: RandomSource) -> np.ndarray:
    """First ``k`` columns of a Haar unitary on ``C^d`` (a ``d x k`` isometry).

    QR of a complex Ginibre matrix with the phases of ``R``'s diagonal moved
    into ``Q``; Gram-Schmidt is column-sequential, so the first ``k`` columns
    of the full construction depend only on the first ``k`` Ginibre columns.
    """
    if d < 1 or not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got d={d}, k={k}")
    rng = as_generator(seed)
    q, r = np.linalg.qr(ginibre(d, k, rng))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_unitary(d: int, seed: RandomSource) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return haar_isometry(d, d, seed)


def haar_state(dims, seed: RandomSource) -> PureState:
    """Uniformly random pure state on the composite space ``dims``."""
    dims = as_dims(dims)
    rng = as_generator(seed)
    v = ginibre(int(np.prod(dims)), 1, rng)[:, 0]
    return PureState.normalized(v, dims)


def waterfill(lambdas, cap: float) -> np.ndarray:
    """Cap a probability vector at ``cap``, rescaling the uncapped part.

    Returns ``mu_i = min(cap, c * lambdas_i)`` with ``c`` chosen so that the
    entries sum to one. Order of the input is preserved.
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.count_nonzero(lam > 0) * cap < 1 - 1e-12:
        raise ValueError(f"cannot cap {np.count_nonzero(lam > 0)} nonzero weights at {cap}")
    order = np.argsort(-lam, kind="stable")
    s = lam[order]
    mu = np.empty_like(s)
    tail = np.cumsum(s[::-1])[::-1]  # tail[j] = sum(s[j:])
    for j in range(len(s) + 1):
        # top j entries capped
        if j == len(s) or tail[j] <= 0:
            mu[:j] = cap
            mu[j:] = 0.0
            break
        c = (1.0 - j * cap) / tail[j]
        if c * s[j] <= cap + 1e-15:
            mu[:j] = cap
            mu[j:] = c * s[j:]
            break
    out = np.empty_like(mu)
    out[order] = mu
    return out / out.sum()


def bounded_schmidt_state(d_A1: int, d_S: int, lambda_max: float, seed: RandomSource) -> PureState:
    """Random state on (A1, S) whose S-reduction has largest eigenvalue <= ``lambda_max``.

    A Haar state is drawn, its Schmidt spectrum water-filled down to the cap,
    and the sampled Schmidt bases kept.
    """
    if not 1.0 / d_S - 1e-12 <= lambda_max <= 1.0:
        raise ValueError(f"lambda_max={lambda_max} outside [1/d_S, 1] for d_S={d_S}")
    need = int(np.ceil(1.0 / lambda_max - 1e-9))
    if d_A1 < need:
        raise ValueError(f"d_A1={d_A1} too small: need at least {need} for lambda_max={lambda_max}")
    psi = haar_state((d_A1, d_S), seed)
    sd = schmidt_decompose(psi, [0])
    mu = waterfill(sd.lambdas, min(1.0, lambda_max))
    m = (sd.left_basis * np.sqrt(mu)) @ sd.right_basis.T
    return PureState.normalized(m.reshape(-1), (d_A1, d_S))
