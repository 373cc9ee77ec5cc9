"""Typical-subspace reduction of an i.i.d. source to the universal protocol.

A source emits ``|phi_i>`` on ``A1 x S`` with probability ``p_i``. Blocks of
``n`` emissions are truncated with a typical projector (of the average
S-state) and a conditional typical projector, which caps both the effective
dimension and the largest Schmidt weight, and are then sent with the
one-shot protocol.

Strings over an alphabet of size ``k`` are numbered row-major (first symbol
most significant). Enumeration is exact and refuses beyond ``ENUMERATION_CAP``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ._backend import kernels
from .linalg import permute_subsystems, tensor_product
from .protocol import plan_resources, run_protocol, search_coupling_unitary
from .sampling import Seed, as_generator
from .states import DensityOperator, PureState, von_neumann_entropy

ENUMERATION_CAP = 10**6
DEGENERACY_TOL = 1e-10


class CapacityError(ValueError):
    """Raised when exact enumeration would exceed ``ENUMERATION_CAP``."""


def _check_capacity(base: int, n: int):
    if base**n > ENUMERATION_CAP:
        raise CapacityError(f"{base}^{n} strings exceeds the enumeration cap {ENUMERATION_CAP}")


@dataclass(frozen=True, eq=False)
class SourceEnsemble:
    states: tuple[PureState, ...]
    probs: np.ndarray

    def __post_init__(self):
        states = tuple(self.states)
        probs = np.asarray(self.probs, dtype=float)
        if len(states) == 0 or len(states) != len(probs):
            raise ValueError("need one probability per state")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        dims = {s.dims for s in states}
        if len(dims) != 1 or len(next(iter(dims))) != 2:
            raise ValueError("all states must live on the same (A1, S) space")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @property
    def m(self) -> int:
        return len(self.states)

    @property
    def d_A1(self) -> int:
        return self.states[0].dims[0]

    @property
    def d_S(self) -> int:
        return self.states[0].dims[1]

    def s_marginals(self) -> list[DensityOperator]:
        return [s.reduced([1]) for s in self.states]

    def average_s(self) -> DensityOperator:
        avg = sum(p * r.matrix for p, r in zip(self.probs, self.s_marginals()))
        return DensityOperator(avg, (self.d_S,))


@dataclass(frozen=True)
class TypicalParams:
    n: int
    delta: float
    epsilon: float

    def __post_init__(self):
        if self.n < 1 or self.delta <= 0 or not 0 < self.epsilon < 1:
            raise ValueError(f"invalid typicality parameters {self}")

    @classmethod
    def from_epsilon(cls, n: int, epsilon: float, m: int, d_S: int) -> "TypicalParams":
        """delta = m sqrt(2 d_S / epsilon), which guarantees retained weight >= 1 - epsilon."""
        return cls(n, m * math.sqrt(2 * d_S / epsilon), epsilon)


def typical_mask(q: Sequence[float], n: int, delta: float, letter_of_digit=None) -> np.ndarray:
    """Boolean mask over all ``len(letter_of_digit)**n`` strings.

    Digit ``x`` stands for letter ``letter_of_digit[x]`` (identity by default);
    a string is typical when every letter count satisfies
    ``|N - n q| <= delta sqrt(n) sqrt(q (1 - q))``.
    """
    q = np.asarray(q, dtype=float)
    if letter_of_digit is None:
        letter_of_digit = np.arange(len(q))
    base = len(letter_of_digit)
    _check_capacity(base, n)
    return np.asarray(kernels.typical_mask(base, n, letter_of_digit, q, float(delta)), dtype=bool)


def typical_sequences(q: Sequence[float], n: int, delta: float) -> list[tuple[int, ...]]:
    """All typical strings of length ``n``, in row-major order."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or abs(q.sum() - 1) > 1e-10:
        raise ValueError("q must be a probability distribution")
    mask = typical_mask(q, n, delta)
    return [tuple(int(x) for x in np.unravel_index(k, (len(q),) * n)) if n else ()
            for k in np.flatnonzero(mask)]


def spectral_letters(rho: DensityOperator):
    """Eigenvectors (descending), their letter labels, and letter probabilities.

    Eigenvalues within ``DEGENERACY_TOL`` share one spectral projector, i.e.
    one letter; the letter's probability is eigenvalue times multiplicity.
    """
    w, v = np.linalg.eigh(rho.matrix)
    w, v = np.clip(w[::-1], 0.0, None), v[:, ::-1]
    letters = np.zeros(len(w), dtype=np.int64)
    for k in range(1, len(w)):
        letters[k] = letters[k - 1] + (0 if abs(w[k] - w[k - 1]) <= DEGENERACY_TOL else 1)
    q = np.array([w[letters == j].sum() for j in range(letters[-1] + 1)])
    return v, letters, q / q.sum()


def typical_subspace_basis(rho: DensityOperator, n: int, delta: float) -> np.ndarray:
    """Orthonormal columns spanning the range of the typical projector."""
    d = rho.dims[0] if len(rho.dims) == 1 else int(np.prod(rho.dims))
    _check_capacity(d, n)
    v, letters, q = spectral_letters(rho)
    mask = typical_mask(q, n, delta, letters)
    cols = np.flatnonzero(mask)
    if n == 0:
        return np.ones((1, 1), dtype=complex)
    # columns of v^{(x) n} restricted to typical eigen-strings
    digits = np.array(np.unravel_index(cols, (d,) * n))  # n x R
    basis = v[:, digits[0]]
    for k in range(1, n):
        basis = (basis[:, None, :] * v[:, digits[k]][None, :, :]).reshape(d ** (k + 1), len(cols))
    return basis


def typical_projector(rho: DensityOperator, n: int, delta: float) -> np.ndarray:
    b = typical_subspace_basis(rho, n, delta)
    return b @ b.conj().T


def conditional_typical_projector(ens: SourceEnsemble, i_seq: Sequence[int], delta: float) -> np.ndarray:
    """Tensor product over letters ``i`` of typical projectors of ``phi_i^S`` on positions ``I_i``."""
    i_seq = tuple(int(i) for i in i_seq)
    n = len(i_seq)
    if any(not 0 <= i < ens.m for i in i_seq):
        raise ValueError(f"index string {i_seq} outside alphabet of size {ens.m}")
    _check_capacity(ens.d_S, n)
    marg = ens.s_marginals()
    order, factors = [], []
    for i in range(ens.m):
        pos = [j for j, x in enumerate(i_seq) if x == i]
        if pos:
            order += pos
            factors.append(typical_projector(marg[i], len(pos), delta))
    op = tensor_product(*factors)
    inverse = tuple(int(k) for k in np.argsort(order))
    return permute_subsystems(op, (ens.d_S,) * n, inverse)


def block_state(ens: SourceEnsemble, i_seq: Sequence[int]) -> PureState:
    """``phi_{i_1} x ... x phi_{i_n}`` regrouped as (A1^n, S^n)."""
    n = len(i_seq)
    vec = tensor_product(*[ens.states[i].vector for i in i_seq])
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    vec = permute_subsystems(vec, (ens.d_A1, ens.d_S) * n, perm)
    return PureState(vec, (ens.d_A1**n, ens.d_S**n))


@dataclass(frozen=True, eq=False)
class BlockState:
    i_seq: tuple[int, ...]
    sigma: PureState
    retained_weight: float
    typical: bool
    trace_distance: float
    gentle_bound: float
    target: PureState

    @property
    def gentle_ok(self) -> Optional[bool]:
        """Trace-distance bound check; ``None`` when retained weight is below 1 - epsilon."""
        if self.gentle_bound is None:
            return None
        return self.trace_distance <= self.gentle_bound + 1e-9


def sequence_is_typical(ens: SourceEnsemble, i_seq: Sequence[int], delta: float) -> bool:
    n = len(i_seq)
    counts = np.bincount(np.asarray(i_seq, dtype=int), minlength=ens.m)
    width = delta * math.sqrt(n) * np.sqrt(ens.probs * (1 - ens.probs)) + 1e-9
    return bool(np.all(np.abs(counts - n * ens.probs) <= width))


def truncated_block_state(ens: SourceEnsemble, i_seq: Sequence[int], params: TypicalParams,
                          typical_proj: Optional[np.ndarray] = None) -> BlockState:
    """Apply the conditional typical then the typical projector on S^n and renormalize."""
    i_seq = tuple(int(i) for i in i_seq)
    if len(i_seq) != params.n:
        raise ValueError(f"index string length {len(i_seq)} != n={params.n}")
    if typical_proj is None:
        typical_proj = typical_projector(ens.average_s(), params.n, params.delta)
    phi = block_state(ens, i_seq)
    m = phi.vector.reshape(phi.dims)
    p = typical_proj @ conditional_typical_projector(ens, i_seq, params.delta)
    kept = m @ p.T
    weight = float(np.vdot(kept, kept).real)
    if weight <= 1e-12:
        raise ValueError(f"truncation of {i_seq} retained weight {weight:.3g}")
    sigma = PureState.normalized(kept.reshape(-1), phi.dims)
    td = 2.0 * math.sqrt(max(0.0, 1.0 - min(1.0, abs(phi.overlap(sigma)) ** 2)))
    eps = params.epsilon
    gentle = math.sqrt(8 * eps) + 2 * eps if weight >= 1 - eps else None
    return BlockState(i_seq, sigma, weight, sequence_is_typical(ens, i_seq, params.delta), td,
                      gentle, phi)


def rate_pair(ens: SourceEnsemble) -> tuple[float, float]:
    """(qubit rate, ebit rate) = ((S - Sbar)/2, (S + Sbar)/2)."""
    s = von_neumann_entropy(ens.average_s())
    s_bar = float(sum(p * von_neumann_entropy(r) for p, r in zip(ens.probs, ens.s_marginals())))
    return 0.5 * (s - s_bar), 0.5 * (s + s_bar)


def ensemble_entropies(ens: SourceEnsemble) -> tuple[float, float]:
    s = von_neumann_entropy(ens.average_s())
    s_bar = float(sum(p * von_neumann_entropy(r) for p, r in zip(ens.probs, ens.s_marginals())))
    return s, s_bar


@dataclass(frozen=True)
class BlockProtocolConfig:
    kappa: float = 0.5
    candidates: int = 4
    probes: int = 20
    padding_bits: float = 0.0
    blocks: Union[str, int] = "all"
    c: Optional[float] = None  # typicality constant; defaults to log2 d_S


def atypical_mass(ens: SourceEnsemble, n: int, delta: float) -> float:
    mask = typical_mask(ens.probs, n, delta)
    p_strings = tensor_product(*[ens.probs.astype(complex)] * n).real if n else np.ones(1)
    return float(p_strings[~mask].sum())


def _compress(sigma: PureState, target: PureState, basis: np.ndarray, d_A1c: int):
    """Express sigma and the untruncated target in a small frame.

    S^n is replaced by coordinates in the typical subspace and A1^n by sigma's
    Schmidt support, zero-padded to ``d_A1c`` (the padding is Alice's ancilla
    and carries no target amplitude). Target amplitude outside the frame is
    dropped, so fidelities computed in the frame are fidelities with the
    full target.
    """
    mc = sigma.vector.reshape(sigma.dims) @ basis.conj()
    ua, s, _ = np.linalg.svd(mc, full_matrices=False)
    k = int(np.count_nonzero(s > 1e-12))
    if d_A1c < k:
        raise ValueError("compressed A1 register smaller than the Schmidt rank")
    frame = ua[:, :k].conj().T
    core = np.zeros((d_A1c, basis.shape[1]), dtype=complex)
    core[:k] = frame @ mc
    tgt = np.zeros_like(core)
    tgt[:k] = frame @ target.vector.reshape(target.dims) @ basis.conj()
    return core.reshape(-1), tgt.reshape(-1)


def run_block_protocol(ens: SourceEnsemble, params: TypicalParams,
                       config: BlockProtocolConfig = BlockProtocolConfig(),
                       seed: Seed = Seed(0), map_fn=map) -> dict:
    """Typical truncation followed by the one-shot protocol, per block.

    Atypical blocks count as failures with fidelity 0. ``config.blocks="all"``
    enumerates every block with its exact probability; an integer samples that
    many blocks from ``p^n``. ``map_fn`` parallelizes the coupling-unitary
    searches.
    """
    n, delta, eps = params.n, params.delta, params.epsilon
    _check_capacity(ens.m, n)
    _check_capacity(ens.d_S, n)
    c = math.log2(ens.d_S) if config.c is None else config.c
    s_avg, s_bar = ensemble_entropies(ens)
    rho = ens.average_s()
    basis = typical_subspace_basis(rho, n, delta)
    rank = basis.shape[1]
    proj = basis @ basis.conj().T
    lam_formula = 2.0 ** (-n * s_bar + c * delta * math.sqrt(n)) / (1 - eps)
    rank_formula = 2.0 ** (n * s_avg + c * delta * math.sqrt(n))

    if config.blocks == "all":
        strings = [s for s in itertools.product(range(ens.m), repeat=n)]
        weights = [float(np.prod(ens.probs[list(s)])) for s in strings]
        keep = [(s, w) for s, w in zip(strings, weights) if w > 0]
    else:
        rng = as_generator(seed.child(4))
        draws = rng.choice(ens.m, size=(int(config.blocks), n), p=ens.probs)
        keep = [(tuple(int(x) for x in row), 1.0 / len(draws)) for row in draws]

    unitaries: dict = {}
    records = []
    for i_seq, w in keep:
        rec = {"i_seq": list(i_seq), "weight": w}
        if not sequence_is_typical(ens, i_seq, delta):
            rec.update(typical=False, fidelity=0.0)
            records.append(rec)
            continue
        blk = truncated_block_state(ens, i_seq, params, proj)
        sigma_s = blk.sigma.reduced([1]).matrix
        lam = float(np.linalg.eigvalsh(sigma_s)[-1])
        op_gap = float(np.linalg.eigvalsh(2.0 ** (-n * s_bar + c * delta * math.sqrt(n)) * proj
                                          - (1 - eps) * sigma_s)[0])
        plan = plan_resources(rank, min(1.0, max(lam, 1.0 / rank)), config.kappa,
                              padding_bits=config.padding_bits)
        key = (plan.d_S, plan.d_A1prime, plan.d_A2, plan.d_B)
        if key not in unitaries:
            unitaries[key] = search_coupling_unitary(plan, config.candidates, config.probes,
                                                     seed.child(3, *key), map_fn=map_fn)
        d_A1c = plan.min_d_A1()
        core, tgt = _compress(blk.sigma, blk.target, basis, d_A1c)
        tr = run_protocol(PureState.normalized(core, (d_A1c, rank)), unitaries[key], plan)
        f_target = float(abs(np.vdot(tgt, tr.output.vector)) ** 2)
        rec.update(
            typical=True, retained_weight=blk.retained_weight, trace_distance=blk.trace_distance,
            gentle_bound=blk.gentle_bound, gentle_ok=blk.gentle_ok, lambda_max=lam,
            lambda_bound=lam_formula, lambda_ok=lam <= lam_formula + 1e-12,
            operator_inequality_gap=op_gap, rank=rank,
            fidelity_to_truncated=tr.fidelity_achieved, fidelity=f_target,
            resources={"qubits": plan.qubits, "ebits": plan.ebits,
                       "qubits_leading": plan.qubits_leading, "ebits_leading": plan.ebits_leading,
                       "d_A2": plan.d_A2, "d_B": plan.d_B},
        )
        records.append(rec)

    total_w = sum(r["weight"] for r in records)
    typ = [r for r in records if r["typical"]]
    q_rate, e_rate = 0.5 * (s_avg - s_bar), 0.5 * (s_avg + s_bar)
    mass = atypical_mass(ens, n, delta)
    summary = {
        "n": n, "delta": delta, "epsilon": eps, "c": c,
        "S_avg": s_avg, "S_bar": s_bar, "rate_pair": {"qubits": q_rate, "ebits": e_rate},
        "typical_rank": rank, "rank_bound": rank_formula, "rank_ok": rank <= rank_formula,
        "lambda_bound": lam_formula,
        "atypical_mass": mass, "atypical_mass_bound": ens.m / delta**2,
        "atypical_mass_ok": mass <= ens.m / delta**2 + 1e-12,
        "mean_fidelity": sum(r["weight"] * r["fidelity"] for r in records) / total_w,
        "blocks": len(records), "typical_blocks": len(typ),
        "retained_weight_ok": all(r["retained_weight"] >= 1 - eps - 1e-12 for r in typ),
        "gentle_ok": all(r["gentle_ok"] is not False for r in typ),
        "lambda_ok": all(r["lambda_ok"] for r in typ),
        "operator_inequality_ok": all(r["operator_inequality_gap"] >= -1e-9 for r in typ),
    }
    if typ:
        wt = sum(r["weight"] for r in typ)
        summary["mean_qubits_per_symbol"] = sum(r["weight"] * r["resources"]["qubits"] for r in typ) / wt / n
        summary["mean_ebits_per_symbol"] = sum(r["weight"] * r["resources"]["ebits"] for r in typ) / wt / n
    return {
        "config": {"params": asdict(params), "protocol": asdict(config), "seed": asdict(seed),
                   "m": ens.m, "d_A1": ens.d_A1, "d_S": ens.d_S, "probs": ens.probs.tolist()},
        "records": sorted(records, key=lambda r: r["i_seq"]),
        "summary": summary,
    }
