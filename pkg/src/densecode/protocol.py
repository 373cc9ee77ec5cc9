"""Universal one-shot superdense coding of entangled states.

Alice and Bob share ``Phi_{d_B}``. Alice maps her half into ``A1 x A2`` with an
isometry ``V_psi`` that depends on the target ``|psi>`` on ``A1 x S``, sends
``A2``, and Bob applies ``U^dag`` on ``A2 x B`` and projects onto the embedded
``S``. ``S`` is embedded as the first ``d_S`` row-major basis vectors of
``A2 x B``.

``plan_resources`` derives the dimensions, ``search_coupling_unitary`` picks
``U`` by Monte-Carlo probing, ``encode``/``run_protocol`` simulate one
instance, and ``to_remote_state_preparation`` teleports the qubits.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .bounds import ledger_check, net_size_bound
from .concentration import CONCENTRATION_C
from .linalg import apply_on_subsystems
from .sampling import Seed, bounded_schmidt_state, haar_isometry, haar_unitary
from .states import (
    PureState,
    closest_maximally_entangled_purification,
    entropy_of_spectrum,
    maximally_entangled,
    von_neumann_entropy,
)

EMBEDDING = "first d_S row-major basis vectors of A2 x B"


class ProtocolError(ValueError):
    """Raised when an input violates a protocol precondition."""


def _ceil_pow2(bits: float) -> int:
    """Smallest integer d with log2(d) >= bits."""
    d = max(1, math.ceil(2.0**bits - 1e-9))
    return d


def _proof_dimensions(d_S: int, alpha: float, d_A1prime: int) -> tuple[float, float]:
    """log2 of (d_A2, d_B) at which the existence argument's inequality first holds.

    Uses ``d_A2 = d_B / (2 ln2 alpha d_A1')`` and finds the smallest ``d_B`` with
    ``d_S < d_A2 d_B alpha^2 C / (8 (log d_B)^2 log(20 log d_B / alpha^2)) - 1``.
    """
    shift = math.log2(2 * math.log(2) * alpha * d_A1prime)
    target = math.log2(d_S + 1)

    def rhs(x):
        inner = math.log2(20 * x / alpha**2)
        return 2 * x - shift + math.log2(alpha**2 * CONCENTRATION_C) - math.log2(8 * x * x * inner)

    lo, hi = 2.0, 4.0
    while rhs(hi) <= target:
        lo, hi = hi, hi * 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if rhs(mid) > target:
            hi = mid
        else:
            lo = mid
    return hi - shift, hi


@dataclass(frozen=True)
class ProtocolPlan:
    """Dimensions and parameters for one protocol instance.

    ``d_A2`` and ``d_B`` are the simulated register sizes. ``proof_log_d_A2`` and
    ``proof_log_d_B`` are the (astronomical) sizes for which the existence
    argument's inequality holds; they are reported, never simulated.
    """

    d_S: int
    lambda_max: float
    kappa: float
    epsilon: float
    alpha: float
    beta: float
    gamma: float
    delta_fannes: float
    d_A1prime: int
    d_A2: int
    d_B: int
    qubits_leading: float
    ebits_leading: float
    proof_log_d_A2: float
    proof_log_d_B: float
    net_size_log2: float
    padding_bits: float = 0.0
    embedding: str = EMBEDDING

    @property
    def qubits(self) -> float:
        return math.log2(self.d_A2)

    @property
    def ebits(self) -> float:
        return math.log2(self.d_B)

    @property
    def d_joint(self) -> int:
        return self.d_A2 * self.d_B

    def min_d_A1(self) -> int:
        """Smallest Alice register for which ``V_psi`` can be an isometry."""
        return max(self.d_S, math.ceil(self.d_B / self.d_A2))

    def satisfies_proof_inequality(self) -> bool:
        lb = math.log2(max(self.d_B, 2))
        rhs = (self.d_A2 * self.d_B * self.alpha**2 * CONCENTRATION_C
               / (8 * lb**2 * math.log2(20 * lb / self.alpha**2)) - 1)
        return self.d_S < rhs

    def table_row(self) -> dict:
        return {"d_S": self.d_S, "lambda_max": self.lambda_max, "kappa": self.kappa,
                "d_A1prime": self.d_A1prime, "d_A2": self.d_A2, "d_B": self.d_B,
                "qubits": self.qubits, "ebits": self.ebits}

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(qubits=self.qubits, ebits=self.ebits,
                 satisfies_proof_inequality=self.satisfies_proof_inequality())
        return d


def plan_resources(d_S: int, lambda_max: float, kappa: float, *, d_A2: Optional[int] = None,
                   d_B: Optional[int] = None, padding_bits: float = 0.0) -> ProtocolPlan:
    """Derive protocol dimensions for targets on ``d_S`` with Schmidt cap ``lambda_max``.

    Leading terms are ``(log d_S +/- log lambda_max)/2``. Without explicit
    ``d_A2``/``d_B`` the simulated registers are the smallest integers whose
    logs reach the leading terms plus ``padding_bits``, with ``d_B`` bumped
    until ``d_A2 d_B >= d_S``.
    """
    if d_S < 1:
        raise ProtocolError("d_S must be >= 1")
    if not 1.0 / d_S - 1e-12 <= lambda_max <= 1.0:
        raise ProtocolError(f"lambda_max={lambda_max} outside [1/d_S, 1]")
    if not 0.0 < kappa <= 1.0:
        raise ProtocolError(f"kappa={kappa} outside (0, 1]")
    epsilon = kappa**2 / (2 * math.log(2))
    alpha = epsilon / 4
    if alpha > 0.25:
        raise ProtocolError("alpha > 1/4: choose a smaller kappa or a larger d_S")
    d_A1prime = math.floor(1.0 / lambda_max + 1e-9)
    q_lead = 0.5 * (math.log2(d_S) + math.log2(lambda_max))
    e_lead = 0.5 * (math.log2(d_S) - math.log2(lambda_max))
    if d_A2 is None:
        d_A2 = _ceil_pow2(q_lead + padding_bits)
    if d_B is None:
        d_B = _ceil_pow2(e_lead + padding_bits)
        while d_A2 * d_B < d_S:
            d_B += 1
    if d_A2 < 1 or d_B < 1:
        raise ProtocolError("register dimensions must be >= 1")
    if d_A2 * d_B < d_S:
        raise ProtocolError(f"S (dim {d_S}) does not fit in A2 x B (dim {d_A2 * d_B})")
    log_b = math.log2(max(d_B, 2))
    gamma = alpha**2 / (4 * log_b)
    p_a2, p_b = _proof_dimensions(d_S, alpha, d_A1prime)
    return ProtocolPlan(
        d_S=d_S, lambda_max=lambda_max, kappa=kappa, epsilon=epsilon, alpha=alpha,
        beta=alpha, gamma=gamma, delta_fannes=gamma * log_b, d_A1prime=d_A1prime,
        d_A2=int(d_A2), d_B=int(d_B), qubits_leading=q_lead, ebits_leading=e_lead,
        proof_log_d_A2=p_a2, proof_log_d_B=p_b,
        net_size_log2=net_size_bound(gamma, d_A1prime, d_S), padding_bits=padding_bits,
    )


@dataclass(frozen=True, eq=False)
class CouplingUnitary:
    U: np.ndarray
    probe_min_entropy: float
    candidates: int
    probes: int
    seed: Seed
    chosen_index: int = 0
    candidate_scores: tuple[float, ...] = ()

    def meta(self) -> dict:
        return {"candidates": self.candidates, "probes": self.probes,
                "seed": asdict(self.seed), "chosen_index": self.chosen_index,
                "probe_min_entropy": self.probe_min_entropy,
                "candidate_scores": list(self.candidate_scores)}


def probe_isometries(plan: ProtocolPlan, probes: int, seed: Seed) -> np.ndarray:
    """Random S-supports of states maximally entangled with ``A1'``.

    Returns shape ``(probes, d_S, d_A1')``; probe ``k`` has S-reduction
    ``Q_k Q_k^dag / d_A1'``.
    """
    return np.stack([haar_isometry(plan.d_S, plan.d_A1prime, seed.child(0, k))
                     for k in range(probes)])


def probe_entropies(U: np.ndarray, plan: ProtocolPlan, qs: np.ndarray) -> np.ndarray:
    """S(Tr_A2 U rho_S U^dag) for each probe support in ``qs``."""
    r = plan.d_A1prime
    x = np.einsum("xs,psr->pxr", U[:, : plan.d_S], qs) / math.sqrt(r)
    y = x.reshape(len(qs), plan.d_A2, plan.d_B, r).transpose(0, 2, 1, 3)
    y = y.reshape(len(qs), plan.d_B, plan.d_A2 * r)
    rho_b = y @ y.conj().transpose(0, 2, 1)
    w = np.linalg.eigvalsh(rho_b)
    return np.array([entropy_of_spectrum(row) for row in w])


def _score_candidate(args):
    plan, seed, i, qs = args
    U = haar_unitary(plan.d_joint, seed.child(1, i))
    return float(np.min(probe_entropies(U, plan, qs)))


def search_coupling_unitary(plan: ProtocolPlan, candidates: int, probes: int, seed: Seed,
                            map_fn=map) -> CouplingUnitary:
    """Best of ``candidates`` Haar unitaries by worst-case probe entropy.

    All candidates are scored on the same probe set; ties go to the lowest
    index, so the result does not depend on evaluation order.
    """
    if candidates < 1 or probes < 1:
        raise ProtocolError("candidates and probes must be >= 1")
    qs = probe_isometries(plan, probes, seed)
    scores = list(map_fn(_score_candidate, [(plan, seed, i, qs) for i in range(candidates)]))
    best = int(np.argmax(scores))
    U = haar_unitary(plan.d_joint, seed.child(1, best))
    return CouplingUnitary(U, scores[best], candidates, probes, seed, best, tuple(scores))


def identity_coupling(plan: ProtocolPlan) -> CouplingUnitary:
    return CouplingUnitary(np.eye(plan.d_joint, dtype=complex), math.nan, 0, 0, Seed(0))


@dataclass(frozen=True)
class ResourceLedger:
    qubits: float
    ebits: float
    cbits: float = 0.0


@dataclass(frozen=True, eq=False)
class Encoding:
    V: np.ndarray             # d_B -> A1 x A2 isometry
    predicted_overlap: float  # |<psi'|Phi_psi>|
    psi_prime: PureState      # (1 x U) psi on (A1, A2, B)
    phi_psi: PureState        # maximally entangled across A1 A2 | B


def _check_input(psi: PureState, plan: ProtocolPlan):
    if len(psi.dims) != 2 or psi.dims[1] != plan.d_S:
        raise ProtocolError(f"input must live on (A1, S) with d_S={plan.d_S}, got dims {psi.dims}")
    d_A1 = psi.dims[0]
    m = psi.vector.reshape(d_A1, plan.d_S)
    lam = float(np.linalg.norm(m, 2) ** 2)
    if lam > plan.lambda_max + 1e-9:
        raise ProtocolError(f"largest Schmidt weight {lam:.6g} exceeds lambda_max={plan.lambda_max}")
    if d_A1 * plan.d_A2 < plan.d_B:
        raise ProtocolError(f"infeasible: d_A1*d_A2={d_A1 * plan.d_A2} < d_B={plan.d_B}")
    return d_A1, m, lam


def embed_input(psi: PureState, U: np.ndarray, plan: ProtocolPlan) -> PureState:
    """``(1_A1 x U)`` applied to ``psi`` with ``S`` embedded in ``A2 x B``."""
    d_A1 = psi.dims[0]
    m = psi.vector.reshape(d_A1, plan.d_S)
    mp = m @ U[:, : plan.d_S].T
    return PureState.normalized(mp.reshape(-1), (d_A1, plan.d_A2, plan.d_B))


def encode(psi: PureState, U: CouplingUnitary, plan: ProtocolPlan) -> Encoding:
    """Alice's isometry ``V_psi`` with ``(V_psi x 1)|Phi_{d_B}> = Phi_psi``."""
    _check_input(psi, plan)
    psi_prime = embed_input(psi, U.U, plan)
    phi, overlap = closest_maximally_entangled_purification(psi_prime, [2])
    d_alice = psi.dims[0] * plan.d_A2
    V = phi.vector.reshape(d_alice, plan.d_B) * math.sqrt(plan.d_B)
    return Encoding(V, overlap, psi_prime, phi)


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    plan: ProtocolPlan
    input_dims: tuple[int, ...]
    input_schmidt: tuple[float, ...]
    fidelity_achieved: float
    fidelity_before_projection: float
    predicted_overlap: float
    projection_leakage: float
    entropy_psi_prime_B: float
    trace_distance_to_uniform: float
    pinsker_bound: float
    ledger: ResourceLedger
    output: Optional[PureState] = field(default=None, repr=False)
    kind: str = "superdense"

    @property
    def pinsker_ok(self) -> bool:
        return self.trace_distance_to_uniform <= self.pinsker_bound + 1e-8

    def bound_check(self) -> dict:
        return ledger_check(self.ledger.qubits, self.ledger.ebits, self.ledger.cbits,
                            self.plan.d_S, self.plan.lambda_max, self.fidelity_achieved,
                            rsp=self.kind == "rsp")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "input_dims": list(self.input_dims),
            "input_schmidt": list(self.input_schmidt),
            "fidelity_achieved": self.fidelity_achieved,
            "fidelity_before_projection": self.fidelity_before_projection,
            "predicted_overlap": self.predicted_overlap,
            "projection_leakage": self.projection_leakage,
            "entropy_psi_prime_B": self.entropy_psi_prime_B,
            "trace_distance_to_uniform": self.trace_distance_to_uniform,
            "pinsker_bound": self.pinsker_bound,
            "ledger": asdict(self.ledger),
        }


def run_protocol(psi: PureState, U: CouplingUnitary, plan: ProtocolPlan) -> ProtocolTranscript:
    """Simulate the protocol on the full state vector."""
    d_A1, _, _ = _check_input(psi, plan)
    enc = encode(psi, U, plan)
    d_B, d_A2 = plan.d_B, plan.d_A2

    # Alice applies V_psi to her half of Phi_{d_B}; A2 then travels to Bob.
    shared = maximally_entangled(d_B).vector.reshape(d_B, d_B)
    state = (enc.V @ shared).reshape(-1)                     # (A1, A2, B)
    state = apply_on_subsystems(U.U.conj().T, state, (d_A1, d_A2, d_B), [1, 2])
    m = state.reshape(d_A1, d_A2 * d_B)
    embedded_psi = np.zeros_like(m)
    embedded_psi[:, : plan.d_S] = psi.vector.reshape(d_A1, plan.d_S)
    f_before = float(abs(np.vdot(embedded_psi.reshape(-1), m.reshape(-1))) ** 2)

    kept = m[:, : plan.d_S]
    weight = float(np.vdot(kept, kept).real)
    if weight < 1e-12:
        raise ProtocolError("projection onto S annihilated the state")
    out = PureState.normalized(kept.reshape(-1), (d_A1, plan.d_S))
    f_after = float(min(1.0, abs(psi.overlap(out)) ** 2))

    rho_b = enc.psi_prime.reduced([2])
    s_b = von_neumann_entropy(rho_b)
    dist = float(np.sum(np.abs(np.linalg.eigvalsh(rho_b.matrix - np.eye(d_B) / d_B))))
    pinsker = math.sqrt(max(0.0, 2 * math.log(2) * (math.log2(d_B) - s_b)))
    schmidt = np.linalg.svd(psi.vector.reshape(d_A1, plan.d_S), compute_uv=False)
    return ProtocolTranscript(
        plan=plan, input_dims=psi.dims, input_schmidt=tuple(float(s) for s in schmidt),
        fidelity_achieved=f_after, fidelity_before_projection=f_before,
        predicted_overlap=enc.predicted_overlap, projection_leakage=1.0 - weight,
        entropy_psi_prime_B=s_b, trace_distance_to_uniform=dist, pinsker_bound=pinsker,
        ledger=ResourceLedger(plan.qubits, plan.ebits, 0.0), output=out,
    )


def to_remote_state_preparation(transcript: ProtocolTranscript) -> ProtocolTranscript:
    """Teleport the transmitted qubits: Q qubits + E ebits -> 2Q cbits + (Q+E) ebits."""
    led = transcript.ledger
    rsp = ResourceLedger(qubits=0.0, ebits=led.qubits + led.ebits, cbits=led.cbits + 2 * led.qubits)
    return replace(transcript, ledger=rsp, kind="rsp")


def run_trials(plan: ProtocolPlan, U: CouplingUnitary, inputs: int, seed: Seed,
               d_A1: Optional[int] = None, map_fn=map) -> list[ProtocolTranscript]:
    """Run the protocol on ``inputs`` fresh capped-Schmidt states (stream ``2, i``)."""
    d_A1 = d_A1 or plan.min_d_A1()
    args = [(plan, U, d_A1, seed.child(2, i)) for i in range(inputs)]
    return list(map_fn(_one_trial, args))


def _one_trial(args):
    plan, U, d_A1, seed = args
    psi = bounded_schmidt_state(d_A1, plan.d_S, plan.lambda_max, seed)
    return run_protocol(psi, U, plan)


def summarize_trials(transcripts) -> dict:
    f = np.array([t.fidelity_achieved for t in transcripts])
    fb = np.array([t.fidelity_before_projection for t in transcripts])
    return {
        "trials": len(transcripts),
        "mean_fidelity": float(f.mean()),
        "min_fidelity": float(f.min()),
        "mean_fidelity_before_projection": float(fb.mean()),
        "min_fidelity_before_projection": float(fb.min()),
        "mean_leakage": float(np.mean([t.projection_leakage for t in transcripts])),
        "pinsker_all_ok": all(t.pinsker_ok for t in transcripts),
        "bounds_all_ok": all(t.bound_check()["ok"] for t in transcripts),
    }
