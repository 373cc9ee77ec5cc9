"""Quantum identification codes from random isometries.

A message ``|phi>`` on ``C^{d_C}`` is encoded as ``enc(phi) = Tr_a(V phi V^dag)``
with ``V: C^{d_C} -> C^d x C^a`` a Haar isometry, and the test "is it psi?"
is decoded by the support projector of ``enc(psi~)`` for the net point
``psi~`` nearest to ``psi``. The purification ``V|phi>`` is what the sender
prepares remotely with the superdense coding protocol.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .linalg import support_projector
from .protocol import (
    CouplingUnitary,
    ProtocolPlan,
    run_protocol,
)
from .sampling import Seed, haar_isometry, haar_unitary
from .states import PureState, closest_maximally_entangled_purification

SUPPORT_TOL = 1e-10
#: granularity of the covering net used by the existence argument (recorded only)
NET_GRANULARITY = "lambda/16"
DC_FORMULA = "floor(c(lambda) d^2 / (log d)^4)"


@dataclass(frozen=True, eq=False)
class QuantumIdCode:
    d: int
    a: int
    d_C: int
    V: np.ndarray                     # (d*a) x d_C, rows ordered (d, a)
    net: Optional[np.ndarray] = None  # rows are decoder points on C^{d_C}; None = exact
    seed: Optional[Seed] = None
    lambda_target: Optional[float] = None

    def encode(self, phi: PureState) -> np.ndarray:
        """enc(phi) on C^d."""
        x = (self.V @ phi.vector).reshape(self.d, self.a)
        return x @ x.conj().T

    def purification(self, phi: PureState) -> PureState:
        """V|phi> on (d, a)."""
        return PureState.normalized(self.V @ phi.vector, (self.d, self.a))

    def decoder_point(self, psi: PureState) -> PureState:
        if self.net is None:
            return psi
        k = int(np.argmax(np.abs(self.net.conj() @ psi.vector)))
        return PureState.normalized(self.net[k], (self.d_C,))

    def decoder(self, psi: PureState) -> np.ndarray:
        """D_psi = supp enc(psi~)."""
        return support_projector(self.encode(self.decoder_point(psi)), SUPPORT_TOL)


def build_id_code(d: int, a: int, d_C: int, seed: Seed, net_size: int = 0,
                  lambda_target: Optional[float] = None) -> QuantumIdCode:
    """Random-isometry ID code; ``net_size > 0`` adds that many sampled decoder points."""
    if min(d, a, d_C) < 1:
        raise ValueError("d, a, d_C must be >= 1")
    if d_C > d * a:
        raise ValueError(f"d_C={d_C} exceeds d*a={d * a}")
    V = haar_unitary(d * a, seed.child(0))[:, :d_C]
    net = None
    if net_size > 0:
        net = np.stack([haar_isometry(d_C, 1, seed.child(1, k))[:, 0] for k in range(net_size)])
    return QuantumIdCode(d, a, d_C, V, net, seed, lambda_target)


def id_error(code: QuantumIdCode, phi: PureState, psi: PureState) -> float:
    """|Tr(phi psi) - Tr(enc(phi) D_psi)|."""
    ideal = abs(phi.overlap(psi)) ** 2
    got = float(np.real(np.trace(code.encode(phi) @ code.decoder(psi))))
    return abs(ideal - got)


def sample_id_errors(code: QuantumIdCode, pairs: int, seed: Seed) -> dict:
    errs = []
    for k in range(pairs):
        phi = PureState(haar_isometry(code.d_C, 1, seed.child(0, k))[:, 0], (code.d_C,))
        psi = PureState(haar_isometry(code.d_C, 1, seed.child(1, k))[:, 0], (code.d_C,))
        errs.append(id_error(code, phi, psi))
    return {"errors": errs, "max_error": float(np.max(errs)), "mean_error": float(np.mean(errs))}


def id_code_via_sdc(code: QuantumIdCode, phi: PureState, plan: ProtocolPlan,
                    U: CouplingUnitary, psi: Optional[PureState] = None) -> dict:
    """Prepare an approximation of ``V|phi>`` with the protocol and score it.

    ``V|phi>`` is replaced by its nearest state maximally entangled across
    a | d (Schmidt weights exactly 1/a), which is then sent with the a-factor
    as Alice's register and C^d as Bob's. Alice's register is zero-padded
    when the protocol needs a larger one.
    """
    if plan.d_S != code.d:
        raise ValueError(f"plan.d_S={plan.d_S} must equal d={code.d}")
    if plan.lambda_max < 1.0 / code.a - 1e-12:
        raise ValueError(f"plan.lambda_max={plan.lambda_max} below 1/a={1 / code.a}")
    target = code.purification(phi)                             # (d, a)
    me, overlap = closest_maximally_entangled_purification(target, [1])
    d_alice = max(code.a, math.ceil(plan.d_B / plan.d_A2))
    m = np.zeros((d_alice, code.d), dtype=complex)
    m[: code.a] = me.vector.reshape(code.d, code.a).T            # (A1 = a, S = d)
    tr = run_protocol(PureState(m.reshape(-1), (d_alice, code.d)), U, plan)

    tgt = np.zeros((d_alice, code.d), dtype=complex)
    tgt[: code.a] = target.vector.reshape(code.d, code.a).T
    f_prep = float(abs(np.vdot(tgt.reshape(-1), tr.output.vector)) ** 2)
    rho_prepared = tr.output.reduced([1]).matrix
    report = {
        "maximally_entangled_overlap": overlap**2,
        "protocol_fidelity": tr.fidelity_achieved,
        "preparation_fidelity": f_prep,
        "ledger": asdict(tr.ledger),
        "plan": plan.table_row(),
    }
    if psi is not None:
        ideal = abs(phi.overlap(psi)) ** 2
        direct = id_error(code, phi, psi)
        got = float(np.real(np.trace(rho_prepared @ code.decoder(psi))))
        report.update(direct_error=direct, end_to_end_error=abs(ideal - got),
                      error_allowance=direct + 2 * math.sqrt(max(0.0, 1 - f_prep)))
    return report


def exact_preparation_error(code: QuantumIdCode, phi: PureState, psi: PureState) -> float:
    """End-to-end ID error when V|phi> itself is handed over (no preparation loss)."""
    rho = code.purification(phi).reduced([0]).matrix
    ideal = abs(phi.overlap(psi)) ** 2
    return abs(ideal - float(np.real(np.trace(rho @ code.decoder(psi)))))


def a_side_support_invariance(d: int, a: int, seed: Seed) -> float:
    """Deviation of the d-side support after a random unitary on the a-side.

    For a state maximally entangled across a | d with a < d the d-side
    reduction, and hence its support, is untouched by operations on C^a.
    """
    if not a < d:
        raise ValueError("need a < d")
    iso = haar_isometry(d, a, seed.child(0))                    # d x a
    state = PureState.normalized(iso.reshape(-1), (d, a))
    u = haar_unitary(a, seed.child(1))
    moved = PureState.normalized((iso @ u.T).reshape(-1), (d, a))
    p0 = support_projector(state.reduced([0]).matrix)
    p1 = support_projector(moved.reduced([0]).matrix)
    return float(np.max(np.abs(p0 - p1)))
