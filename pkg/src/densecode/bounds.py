"""Lower bounds on communication/entanglement cost and auxiliary inequalities.

Every bound returned as a :class:`Bound` is clamped at zero; ``vacuous`` is
set when the raw formula was negative (common at small dimension). Logs are
base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import DensityOperator


@dataclass(frozen=True)
class BoundInputs:
    d_S: int
    lambda_max: float
    F: float

    def __post_init__(self):
        if self.d_S < 1:
            raise ValueError("d_S must be >= 1")
        if not 1.0 / self.d_S - 1e-12 <= self.lambda_max <= 1.0:
            raise ValueError(f"lambda_max={self.lambda_max} outside [1/d_S, 1]")
        if not 0.5 <= self.F <= 1.0:
            raise ValueError(f"fidelity F={self.F} outside [1/2, 1]")

    @property
    def a(self) -> int:
        return math.ceil(1.0 / self.lambda_max - 1e-12)


@dataclass(frozen=True)
class Bound:
    value: float
    raw: float

    @property
    def vacuous(self) -> bool:
        return self.raw <= 0.0

    def __float__(self):
        return self.value


def _clamp(raw: float) -> Bound:
    return Bound(max(0.0, raw), raw)


def eta(t: float) -> float:
    """-t log2 t on [0, 1], with eta(0) = 0."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"eta is defined here on [0, 1], got {t}")
    return 0.0 if t == 0.0 else -t * math.log2(t)


def rsp_cbit_lower_bound(inp: BoundInputs) -> Bound:
    """log d_S + log lambda_max + log F - 2 cbits (clamped)."""
    return _clamp(math.log2(inp.d_S) + math.log2(inp.lambda_max) + math.log2(inp.F) - 2.0)


def rsp_cbit_lower_bound_sharp(inp: BoundInputs) -> Bound:
    """log(F * floor(d_S / a)) with a = ceil(1/lambda_max), the counting form."""
    k = inp.F * (inp.d_S // inp.a)
    return _clamp(math.log2(k) if k > 0 else -math.inf)


def _entanglement_sum_raw(d_S: int, F: float) -> float:
    s = math.sqrt(max(0.0, 1.0 - F))
    if 2 * s > 1.0:
        # 18 s >= 9 here, so the formula is negative whatever eta contributes
        return -math.inf
    return math.log2(d_S) - 18.0 * s * math.log2(d_S) - 2.0 * eta(2 * s)


def rsp_ebit_lower_bound(inp: BoundInputs) -> Bound:
    """log d_S - 18 sqrt(1-F) log d_S - 2 eta(2 sqrt(1-F)) ebits (clamped)."""
    return _clamp(_entanglement_sum_raw(inp.d_S, inp.F))


def sdc_qubit_lower_bound(inp: BoundInputs) -> Bound:
    """(log d_S + log lambda_max + log F)/2 - 1 qubits (clamped)."""
    return _clamp(0.5 * (math.log2(inp.d_S) + math.log2(inp.lambda_max) + math.log2(inp.F)) - 1.0)


def sdc_sum_lower_bound(inp: BoundInputs) -> Bound:
    """Lower bound on qubits + ebits; same expression as the RSP ebit bound."""
    return _clamp(_entanglement_sum_raw(inp.d_S, inp.F))


def fannes_bound(trace_distance: float, d: int) -> float:
    """T log d + eta(T) for trace distance T <= 1/4."""
    if not 0.0 <= trace_distance <= 0.25:
        raise ValueError(f"trace distance {trace_distance} outside [0, 1/4]")
    return trace_distance * math.log2(d) + eta(trace_distance)


def net_size_bound(gamma: float, d_A1prime: int, d_S: int) -> float:
    """log2 of (5/gamma)^(2 d_A1' d_S)."""
    if not 0.0 < gamma <= 5.0:
        raise ValueError(f"gamma must be in (0, 5], got {gamma}")
    return 2.0 * d_A1prime * d_S * math.log2(5.0 / gamma)


def ledger_check(qubits: float, ebits: float, cbits: float, d_S: int, lambda_max: float,
                 F: float, rsp: bool = False) -> dict:
    """Compare a resource ledger against the clamped lower bounds at fidelity ``F``.

    For an RSP ledger (``rsp=True``) the cbit and ebit bounds apply; otherwise
    the qubit and qubit+ebit bounds. Fidelities below 1/2 are outside the
    bounds' hypothesis and reported as not applicable.
    """
    if F < 0.5:
        return {"applicable": False, "ok": True}
    inp = BoundInputs(d_S, lambda_max, min(1.0, F))
    if rsp:
        checks = {
            "cbits": (cbits, rsp_cbit_lower_bound(inp).value),
            "cbits_sharp": (cbits, rsp_cbit_lower_bound_sharp(inp).value),
            "ebits": (ebits, rsp_ebit_lower_bound(inp).value),
        }
    else:
        checks = {
            "qubits": (qubits, sdc_qubit_lower_bound(inp).value),
            "qubits_plus_ebits": (qubits + ebits, sdc_sum_lower_bound(inp).value),
        }
    ok = all(have >= need - 1e-12 for have, need in checks.values())
    return {"applicable": True, "ok": ok,
            "checks": {k: {"have": h, "bound": b} for k, (h, b) in checks.items()}}


def block_projectors(d_S: int, a: int) -> list[np.ndarray]:
    """Pi_i = sum_{k in block i} |k><k| for blocks of ``a`` consecutive basis states."""
    blocks = []
    for i in range(d_S // a):
        p = np.zeros((d_S, d_S))
        idx = np.arange(a * i, a * (i + 1))
        p[idx, idx] = 1.0
        blocks.append(p)
    return blocks


def block_state(d_S: int, a: int, i: int) -> DensityOperator:
    """sigma_i, uniform on block ``i`` (1-based)."""
    p = block_projectors(d_S, a)[i - 1]
    return DensityOperator(p / a, (d_S,))


def causality_block_experiment(d_S: int, lambda_max: float,
                               prepared_states: Sequence[DensityOperator],
                               intended_index: Sequence[int]) -> dict:
    """Decode block messages from remotely prepared states.

    Message ``i`` in ``1..floor(d_S/a)`` is decoded by measuring ``Pi_i``. Any
    scheme without forward communication succeeds with probability at most the
    guessing baseline ``1/floor(d_S/a)``, so a mean success ``p`` forces
    ``K >= p * floor(d_S/a)`` classical messages.
    """
    a = math.ceil(1.0 / lambda_max - 1e-12)
    n_msg = d_S // a
    if n_msg < 1:
        raise ValueError(f"no messages: d_S={d_S} < a={a}")
    if len(prepared_states) != len(intended_index):
        raise ValueError("one intended index per prepared state")
    projectors = block_projectors(d_S, a)
    probs = []
    for rho, i in zip(prepared_states, intended_index):
        if not 1 <= i <= n_msg:
            raise ValueError(f"message index {i} outside 1..{n_msg}")
        if rho.dims != (d_S,):
            raise ValueError(f"prepared state must live on C^{d_S}")
        probs.append(float(np.real(np.trace(rho.matrix @ projectors[i - 1]))))
    mean = float(np.mean(probs)) if probs else 0.0
    k_bound = mean * n_msg
    return {
        "a": a,
        "messages": n_msg,
        "decoding_probabilities": probs,
        "mean_decoding_probability": mean,
        "guessing_baseline": 1.0 / n_msg,
        "implied_K_lower_bound": k_bound,
        "implied_cbit_lower_bound": math.log2(k_bound) if k_bound > 0 else 0.0,
    }
