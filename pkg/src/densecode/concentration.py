"""Entropy concentration for Haar-rotated projector states.

A rank-``r`` state proportional to a projector on ``A x B`` is rotated by a
Haar unitary and reduced to ``B``; its entropy deficit ``log d_B - S`` is
small with overwhelming probability. This module evaluates the closed-form
tail bound, samples deficits, and checks the cyclic-shift identity that
writes ``Pi/r`` as an average of rotated copies of a random ``tau``.

All logarithms and exponentials are base 2.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import HilbertSpace, as_dims, partial_trace, trace_norm
from .sampling import Seed, haar_isometry, haar_state
from .states import entropy_of_spectrum

#: Concentration constant, 1 / (8 pi^2 ln 2).
CONCENTRATION_C = 1.0 / (8.0 * math.pi**2 * math.log(2.0))

BOUND_FORMS = ("statement", "proof")
HIST_BIN = 0.01


def lemma_beta(r: int, d_A: int, d_B: int) -> float:
    """Mean-entropy shift ``d_B / (r d_A ln 2)`` in bits."""
    if min(r, d_A, d_B) < 1:
        raise ValueError("r, d_A, d_B must be >= 1")
    return d_B / (r * d_A * math.log(2.0))


def lemma_tail_bound(r: int, d_A: int, d_B: int, alpha: float, form: str = "statement") -> float:
    """Upper bound on Pr[S < log d_B - alpha - beta].

    ``form="statement"`` gives ``12 r 2^(-r d_A d_B alpha^2 C / (log d_B)^2)``;
    ``form="proof"`` uses ``C/4`` in the exponent, the weaker value the
    derivation actually reaches. ``form="rank_one"`` is the single-state bound
    ``2^(-(d_A d_B - 1) alpha^2 C / (log d_B)^2)`` and requires ``r == 1``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if min(r, d_A, d_B) < 1:
        raise ValueError("r, d_A, d_B must be >= 1")
    logb2 = math.log2(d_B) ** 2
    if logb2 == 0:
        return 0.0  # d_B = 1: entropy deficit is identically zero
    if form == "rank_one":
        if r != 1:
            raise ValueError("rank_one form requires r == 1")
        return 2.0 ** (-(d_A * d_B - 1) * alpha**2 * CONCENTRATION_C / logb2)
    if form == "statement":
        c = CONCENTRATION_C
    elif form == "proof":
        c = CONCENTRATION_C / 4
    else:
        raise ValueError(f"unknown bound form {form!r}")
    return 12.0 * r * 2.0 ** (-r * d_A * d_B * alpha**2 * c / logb2)


@dataclass(frozen=True)
class ConcentrationConfig:
    r: int
    d_A: int
    d_B: int
    alpha: float
    trials: int
    seed: int = 0
    bound_form: str = "statement"

    def __post_init__(self):
        if not 3 <= self.d_B <= self.d_A:
            raise ValueError(f"need 3 <= d_B <= d_A, got d_A={self.d_A}, d_B={self.d_B}")
        if self.r < 1 or self.trials < 1:
            raise ValueError("r and trials must be >= 1")
        if self.r > self.d_A * self.d_B:
            raise ValueError(f"rank r={self.r} exceeds d_A*d_B={self.d_A * self.d_B}")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.bound_form not in BOUND_FORMS:
            raise ValueError(f"bound_form must be one of {BOUND_FORMS}")


@dataclass
class ConcentrationReport:
    config: ConcentrationConfig
    deficits: list[float]
    beta: float
    bound: float
    violation_count: int
    bound_form: str
    rank_one_bound: float | None = None
    histogram: dict[str, int] = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return self.config.alpha + self.beta

    @property
    def mean_deficit(self) -> float:
        return float(np.mean(self.deficits))

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "records": [{"trial": i, "deficit": d} for i, d in enumerate(self.deficits)],
            "summary": {
                "beta": self.beta,
                "threshold": self.threshold,
                "bound": self.bound,
                "bound_form": self.bound_form,
                "rank_one_bound": self.rank_one_bound,
                "expected_violations_bound": self.bound * len(self.deficits),
                "violation_count": self.violation_count,
                "mean_deficit": self.mean_deficit,
                "max_deficit": float(np.max(self.deficits)),
                "histogram_bin_bits": HIST_BIN,
                "histogram": self.histogram,
            },
        }


def deficit_trial(r: int, d_A: int, d_B: int, seed: Seed) -> float:
    """One sample of ``log d_B - S(Tr_A U (Pi_r / r) U^dag)``.

    With ``Pi_r`` the projector on the first ``r`` basis vectors, ``U Pi_r U^dag``
    only involves the first ``r`` columns of ``U``.
    """
    cols = haar_isometry(d_A * d_B, r, seed)  # (d_A d_B) x r, rows ordered (a, b)
    y = cols.reshape(d_A, d_B, r).transpose(1, 0, 2).reshape(d_B, d_A * r)
    rho_b = (y @ y.conj().T) / r
    s = entropy_of_spectrum(np.linalg.eigvalsh(rho_b))
    return max(0.0, math.log2(d_B) - s)


def _histogram(values, width=HIST_BIN) -> dict[str, int]:
    bins: dict[str, int] = {}
    for v in values:
        key = f"{math.floor(v / width + 1e-9) * width:.2f}"
        bins[key] = bins.get(key, 0) + 1
    return dict(sorted(bins.items(), key=lambda kv: float(kv[0])))


def summarize(config: ConcentrationConfig, deficits) -> ConcentrationReport:
    beta = lemma_beta(config.r, config.d_A, config.d_B)
    threshold = config.alpha + beta
    deficits = [float(d) for d in deficits]
    violations = sum(1 for d in deficits if d > threshold)
    bound = lemma_tail_bound(config.r, config.d_A, config.d_B, config.alpha, config.bound_form) \
        if config.alpha > 0 else 1.0
    rank_one = None
    if config.r == 1 and config.alpha > 0:
        rank_one = lemma_tail_bound(1, config.d_A, config.d_B, config.alpha, "rank_one")
    return ConcentrationReport(config, deficits, beta, bound, violations, config.bound_form,
                               rank_one, _histogram(deficits))


def sample_entropy_deficits(config: ConcentrationConfig, map_fn=map) -> ConcentrationReport:
    """Sample ``config.trials`` deficits; trial ``i`` uses stream ``i`` of ``config.seed``.

    ``map_fn`` may be any order-preserving parallel map.
    """
    root = Seed(config.seed)
    args = [(config.r, config.d_A, config.d_B, root.stream(i)) for i in range(config.trials)]
    deficits = list(map_fn(_deficit_star, args))
    return summarize(config, deficits)


def _deficit_star(args):
    return deficit_trial(*args)


def cyclic_decomposition_check(r: int, dims, seed: Seed, max_retries: int = 16) -> float:
    """Largest reconstruction error of ``Pi/r = (1/r) sum_k s^k tau s^-k`` (trace norm).

    ``tau`` is the AB-marginal of a Haar state on ``A x B x R`` with ``dim R = r``
    and ``s`` cyclically permutes its ``r`` support eigenvectors.
    """
    dims = as_dims(dims)
    d = HilbertSpace(dims).total_dim
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= {d}, got {r}")
    for attempt in range(max_retries):
        psi = haar_state((d, r), seed.child(attempt))
        tau = partial_trace(psi.vector, (d, r), [0])
        w, v = np.linalg.eigh(tau)
        w, v = w[::-1], v[:, ::-1]
        top = w[:r]
        gaps = np.abs(np.diff(top)) if r > 1 else np.array([1.0])
        if np.min(gaps) > 1e-12 and top[-1] > 1e-12:
            break
    else:
        raise RuntimeError("degenerate spectrum on every retry")
    e = v[:, :r]
    proj = e @ e.conj().T
    shift = np.roll(e, -1, axis=1) @ e.conj().T + np.eye(d) - proj  # e_j -> e_{j+1 mod r}
    acc = np.zeros_like(tau)
    s_k = np.eye(d, dtype=complex)
    for _ in range(r):
        acc += s_k @ tau @ s_k.conj().T
        s_k = shift @ s_k
    return trace_norm(proj / r - acc / r)
