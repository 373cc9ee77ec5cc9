import itertools
import math

import numpy as np
import pytest

from densecode.linalg import permute_subsystems
from densecode.memoryless import (
    BlockProtocolConfig,
    CapacityError,
    SourceEnsemble,
    TypicalParams,
    atypical_mass,
    block_state,
    conditional_typical_projector,
    ensemble_entropies,
    rate_pair,
    run_block_protocol,
    sequence_is_typical,
    truncated_block_state,
    typical_mask,
    typical_projector,
    typical_sequences,
)
from densecode.sampling import Seed, haar_state
from densecode.states import DensityOperator, PureState, maximally_entangled


def enumerate_typical(q, n, delta):
    out = []
    for s in itertools.product(range(len(q)), repeat=n):
        counts = [s.count(x) for x in range(len(q))]
        if all(abs(c - n * p) <= delta * math.sqrt(n) * math.sqrt(p * (1 - p)) + 1e-9
               for c, p in zip(counts, q)):
            out.append(s)
    return out


def random_ensemble(seed=0, m=2, d_A1=2, d_S=2, probs=None):
    states = [haar_state((d_A1, d_S), Seed(seed).child(i)) for i in range(m)]
    return SourceEnsemble(states, probs if probs is not None else [1 / m] * m)


def classical_ensemble():
    return SourceEnsemble([PureState(np.kron([1, 0], np.eye(2)[i]), (2, 2)) for i in range(2)],
                          [0.5, 0.5])


def test_fourteen_sequences():
    seqs = typical_sequences([0.5, 0.5], 4, 1.0)
    assert len(seqs) == 14
    assert seqs == enumerate_typical([0.5, 0.5], 4, 1.0)
    assert {s.count(0) for s in seqs} == {1, 2, 3}


@pytest.mark.parametrize("q,n,delta", [([0.7, 0.2, 0.1], 5, 1.5), ([0.25, 0.75], 7, 0.8),
                                       ([0.5, 0.3, 0.2], 4, 3.0)])
def test_typical_sequences_enumeration(q, n, delta):
    assert typical_sequences(q, n, delta) == enumerate_typical(q, n, delta)


def test_typical_projector_rank():
    rho = DensityOperator(np.diag([0.75, 0.25]), (2,))
    p = typical_projector(rho, 4, 1.0)
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert round(np.trace(p).real) == len(enumerate_typical([0.75, 0.25], 4, 1.0))
    # eigenbasis is computational, so the projector is diagonal on the typical strings
    diag = np.zeros(16)
    for s in enumerate_typical([0.75, 0.25], 4, 1.0):
        diag[int("".join(map(str, s)), 2)] = 1
    np.testing.assert_allclose(p, np.diag(diag), atol=1e-12)


def test_degenerate_spectrum_merges_letters():
    rho = DensityOperator(np.diag([0.5, 0.25, 0.25]), (3,))
    p = typical_projector(rho, 3, 1.0)
    # letters: {0} with q=1/2 and {1,2} with q=1/2; typical iff the count of letter 0 is 1 or 2
    expected = sum(1 for s in itertools.product(range(3), repeat=3) if s.count(0) in (1, 2))
    assert expected == 18
    assert round(np.trace(p).real) == expected
    assert np.trace(typical_projector(rho, 3, 0.5)).real == 0.0


def test_conditional_projector_permutation_oracle():
    ens = random_ensemble(1)
    delta = 1.0
    i_seq = (0, 1, 0, 1)
    marg = ens.s_marginals()
    t0 = typical_projector(marg[0], 2, delta)
    t1 = typical_projector(marg[1], 2, delta)
    big = np.kron(t0, t1)                           # positions ordered (0, 2, 1, 3)
    P = np.zeros((16, 16))
    for idx in itertools.product(range(2), repeat=4):
        src = (idx[0], idx[2], idx[1], idx[3])
        P[int("".join(map(str, idx)), 2), int("".join(map(str, src)), 2)] = 1
    np.testing.assert_allclose(conditional_typical_projector(ens, i_seq, delta),
                               P @ big @ P.T, atol=1e-12)


def test_block_state_regrouping():
    ens = random_ensemble(2)
    i_seq = (0, 1, 1)
    phi = block_state(ens, i_seq)
    raw = np.kron(np.kron(ens.states[0].vector, ens.states[1].vector), ens.states[1].vector)
    expected = permute_subsystems(raw, (2, 2) * 3, [0, 2, 4, 1, 3, 5])
    np.testing.assert_allclose(phi.vector, expected, atol=1e-12)
    assert phi.dims == (8, 8)


@pytest.mark.parametrize("n", [4, 6])
def test_truncation_guarantees(n):
    ens = random_ensemble(3)
    params = TypicalParams.from_epsilon(n, 0.1, ens.m, ens.d_S)
    assert abs(params.delta - 2 * math.sqrt(2 * 2 / 0.1)) < 1e-12
    proj = typical_projector(ens.average_s(), n, params.delta)
    for i_seq in itertools.product(range(2), repeat=n):
        if not sequence_is_typical(ens, i_seq, params.delta):
            continue
        blk = truncated_block_state(ens, i_seq, params, proj)
        assert blk.retained_weight >= 1 - params.epsilon
        assert blk.trace_distance <= math.sqrt(8 * 0.1) + 0.2 + 1e-12
    assert atypical_mass(ens, n, params.delta) <= ens.m / params.delta**2


def test_atypical_mass_with_small_delta():
    ens = random_ensemble(4, probs=[0.8, 0.2])
    for n, delta in [(4, 0.5), (6, 1.0), (8, 1.5)]:
        mask_mass = atypical_mass(ens, n, delta)
        oracle = sum(np.prod([[0.8, 0.2][x] for x in s])
                     for s in itertools.product(range(2), repeat=n)
                     if s not in set(enumerate_typical([0.8, 0.2], n, delta)))
        assert abs(mask_mass - oracle) < 1e-12
        assert mask_mass <= 2 / delta**2 or delta < math.sqrt(2)


def test_rate_pair_anchors_and_identities():
    q, e = rate_pair(classical_ensemble())
    assert abs(q - 0.5) < 1e-9 and abs(e - 0.5) < 1e-9
    q, e = rate_pair(SourceEnsemble([maximally_entangled(2)], [1.0]))
    assert abs(q) < 1e-9 and abs(e - 1) < 1e-9
    for seed in range(5):
        ens = random_ensemble(seed, m=3, d_A1=2, d_S=3, probs=[0.5, 0.3, 0.2])
        s, s_bar = ensemble_entropies(ens)
        q, e = rate_pair(ens)
        assert abs((q + e) - s) < 1e-9 and abs((q - e) + s_bar) < 1e-9


def test_capacity_guard():
    with pytest.raises(CapacityError):
        typical_mask([0.5, 0.5], 21, 1.0)


def test_block_protocol_small():
    ens = random_ensemble(5)
    params = TypicalParams.from_epsilon(4, 0.1, 2, 2)
    rep = run_block_protocol(ens, params, BlockProtocolConfig(candidates=2, probes=10), Seed(1))
    s = rep["summary"]
    assert s["blocks"] == 16
    for key in ("retained_weight_ok", "gentle_ok", "lambda_ok", "rank_ok", "atypical_mass_ok",
                "operator_inequality_ok"):
        assert s[key], key
    assert 0 < s["mean_fidelity"] <= 1
    again = run_block_protocol(ens, params, BlockProtocolConfig(candidates=2, probes=10), Seed(1))
    assert again == rep or str(again) == str(rep)


def test_block_protocol_sampled_blocks():
    ens = random_ensemble(6, probs=[0.9, 0.1])
    params = TypicalParams(4, 1.0, 0.1)
    rep = run_block_protocol(ens, params, BlockProtocolConfig(candidates=2, probes=5, blocks=5),
                             Seed(2))
    assert rep["summary"]["blocks"] == 5
    assert all(r["fidelity"] == 0.0 for r in rep["records"] if not r["typical"])
