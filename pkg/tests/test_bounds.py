import math

import numpy as np
import pytest

from densecode.bounds import (
    BoundInputs,
    block_state,
    causality_block_experiment,
    eta,
    fannes_bound,
    ledger_check,
    net_size_bound,
    rsp_cbit_lower_bound,
    rsp_cbit_lower_bound_sharp,
    rsp_ebit_lower_bound,
    sdc_qubit_lower_bound,
    sdc_sum_lower_bound,
)
from densecode.states import DensityOperator, von_neumann_entropy
from conftest import random_density


def test_eta():
    assert eta(0.25) == 0.5
    assert eta(0.0) == 0.0
    with pytest.raises(ValueError):
        eta(1.5)


def test_cbit_bounds():
    inp = BoundInputs(16, 0.25, 1.0)
    assert rsp_cbit_lower_bound(inp).value == 0.0
    assert rsp_cbit_lower_bound(inp).vacuous
    assert rsp_cbit_lower_bound_sharp(inp).value == 2.0
    inp = BoundInputs(1024, 1.0, 1.0)
    assert rsp_cbit_lower_bound(inp).value == 8.0
    assert rsp_cbit_lower_bound_sharp(inp).value == 10.0


def test_ebit_bound_vacuous_small_dim():
    b = rsp_ebit_lower_bound(BoundInputs(16, 0.25, 0.99))
    expected_raw = 4 - 1.8 * 4 - 2 * eta(0.2)
    assert b.value == 0.0 and b.vacuous
    assert abs(b.raw - expected_raw) < 1e-12
    # outside eta's domain the raw value is -inf and the bound is vacuous
    assert rsp_ebit_lower_bound(BoundInputs(16, 0.25, 0.7)).raw == -math.inf


def test_qubit_bound():
    assert sdc_qubit_lower_bound(BoundInputs(16, 0.25, 1.0)).value == 0.0
    for l in (1, 2, 5):
        assert sdc_qubit_lower_bound(BoundInputs(2 ** (2 * l), 1.0, 1.0)).value == l - 1
    assert sdc_sum_lower_bound(BoundInputs(2**10, 1.0, 1.0)).value == 10.0


def test_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(16, 0.01, 1.0)
    with pytest.raises(ValueError):
        BoundInputs(16, 0.5, 0.4)


def test_fannes_example_and_dominance(rng):
    assert fannes_bound(0.25, 8) == 1.25
    with pytest.raises(ValueError):
        fannes_bound(0.3, 4)
    checked = 0
    while checked < 200:
        d = int(rng.integers(2, 17))
        a = random_density(rng, d)
        b = random_density(rng, d)
        t = float(rng.uniform(0, 0.25))
        b = (1 - t / 2) * a + (t / 2) * b   # ||a - b||_1 <= t
        T = np.sum(np.abs(np.linalg.eigvalsh(a - b)))
        if T > 0.25:
            continue
        ds = abs(von_neumann_entropy(DensityOperator(a, (d,))) - von_neumann_entropy(DensityOperator(b, (d,))))
        assert ds <= fannes_bound(T, d) + 1e-12
        checked += 1


def test_net_size():
    assert net_size_bound(2.5, 1, 1) == 2.0


def test_ledger_check():
    assert ledger_check(1, 3, 0, 16, 0.25, 0.9)["ok"]
    assert not ledger_check(0, 0, 0, 1024, 1.0, 1.0)["ok"]
    assert ledger_check(0, 0, 0, 1024, 1.0, 0.3)["applicable"] is False
    assert ledger_check(0, 10, 10, 1024, 1.0, 1.0, rsp=True)["ok"]


def test_causality_blocks():
    d_S, lam = 8, 0.5
    exact = [block_state(d_S, 2, i) for i in range(1, 5)]
    out = causality_block_experiment(d_S, lam, exact, [1, 2, 3, 4])
    assert out["mean_decoding_probability"] == 1.0
    assert out["implied_K_lower_bound"] == 4.0
    mixed = [DensityOperator.maximally_mixed(d_S)] * 4
    out = causality_block_experiment(d_S, lam, mixed, [1, 2, 3, 4])
    assert all(p == 2 / 8 for p in out["decoding_probabilities"])
    with pytest.raises(ValueError):
        causality_block_experiment(d_S, lam, exact, [1, 2, 3, 5])
