import math

import numpy as np
import pytest

from densecode.idcodes import (
    a_side_support_invariance,
    build_id_code,
    exact_preparation_error,
    id_code_via_sdc,
    id_error,
    sample_id_errors,
)
from densecode.protocol import plan_resources, search_coupling_unitary
from densecode.sampling import Seed, haar_isometry
from densecode.states import PureState


def rand_state(d, seed):
    return PureState(haar_isometry(d, 1, seed)[:, 0], (d,))


def test_isometric_anchor_has_zero_error():
    code = build_id_code(16, 1, 3, Seed(0))
    errs = sample_id_errors(code, 100, Seed(1))
    assert errs["max_error"] <= 1e-9


def test_encoding_rank_and_trace():
    code = build_id_code(16, 2, 3, Seed(2))
    np.testing.assert_allclose(code.V.conj().T @ code.V, np.eye(3), atol=1e-12)
    for k in range(10):
        rho = code.encode(rand_state(3, Seed(3).child(k)))
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.matrix_rank(rho, tol=1e-10) <= 2


def test_sampled_errors_reported():
    code = build_id_code(16, 2, 3, Seed(4))
    errs = sample_id_errors(code, 200, Seed(5))
    assert len(errs["errors"]) == 200
    assert 0 <= errs["mean_error"] <= errs["max_error"] <= 1


def test_net_decoder_uses_nearest_point():
    code = build_id_code(8, 2, 2, Seed(6), net_size=30)
    psi = rand_state(2, Seed(7))
    best = code.decoder_point(psi)
    overlaps = np.abs(code.net.conj() @ psi.vector)
    assert abs(abs(np.vdot(best.vector, psi.vector)) - overlaps.max()) < 1e-12
    # a net point itself is decoded by its own support
    phi = PureState.normalized(code.net[3], (2,))
    assert id_error(code, phi, phi) < 1e-9


def test_exact_purification_matches_direct_error():
    code = build_id_code(16, 2, 3, Seed(8))
    phi, psi = rand_state(3, Seed(9)), rand_state(3, Seed(10))
    assert abs(exact_preparation_error(code, phi, psi) - id_error(code, phi, psi)) < 1e-12


def test_ledger_arithmetic():
    for d, a in [(16, 2), (16, 4), (64, 8)]:
        plan = plan_resources(d, 1 / a, 0.5)
        assert plan.ebits_leading == 0.5 * (math.log2(d) + math.log2(a))
        assert plan.qubits_leading == 0.5 * (math.log2(d) - math.log2(a))


@pytest.mark.parametrize("a,d_C", [(2, 3), (4, 2)])
def test_end_to_end_within_allowance(a, d_C):
    code = build_id_code(16, a, d_C, Seed(11))
    plan = plan_resources(16, 1 / a, 0.5)
    U = search_coupling_unitary(plan, 5, 20, Seed(12))
    for k in range(10):
        r = id_code_via_sdc(code, rand_state(d_C, Seed(13).child(k)), plan, U,
                            rand_state(d_C, Seed(14).child(k)))
        assert r["end_to_end_error"] <= r["error_allowance"] + 1e-9
        assert 0 <= r["preparation_fidelity"] <= 1


def test_sdc_requires_matching_plan():
    code = build_id_code(16, 2, 3, Seed(0))
    plan = plan_resources(8, 0.5, 0.5)
    U = search_coupling_unitary(plan, 1, 1, Seed(0))
    with pytest.raises(ValueError):
        id_code_via_sdc(code, rand_state(3, Seed(1)), plan, U)


def test_support_invariance():
    for k in range(20):
        assert a_side_support_invariance(16, 2 + k % 3, Seed(15).child(k)) < 1e-9
    with pytest.raises(ValueError):
        a_side_support_invariance(4, 4, Seed(0))
