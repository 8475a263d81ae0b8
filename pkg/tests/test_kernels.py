import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezebell.errors import InvalidInputError
from squeezebell.fock import BELL_STATES, BellInput, BellState, Encoding, dr_circuit, run_circuit
from squeezebell.kernels import (
    Constraint,
    DRCoefficientQuery,
    DRVerdict,
    critical_residual,
    db_from_r,
    dr_output,
    dr_phi_coefficient,
    dr_unambiguous_conditions,
    expand_kernel,
    kernel_amplitudes,
    r_from_db,
    solve_theta2,
    sr_coefficients,
    sr_output,
)
from squeezebell.verify import compare_states, verify_sr_point


def test_db_roundtrip():
    assert db_from_r(0.0) == 0.0
    assert r_from_db(db_from_r(0.7218)) == pytest.approx(0.7218)
    with pytest.raises(InvalidInputError):
        db_from_r(-0.1)


def test_critical_values(r_dr, r_sr):
    assert r_dr == pytest.approx(math.atanh(1 / math.sqrt(3)), abs=1e-12)
    assert abs(critical_residual("DR", r_dr)) < 1e-12
    assert abs(critical_residual("SR", r_sr)) < 1e-12
    assert db_from_r(r_sr) == pytest.approx(6.2696, abs=1e-3)


@pytest.mark.parametrize("constraint", list(Constraint))
@pytest.mark.parametrize("r1,r2", [(0.0, 0.0), (0.3, 0.8), (0.72, 0.72), (1.0, 0.1)])
def test_theta2_zeroes_constraint(constraint, r1, r2):
    th1 = np.linspace(0, 2 * np.pi, 17)
    th2 = solve_theta2(th1, r1, r2, constraint)
    co = sr_coefficients(th1, th2, r1, r2)
    assert np.max(np.abs(co.constraint_value(constraint))) < 1e-12


def test_dr_vacuum_and_two_photon_amplitudes(r_dr):
    amps_p = kernel_amplitudes(dr_output(r_dr, BellState.PHI_PLUS), 4)
    amps_m = kernel_amplitudes(dr_output(r_dr, BellState.PHI_MINUS), 4)
    assert abs(amps_p[0, 0, 0, 0]) == pytest.approx(0.5443, abs=5e-4)
    assert abs(amps_p[2, 0, 0, 0]) < 1e-12
    assert abs(amps_m[2, 0, 0, 0]) == pytest.approx(2 / 9, abs=1e-12)


def test_dr_compact_matches_kernel(r_dr):
    amps = kernel_amplitudes(dr_output(0.4, BellState.PHI_MINUS), 8)
    for idx in [(1, 0, 0, 0), (1, 1, 0, 0), (1, 0, 1, 2), (2, 1, 1, 2)]:
        c = dr_phi_coefficient(DRCoefficientQuery(0.4, idx, -1))
        assert abs(abs(c) - abs(amps[tuple(2 * i for i in idx)])) < 1e-12


def test_dr_coefficient_bad_ops():
    with pytest.raises(InvalidInputError):
        dr_phi_coefficient(DRCoefficientQuery(0.5, (1, 1, 0, 0), 1, sign_ops=(1, -1, 1)))


def test_condition_table_against_simulation(r_dr, dr26):
    # every even pattern the table marks as φ-unique must have zero amplitude for the other φ
    for pattern in dr26.patterns:
        if any(n % 2 for n in pattern) or max(pattern) > 10:
            continue
        verdict = dr_unambiguous_conditions([n // 2 for n in pattern])
        if verdict is DRVerdict.PHI_PLUS:
            assert dr26.probability("phi-", pattern) < 1e-20
        elif verdict is DRVerdict.PHI_MINUS:
            assert dr26.probability("phi+", pattern) < 1e-20
        else:
            assert dr26.probability("phi+", pattern) > 0 and dr26.probability("phi-", pattern) > 0


def test_dr_kernel_matches_fock():
    for b in BELL_STATES:
        oracle = run_circuit(BellInput(Encoding.DR, b), dr_circuit(0.3), 8)
        d, _ = compare_states(oracle, expand_kernel(dr_output(0.3, b), 8), 8)
        assert d < 1e-12


def test_unequal_squeezing_phi_output():
    # the |20> coefficient of φ differs from -|02> once r1 != r2
    assert max(d.value for d in verify_sr_point(0.4, 0.2, 0.9, 8)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 1), st.floats(0, 1), st.sampled_from(list(Constraint)))
def test_sr_kernel_matches_fock(theta1, r1, r2, constraint):
    assert max(d.value for d in verify_sr_point(theta1, r1, r2, 6, constraint)) < 1e-10


def test_sr_output_normalised():
    for b in BELL_STATES:
        amps = kernel_amplitudes(sr_output(0.3, 1.2, 0.5, 0.6, b), 40)
        assert np.sum(np.abs(amps) ** 2) == pytest.approx(1.0, abs=1e-9)
