import numpy as np
import pytest

from src.exceptions import PreconditionError
from src.grid import sign_change_count, sine_mode
from src.minimax import (
    POLISH_VALUE_WINDOW,
    REPARAM_DEFECT_TOL,
    SphereLandscape,
    StringMethod,
    connectivity_check,
    mountain_pass_c,
    path_maximum,
    verify_critical_point,
)
from src.models.fucik_models import ShiftParam
from src.sphere import seed_path

SHIFTED = 3.0 * np.pi**2


@pytest.fixture(scope="module")
def pass_at_zero(eig50, small_minimax):
    return mountain_pass_c(ShiftParam(s=0.0), eig50, small_minimax)


@pytest.fixture(scope="module")
def pass_shifted(eig50, small_minimax):
    return mountain_pass_c(ShiftParam(s=SHIFTED), eig50, small_minimax)


def test_c_at_zero_is_lambda2(pass_at_zero):
    assert pass_at_zero.c == pytest.approx(4.0 * np.pi**2, rel=0.02)
    assert pass_at_zero.converged
    assert pass_at_zero.grad_norm_at_max <= 1e-6


def test_shifted_value_satisfies_the_relation(pass_shifted, oracle):
    c = pass_shifted.c
    assert abs(oracle.fucik_relation(SHIFTED + c, c, 2.0)) <= 0.03
    assert c == pytest.approx(oracle.c_of_s(SHIFTED, 2.0), rel=0.03)


def test_path_keeps_its_endpoints(pass_shifted, eig50):
    beads = pass_shifted.path.beads
    np.testing.assert_array_equal(beads[0].values, eig50.phi.values)
    np.testing.assert_array_equal(beads[-1].values, -eig50.phi.values)
    assert 0 < pass_shifted.argmax_index < len(beads) - 1
    assert pass_shifted.plateau_width >= 1


@pytest.mark.parametrize("fixture", ["pass_at_zero", "pass_shifted"])
def test_sweeps_never_raise_the_max_beyond_reparametrization(request, fixture):
    sweeps = request.getfixturevalue(fixture).sweeps
    assert sweeps
    for previous, current in zip(sweeps, sweeps[1:]):
        assert current.max_value <= previous.max_value + current.reparam_defect + 1e-12 * abs(previous.max_value)
    assert all(0.0 <= record.reparam_defect <= REPARAM_DEFECT_TOL for record in sweeps)


def test_saddle_changes_sign(pass_at_zero, pass_shifted):
    assert sign_change_count(pass_at_zero.argmax_bead.field) >= 1
    assert sign_change_count(pass_shifted.argmax_bead.field) >= 1


@pytest.mark.parametrize("scale", [0.5, 2.0])
def test_critical_point_residual_is_homogeneous(pass_shifted, scale):
    s = ShiftParam(s=SHIFTED)
    base = verify_critical_point(pass_shifted, s)
    assert base <= 1e-6
    assert verify_critical_point(pass_shifted, s, scale) == pytest.approx(scale * base, rel=1e-4, abs=1e-14)


def test_sublevel_above_c_is_connected(pass_at_zero, eig50, small_minimax):
    c = pass_at_zero.c
    b = c + 0.5 * (c - eig50.eigenvalue)
    result = connectivity_check(ShiftParam(s=0.0), b, eig50, small_minimax, result=pass_at_zero)
    assert result.connected is True
    assert result.witness is not None
    assert result.witness_max < b


def test_sublevel_below_c_is_disconnected(pass_at_zero, eig50, small_minimax):
    b = 0.5 * (eig50.eigenvalue + pass_at_zero.c)
    result = connectivity_check(ShiftParam(s=0.0), b, eig50, small_minimax, result=pass_at_zero)
    assert result.connected is False
    assert not result.inconclusive


def test_sublevel_must_contain_the_endpoints(pass_at_zero, eig50, small_minimax):
    with pytest.raises(PreconditionError):
        connectivity_check(ShiftParam(s=0.0), 0.5 * eig50.eigenvalue, eig50, small_minimax, result=pass_at_zero)


def test_path_maximum_reports_plateaus():
    assert path_maximum(np.array([0.0, 2.0, 1.0])) == (1, 1)
    assert path_maximum(np.array([0.0, 3.0, 3.0, 1.0])) == (1, 2)


@pytest.mark.parametrize("s", [5.0, np.pi**2, 10.0])
def test_positive_shifts_resolve_the_saddle(eig50, small_minimax, oracle, s):
    result = mountain_pass_c(ShiftParam(s=s), eig50, small_minimax)
    assert result.c > eig50.eigenvalue
    assert result.converged
    assert result.grad_norm_at_max <= small_minimax.grad_tol
    assert result.c == pytest.approx(oracle.c_of_s(s, 2.0), rel=0.03)
    assert all(record.reparam_defect <= REPARAM_DEFECT_TOL for record in result.sweeps)


def test_sublevel_above_a_shifted_minimax_is_connected(eig50, small_minimax):
    s = ShiftParam(s=10.0)
    result = mountain_pass_c(s, eig50, small_minimax)
    connectivity = connectivity_check(s, result.c + 1.0, eig50, small_minimax, result=result)
    assert connectivity.connected is True
    assert connectivity.witness_max < result.c + 1.0


def test_refinement_stays_near_the_string_maximum(eig50, small_minimax):
    s = ShiftParam(s=10.0)
    landscape = SphereLandscape(s, eig50.phi.domain, eig50.p)
    beads = seed_path(eig50.phi, sine_mode(eig50.phi.domain, 2), small_minimax.beads).beads
    values = np.array([landscape.value(bead) for bead in beads])
    index, _ = path_maximum(values)
    engine = StringMethod(landscape, small_minimax, small_minimax.step_damping / eig50.p.p)
    _, value, residual = engine._refine(beads, values, index)
    assert abs(value - values[index]) <= POLISH_VALUE_WINDOW * max(1.0, abs(values[index]))
    assert residual <= landscape.residual(beads[index])
