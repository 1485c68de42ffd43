import numpy as np
import pytest

from src.bvp import (
    choose_perturbation,
    distance_matrix,
    independent_residual,
    local_minimizer_check,
    multiplicity_experiment,
    sign_class,
    solve_crossing_c2,
    solve_signed,
    solve_third,
)
from src.energy import I_handle, grad_Phi
from src.exceptions import OnSpectrumBandError, PreconditionError
from src.grid import Field, assembly_for, sine_mode
from src.models.fucik_models import FucikParams, ScenarioTag, Sign, SignClass, SolveConfig
from src.nonlinearity import make_model_nonlinearity
from src.optimize_utils import newton_solve

FAST_SOLVE = SolveConfig(restarts=5, amplitudes=8)


def test_sign_class(domain50):
    sine = sine_mode(domain50, 1)
    assert sign_class(Field.zeros(domain50), 1e-6) is SignClass.trivial
    assert sign_class(sine.scaled(1e-8), 1e-6) is SignClass.trivial
    assert sign_class(sine, 1e-6) is SignClass.positive
    assert sign_class(-sine, 1e-6) is SignClass.negative
    assert sign_class(sine_mode(domain50, 2), 1e-6) is SignClass.sign_changing


def test_independent_residual_agrees_with_the_gradient(domain50, p2):
    f = make_model_nonlinearity(FucikParams(a=45.0, b=45.0), FucikParams(a=5.0, b=5.0), p2, 0.5, 1.5)
    rng = np.random.default_rng(5)
    asm = assembly_for(domain50)
    for scale in (0.2, 1.0, 4.0):
        u = Field(scale * rng.normal(size=domain50.n_interior) * sine_mode(domain50, 1).values, domain50)
        expected = asm.dual_norm(grad_Phi(u, f, p2).values)
        assert independent_residual(u, f, p2) == pytest.approx(expected, rel=1e-8)


def test_distance_matrix_is_symmetric(domain50):
    fields = [sine_mode(domain50, k) for k in (1, 2, 3)]
    matrix = np.array(distance_matrix(fields))
    np.testing.assert_allclose(matrix, matrix.T)
    np.testing.assert_array_equal(np.diag(matrix), 0.0)


def test_coercive_signed_solution(domain50, p2, eig50):
    f = make_model_nonlinearity(FucikParams(a=20.0, b=20.0), FucikParams(a=5.0, b=5.0), p2, 0.5, 1.5)
    positive = solve_signed(f, Sign.positive, domain50, FAST_SOLVE, eig50.eigenvalue)
    assert not positive.trivial
    assert positive.residual <= 1e-6
    assert positive.energy < 0.0
    assert sign_class(positive.field, 1e-6) is SignClass.positive
    assert local_minimizer_check(positive.field, f, p2)
    negative = solve_signed(f, Sign.negative, domain50, FAST_SOLVE, eig50.eigenvalue)
    assert sign_class(negative.field, 1e-6) is SignClass.negative


def test_signed_search_without_crossing_is_trivial(domain50, p2, eig50):
    f = make_model_nonlinearity(FucikParams(a=5.0, b=5.0), FucikParams(a=3.0, b=3.0), p2, 0.5, 1.5)
    result = solve_signed(f, Sign.positive, domain50, FAST_SOLVE, eig50.eigenvalue)
    assert result.trivial
    assert result.attempts == FAST_SOLVE.restarts


def test_band_points_are_refused(domain50, p2, oracle_spectrum):
    near = oracle_spectrum.lambda1 + 0.05
    with pytest.raises(OnSpectrumBandError) as info:
        multiplicity_experiment(
            FucikParams(a=near, b=5.0), FucikParams(a=5.0, b=5.0), oracle_spectrum, domain50, p2, FAST_SOLVE
        )
    assert info.value.status_code == 5


def test_no_scenario_between_equal_regions(domain50, p2, oracle_spectrum):
    report = multiplicity_experiment(
        FucikParams(a=20.0, b=20.0), FucikParams(a=25.0, b=22.0), oracle_spectrum, domain50, p2, FAST_SOLVE
    )
    assert report.scenarios == []
    assert report.solutions == []
    assert report.notes == ["no multiplicity scenario applies"]


def test_third_solution_needs_the_slopes_in_order(domain50, p2, oracle_spectrum):
    swapped = make_model_nonlinearity(FucikParams(a=5.0, b=5.0), FucikParams(a=45.0, b=45.0), p2, 0.5, 1.5)
    with pytest.raises(PreconditionError) as info:
        solve_third(swapped, oracle_spectrum, domain50, FAST_SOLVE)
    assert type(info.value) is PreconditionError
    assert info.value.status_code == 5


def test_perturbation_radii(domain50, p2):
    f = make_model_nonlinearity(FucikParams(a=45.0, b=45.0), FucikParams(a=5.0, b=5.0), p2, 0.5, 1.5)
    pert = choose_perturbation(f, domain50, FAST_SOLVE)
    assert 0.0 < pert.rho < pert.R
    assert pert.R >= 4.0 * FAST_SOLVE.t_large


@pytest.mark.slow
def test_crossing_the_first_eigenvalue_gives_both_signs(domain50, p2, oracle_spectrum, eig50):
    report = multiplicity_experiment(
        FucikParams(a=5.0, b=5.0), FucikParams(a=20.0, b=20.0), oracle_spectrum, domain50, p2, FAST_SOLVE, eig=eig50
    )
    assert ScenarioTag.positive_crossing in report.scenarios
    assert ScenarioTag.negative_crossing in report.scenarios
    assert ScenarioTag.fixed_sign in report.scenarios
    signs = {record.sign for record in report.solutions}
    assert {SignClass.positive, SignClass.negative} <= signs
    assert report.missing == []
    for record in report.solutions:
        assert record.residual <= 1e-6


@pytest.mark.slow
def test_third_solution(domain50, p2, oracle_spectrum, eig50):
    report = multiplicity_experiment(
        FucikParams(a=45.0, b=45.0), FucikParams(a=5.0, b=5.0), oracle_spectrum, domain50, p2, SolveConfig(), eig=eig50
    )
    assert ScenarioTag.third_solution in report.scenarios
    assert report.missing == []
    assert len(report.solutions) >= 3
    signs = [record.sign for record in report.solutions]
    assert SignClass.positive in signs
    assert SignClass.negative in signs
    for record in report.solutions:
        assert record.residual <= 1e-6
        assert record.independent_residual == pytest.approx(record.residual, rel=1e-3, abs=1e-9)
    distances = np.array(report.distances)
    off_diagonal = distances[~np.eye(len(distances), dtype=bool)]
    assert np.all(off_diagonal >= 1e-2)
    assert report.perturbation is not None
    by_method = {record.method: record for record in report.solutions}
    assert by_method["minimize Phi+"].scenario is ScenarioTag.positive_crossing
    assert by_method["minimize Phi-"].scenario is ScenarioTag.negative_crossing
    assert by_method["minimize Phi+"].local_minimizer is True
    assert by_method["minimize Phi-"].local_minimizer is True
    assert report.solutions[-1].scenario is ScenarioTag.third_solution


@pytest.mark.slow
def test_crossing_the_second_curve(domain50, p2, oracle_spectrum, eig50):
    ab0, ab = FucikParams(a=20.0, b=20.0), FucikParams(a=45.0, b=45.0)
    report = multiplicity_experiment(ab0, ab, oracle_spectrum, domain50, p2, FAST_SOLVE, eig=eig50)
    assert report.labels == {"ab0": "between_Cu1_C2", "ab": "above_C2"}
    assert report.scenarios == [ScenarioTag.c2_crossing]
    assert report.missing == []
    assert report.solutions
    for record in report.solutions:
        assert record.scenario is ScenarioTag.c2_crossing
        assert record.residual <= 1e-6
        assert record.sign is not SignClass.trivial
    f = make_model_nonlinearity(ab0, ab, p2, FAST_SOLVE.t_small, FAST_SOLVE.t_large)
    direct = solve_crossing_c2(f, oracle_spectrum, eig50, domain50, FAST_SOLVE)
    assert direct
    assert all(np.max(np.abs(u.values)) > FAST_SOLVE.trivial_tol for u in direct)


def test_newton_counts_accepted_steps(domain50, p2):
    handle = I_handle(FucikParams(a=5.0, b=5.0), p2)
    at_root = newton_solve(handle, Field.zeros(domain50), 1e-10)
    assert at_root.converged
    assert at_root.iterations == 0
    outcome = newton_solve(handle, sine_mode(domain50, 1).scaled(3.0), 1e-10, max_iter=60)
    assert outcome.converged
    assert 1 <= outcome.iterations < 60
    assert np.max(np.abs(outcome.field.values)) < 1e-8
