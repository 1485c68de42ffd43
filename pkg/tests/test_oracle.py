import numpy as np
import pytest

from src.models.fucik_models import Domain


def test_pi_p_at_two_is_pi(oracle):
    assert oracle.pi_p(2.0) == pytest.approx(np.pi, rel=1e-15)
    assert oracle.lambda1_1d(2.0) == pytest.approx(np.pi**2, rel=1e-14)
    assert oracle.lambda2_1d(2.0) == pytest.approx(4.0 * np.pi**2, rel=1e-14)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_eigenvalues_scale_with_length(oracle, p):
    assert oracle.eigenvalue_1d(p, 1, 2.0) == pytest.approx(oracle.eigenvalue_1d(p, 1, 1.0) / 2.0**p, rel=1e-13)
    assert oracle.eigenvalue_1d(p, 2) == pytest.approx(2.0**p * oracle.eigenvalue_1d(p, 1), rel=1e-13)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_shooting_matches_the_closed_form(oracle, p):
    assert oracle.shooting_eigenvalue(p, 1) == pytest.approx(oracle.lambda1_1d(p), rel=1e-6)
    assert oracle.shooting_eigenvalue(p, 2) == pytest.approx(oracle.lambda2_1d(p), rel=1e-6)


def test_relation_holds_on_the_closed_form_curve(oracle):
    for s in (0.0, 5.0, 3.0 * np.pi**2, 100.0):
        c = oracle.c_of_s(s, 2.0)
        assert np.pi**2 < c <= 4.0 * np.pi**2 * (1.0 + 1e-12)
        assert abs(oracle.fucik_relation(s + c, c, 2.0)) <= 1e-10


def test_relation_at_a_known_point(oracle):
    assert oracle.fucik_relation(4.0 * np.pi**2, 4.0 * np.pi**2, 2.0) == pytest.approx(0.0, abs=1e-14)
    assert oracle.fucik_relation(np.pi**2 * 9.0, np.pi**2 * 2.25, 2.0) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("s", [2.0, 20.0])
def test_shooting_curve_matches_the_relation(oracle, s):
    assert oracle.shooting_c_of_s(s, 2.0) == pytest.approx(oracle.c_of_s(s, 2.0), rel=1e-6)


def test_c_of_s_is_decreasing(oracle):
    values = [oracle.c_of_s(s, 2.5) for s in (0.0, 1.0, 5.0, 20.0, 80.0)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))


def test_shoot_counts_interior_zeros(oracle):
    _, zeros = oracle.shoot(4.0 * np.pi**2 - 1.0, 4.0 * np.pi**2 - 1.0, 2.0)
    assert zeros == 1
    _, zeros = oracle.shoot(1.0, 1.0, 2.0)
    assert zeros == 0


def test_spectrum_data_layout(oracle_spectrum):
    assert oracle_spectrum.curve[0].s == 0.0
    assert oracle_spectrum.lambda2 == pytest.approx(4.0 * np.pi**2)
    for point in oracle_spectrum.curve:
        assert point.a == pytest.approx(point.s + point.c)
        assert point.b == point.c


def test_discrete_eigenvalues_converge(oracle):
    coarse = oracle.discrete_eigenvalues(Domain(n_interior=50))
    fine = oracle.discrete_eigenvalues(Domain(n_interior=200))
    exact = np.array([np.pi**2, 4.0 * np.pi**2])
    assert np.all(np.abs(fine - exact) < np.abs(coarse - exact))
    np.testing.assert_allclose(fine, exact, rtol=1e-3)
