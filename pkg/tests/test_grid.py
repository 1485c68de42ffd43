import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from pydantic import ValidationError

from src.grid import (
    Field,
    grad_seminorm_energy,
    lp_norm,
    max_norm,
    negative_part,
    positive_part,
    sign_change_count,
    sine_mode,
    splitting_defect,
)
from src.models.fucik_models import Domain, Exponent

SMALL = Domain(n_interior=12)
nodal = arrays(np.float64, SMALL.n_interior, elements=st.floats(-10.0, 10.0, allow_nan=False))


def test_zero_field_has_zero_norms(domain50, p2):
    zero = Field.zeros(domain50)
    assert lp_norm(zero, p2) == 0.0
    assert grad_seminorm_energy(zero, p2) == 0.0


def test_field_rejects_wrong_length_and_nonfinite_values(domain50):
    with pytest.raises(ValueError):
        Field(np.zeros(49), domain50)
    with pytest.raises(ValueError):
        Field(np.full(50, np.nan), domain50)


def test_field_values_are_read_only(domain50):
    u = sine_mode(domain50, 1)
    with pytest.raises(ValueError):
        u.values[0] = 1.0


def test_exponent_requires_regularization_below_two():
    with pytest.raises(ValidationError):
        Exponent(p=1.5, eps_reg=0.0)
    with pytest.raises(ValidationError):
        Exponent(p=1.0)
    assert Exponent.of(1.5).eps_reg > 0.0
    assert Exponent.of(3.0).eps_reg == 0.0


def test_sine_l2_norm(domain200, p2):
    assert lp_norm(sine_mode(domain200, 1), p2) == pytest.approx(np.sqrt(0.5), abs=1e-4)


@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_interior_constant_norm_matches_elementwise_closed_form(p):
    domain = Domain(n_interior=30)
    ones = Field(np.ones(domain.n_interior), domain)
    # interior elements carry 1, the two boundary elements ramp linearly from 0
    exact = (domain.n_interior - 1) * domain.h + 2.0 * domain.h / (p + 1.0)
    assert lp_norm(ones, Exponent.of(p)) ** p == pytest.approx(exact, rel=1e-12)


def test_sine_gradient_energy(domain200, p2):
    assert grad_seminorm_energy(sine_mode(domain200, 1), p2) == pytest.approx(np.pi**2 / 2.0, rel=1e-3)


def test_hat_gradient_energy_at_p3():
    hat = Field(np.array([1.0]), Domain(n_interior=1))
    assert grad_seminorm_energy(hat, Exponent.of(3.0)) == pytest.approx(8.0, rel=1e-14)


def test_sign_parts_example():
    domain = Domain(n_interior=3)
    u = Field(np.array([1.0, -2.0, 3.0]), domain)
    np.testing.assert_array_equal(positive_part(u).values, [1.0, 0.0, 3.0])
    np.testing.assert_array_equal(negative_part(u).values, [0.0, 2.0, 0.0])


@given(nodal)
def test_sign_parts_split_exactly(values):
    u = Field(values, SMALL)
    plus, minus = positive_part(u), negative_part(u)
    np.testing.assert_array_equal(plus.values - minus.values, u.values)
    assert np.all(np.minimum(plus.values, minus.values) == 0.0)


@given(nodal, nodal)
def test_clipping_is_one_lipschitz(first, second):
    u, v = Field(first, SMALL), Field(second, SMALL)
    assert max_norm(positive_part(u) - positive_part(v)) <= max_norm(u - v) + 1e-15


@given(nodal, st.floats(-5.0, 5.0).filter(lambda c: abs(c) > 1e-3), st.sampled_from([2.0, 2.5, 3.0]))
def test_norm_and_energy_homogeneity(values, c, p):
    u = Field(values, SMALL)
    exponent = Exponent.of(p)
    assert lp_norm(u.scaled(c), exponent) == pytest.approx(abs(c) * lp_norm(u, exponent), rel=1e-12, abs=1e-300)
    assert grad_seminorm_energy(u.scaled(c), exponent) == pytest.approx(
        abs(c) ** p * grad_seminorm_energy(u, exponent), rel=1e-12, abs=1e-300
    )


def test_one_signed_field_has_no_splitting_defect(domain50, p2):
    assert splitting_defect(sine_mode(domain50, 1), p2) == 0.0


@pytest.mark.parametrize("n", [25, 50, 100, 200])
@pytest.mark.parametrize("p", [2.0, 3.0])
def test_splitting_defect_bounded_by_sign_changing_elements(n, p):
    domain = Domain(n_interior=n)
    u = Field.interpolate(lambda x: np.sin(3.0 * np.pi * x) + 0.2, domain)
    exponent = Exponent.of(p)
    slopes = np.diff(u.padded()) / domain.h
    bound = sign_change_count(u) * domain.h * np.max(np.abs(slopes)) ** p
    assert 0.0 < splitting_defect(u, exponent) <= bound


def test_sign_change_count(domain50):
    assert sign_change_count(sine_mode(domain50, 3)) == 2
    assert sign_change_count(sine_mode(domain50, 1)) == 0
