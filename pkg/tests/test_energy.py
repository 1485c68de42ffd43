import numpy as np
import pytest
from pydantic import ValidationError

from src.check_suite import psi_identity_row
from src.eigen import random_smooth_start
from src.energy import (
    I_handle,
    Phi_handle,
    build_PhiTilde,
    cutoff_inner,
    cutoff_outer,
    eval_I,
    eval_Jtilde,
    eval_Phi,
    eval_PhiPM,
    eval_Psi,
    grad_I,
)
from src.exceptions import ConstraintViolationError, OnSpectrumBandError, PreconditionError
from src.grid import Field, assembly_for, grad_seminorm_energy, sine_mode
from src.models.fucik_models import Exponent, FucikParams, PerturbationSpec, ShiftParam, Sign
from src.nonlinearity import Nonlinearity, make_model_nonlinearity
from src.optimize_utils import gradient_check

AB0 = FucikParams(a=5.0, b=5.0)
AB = FucikParams(a=20.0, b=20.0)


def random_fields(domain, p, count, seed=3):
    rng = np.random.default_rng(seed)
    return [(random_smooth_start(domain, p, rng).field.scaled(rng.uniform(0.2, 3.0)), rng) for _ in range(count)]


@pytest.mark.parametrize("p_value, tol", [(2.0, 1e-5), (1.5, 1e-3), (3.0, 1e-5)])
def test_gradients_match_central_differences(domain50, p_value, tol):
    p = Exponent.of(p_value, domain50)
    f = make_model_nonlinearity(AB0, AB, p, 0.5, 1.5)
    handles = [I_handle(FucikParams(a=20.0, b=5.0), p), Phi_handle(f, p), Phi_handle(f, p, Sign.positive)]
    for u, rng in random_fields(domain50, p, 50):
        direction = Field(rng.normal(size=domain50.n_interior), domain50)
        for handle in handles:
            assert gradient_check(handle, u, direction) <= tol, handle.tag


def test_zero_field(domain50, p2):
    zero = Field.zeros(domain50)
    assert eval_I(zero, AB, p2) == 0.0
    np.testing.assert_array_equal(grad_I(zero, AB, p2).values, 0.0)
    assert eval_Phi(zero, make_model_nonlinearity(AB0, AB, p2, 0.5, 1.5), p2) == 0.0


@pytest.mark.parametrize("t", [0.3, 1.7, 4.0])
def test_homogeneity(domain50, t):
    p = Exponent.of(2.5)
    ab = FucikParams(a=30.0, b=12.0)
    for u, _ in random_fields(domain50, p, 10):
        assert eval_I(u.scaled(t), ab, p) == pytest.approx(t**2.5 * eval_I(u, ab, p), rel=1e-12)
        np.testing.assert_allclose(grad_I(u.scaled(t), ab, p).values, t**1.5 * grad_I(u, ab, p).values, rtol=1e-11,
                                   atol=1e-12)


def test_restriction_identity(domain50, p2):
    rng = np.random.default_rng(11)
    for _ in range(50):
        w = random_smooth_start(domain50, p2, rng)
        b = rng.uniform(0.0, 40.0)
        a = b + rng.uniform(0.0, 40.0)
        assert eval_I(w.field, FucikParams(a=a, b=b), p2) == pytest.approx(
            eval_Jtilde(w, ShiftParam(s=a - b), p2) - b, rel=1e-12, abs=1e-12
        )


def test_jtilde_rejects_fields_off_the_sphere(domain50, p2):
    with pytest.raises(ConstraintViolationError):
        eval_Jtilde(sine_mode(domain50, 1), ShiftParam(s=1.0), p2)


@pytest.mark.parametrize("s", [0.0, 3.0, 50.0])
def test_negative_eigenfunction_value_ignores_the_shift(eig50, s):
    assert eval_Jtilde(-eig50.phi, ShiftParam(s=s), eig50.p) == pytest.approx(eig50.eigenvalue, rel=1e-12)


def test_eigenpair_identities(eig50):
    p = eig50.p
    phi = eig50.phi.field
    assert eval_I(phi, FucikParams(a=eig50.eigenvalue, b=123.0), p) == pytest.approx(0.0, abs=1e-10)
    residual = assembly_for(phi.domain).dual_norm(grad_I(phi, FucikParams(a=eig50.eigenvalue, b=0.0), p).values)
    assert residual <= 1e-8


def test_pure_fucik_phi_equals_i(domain50, p2):
    pure = Nonlinearity.fucik(FucikParams(a=17.0, b=4.0), p2)
    for u, _ in random_fields(domain50, p2, 10):
        assert eval_Phi(u, pure, p2) == pytest.approx(eval_I(u, FucikParams(a=17.0, b=4.0), p2), rel=1e-12)


@pytest.mark.parametrize("p_value", [2.0, 1.5, 3.0])
def test_phi_splits_as_i_plus_psi(domain50, p_value):
    p = Exponent.of(p_value, domain50)
    f = make_model_nonlinearity(AB0, AB, p, 0.5, 1.5)
    for u, _ in random_fields(domain50, p, 20):
        phi = eval_Phi(u, f, p)
        for ab in (AB0, AB):
            assert eval_I(u, ab, p) + eval_Psi(u, f, ab, p) == pytest.approx(phi, rel=1e-12, abs=1e-12)


def test_psi_is_lower_order_at_both_ends(domain50, p2):
    f = make_model_nonlinearity(AB0, AB, p2, 0.5, 1.5)
    small = sine_mode(domain50, 1).scaled(0.4)
    assert eval_Psi(small, f, AB0, p2) == pytest.approx(0.0, abs=1e-15)
    large = sine_mode(domain50, 1) - sine_mode(domain50, 2).scaled(0.5)
    ratios = [
        abs(eval_Psi(large.scaled(t), f, AB, p2)) / grad_seminorm_energy(large.scaled(t), p2) for t in (10.0, 100.0, 1000.0)
    ]
    assert ratios[0] > 0.0
    assert ratios[1] < 0.1 * ratios[0]
    assert ratios[2] < 0.1 * ratios[1]


def test_psi_identity_check_row(domain50, p2):
    row = psi_identity_row(domain50, p2, np.random.default_rng(7))
    assert row.passed
    assert row.value <= 1e-12


def test_truncated_functionals(domain50, p2):
    f = make_model_nonlinearity(AB0, AB, p2, 0.5, 1.5)
    u = sine_mode(domain50, 1).scaled(1.2)
    assert eval_PhiPM(u, f, Sign.positive, p2) == pytest.approx(eval_Phi(u, f, p2), rel=1e-14)
    assert eval_PhiPM(-u, f, Sign.positive, p2) == pytest.approx(grad_seminorm_energy(-u, p2), rel=1e-14)
    assert eval_PhiPM(-u, f, Sign.negative, p2) == pytest.approx(eval_Phi(-u, f, p2), rel=1e-14)


def test_cutoff_profiles():
    for t in [0.0, 0.25, 0.5]:
        assert cutoff_inner(t) == (1.0, 0.0)
    for t in [1.0, 3.0]:
        assert cutoff_inner(t)[0] == 0.0
    for t in [0.0, 0.5, 1.0]:
        assert cutoff_outer(t) == (0.0, 0.0)
    for t in [2.0, 3.0]:
        assert cutoff_outer(t) == (1.0, 0.0)
    ts = np.linspace(0.0, 3.0, 301)
    inner = np.array([cutoff_inner(t)[0] for t in ts])
    outer = np.array([cutoff_outer(t)[0] for t in ts])
    assert np.all(np.diff(inner) <= 0.0) and np.all(np.diff(outer) >= 0.0)
    delta = 1e-7
    for t in [0.6, 0.75, 0.9, 1.2, 1.5, 1.8]:
        profile = cutoff_inner if t < 1.0 else cutoff_outer
        numeric = (profile(t + delta)[0] - profile(t - delta)[0]) / (2.0 * delta)
        assert profile(t)[1] == pytest.approx(numeric, rel=1e-6)


class TestPerturbedFunctional:
    pert = PerturbationSpec(rho=0.5, R=4.0)

    def units(self, domain, p, count=10):
        rng = np.random.default_rng(5)
        result = []
        for _ in range(count):
            u = random_smooth_start(domain, p, rng).field
            result.append(u.scaled(grad_seminorm_energy(u, p) ** (-1.0 / p.p)))
        return result

    def test_exact_shells(self, domain50, p2):
        f = make_model_nonlinearity(AB0, AB, p2, 0.5, 1.5)
        handle = build_PhiTilde(f, AB0, AB, self.pert, p2)
        for unit in self.units(domain50, p2):
            inner = unit.scaled(0.25 * self.pert.rho)
            middle = unit.scaled(0.5 * (self.pert.rho + self.pert.R))
            outer = unit.scaled(3.0 * self.pert.R)
            assert handle.value(inner) == eval_I(inner, AB0, p2)
            assert handle.value(middle) == eval_Phi(middle, f, p2)
            assert handle.value(outer) == eval_I(outer, AB, p2)

    @pytest.mark.parametrize("p_value", [2.0, 1.5])
    def test_gradient_across_blend_shells(self, domain50, p_value):
        p = Exponent.of(p_value, domain50)
        f = make_model_nonlinearity(AB0, AB, p, 0.5, 1.5)
        handle = build_PhiTilde(f, AB0, AB, self.pert, p)
        rng = np.random.default_rng(9)
        for unit in self.units(domain50, p):
            for radius in (0.6 * self.pert.rho, 0.9 * self.pert.rho, 1.3 * self.pert.R, 1.8 * self.pert.R):
                direction = Field(rng.normal(size=domain50.n_interior), domain50)
                assert gradient_check(handle, unit.scaled(radius), direction) <= 1e-4

    def test_radii_must_be_ordered(self, domain50, p2):
        with pytest.raises(ValidationError):
            PerturbationSpec(rho=2.0, R=1.0)
        f = make_model_nonlinearity(AB0, AB, p2, 0.5, 1.5)
        with pytest.raises(PreconditionError):
            build_PhiTilde(f, AB0, AB, PerturbationSpec.model_construct(rho=2.0, R=1.0), p2)

    def test_rejects_slopes_on_the_spectrum(self, p2, oracle_spectrum):
        near = FucikParams(a=oracle_spectrum.lambda1 + 0.05, b=30.0)
        f = make_model_nonlinearity(near, AB, p2, 0.5, 1.5)
        with pytest.raises(OnSpectrumBandError):
            build_PhiTilde(f, near, AB, self.pert, p2, oracle_spectrum)

    def test_perturbation_spec_round_trips_through_json(self):
        assert PerturbationSpec.model_validate_json(self.pert.model_dump_json()) == self.pert
