import numpy as np
import pytest

from src.eigen import compute_lambda1, compute_lambda2, random_smooth_start, spectral_gap_probe
from src.energy import eval_J, grad_I
from src.grid import assembly_for, lp_norm, sine_mode
from src.models.fucik_models import Domain, Exponent, FucikParams, ShiftParam
from src.sphere import normalize


def test_lambda1_matches_pi_squared(eig200, oracle, domain200):
    assert eig200.eigenvalue == pytest.approx(np.pi**2, rel=5e-3)
    discrete = oracle.discrete_eigenvalues(domain200, 1)[0]
    assert eig200.eigenvalue == pytest.approx(discrete, rel=1e-3)
    assert eig200.residual <= 1e-8


def test_first_eigenfunction_is_the_sine(eig200, domain200, p2):
    sine = normalize(sine_mode(domain200, 1), p2)
    assert np.max(np.abs(eig200.phi.values - sine.values)) <= 1e-3
    assert np.all(eig200.phi.values > 0.0)
    assert lp_norm(eig200.phi.field, p2) == pytest.approx(1.0, abs=1e-10)


def test_rayleigh_bound(eig50, domain50, p2):
    rng = np.random.default_rng(99)
    zero = ShiftParam(s=0.0)
    for _ in range(100):
        w = random_smooth_start(domain50, p2, rng)
        assert eval_J(w.field, zero, p2) >= eig50.eigenvalue * (1.0 - 1e-9)


@pytest.mark.parametrize("p_value", [2.0, 3.0])
@pytest.mark.parametrize("t", [0.5, 3.0])
def test_residual_is_homogeneous(domain50, p_value, t):
    p = Exponent.of(p_value)
    asm = assembly_for(domain50)
    ab = FucikParams(a=20.0, b=5.0)
    field = sine_mode(domain50, 1).scaled(2.0) - sine_mode(domain50, 2) + sine_mode(domain50, 5).scaled(0.3)
    base = asm.dual_norm(grad_I(field, ab, p).values)
    scaled = asm.dual_norm(grad_I(field.scaled(t), ab, p).values)
    assert base > 1e-2
    assert scaled == pytest.approx(t ** (p_value - 1.0) * base, rel=1e-10)


@pytest.mark.slow
def test_lambda2_is_four_pi_squared(eig200, domain200, p2, small_minimax):
    lambda2 = compute_lambda2(domain200, p2, eig=eig200, cfg=small_minimax)
    assert lambda2 == pytest.approx(4.0 * np.pi**2, rel=0.02)


def test_lambda1_for_p_below_two(oracle):
    domain = Domain(n_interior=200)
    p = Exponent.of(1.5, domain)
    eig = compute_lambda1(domain, p)
    assert eig.eigenvalue == pytest.approx(oracle.lambda1_1d(1.5), rel=0.05)
    assert eig.eigenvalue == pytest.approx(oracle.shooting_eigenvalue(1.5), rel=0.05)


@pytest.mark.parametrize("p_value", [3.0, 4.0])
def test_lambda1_for_p_above_two(oracle, p_value):
    domain = Domain(n_interior=100)
    eig = compute_lambda1(domain, Exponent.of(p_value))
    assert eig.eigenvalue == pytest.approx(oracle.lambda1_1d(p_value), rel=0.02)


def test_lambda1_converges_at_second_order():
    p = Exponent.of(2.0)
    values = [compute_lambda1(Domain(n_interior=intervals - 1), p).eigenvalue for intervals in (25, 50, 100)]
    coarse, fine = abs(values[0] - values[1]), abs(values[1] - values[2])
    assert coarse >= 3.0 * fine
    assert values[2] == pytest.approx(np.pi**2, rel=1e-3)


def test_lambda1_on_a_shifted_interval(oracle):
    domain = Domain(left=-1.0, right=1.0, n_interior=100)
    eig = compute_lambda1(domain, Exponent.of(2.0))
    assert eig.eigenvalue == pytest.approx(oracle.lambda1_1d(2.0, length=2.0), rel=5e-3)


@pytest.mark.slow
def test_random_descents_find_nothing_in_the_gap(eig50):
    result = spectral_gap_probe(eig50, ShiftParam(s=10.0), runs=50, seed=3, max_iter=3000)
    assert result.runs == 50
    assert result.violations == []


@pytest.mark.slow
def test_lambda2_for_p_below_two(oracle, small_minimax):
    domain = Domain(n_interior=100)
    p = Exponent.of(1.5, domain)
    lambda2 = compute_lambda2(domain, p, eig=compute_lambda1(domain, p), cfg=small_minimax)
    assert lambda2 == pytest.approx(oracle.lambda2_1d(1.5), rel=0.05)


def test_descent_trace_is_recorded(domain50, p2):
    eig = compute_lambda1(domain50, p2, log_every=5)
    assert eig.history
    iterations = [entry[0] for entry in eig.history]
    assert iterations[0] == 0
    assert all(later - earlier == 5 for earlier, later in zip(iterations, iterations[1:]))
    assert all(len(entry) == 3 for entry in eig.history)
    assert "history" not in eig.model_dump()
