import numpy as np
import pytest

from dcflow.config import EnergyOptions
from dcflow.energy import (
    energy_gradient,
    energy_noise,
    energy_value,
    hessian,
    initial_step,
    solve_energy,
    state,
)
from dcflow.exceptions import EnergyOverflow
from dcflow.generate import generate_network
from dcflow.grid import derive, residual
from dcflow.models import Line, Method, Network, Status, VoltageBus, ZipBus
from dcflow.numerics import fd_gradient, fd_jacobian
from dcflow.zbus import solve_zbus

from tests.unit.conftest import TWO_BUS_SOLUTIONS


@pytest.fixture
def rho():
    return np.array([-0.05, 0.1, -0.2])


def test_gradient_matches_finite_differences(feeder_model, rho):
    numeric = fd_gradient(lambda x: energy_value(feeder_model, x), rho)
    assert energy_gradient(feeder_model, rho) == pytest.approx(numeric, abs=1e-5)


def test_gradient_is_power_mismatch(feeder_model, rho):
    v = np.exp(rho / 2)
    assert energy_gradient(feeder_model, rho) == pytest.approx(residual(feeder_model, v))


def test_hessian_matches_finite_differences(feeder_model, rho):
    numeric = fd_jacobian(lambda x: energy_gradient(feeder_model, x), rho)
    assert hessian(feeder_model, rho).H == pytest.approx(numeric, abs=1e-5)


def test_scaled_hessian(feeder_model, rho):
    bundle = hessian(feeder_model, rho)
    assert bundle.H_tilde == pytest.approx(feeder_model.G + np.diag(bundle.K_diag))
    assert bundle.lambda_min_tilde == pytest.approx(np.linalg.eigvalsh(bundle.H_tilde)[0])


def test_energy_overflow(model_a):
    with pytest.raises(EnergyOverflow):
        energy_value(model_a, np.array([1000.0]))


def test_initial_step(model_a):
    # H(0) = c - k/2 = 11 - 4.5
    assert initial_step(model_a, np.zeros(1), 0.9) == pytest.approx(0.9 / 6.5)


def test_state(model_a):
    s = state(model_a, np.zeros(1))
    assert s.value == pytest.approx(11 - 18)
    assert s.grad_norm_inf == pytest.approx(abs(11 - 9 - 1))
    assert s.v == pytest.approx([1.0])


def test_solve_energy_two_bus(two_bus, band):
    case, _, model = two_bus
    result = solve_energy(model, band)
    assert result.method == Method.ENERGY
    assert result.status == Status.CONVERGED
    assert result.v[0] == pytest.approx(TWO_BUS_SOLUTIONS[case], abs=1e-5)
    assert result.residual_inf <= 1e-7


def test_solve_energy_feeder(feeder_model, band):
    result = solve_energy(feeder_model, band, EnergyOptions(record_trace=True))
    assert result.converged
    assert len(result.trace) == len(result.energy_trace) == result.iterations
    assert all(b <= a + 1e-10 for a, b in zip(result.energy_trace, result.energy_trace[1:]))


def test_solve_energy_no_solution_diverges(band):
    network = Network(
        buses=[VoltageBus(id=0, v=1.0), ZipBus(id=1, i0=0.0, p0=5.0, g0=1.0)],
        lines=[Line(from_=0, to=1, g=10.0)],
    )
    result = solve_energy(derive(network), band)
    assert result.status == Status.DIVERGED
    assert "unbounded" in result.message


def test_solve_energy_max_iterations(model_a, band):
    result = solve_energy(model_a, band, EnergyOptions(max_iter=1))
    assert result.status == Status.MAX_ITERATIONS
    assert result.iterations == 1


def test_solve_energy_custom_start(model_a, band):
    result = solve_energy(model_a, band, init=np.array([-0.3]))
    assert result.converged
    assert result.v[0] == pytest.approx(TWO_BUS_SOLUTIONS["a"], abs=1e-5)


def test_energy_noise(model_a):
    # |c| + |2k| at rho = 0
    assert energy_noise(model_a, np.zeros(1)) == pytest.approx(64 * np.finfo(float).eps * 30)


@pytest.mark.parametrize("seed", range(5))
def test_solve_energy_meshed(seed, band):
    model = derive(generate_network("meshed", 10, seed=seed, load_range=(0.0, 0.2)))
    result = solve_energy(model, band, EnergyOptions(record_trace=True))
    assert result.status == Status.CONVERGED
    assert result.iterations < 20_000
    assert all(b <= a + 1e-10 for a, b in zip(result.energy_trace, result.energy_trace[1:]))
    zbus = solve_zbus(model, band)
    if zbus.converged:
        assert result.v == pytest.approx(zbus.v, abs=1e-5)


def test_solve_energy_stalls_on_zero_step(model_a, band):
    result = solve_energy(model_a, band, EnergyOptions(step_scale=1e-30), init=np.array([-0.3]))
    assert result.status == Status.DIVERGED
    assert "stalled" in result.message
    assert result.iterations == 0
