import logging
import math

import numpy as np
import pytest

from dcflow.config import MonotoneOptions
from dcflow.exceptions import NonPositiveInput
from dcflow.generate import generate_network
from dcflow.grid import derive, residual, residual_tolerance
from dcflow.models import Line, Method, Network, Status, VoltageBus, ZipBus
from dcflow.monotone import is_high_voltage, monotone_map, solve_monotone
from dcflow.oracles import oracle_multistart

from tests.unit.conftest import TWO_BUS_SOLUTIONS


def test_monotone_map_fixed_point(model_a):
    u = np.array([TWO_BUS_SOLUTIONS["a"] ** 2])
    assert monotone_map(model_a, u) == pytest.approx(u, abs=1e-5)


def test_monotone_map_descends_from_band_top(model_b, band):
    u = np.array([band.u_hi])
    assert monotone_map(model_b, u)[0] < band.u_hi


def test_monotone_map_rejects_non_positive(model_a):
    with pytest.raises(NonPositiveInput):
        monotone_map(model_a, np.array([0.0]))


@pytest.mark.parametrize("fixture", ["model_a", "model_b"])
def test_solve_monotone_converges(fixture, band, request):
    model = request.getfixturevalue(fixture)
    case = fixture[-1]
    result = solve_monotone(model, band)
    assert result.method == Method.MONOTONE
    assert result.status == Status.CONVERGED
    assert result.v[0] == pytest.approx(TWO_BUS_SOLUTIONS[case], abs=1e-5)
    assert result.residual_inf < 1e-5
    assert result.bus_ids == [1]


def test_solve_monotone_leaves_band(model_c, band):
    result = solve_monotone(model_c, band)
    assert result.status == Status.LEFT_BAND
    assert result.iterations == 1
    assert result.v[0] == pytest.approx(math.sqrt(2 / 11))


def test_solve_monotone_outside_band_allowed(model_c, band):
    result = solve_monotone(model_c, band, MonotoneOptions(stay_in_band=False))
    assert result.status == Status.CONVERGED
    assert result.v[0] == pytest.approx(math.sqrt(2 / 11))


def test_solve_monotone_domain_error(model_d, band):
    result = solve_monotone(model_d, band)
    assert result.status == Status.DOMAIN_ERROR
    assert result.iterations == 0
    assert result.v[0] == pytest.approx(band.v_max)


def test_solve_monotone_diverges(band):
    network = Network(
        buses=[VoltageBus(id=0, v=1.0), ZipBus(id=1, i0=1.0, p0=-200.0, g0=1.0)],
        lines=[Line(from_=0, to=1, g=10.0)],
    )
    result = solve_monotone(derive(network), band)
    assert result.status == Status.DIVERGED
    assert result.iterations == 1


def test_solve_monotone_max_iterations(model_a, band):
    result = solve_monotone(model_a, band, MonotoneOptions(max_iter=2))
    assert result.status == Status.MAX_ITERATIONS
    assert result.iterations == 2


def test_solve_monotone_trace(model_a, band):
    result = solve_monotone(model_a, band, MonotoneOptions(record_trace=True))
    assert len(result.trace) == result.iterations
    assert result.trace[-1] <= 1e-6
    assert all(later < earlier for earlier, later in zip(result.trace, result.trace[1:]))


def test_solve_monotone_custom_start(model_a, band, caplog):
    with caplog.at_level(logging.WARNING, logger="dcflow.monotone"):
        result = solve_monotone(model_a, band, init=np.array([1.0]))
    assert result.converged
    assert "not covered" in caplog.text


def test_solve_monotone_feeder_high_voltage(feeder_model, band):
    result = solve_monotone(feeder_model, band)
    assert result.converged
    bound = residual_tolerance(feeder_model, 1e-6)
    assert np.abs(residual(feeder_model, result.v)).max() <= bound
    roots = oracle_multistart(feeder_model, starts=20, seed=0)
    assert is_high_voltage(result.v, roots, tol=1e-4)


def test_is_high_voltage():
    high = np.array([1.0, 0.9])
    assert is_high_voltage(high, [np.array([0.5, 0.4]), np.array([1.0, 0.2])])
    assert not is_high_voltage(high, [np.array([1.1, 0.1])])
    assert is_high_voltage(high, [])


@pytest.mark.parametrize("seed", range(30))
def test_solve_monotone_meshed_residual(seed, band):
    model = derive(generate_network("meshed", 10, seed=seed, load_range=(0.0, 0.2)))
    result = solve_monotone(model, band)
    assert result.converged
    assert result.residual_inf <= 10 * 1e-6 * max(1.0, np.abs(model.p).max())
    assert result.residual_inf == pytest.approx(np.abs(residual(model, result.v)).max())
