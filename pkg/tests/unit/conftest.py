import logging

import pytest

from dcflow.config import AnalysisConfig, VoltageBand
from dcflow.grid import derive
from dcflow.models import Network, load_case, two_bus_case

logger = logging.getLogger(__name__)

# larger roots of 11 v^2 - k v + p = 0
TWO_BUS_SOLUTIONS = {
    "a": (9 + 125**0.5) / 22,
    "b": 1.0,
    "c": (2 / 11) ** 0.5,
    "d": (-10 + 320**0.5) / 22,
}


@pytest.fixture
def band():
    return VoltageBand(v_min=0.9, v_max=1.1)


@pytest.fixture
def analysis(band):
    return AnalysisConfig(band=band)


@pytest.fixture(params=["a", "b", "c", "d"])
def two_bus(request):
    """Case name, network and derived model of each two-bus loading."""
    network = two_bus_case(request.param)
    return request.param, network, derive(network)


@pytest.fixture
def model_a():
    return derive(two_bus_case("a"))


@pytest.fixture
def model_b():
    return derive(two_bus_case("b"))


@pytest.fixture
def model_c():
    return derive(two_bus_case("c"))


@pytest.fixture
def model_d():
    return derive(two_bus_case("d"))


@pytest.fixture
def feeder(shared_datadir) -> Network:
    return load_case(shared_datadir / "feeder4.json")


@pytest.fixture
def feeder_model(feeder):
    return derive(feeder)
