"""Network validation, derived constants and the power-flow residual."""

from __future__ import annotations

import logging

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dcflow.exceptions import (
    DisconnectedGraph,
    DuplicateLine,
    NonPositiveConductance,
    NonPositiveVoltage,
    NoVoltageBus,
    NoZipBus,
    SelfLoop,
    SingularGError,
    UnknownBus,
    ValidationException,
)
from dcflow.models import Network, VoltageBus, ZipBus
from dcflow.numerics import min_eigenvalue_sym, spd_inverse

logger = logging.getLogger(__name__)

INVERSE_TOL = 1e-10
RESIDUAL_FACTOR = 10.0


class DerivedModel(BaseModel):
    """Constants of the power-flow equations over the ZIP buses.

    Arrays are read-only; the model can be shared between concurrent solves.
    """

    bus_ids: list[int] = Field(description="Network ids of the ZIP buses, in order.")
    c: np.ndarray = Field(description="Line plus shunt conductance per bus.")
    k: np.ndarray = Field(description="Boundary current minus constant current.")
    gn: np.ndarray = Field(description="Total line conductance per bus.")
    p: np.ndarray = Field(description="Constant-power components.")
    i0: np.ndarray = Field(description="Constant-current components.")
    g0: np.ndarray = Field(description="Constant-conductance components.")
    boundary_current: np.ndarray = Field(
        description="Current drawn from constant-voltage neighbours at zero ZIP voltage."
    )
    W: np.ndarray = Field(description="Line conductances among ZIP buses.")
    G: np.ndarray = Field(description="Reduced Laplacian.")
    Z: np.ndarray = Field(description="Inverse of the reduced Laplacian.")
    d: np.ndarray = Field(description="Ball center Z k.")
    lambda_min_G: float = Field(description="Smallest eigenvalue of G.")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def P(self) -> int:
        return len(self.bus_ids)

    def bus_id(self, index: int) -> int:
        """Network id of the ZIP bus at a position of the derived vectors."""
        return self.bus_ids[index]


def validate(network: Network) -> None:
    """Check the structural invariants of a network.

    :param network: The network to check.
    :raises ValidationException: Naming the offending element.
    """
    ids = [bus.id for bus in network.buses]
    if sorted(ids) != list(range(len(ids))):
        raise ValidationException(
            f"Bus ids must be unique and dense from 0, got {sorted(ids)}"
        )
    by_id = {bus.id: bus for bus in network.buses}
    if not network.voltage_buses:
        raise NoVoltageBus("Network has no constant-voltage bus")
    if not isinstance(by_id[0], VoltageBus):
        raise NoVoltageBus("Slack bus 0 must be a constant-voltage bus")
    if not network.zip_buses:
        raise NoZipBus("Network has no ZIP bus to solve for")

    seen: dict[tuple[int, int], int] = {}
    for index, line in enumerate(network.lines):
        for end in (line.from_, line.to):
            if end not in by_id:
                raise UnknownBus(f"Line {index} references unknown bus {end}")
        if line.from_ == line.to:
            raise SelfLoop(f"Line {index} connects bus {line.to} to itself")
        if not line.g > 0:
            raise NonPositiveConductance(
                f"Line {index} ({line.from_}-{line.to}) has conductance {line.g}"
            )
        if line.pair in seen:
            raise DuplicateLine(
                f"Lines {seen[line.pair]} and {index} both join buses {line.pair}"
            )
        seen[line.pair] = index

    graph = nx.Graph()
    graph.add_nodes_from(ids)
    graph.add_edges_from(line.pair for line in network.lines)
    if not nx.is_connected(graph):
        reached = nx.node_connected_component(graph, 0)
        unreached = sorted(set(ids) - reached)
        raise DisconnectedGraph(f"Buses {unreached} are not connected to the slack bus")


def conductance_matrix(network: Network) -> np.ndarray:
    """Dense symmetric matrix of line conductances indexed by bus id."""
    size = len(network.buses)
    a = np.zeros((size, size))
    for line in network.lines:
        a[line.from_, line.to] = line.g
        a[line.to, line.from_] = line.g
    return a


def derive(network: Network) -> DerivedModel:
    """Compute the constants of the power-flow equations.

    :param network: A network that passed ``validate``.
    :return: The derived model.
    """
    a = conductance_matrix(network)
    voltage = network.voltage_buses
    zips: list[ZipBus] = network.zip_buses
    v_idx = np.array([bus.id for bus in voltage])
    p_idx = np.array([bus.id for bus in zips])
    v_fixed = np.array([bus.v for bus in voltage])

    g0 = np.array([bus.g0 for bus in zips])
    i0 = np.array([bus.i0 for bus in zips])
    p = np.array([bus.p0 for bus in zips])

    gn = a[p_idx].sum(axis=1)
    c = gn + g0
    boundary_current = a[np.ix_(p_idx, v_idx)] @ v_fixed
    k = boundary_current - i0
    W = a[np.ix_(p_idx, p_idx)]
    G = np.diag(c) - W

    Z = spd_inverse(G)
    err = np.max(np.abs(G @ Z - np.eye(len(zips))))
    if err >= INVERSE_TOL:
        raise SingularGError(f"G Z deviates from identity by {err:.3e}")
    d = Z @ k
    if not np.all(np.isfinite(d)):
        raise SingularGError("Ball center is not finite")

    arrays = {
        "c": c,
        "k": k,
        "gn": gn,
        "p": p,
        "i0": i0,
        "g0": g0,
        "boundary_current": boundary_current,
        "W": W,
        "G": G,
        "Z": Z,
        "d": d,
    }
    for value in arrays.values():
        value.setflags(write=False)
    model = DerivedModel(
        bus_ids=[bus.id for bus in zips],
        lambda_min_G=min_eigenvalue_sym(G),
        **arrays,
    )
    logger.debug(f"Derived model with {model.P} ZIP buses, lambda_min(G)={model.lambda_min_G:.4g}")
    return model


def residual(model: DerivedModel, v: np.ndarray) -> np.ndarray:
    """Power-flow mismatch c v^2 - v (W v) - k v + p; zero at a solution.

    :param model: The derived model.
    :param v: Positive voltages of the ZIP buses.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(v > 0):
        raise NonPositiveVoltage(f"Voltages must be positive, got min {v.min()}")
    return model.c * v**2 - v * (model.W @ v) - model.k * v + model.p


def residual_tolerance(model: DerivedModel, tol: float) -> float:
    """Largest residual infinity norm a fixed-point solver may report as converged."""
    return RESIDUAL_FACTOR * tol * max(1.0, float(np.max(np.abs(model.p), initial=0.0)))
