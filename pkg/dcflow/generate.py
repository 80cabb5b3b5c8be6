"""Synthetic networks and load scaling for experiments."""

from __future__ import annotations

import logging
import math
from typing import Literal

import networkx as nx
import numpy as np

from dcflow.config import NormOrder, VoltageBand
from dcflow.models import Line, Network, VoltageBus, ZipBus

logger = logging.getLogger(__name__)

CONDUCTANCE_RANGE = (5.0, 50.0)
# conductance / current / power shares of each load at 1 pu
ZIP_SPLIT = (0.3, 0.3, 0.4)


def _tree(n_buses: int, rng: np.random.Generator) -> nx.Graph:
    """Random recursive tree: bus i attaches to a uniformly drawn earlier bus."""
    graph = nx.Graph()
    graph.add_nodes_from(range(n_buses))
    for bus in range(1, n_buses):
        graph.add_edge(int(rng.integers(0, bus)), bus)
    return graph


def generate_network(
    kind: Literal["radial", "meshed"],
    n_buses: int,
    seed: int,
    load_range: tuple[float, float] = (0.0, 0.2),
    slack_voltage: float = 1.0,
    band: VoltageBand | None = None,
    q: NormOrder = 2,
) -> Network:
    """Generate a network fed from a slack bus at index 0.

    :param kind: ``radial`` for a random spanning tree, ``meshed`` for a tree plus
        ceil(n/4) chords.
    :param n_buses: Number of buses including the slack.
    :param seed: Random seed; equal seeds give equal networks.
    :param load_range: Range of the per-bus load at 1 pu, split 30/30/40 into
        conductance, current and power.
    """
    if n_buses < 2:
        raise ValueError("A network needs at least two buses.")
    rng = np.random.default_rng(seed)
    graph = _tree(n_buses, rng)
    if kind == "meshed":
        candidates = sorted(nx.non_edges(graph))
        chords = min(math.ceil(n_buses / 4), len(candidates))
        picks = rng.choice(len(candidates), size=chords, replace=False) if chords else []
        graph.add_edges_from(candidates[int(i)] for i in picks)

    edges = sorted(tuple(sorted(edge)) for edge in graph.edges)
    lines = [
        Line(from_=a, to=b, g=float(rng.uniform(*CONDUCTANCE_RANGE))) for a, b in edges
    ]
    share_g, share_i, share_p = ZIP_SPLIT
    buses: list[VoltageBus | ZipBus] = [VoltageBus(id=0, v=slack_voltage)]
    for bus in range(1, n_buses):
        load = float(rng.uniform(*load_range))
        buses.append(ZipBus(id=bus, g0=share_g * load, i0=share_i * load, p0=share_p * load))
    logger.debug(f"Generated {kind} network with {n_buses} buses and {len(lines)} lines")
    return Network(buses=buses, lines=lines, band=band or VoltageBand(), q=q)


def scale_loads(
    network: Network, p_scales: np.ndarray, iz_scales: np.ndarray, g_scales: np.ndarray
) -> Network:
    """Return a copy with each ZIP bus's components multiplied by its own scale.

    :param p_scales: Constant-power scale per ZIP bus, in bus-id order.
    :param iz_scales: Constant-current scale per ZIP bus.
    :param g_scales: Constant-conductance scale per ZIP bus.
    """
    zips = network.zip_buses
    scaled = {
        bus.id: bus.model_copy(
            update={"p0": bus.p0 * float(ps), "i0": bus.i0 * float(is_), "g0": bus.g0 * float(gs)}
        )
        for bus, ps, is_, gs in zip(zips, p_scales, iz_scales, g_scales)
    }
    buses = [scaled.get(bus.id, bus) for bus in network.buses]
    return network.model_copy(update={"buses": buses})


def scale_power(network: Network, factor: float) -> Network:
    """Return a copy with every constant-power component multiplied by factor."""
    n = len(network.zip_buses)
    ones = np.ones(n)
    return scale_loads(network, factor * ones, ones, ones)
