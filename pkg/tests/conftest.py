import math

import networkx as nx
import numpy as np
import pytest

from rtbcsim.energy import EnergyLedger
from rtbcsim.radio import Radio
from rtbcsim.topology import Topology, TopologyConfig


def topology_from(xy, sink=(0.0, 0.0), side=100.0, radius=10.0, spacing=5.0):
    cfg = TopologyConfig(
        node_count=len(xy), field_side=side, comm_radius=radius,
        min_node_spacing=spacing, sink_position=sink,
    )
    return Topology.from_positions(cfg, xy)


def path_topology(n, step=8.0):
    """Sink at the origin, sensors 0..n-1 in a line: sink - 0 - 1 - ... - n-1."""
    xy = [(step * (i + 1), 0.0) for i in range(n)]
    return topology_from(xy, sink=(0.0, 0.0), side=step * (n + 1))


def radio_for(topology, energy=100.0):
    return Radio(topology, EnergyLedger(topology.sensors, energy))


def as_graph(topology):
    """networkx graph built straight from positions, independent of the adjacency."""
    g = nx.Graph()
    g.add_nodes_from(topology.all_nodes)
    pts = topology.positions
    r = topology.config.comm_radius
    for a in topology.all_nodes:
        for b in range(a + 1, len(pts)):
            if math.dist(pts[a], pts[b]) <= r:
                g.add_edge(a, b)
    return g


@pytest.fixture
def small_field():
    return TopologyConfig(node_count=60, field_side=60.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
