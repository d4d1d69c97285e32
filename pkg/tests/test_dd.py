import networkx as nx
import pytest

from rtbcsim.dd import dd_route_event, dd_setup_gradients
from rtbcsim.errors import EmptyGradient
from rtbcsim.messages import DataMessage, MessageKind
from rtbcsim.topology import TopologyConfig, generate_topology, hop_distance_oracle

from conftest import as_graph, path_topology, radio_for, topology_from


def test_gradients_on_a_chain():
    topo = path_topology(3)
    radio = radio_for(topo)
    g = dd_setup_gradients(radio)
    assert g[0] == {topo.sink: 0, 1: 2}
    assert g[1] == {0: 1, 2: 3}
    assert g[2] == {1: 2}
    assert radio.tally.interest_msgs == 4


@pytest.mark.parametrize("seed", range(4))
def test_gradients_hold_bfs_depths(seed):
    topo = generate_topology(TopologyConfig(node_count=160), seed)
    radio = radio_for(topo)
    g = dd_setup_gradients(radio)
    depth = hop_distance_oracle(topo, topo.sink)
    reached = [n for n in topo.sensors if depth[n] >= 0]
    for n in reached:
        assert g[n] == {nb: depth[nb] for nb in topo.adjacency[n]}
    assert radio.tally.interest_msgs == len(reached) + 1


@pytest.mark.parametrize("seed", range(4))
def test_route_length_equals_bfs_depth(seed):
    topo = generate_topology(TopologyConfig(node_count=160), seed)
    radio = radio_for(topo, energy=10_000.0)
    g = dd_setup_gradients(radio)
    lengths = nx.single_source_shortest_path_length(as_graph(topo), topo.sink)
    for n in topo.sensors:
        d = dd_route_event(n, DataMessage(n, n), g, radio)
        if n in lengths:
            assert d.delivered and d.hops == lengths[n]
        else:
            assert d.failure is EmptyGradient


def test_duplicates_each_travel_separately():
    topo = path_topology(4)
    radio = radio_for(topo)
    g = dd_setup_gradients(radio)
    for src in (3, 3, 3, 3):
        assert dd_route_event(src, DataMessage(7, src), g, radio).delivered
    assert radio.tally.tx[MessageKind.DATA] == 4 * 4


def test_tie_breaks_on_lowest_id():
    # 2 sits two hops out with two one-hop neighbors 0 and 1
    topo = topology_from([(46.0, 8.0), (54.0, 8.0), (50.0, 15.0)], sink=(50.0, 0.0))
    radio = radio_for(topo)
    g = dd_setup_gradients(radio)
    d = dd_route_event(2, DataMessage(1, 2), g, radio)
    assert d.path == [2, 0, topo.sink]
