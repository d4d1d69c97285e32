import itertools
import math

import numpy as np
import pytest

from rtbcsim.errors import InvalidConfig, PlacementInfeasible, UnknownNode
from rtbcsim.topology import (
    UNREACHABLE,
    Topology,
    TopologyConfig,
    generate_topology,
    hop_distance_oracle,
    multi_source_hops,
    neighbors,
)

from conftest import as_graph, topology_from


def iterative_deepening_hops(topology, source):
    """Depth-limited DFS with a growing limit; a node's hop count is the first
    limit at which it becomes reachable."""
    adj = topology.adjacency
    hops = {source: 0}
    for limit in range(1, len(adj)):
        best = {}

        def dls(node, depth):
            if best.get(node, math.inf) <= depth:
                return
            best[node] = depth
            if depth < limit:
                for nxt in adj[node]:
                    dls(nxt, depth + 1)

        dls(source, 0)
        new = [n for n in best if n not in hops]
        if not new:
            break
        for n in new:
            hops[n] = limit
    return {n: hops.get(n, UNREACHABLE) for n in topology.all_nodes}


def test_full_deployment_spacing():
    topo = generate_topology(TopologyConfig(), seed=7)
    assert topo.node_count == 300
    xy = topo.positions[:-1]
    d = min(math.dist(a, b) for a, b in itertools.combinations(xy, 2))
    assert d >= 5.0
    assert np.all((xy >= 0) & (xy <= 100))
    assert tuple(topo.positions[topo.sink]) == (50.0, 0.0)


def test_single_node_has_no_sensor_neighbors():
    topo = generate_topology(TopologyConfig(node_count=1), seed=3)
    assert topo.adjacency[0] <= {topo.sink}


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_adjacency_matches_pairwise_recheck(seed):
    topo = generate_topology(TopologyConfig(), seed)
    g = as_graph(topo)
    for a in topo.all_nodes:
        assert topo.adjacency[a] == set(g[a])
        for b in topo.adjacency[a]:
            assert a in topo.adjacency[b]
        assert a not in topo.adjacency[a]


def test_generation_is_deterministic():
    cfg = TopologyConfig(node_count=120)
    a, b = generate_topology(cfg, 11), generate_topology(cfg, 11)
    assert a.positions.tobytes() == b.positions.tobytes()
    assert a.to_text() == b.to_text()
    assert generate_topology(cfg, 12).positions.tobytes() != a.positions.tobytes()


def test_uniform_placement_honors_spacing():
    cfg = TopologyConfig(node_count=80, placement="uniform")
    topo = generate_topology(cfg, 5)
    topo.validate()


def test_uniform_placement_budget_exhaustion():
    # a 10 m square cannot hold 10 nodes 5 m apart
    cfg = TopologyConfig(node_count=10, field_side=10.0, sink_position=(5.0, 0.0),
                         placement="uniform")
    with pytest.raises(PlacementInfeasible):
        generate_topology(cfg, 0)


def test_poisson_placement_infeasible():
    cfg = TopologyConfig(node_count=40, field_side=10.0, sink_position=(5.0, 0.0))
    with pytest.raises(PlacementInfeasible):
        generate_topology(cfg, 0)


@pytest.mark.parametrize("kwargs", [
    dict(node_count=0),
    dict(comm_radius=5.0, min_node_spacing=5.0),
    dict(min_node_spacing=0.0),
    dict(sink_position=(150.0, 0.0)),
    dict(placement="grid"),
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidConfig):
        TopologyConfig(**kwargs)


def test_isolated_node_has_no_neighbors():
    topo = topology_from([(50.0, 50.0), (80.0, 80.0)], sink=(0.0, 0.0))
    assert neighbors(topo, 0) == frozenset()


def test_boundary_distance_is_inclusive():
    topo = topology_from([(20.0, 20.0), (30.0, 20.0)], sink=(0.0, 0.0))
    assert neighbors(topo, 0) == {1}
    assert neighbors(topo, 1) == {0}
    # 6-8-10 triangle, exact in floating point
    topo = topology_from([(20.0, 20.0), (26.0, 28.0)], sink=(0.0, 0.0))
    assert neighbors(topo, 0) == {1}


def test_sink_joins_adjacency_and_is_exempt_from_spacing():
    topo = topology_from([(50.0, 1.0), (58.0, 1.0)], sink=(50.0, 0.0))
    assert topo.sink == 2
    assert neighbors(topo, topo.sink) == {0, 1}
    topo.validate()


def test_neighbors_unknown_node():
    topo = topology_from([(10.0, 10.0)])
    with pytest.raises(UnknownNode):
        neighbors(topo, 5)
    with pytest.raises(UnknownNode):
        hop_distance_oracle(topo, -1)


def test_random_neighbors_equal_distance_filter():
    topo = generate_topology(TopologyConfig(node_count=150), 21)
    for node in topo.all_nodes:
        brute = {
            other for other in topo.all_nodes
            if other != node and math.dist(topo.positions[node], topo.positions[other]) <= 10.0
        }
        assert neighbors(topo, node) == brute


def test_hop_oracle_small_cases():
    topo = topology_from([(8.0, 0.0), (16.0, 0.0), (60.0, 60.0)], sink=(0.0, 0.0))
    hops = hop_distance_oracle(topo, topo.sink)
    assert hops[topo.sink] == 0
    assert hops[0] == 1
    assert hops[1] == 2
    assert hops[2] == UNREACHABLE


@pytest.mark.parametrize("seed", range(4))
def test_hop_oracle_matches_iterative_deepening(seed):
    topo = generate_topology(TopologyConfig(node_count=90), seed)
    assert hop_distance_oracle(topo, topo.sink) == iterative_deepening_hops(topo, topo.sink)
    assert hop_distance_oracle(topo, 0) == iterative_deepening_hops(topo, 0)


def test_multi_source_hops_matches_networkx():
    import networkx as nx

    topo = generate_topology(TopologyConfig(node_count=120), 4)
    sources = [0, 17, 44]
    g = as_graph(topo)
    g.remove_node(topo.sink)
    expected = nx.multi_source_dijkstra_path_length(g, sources)
    assert multi_source_hops(topo, sources) == expected


def test_text_round_trip(tmp_path):
    topo = generate_topology(TopologyConfig(node_count=70), 9)
    path = tmp_path / "t.txt"
    topo.save(path)
    back = Topology.load(path)
    assert back.config == topo.config
    assert back.positions.tobytes() == topo.positions.tobytes()
    assert back.adjacency == topo.adjacency
    header, first = path.read_text().splitlines()[:2]
    assert header.startswith("# node_count=70 ")
    assert first.split()[0] == "0"


def test_load_rejects_crowded_positions():
    text = "# node_count=2 field_side=100.0 comm_radius=10.0 min_node_spacing=5.0 sink_x=0.0 sink_y=0.0\n" \
           "0 10.0 10.0\n1 11.0 10.0\n2 0.0 0.0\n"
    with pytest.raises(InvalidConfig):
        Topology.from_text(text)
