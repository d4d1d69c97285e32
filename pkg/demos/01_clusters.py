"""
Forming clusters on a random deployment
=======================================

Place 300 sensors, count them with a sink-originated query, elect 5% of them
as heads and let the heads grow their clusters hop by hop.
"""

import numpy as np

from rtbcsim import EnergyLedger, Radio, TopologyConfig, generate_topology
from rtbcsim.rtbc import RotationHistory, census, form_clusters, select_cluster_heads

topo = generate_topology(TopologyConfig(), seed=1)
print(f"{topo.node_count} sensors, sink is node {topo.sink} at {tuple(topo.positions[topo.sink])}")

# mean degree of the unit-disk graph
degrees = np.array([len(topo.neighbors(n)) for n in topo.sensors])
print(f"degree: mean {degrees.mean():.1f}, min {degrees.min()}, max {degrees.max()}")

###############################################################################
# The census tells the sink how many nodes are alive and how far away they are.

radio = Radio(topo, EnergyLedger(topo.sensors))
answered = census(radio)
print(f"{len(answered)} nodes answered, deepest at {max(answered.values())} hops")

###############################################################################
# Elect heads and form clusters. Every member records its parent (dn) and its
# hop distance to the head.

heads = select_cluster_heads(answered, 0.05, 0, RotationHistory(), np.random.default_rng(1))
assignment = form_clusters(radio, heads)
sizes = assignment.cluster_sizes()
print(f"heads {sorted(sizes)}")
print(f"members per head: {sorted(sizes.values())}")
print(f"orphans: {len(assignment.orphans)}")

hops = np.bincount([m.hop_cnt for m in assignment.membership.values()])
for h, count in enumerate(hops):
    if count:
        print(f"  {count:3d} members at {h} hops from their head")

print(f"energy spent on setup: {radio.ledger.total_energy_consumed():.2f}")
