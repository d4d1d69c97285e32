"""
Following one event to the sink
===============================

Four neighboring sensors detect the same event. Under the clustered scheme the
reports meet at their head and only one copy crosses the network; under
diffusion all four travel separately.
"""

import numpy as np

from rtbcsim import EnergyLedger, Radio, TopologyConfig, generate_topology
from rtbcsim.dd import dd_route_event, dd_setup_gradients
from rtbcsim.engine import codetectors
from rtbcsim.messages import DataMessage
from rtbcsim.rtbc import (
    RotationHistory,
    aggregate_at_head,
    census,
    disseminate_interest,
    form_clusters,
    fresh_states,
    route_intra_cluster,
    route_to_sink,
    select_cluster_heads,
)

topo = generate_topology(TopologyConfig(), seed=3)
origin = 250
reporters = [origin, *codetectors(topo, origin, 3)]
print("reporters:", reporters)

###############################################################################
# Clustered: reports climb to the head, get folded, then go down the hop gradient.

radio = Radio(topo, EnergyLedger(topo.sensors))
states = fresh_states(radio)
heads = select_cluster_heads(census(radio), 0.05, 0, RotationHistory(), np.random.default_rng(3))
assignment = form_clusters(radio, heads, states)
disseminate_interest(radio, states)
setup = radio.tally.data_msgs

by_head = {}
for r in reporters:
    msg = DataMessage(1, r)
    trip = route_intra_cluster(assignment, r, msg, radio)
    print(f"  {r} -> head {assignment.head_of(r)} in {trip.hops} hops")
    by_head.setdefault(assignment.head_of(r), []).append(msg)

for head, reports in by_head.items():
    for out in aggregate_at_head(head, reports):
        trip = route_to_sink(head, out, states, radio)
        print(f"  head {head} sends 1 message for {out.reports} reports: {trip.path}")
print(f"clustered data transmissions: {radio.tally.data_msgs - setup}")

###############################################################################
# Diffusion: each reporter walks its own gradient.

radio = Radio(topo, EnergyLedger(topo.sensors))
gradients = dd_setup_gradients(radio)
for r in reporters:
    trip = dd_route_event(r, DataMessage(1, r), gradients, radio)
    print(f"  {r}: {trip.hops} hops")
print(f"diffusion data transmissions: {radio.tally.data_msgs}")
