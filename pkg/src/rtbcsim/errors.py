"""Exception types raised by the simulator."""


class SimulationError(Exception):
    """Base class for every error raised by rtbcsim."""


class InvalidConfig(SimulationError, ValueError):
    """A configuration value is out of range or unknown.

    ``key`` names the offending setting when one can be identified.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class PlacementInfeasible(SimulationError):
    """Node placement ran out of attempts before all nodes were placed."""


class UnknownNode(SimulationError, KeyError):
    pass


class EmptyCensus(SimulationError):
    """Cluster-head election was asked to pick from zero nodes."""


class RepAtOrphan(SimulationError):
    """A REP reached a node that belongs to no cluster."""


class EmptyNeighborTable(SimulationError):
    """A node has no neighbor entry to forward toward the sink."""


# Routing failures. These are recorded on a Delivery rather than raised out of
# the routing functions, so an undelivered report never aborts a trial.
class OrphanSource(SimulationError):
    pass


class DeadRelay(SimulationError):
    pass


class RoutingLoop(SimulationError):
    pass


class EmptyGradient(SimulationError):
    pass
