"""Agent-loss semantics: rewire the chain, keep survivors' targets stale.

Losing an interior agent bridges its two neighbors with a new edge whose
endpoint copies are inherited from the edges each neighbor used to share
with the lost agent.  Nobody recomputes targets, so the surviving local
targets are exactly the old ones restricted to survivors; when the two
inherited copies disagree, the pattern has become unattainable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import TopologyError
from .topology import DesiredCopies, InteractionTopology, build_chain_topology, formation_vectors


@dataclass(frozen=True)
class LossEvent:
    """Scheduled removal of one agent at an absolute simulation time."""

    time: float
    lost_agent: int

    def __post_init__(self):
        if self.time < 0.0:
            raise ValueError(f"event time must be non-negative, got {self.time}")


@dataclass(frozen=True)
class ConsistencyReport:
    """Per-edge copy mismatches plus the formation's aggregate imbalance.

    ``imbalance`` is minus the sum of all local targets: zero exactly when
    every agent's targets telescope, nonzero when stale copies rule out a
    zero-interaction equilibrium.
    """

    edge_mismatch: np.ndarray
    imbalance: float

    @property
    def consistent(self) -> bool:
        return bool((self.edge_mismatch <= 1e-12).all())


def apply_agent_loss(topology: InteractionTopology, copies: DesiredCopies,
                     lost: int) -> tuple[InteractionTopology, DesiredCopies]:
    """Remove one agent from a chain and carry surviving copies over unchanged.

    Interior loss bridges the two neighbors: the new edge's tail endpoint
    inherits the tail agent's copy from its old edge toward the lost agent,
    and likewise for the head endpoint.  End loss simply drops the end edge.
    Survivor targets are never recomputed.
    """
    if not topology.is_chain():
        raise TopologyError("agent loss is only supported on chain topologies")
    if lost not in topology.agent_ids:
        raise TopologyError(f"unknown agent id {lost!r}")
    if topology.n_agents - 1 < 2:
        raise TopologyError("loss would leave fewer than 2 agents")

    ids = list(topology.agent_ids)
    pos = ids.index(lost)
    survivors = ids[:pos] + ids[pos + 1 :]
    new_topology = build_chain_topology(survivors)

    old_edge = {e: k for k, e in enumerate(topology.edges)}
    new_tail = np.empty(new_topology.n_edges)
    new_head = np.empty(new_topology.n_edges)
    for k, (tail, head) in enumerate(new_topology.edges):
        if (tail, head) in old_edge:
            j = old_edge[(tail, head)]
            new_tail[k] = copies.tail[j]
            new_head[k] = copies.head[j]
        else:
            # bridging edge: each endpoint keeps the copy it held on its
            # former edge toward the lost agent
            j_tail = old_edge[(tail, lost)]
            j_head = old_edge[(lost, head)]
            new_tail[k] = copies.tail[j_tail]
            new_head[k] = copies.head[j_head]
    return new_topology, DesiredCopies(new_tail, new_head)


def consistency_report(copies: DesiredCopies, topology: InteractionTopology) -> ConsistencyReport:
    """Summarize how far the endpoint copies are from a realizable pattern."""
    zeros = np.zeros(topology.n_edges)
    x_d = formation_vectors(topology, zeros, copies).x_d
    imbalance = float(-x_d.sum() + 0.0)  # +0.0 normalizes away negative zero
    return ConsistencyReport(edge_mismatch=copies.mismatches(), imbalance=imbalance)
