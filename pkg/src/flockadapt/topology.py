"""Interaction topology and the linear algebra of phase-shift patterns.

An edge (tail, head) measures the shift p_k = phase[head] - phase[tail].
Stacking all edges gives the linear map from agent phases to shifts; its
pseudoinverse and kernel drive the attainability test, and its transpose
assembles the per-agent formation vectors that the couplings act on.
"""

from dataclasses import dataclass

import numpy as np

from .angles import wrap_angle
from .errors import TopologyError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class InteractionTopology:
    """Edge structure of a formation plus precomputed linear-map factors.

    Attributes:
        agent_ids: stable identifiers, in column order of ``incidence``.
        edges: (tail_id, head_id) pairs, in row order of ``incidence``.
        incidence: (n_edges, n_agents) matrix with -1 at the tail column
            and +1 at the head column of each edge row.
        pinv: Moore-Penrose pseudoinverse of ``incidence``.
        kernel_basis: orthonormal columns spanning the null space.
    """

    agent_ids: tuple
    edges: tuple
    incidence: np.ndarray
    pinv: np.ndarray
    kernel_basis: np.ndarray

    @property
    def n_agents(self) -> int:
        return len(self.agent_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def agent_index(self, agent_id) -> int:
        try:
            return self.agent_ids.index(agent_id)
        except ValueError:
            raise TopologyError(f"unknown agent id {agent_id!r}") from None

    def edge_index(self, tail, head) -> int:
        try:
            return self.edges.index((tail, head))
        except ValueError:
            raise TopologyError(f"no edge ({tail!r}, {head!r})") from None

    def tail_indices(self) -> np.ndarray:
        return np.array([self.agent_index(t) for t, _ in self.edges], dtype=int)

    def head_indices(self) -> np.ndarray:
        return np.array([self.agent_index(h) for _, h in self.edges], dtype=int)

    def is_chain(self) -> bool:
        """True when edges are consecutive pairs over the agent order."""
        if self.n_edges != self.n_agents - 1:
            return False
        expected = tuple(zip(self.agent_ids[:-1], self.agent_ids[1:]))
        return self.edges == expected


def build_topology(agent_ids, edges) -> InteractionTopology:
    """Build a topology from explicit agent ids and (tail, head) edge pairs."""
    agent_ids = tuple(agent_ids)
    edges = tuple((t, h) for t, h in edges)
    if len(agent_ids) < 2:
        raise TopologyError(f"need at least 2 agents, got {len(agent_ids)}")
    if len(set(agent_ids)) != len(agent_ids):
        raise TopologyError("duplicate agent ids")
    if not edges:
        raise TopologyError("topology needs at least one edge")
    index = {a: i for i, a in enumerate(agent_ids)}
    incidence = np.zeros((len(edges), len(agent_ids)))
    for k, (tail, head) in enumerate(edges):
        if tail not in index or head not in index:
            raise TopologyError(f"edge ({tail!r}, {head!r}) references unknown agent")
        if tail == head:
            raise TopologyError(f"self-loop on agent {tail!r}")
        incidence[k, index[tail]] = -1.0
        incidence[k, index[head]] = 1.0
    touched = np.any(incidence != 0.0, axis=0)
    if not touched.all():
        isolated = [a for a, used in zip(agent_ids, touched) if not used]
        raise TopologyError(f"isolated agents: {isolated}")

    pinv = np.linalg.pinv(incidence, rcond=RANK_TOL)
    _, sv, vt = np.linalg.svd(incidence)
    null_mask = np.concatenate([sv, np.zeros(len(agent_ids) - len(sv))]) <= RANK_TOL * max(sv[0], 1.0)
    kernel = vt[null_mask].T
    return InteractionTopology(agent_ids, edges, incidence, pinv, kernel)


def build_chain_topology(agent_ids) -> InteractionTopology:
    """Open-chain topology: one edge between each consecutive pair of agents."""
    agent_ids = tuple(agent_ids)
    if len(agent_ids) < 2:
        raise TopologyError(f"a chain needs at least 2 agents, got {len(agent_ids)}")
    edges = tuple(zip(agent_ids[:-1], agent_ids[1:]))
    return build_topology(agent_ids, edges)


@dataclass(frozen=True)
class DesiredCopies:
    """Per-endpoint copies of the desired shift of every edge.

    Each edge carries two values: the copy held by its tail agent and the
    copy held by its head agent.  A freshly configured formation has both
    copies equal; an agent loss can leave them inconsistent.
    """

    tail: np.ndarray
    head: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tail", np.asarray(self.tail, dtype=float))
        object.__setattr__(self, "head", np.asarray(self.head, dtype=float))
        if self.tail.shape != self.head.shape or self.tail.ndim != 1:
            raise ValueError("tail/head copies must be 1-d arrays of equal length")
        if not (np.isfinite(self.tail).all() and np.isfinite(self.head).all()):
            raise ValueError("desired copies must be finite")

    @classmethod
    def from_pattern(cls, values) -> "DesiredCopies":
        """Consistent copies: both endpoints of every edge agree."""
        v = np.asarray(values, dtype=float)
        return cls(v.copy(), v.copy())

    @property
    def n_edges(self) -> int:
        return len(self.tail)

    def mismatches(self) -> np.ndarray:
        """Wrapped |tail copy - head copy| per edge."""
        return np.abs(wrap_angle(self.tail - self.head))

    def is_consistent(self, atol: float = 1e-12) -> bool:
        return bool((self.mismatches() <= atol).all())

    def value(self, topology: InteractionTopology, edge_index: int, agent_id) -> float:
        """Copy held by ``agent_id`` for edge ``edge_index`` (must be incident)."""
        tail, head = topology.edges[edge_index]
        if agent_id == tail:
            return float(self.tail[edge_index])
        if agent_id == head:
            return float(self.head[edge_index])
        raise TopologyError(
            f"agent {agent_id!r} is not incident to edge {topology.edges[edge_index]!r}"
        )


@dataclass(frozen=True)
class FormationVectors:
    """Per-agent formation vector x and its desired counterpart x_d."""

    x: np.ndarray
    x_d: np.ndarray


def pattern_of(topology: InteractionTopology, q) -> np.ndarray:
    """Edge shifts of a phase vector: p_k = q[head_k] - q[tail_k]."""
    q = np.asarray(q, dtype=float)
    if q.shape != (topology.n_agents,):
        raise ValueError(f"expected {topology.n_agents} phases, got shape {q.shape}")
    return q[topology.head_indices()] - q[topology.tail_indices()]


def formation_vectors(topology: InteractionTopology, p, copies: DesiredCopies) -> FormationVectors:
    """Formation vector x = -(incidence)^T p and its target from local copies.

    The desired entry of agent i aggregates that agent's own copies only:
    x_d[i] = -sum_k incidence[k, i] * copy_k(i).  No wrapping is applied;
    these are the raw linear-map images.
    """
    p = np.asarray(p, dtype=float)
    _check_edge_dim(topology, p, "pattern")
    _check_edge_dim(topology, copies.tail, "desired copies")
    L = topology.incidence
    x = -L.T @ p
    # tail entries carry -1 in L, head entries +1
    x_d = np.zeros(topology.n_agents)
    tails, heads = topology.tail_indices(), topology.head_indices()
    np.add.at(x_d, tails, copies.tail)
    np.subtract.at(x_d, heads, copies.head)
    return FormationVectors(x, x_d)


def coupling_residuals(topology: InteractionTopology, p, copies: DesiredCopies) -> np.ndarray:
    """Per-agent sum of interactions, with each edge error wrapped to (-pi, pi].

    This is the x - x_d residual each agent feeds into its coupling; it
    equals the row sums of :func:`interactions` by construction.
    """
    p = np.asarray(p, dtype=float)
    _check_edge_dim(topology, p, "pattern")
    err_tail = wrap_angle(p - copies.tail)
    err_head = wrap_angle(p - copies.head)
    res = np.zeros(topology.n_agents)
    np.add.at(res, topology.tail_indices(), err_tail)
    np.subtract.at(res, topology.head_indices(), err_head)
    return res


def interactions(topology: InteractionTopology, p, copies: DesiredCopies) -> np.ndarray:
    """Signed interaction of each edge on each of its endpoints.

    Returns an (n_edges, 2) array: column 0 is the tail agent's value
    +wrap(p_k - copy), column 1 the head agent's -wrap(p_k - copy).
    Edge errors are wrapped to (-pi, pi] before use.
    """
    p = np.asarray(p, dtype=float)
    _check_edge_dim(topology, p, "pattern")
    return np.column_stack([
        wrap_angle(p - copies.tail),
        -wrap_angle(p - copies.head),
    ])


def interaction_for(topology: InteractionTopology, p, copies: DesiredCopies,
                    edge_index: int, agent_id) -> float:
    """Interaction of one edge on one incident agent; rejects non-incident pairs."""
    tail, head = topology.edges[edge_index]
    table = interactions(topology, p, copies)
    if agent_id == tail:
        return float(table[edge_index, 0])
    if agent_id == head:
        return float(table[edge_index, 1])
    raise TopologyError(
        f"agent {agent_id!r} is not incident to edge {topology.edges[edge_index]!r}"
    )


def attainability_residual(topology: InteractionTopology, p_d) -> np.ndarray:
    """Component of a desired pattern that no phase vector can realize.

    Returns (I - L L^+) p_d; a zero vector (up to tolerance) means some
    phase assignment produces the pattern exactly.
    """
    p_d = np.asarray(p_d, dtype=float)
    _check_edge_dim(topology, p_d, "desired pattern")
    L = topology.incidence
    return p_d - L @ (topology.pinv @ p_d)


def pattern_energy(topology: InteractionTopology, p, copies: DesiredCopies) -> float:
    """Quadratic objective measuring remaining inter-agent interaction.

    Computed as a quarter of the sum of squared endpoint interactions,
    which reduces to half the sum of squared per-edge errors whenever the
    two copies of every edge agree.
    """
    table = interactions(topology, p, copies)
    return 0.25 * float(np.sum(table**2))


def _check_edge_dim(topology, vec, what):
    if np.shape(vec) != (topology.n_edges,):
        raise ValueError(
            f"{what} must have one entry per edge ({topology.n_edges}), got shape {np.shape(vec)}"
        )
