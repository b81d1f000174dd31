"""Loss semantics: rewiring, stale copies, consistency diagnostics."""

import numpy as np
import pytest

from flockadapt.dynamics import AgentParams
from flockadapt.engine import predict_post_loss_equilibrium
from flockadapt.errors import TopologyError
from flockadapt.fault import LossEvent, apply_agent_loss, consistency_report
from flockadapt.topology import (
    DesiredCopies,
    build_chain_topology,
    build_topology,
    formation_vectors,
)
from tests.conftest import CANONICAL_SHIFTS, D1, D2, D3


@pytest.fixture
def canonical():
    top = build_chain_topology([1, 2, 3, 4])
    copies = DesiredCopies.from_pattern(CANONICAL_SHIFTS)
    return top, copies


class TestLossEvent:
    def test_negative_time_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            LossEvent(time=-1.0, lost_agent=3)


class TestApplyAgentLoss:
    def test_interior_loss_bridges_neighbors_with_stale_copies(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 3)
        assert top2.agent_ids == (1, 2, 4)
        assert top2.edges == ((1, 2), (2, 4))
        assert np.allclose(copies2.tail, [D1, D2])
        assert np.allclose(copies2.head, [D1, D3])
        x_d = formation_vectors(top2, np.zeros(2), copies2).x_d
        assert np.allclose(x_d, [D1, -D1 + D2, -D3], atol=1e-15)

    def test_end_loss_keeps_copies_consistent(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 1)
        assert top2.edges == ((2, 3), (3, 4))
        assert np.allclose(copies2.tail, [D2, D3])
        assert np.allclose(copies2.head, [D2, D3])
        assert copies2.is_consistent()

    def test_unknown_agent_rejected(self, canonical):
        top, copies = canonical
        with pytest.raises(TopologyError, match="unknown agent"):
            apply_agent_loss(top, copies, 7)

    def test_loss_leaving_one_agent_rejected(self):
        top = build_chain_topology([1, 2])
        copies = DesiredCopies.from_pattern([1.0])
        with pytest.raises(TopologyError, match="fewer than 2"):
            apply_agent_loss(top, copies, 1)

    def test_non_chain_rejected(self):
        top = build_topology([1, 2, 3], [(1, 2), (2, 3), (3, 1)])
        copies = DesiredCopies.from_pattern([1.0, 1.0, 1.0])
        with pytest.raises(TopologyError, match="chain"):
            apply_agent_loss(top, copies, 2)

    def test_double_loss_of_same_agent_rejected(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 3)
        with pytest.raises(TopologyError, match="unknown agent"):
            apply_agent_loss(top2, copies2, 3)

    def test_survivor_rows_still_valid_incidence(self, canonical):
        top, copies = canonical
        top2, _ = apply_agent_loss(top, copies, 3)
        for row in top2.incidence:
            assert sorted(row) == [-1.0, 0.0, 1.0]
        assert np.abs(top2.incidence @ top2.pinv @ top2.incidence - top2.incidence).max() < 1e-10

    def test_restriction_property_of_targets(self, canonical):
        # stale targets after loss equal the old targets minus the lost entry
        top, copies = canonical
        x_d_before = formation_vectors(top, np.zeros(3), copies).x_d
        top2, copies2 = apply_agent_loss(top, copies, 3)
        x_d_after = formation_vectors(top2, np.zeros(2), copies2).x_d
        assert np.allclose(x_d_after, np.delete(x_d_before, 2), atol=1e-15)

    def test_sequential_losses(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 3)
        top3, copies3 = apply_agent_loss(top2, copies2, 2)
        assert top3.agent_ids == (1, 4)
        assert top3.edges == ((1, 4),)
        # agent 1 still holds its old copy of edge (1,2); agent 4 its copy of (2,4)
        assert np.allclose(copies3.tail, [D1])
        assert np.allclose(copies3.head, [D3])


class TestConsistencyReport:
    def test_pre_fault_all_zero(self, canonical):
        top, copies = canonical
        report = consistency_report(copies, top)
        assert np.array_equal(report.edge_mismatch, np.zeros(3))
        assert report.imbalance == pytest.approx(0.0, abs=1e-12)
        assert report.consistent

    def test_canonical_loss_mismatch_magnitude(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 3)
        report = consistency_report(copies2, top2)
        assert np.allclose(report.edge_mismatch, [0.0, abs(D2 - D3)], atol=1e-12)
        assert abs(D2 - D3) == pytest.approx(27 * np.pi / 377, abs=1e-12)
        # imbalance = -(sum of stale targets) = D3 - D2
        assert report.imbalance == pytest.approx(D3 - D2, abs=1e-12)
        assert not report.consistent

    def test_end_loss_benign(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 1)
        report = consistency_report(copies2, top2)
        assert np.array_equal(report.edge_mismatch, np.zeros(2))
        assert report.imbalance == pytest.approx(0.0, abs=1e-12)

    def test_interior_loss_yields_exactly_one_mismatched_edge(self):
        # any unequal adjacent desired shifts make exactly one stale pair
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(4, 8))
            shifts = rng.uniform(0.5, 2.5, n - 1)
            top = build_chain_topology(list(range(n)))
            copies = DesiredCopies.from_pattern(shifts)
            lost = int(rng.integers(1, n - 1))  # interior position
            top2, copies2 = apply_agent_loss(top, copies, lost)
            report = consistency_report(copies2, top2)
            nonzero = report.edge_mismatch > 1e-12
            assert nonzero.sum() == 1

    def test_nonzero_imbalance_means_nonzero_balanced_coupling(self, canonical):
        top, copies = canonical
        top2, copies2 = apply_agent_loss(top, copies, 3)
        prediction = predict_post_loss_equilibrium(top2, copies2, AgentParams.default())
        assert abs(prediction.delta) > 1e-3
        assert prediction.delta == pytest.approx(consistency_report(copies2, top2).imbalance / 3)
