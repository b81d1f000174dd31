"""Scenario files: strict parsing, defaults provenance, round trips."""

import numpy as np
import pytest

from flockadapt.cli import bundled_scenario_path
from flockadapt.errors import ValidationError
from flockadapt.scenario_io import load_scenario, write_scenario
from tests.conftest import CANONICAL_SHIFTS

MINIMAL = """
[scenario]
name = "mini"
duration_s = 10.0
dt_s = 0.01
seed = 1
record_period_s = 0.5

[formation]
agents = [1, 2, 3, 4]
desired_shifts_rad = [2.0943951023931953, 2.174948760177549, 1.949954060848837]
"""


def write(tmp_path, text, name="s.scenario"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_canonical_bundled_file(self):
        s = load_scenario(bundled_scenario_path("canonical_4uav"))
        assert s.agent_ids == (1, 2, 3, 4)
        assert np.allclose(s.desired_shifts, CANONICAL_SHIFTS, atol=1e-15)
        assert s.model == "phase"
        assert s.agent_params[0].v_nominal == 12.0
        assert s.agent_params[0].omega == pytest.approx(0.12)

    def test_tau_p_out_of_range(self, tmp_path):
        path = write(tmp_path, MINIMAL + "\n[adaptation]\nenabled = true\ntau_p = 1.5\n")
        with pytest.raises(ValidationError, match=r"tau_p must lie in \(0,1\)"):
            load_scenario(path)

    def test_omitted_v_f_gets_default_with_notice(self, tmp_path):
        s = load_scenario(write(tmp_path, MINIMAL))
        assert s.agent_params[0].v_f == 3.0
        assert any("v_f_mps = 3.0 (default)" in note for note in s.defaults_applied)

    def test_unknown_section_key_rejected(self, tmp_path):
        path = write(tmp_path, MINIMAL + "\n[formation2]\nx = 1\n")
        with pytest.raises(ValidationError, match="unknown sections"):
            load_scenario(path)
        path = write(tmp_path, MINIMAL.replace("agents =", "agent_count = 4\nagents ="))
        with pytest.raises(ValidationError, match="unknown keys"):
            load_scenario(path)

    def test_parse_error_carries_position(self, tmp_path):
        path = write(tmp_path, "[scenario\nname = 3\n")
        with pytest.raises(ValidationError, match=r"line 1|at line 1"):
            load_scenario(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_scenario(tmp_path / "nope.scenario")

    def test_shift_count_mismatch(self, tmp_path):
        bad = MINIMAL.replace("agents = [1, 2, 3, 4]", "agents = [1, 2, 3]")
        with pytest.raises(ValidationError, match="agents-1"):
            load_scenario(write(tmp_path, bad))

    def test_events_parsed_and_checked(self, tmp_path):
        path = write(tmp_path, MINIMAL + """
[[events]]
t_s = 5.0
type = "lose_agent"
agent = 3
""")
        s = load_scenario(path)
        assert len(s.events) == 1
        assert s.events[0].lost_agent == 3
        path = write(tmp_path, MINIMAL + """
[[events]]
t_s = 5.0
type = "teleport"
agent = 3
""")
        with pytest.raises(ValidationError, match="unsupported type"):
            load_scenario(path)

    def test_event_missing_key(self, tmp_path):
        path = write(tmp_path, MINIMAL + "\n[[events]]\nt_s = 5.0\ntype = \"lose_agent\"\n")
        with pytest.raises(ValidationError, match="missing key"):
            load_scenario(path)

    def test_explicit_phases(self, tmp_path):
        path = write(tmp_path, MINIMAL + """
""" + "[model]\nkind = \"phase\"\n")
        text = path.read_text() .replace(
            'desired_shifts_rad = [2.0943951023931953, 2.174948760177549, 1.949954060848837]',
            'desired_shifts_rad = [2.0943951023931953, 2.174948760177549, 1.949954060848837]\n'
            'initial_phases = "explicit"\nphases_rad = [0.0, 2.0, 4.2, 6.2]')
        path.write_text(text)
        s = load_scenario(path)
        assert s.initial_phases.mode == "explicit"
        assert s.initial_phases.values == (0.0, 2.0, 4.2, 6.2)

    def test_vehicle_keys_only_for_vehicle_model(self, tmp_path):
        path = write(tmp_path, MINIMAL + "\n[model]\nkind = \"phase\"\nk_r = 2.0\n")
        with pytest.raises(ValidationError, match="vehicle model"):
            load_scenario(path)

    def test_vehicle_model_loads(self):
        s = load_scenario(bundled_scenario_path("vehicle_4uav"))
        assert s.model == "vehicle"
        assert s.vehicle.guidance.k_r == 2.0
        assert s.vehicle.v_min == 6.0

    def test_boolean_key_type_checked(self, tmp_path):
        path = write(tmp_path, MINIMAL + "\n[adaptation]\nenabled = 1\n")
        with pytest.raises(ValidationError, match="true or false"):
            load_scenario(path)


class TestRoundTrip:
    @pytest.mark.parametrize("name", [
        "canonical_4uav", "canonical_loss3_adapt", "vehicle_4uav", "endloss_benign"])
    def test_effective_params_survive_write_load(self, tmp_path, name):
        s1 = load_scenario(bundled_scenario_path(name))
        out = tmp_path / "copy.scenario"
        write_scenario(s1, out)
        s2 = load_scenario(out)
        assert s1.effective_params() == s2.effective_params()
        # after a write everything is explicit: no defaults get applied
        assert s2.defaults_applied == ()

    def test_minimal_round_trip(self, tmp_path):
        s1 = load_scenario(write(tmp_path, MINIMAL))
        out = tmp_path / "copy.scenario"
        write_scenario(s1, out)
        s2 = load_scenario(out)
        assert s1.effective_params() == s2.effective_params()
