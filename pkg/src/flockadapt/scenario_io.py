"""Scenario files: a small TOML dialect, strictly validated.

Sections: [scenario] run identity and grid, [formation] agents and
pattern, [model] phase-or-vehicle choice with vehicle sub-keys,
[adaptation] retuning settings, and repeated [[events]] tables.  Unknown
keys are rejected; every omitted key with a default is reported so runs
carry their full provenance.
"""

import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .adaptation import AdaptationParams
from .dynamics import AgentParams
from .engine import InitialPhases, Scenario, VehicleConfig
from .errors import ValidationError
from .fault import LossEvent
from .vehicle import GuidanceParams

_SCENARIO_KEYS = {"name", "duration_s", "dt_s", "seed", "record_period_s"}
_FORMATION_KEYS = {"agents", "desired_shifts_rad", "orbit_radius_m", "nominal_speed_mps",
                   "v_f_mps", "k_theta", "initial_phases", "max_jitter_rad", "phases_rad"}
_MODEL_KEYS = {"kind", "k_r", "heading_tc_s", "speed_tc_s", "orbit_direction",
               "v_min_mps", "v_max_mps"}
_ADAPTATION_KEYS = {"enabled", "tau_p", "a_s", "sigmoid", "start_time_s"}
_EVENT_KEYS = {"t_s", "type", "agent"}
_SECTIONS = {"scenario", "formation", "model", "adaptation", "events"}

_DEFAULTS = {
    "duration_s": 400.0,
    "dt_s": 0.01,
    "seed": 0,
    "record_period_s": 0.5,
    "orbit_radius_m": 100.0,
    "nominal_speed_mps": 12.0,
    "v_f_mps": 3.0,
    "k_theta": 5.0,
    "initial_phases": "equispaced_perturbed",
    "max_jitter_rad": 0.3,
    "kind": "phase",
    "enabled": False,
    "tau_p": 0.1,
    "a_s": 2.0 / math.pi,
    "sigmoid": "arctan",
    "k_r": 2.0,
    "heading_tc_s": 0.3,
    "speed_tc_s": 0.3,
    "orbit_direction": "ccw",
    "v_min_mps": 6.0,
    "v_max_mps": 20.0,
}


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file into a runnable Scenario.

    Raises ValidationError naming the offending key or, for syntax
    problems, the parser's line/column message.  Defaults applied for
    omitted keys are listed on the returned scenario's defaults_applied.
    """
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"scenario file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: parse error: {exc}") from exc
    return scenario_from_mapping(raw, default_name=path.stem)


def scenario_from_mapping(raw: dict, default_name: str = "scenario") -> Scenario:
    """Build a Scenario from an already-parsed mapping (strict keys)."""
    unknown_sections = set(raw) - _SECTIONS
    if unknown_sections:
        raise ValidationError(f"unknown sections: {sorted(unknown_sections)}")
    defaults = []

    sec = _section(raw, "scenario", _SCENARIO_KEYS)
    name = _get_str(sec, "scenario", "name", default_name, defaults)
    duration = _get_num(sec, "scenario", "duration_s", defaults)
    dt = _get_num(sec, "scenario", "dt_s", defaults)
    seed = _get_int(sec, "scenario", "seed", defaults)
    record_period = _get_num(sec, "scenario", "record_period_s", defaults)

    form = _section(raw, "formation", _FORMATION_KEYS)
    if "agents" not in form:
        raise ValidationError("formation.agents is required")
    agents = form["agents"]
    if not isinstance(agents, list) or not agents:
        raise ValidationError("formation.agents must be a non-empty list")
    if "desired_shifts_rad" not in form:
        raise ValidationError("formation.desired_shifts_rad is required")
    shifts = form["desired_shifts_rad"]
    if not isinstance(shifts, list):
        raise ValidationError("formation.desired_shifts_rad must be a list")
    if len(shifts) != len(agents) - 1:
        raise ValidationError(
            f"formation.desired_shifts_rad needs agents-1 = {len(agents) - 1} entries, "
            f"got {len(shifts)}")
    rho = _get_num(form, "formation", "orbit_radius_m", defaults)
    v_nominal = _get_num(form, "formation", "nominal_speed_mps", defaults)
    v_f = _get_num(form, "formation", "v_f_mps", defaults)
    k_theta = _get_num(form, "formation", "k_theta", defaults)
    mode = _get_str(form, "formation", "initial_phases", None, defaults)
    if mode == "explicit":
        if "phases_rad" not in form:
            raise ValidationError("formation.phases_rad is required for explicit initial phases")
        phases = tuple(float(v) for v in form["phases_rad"])
        initial = InitialPhases(mode="explicit", max_jitter=0.0, values=phases)
    else:
        if "phases_rad" in form:
            raise ValidationError("formation.phases_rad only applies to explicit initial phases")
        jitter = _get_num(form, "formation", "max_jitter_rad", defaults)
        initial = InitialPhases(mode=mode, max_jitter=jitter)

    try:
        params = AgentParams.for_cruise(rho=rho, v_nominal=v_nominal, v_f=v_f, k_theta=k_theta)
    except ValueError as exc:
        raise ValidationError(f"formation: {exc}") from exc

    model_sec = _section(raw, "model", _MODEL_KEYS)
    kind = _get_str(model_sec, "model", "kind", None, defaults)
    if kind not in ("phase", "vehicle"):
        raise ValidationError(f"model.kind must be 'phase' or 'vehicle', got {kind!r}")
    vehicle = None
    if kind == "vehicle":
        try:
            guidance = GuidanceParams(
                k_r=_get_num(model_sec, "model", "k_r", defaults),
                heading_tc=_get_num(model_sec, "model", "heading_tc_s", defaults),
                speed_tc=_get_num(model_sec, "model", "speed_tc_s", defaults),
                orbit_direction=_get_str(model_sec, "model", "orbit_direction", None, defaults),
            )
            vehicle = VehicleConfig(
                guidance=guidance,
                v_min=_get_num(model_sec, "model", "v_min_mps", defaults),
                v_max=_get_num(model_sec, "model", "v_max_mps", defaults),
            )
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"model: {exc}") from exc
    else:
        extra = set(model_sec) - {"kind"}
        if extra:
            raise ValidationError(f"model keys {sorted(extra)} only apply to the vehicle model")

    adapt_sec = _section(raw, "adaptation", _ADAPTATION_KEYS)
    enabled = _get_bool(adapt_sec, "adaptation", "enabled", defaults)
    tau_p = _get_num(adapt_sec, "adaptation", "tau_p", defaults)
    if not 0.0 < tau_p < 1.0:
        raise ValidationError(f"adaptation.tau_p must lie in (0,1), got {tau_p}")
    a_s = _get_num(adapt_sec, "adaptation", "a_s", defaults)
    sigmoid = _get_str(adapt_sec, "adaptation", "sigmoid", None, defaults)
    start_time = adapt_sec.get("start_time_s")
    if start_time is not None and not isinstance(start_time, (int, float)):
        raise ValidationError("adaptation.start_time_s must be a number")
    try:
        adaptation = AdaptationParams(enabled=enabled, tau_p=tau_p, a_s=a_s,
                                      sigmoid=sigmoid, start_time=start_time)
    except ValueError as exc:
        raise ValidationError(f"adaptation: {exc}") from exc

    events = []
    for idx, ev in enumerate(raw.get("events", [])):
        if not isinstance(ev, dict):
            raise ValidationError("events must be [[events]] tables")
        unknown = set(ev) - _EVENT_KEYS
        if unknown:
            raise ValidationError(f"events[{idx}]: unknown keys {sorted(unknown)}")
        for key in _EVENT_KEYS:
            if key not in ev:
                raise ValidationError(f"events[{idx}]: missing key {key!r}")
        if ev["type"] != "lose_agent":
            raise ValidationError(f"events[{idx}]: unsupported type {ev['type']!r}")
        events.append(LossEvent(time=float(ev["t_s"]), lost_agent=ev["agent"]))

    scenario = Scenario(
        name=name,
        model=kind,
        agent_ids=tuple(agents),
        agent_params=tuple([params] * len(agents)),
        desired_shifts=tuple(float(v) for v in shifts),
        adaptation=adaptation,
        events=tuple(events),
        duration=float(duration),
        dt=float(dt),
        seed=int(seed),
        record_period=float(record_period),
        initial_phases=initial,
        vehicle=vehicle,
        defaults_applied=tuple(defaults),
    )
    try:
        scenario.validate()
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    return scenario


def write_scenario(scenario: Scenario, path) -> None:
    """Serialize a scenario back to the file dialect (all keys explicit)."""
    pp = scenario.agent_params[0]
    lines = [
        "[scenario]",
        f'name = "{scenario.name}"',
        f"duration_s = {_fmt(scenario.duration)}",
        f"dt_s = {_fmt(scenario.dt)}",
        f"seed = {scenario.seed}",
        f"record_period_s = {_fmt(scenario.record_period)}",
        "",
        "[formation]",
        f"agents = [{', '.join(str(a) for a in scenario.agent_ids)}]",
        f"desired_shifts_rad = [{', '.join(_fmt(v) for v in scenario.desired_shifts)}]",
        f"orbit_radius_m = {_fmt(pp.rho)}",
        f"nominal_speed_mps = {_fmt(pp.v_nominal)}",
        f"v_f_mps = {_fmt(pp.v_f)}",
        f"k_theta = {_fmt(pp.k_theta)}",
        f'initial_phases = "{scenario.initial_phases.mode}"',
    ]
    if scenario.initial_phases.mode == "explicit":
        lines.append(
            f"phases_rad = [{', '.join(_fmt(v) for v in scenario.initial_phases.values)}]")
    else:
        lines.append(f"max_jitter_rad = {_fmt(scenario.initial_phases.max_jitter)}")
    lines += ["", "[model]", f'kind = "{scenario.model}"']
    if scenario.vehicle is not None:
        g = scenario.vehicle.guidance
        lines += [
            f"k_r = {_fmt(g.k_r)}",
            f"heading_tc_s = {_fmt(g.heading_tc)}",
            f"speed_tc_s = {_fmt(g.speed_tc)}",
            f'orbit_direction = "{g.orbit_direction}"',
            f"v_min_mps = {_fmt(scenario.vehicle.v_min)}",
            f"v_max_mps = {_fmt(scenario.vehicle.v_max)}",
        ]
    a = scenario.adaptation
    lines += [
        "",
        "[adaptation]",
        f"enabled = {'true' if a.enabled else 'false'}",
        f"tau_p = {_fmt(a.tau_p)}",
        f"a_s = {_fmt(a.a_s)}",
        f'sigmoid = "{a.sigmoid}"',
    ]
    if a.start_time is not None:
        lines.append(f"start_time_s = {_fmt(a.start_time)}")
    for ev in scenario.events:
        lines += ["", "[[events]]", f"t_s = {_fmt(ev.time)}",
                  'type = "lose_agent"', f"agent = {ev.lost_agent}"]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(x) -> str:
    if isinstance(x, float) and x == int(x) and abs(x) < 1e15:
        return f"{x:.1f}"
    return repr(float(x)) if isinstance(x, float) else str(x)


def _section(raw, name, allowed) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ValidationError(f"[{name}] must be a table")
    unknown = set(sec) - allowed
    if unknown:
        raise ValidationError(f"[{name}]: unknown keys {sorted(unknown)}")
    return sec


def _get_num(sec, section, key, defaults):
    if key in sec:
        val = sec[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ValidationError(f"{section}.{key} must be a number, got {val!r}")
        return float(val)
    val = _DEFAULTS[key]
    defaults.append(f"{section}.{key} = {val!r} (default)")
    return float(val)


def _get_int(sec, section, key, defaults):
    if key in sec:
        val = sec[key]
        if isinstance(val, bool) or not isinstance(val, int):
            raise ValidationError(f"{section}.{key} must be an integer, got {val!r}")
        return val
    val = _DEFAULTS[key]
    defaults.append(f"{section}.{key} = {val!r} (default)")
    return val


def _get_bool(sec, section, key, defaults):
    if key in sec:
        val = sec[key]
        if not isinstance(val, bool):
            raise ValidationError(f"{section}.{key} must be true or false, got {val!r}")
        return val
    val = _DEFAULTS[key]
    defaults.append(f"{section}.{key} = {val!r} (default)")
    return val


def _get_str(sec, section, key, fallback, defaults):
    if key in sec:
        val = sec[key]
        if not isinstance(val, str):
            raise ValidationError(f"{section}.{key} must be a string, got {val!r}")
        return val
    if fallback is not None:
        defaults.append(f"{section}.{key} = {fallback!r} (default)")
        return fallback
    val = _DEFAULTS[key]
    defaults.append(f"{section}.{key} = {val!r} (default)")
    return val
