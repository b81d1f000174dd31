"""Deterministic fixed-step simulation of formations with loss events.

A scenario fixes everything: agents, desired shifts, adaptation settings,
loss events, integrator grid and seed.  Running it integrates the coupled
state (phases or vehicles plus desired-shift copies) with classical
Runge-Kutta, applies losses at step boundaries with survivor state carried
over continuously, and records a fixed-width trace.  The module also hosts
the two equilibrium oracles: a closed form for uniform parameters and a
brute-force numeric root search.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .adaptation import AdaptationParams, sigmoid_eval
from .angles import wrap_angle
from .dynamics import AgentParams, coupling_potential, pattern_rates_from_pattern
from .errors import NumericError, ValidationError
from .fault import apply_agent_loss, consistency_report
from .topology import (
    DesiredCopies,
    InteractionTopology,
    build_chain_topology,
    coupling_residuals,
    pattern_energy,
)
from .vehicle import GuidanceParams

INITIAL_PHASE_MODES = ("equispaced_perturbed", "pattern_perturbed", "explicit")
DEFAULT_JITTER = 0.3
_GRID_TOL = 1e-9


@dataclass(frozen=True)
class InitialPhases:
    """How the run seeds its starting phases.

    equispaced_perturbed spaces agents 2*pi/n apart; pattern_perturbed
    starts on a configuration realizing the desired shifts.  Both add
    seed-driven uniform jitter of at most ``max_jitter``.  explicit uses
    ``values`` verbatim.
    """

    mode: str = "equispaced_perturbed"
    max_jitter: float = DEFAULT_JITTER
    values: tuple = None

    def __post_init__(self):
        if self.mode not in INITIAL_PHASE_MODES:
            raise ValidationError(
                f"initial_phases.mode must be one of {INITIAL_PHASE_MODES}, got {self.mode!r}")
        if self.max_jitter < 0:
            raise ValidationError("initial_phases.max_jitter must be non-negative")
        if self.mode == "explicit" and self.values is None:
            raise ValidationError("explicit initial phases need a value list")


@dataclass(frozen=True)
class VehicleConfig:
    """Vehicle-model extras: guidance loops and hard speed limits."""

    guidance: GuidanceParams = field(default_factory=GuidanceParams)
    v_min: float = 6.0
    v_max: float = 20.0

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise ValidationError("vehicle v_min must be below v_max")


@dataclass(frozen=True)
class Scenario:
    """Complete, declarative description of one simulation run."""

    name: str
    agent_ids: tuple
    agent_params: tuple
    desired_shifts: tuple
    model: str = "phase"
    adaptation: AdaptationParams = field(default_factory=AdaptationParams)
    events: tuple = ()
    duration: float = 400.0
    dt: float = 0.01
    seed: int = 0
    record_period: float = 0.5
    initial_phases: InitialPhases = field(default_factory=InitialPhases)
    vehicle: VehicleConfig = None
    defaults_applied: tuple = ()

    def validate(self) -> None:
        """Raise ValidationError on the first violated constraint."""
        n = len(self.agent_ids)
        if self.model not in ("phase", "vehicle"):
            raise ValidationError(f"model must be 'phase' or 'vehicle', got {self.model!r}")
        if n < 2:
            raise ValidationError(f"formation needs at least 2 agents, got {n}")
        if len(set(self.agent_ids)) != n:
            raise ValidationError("agent ids must be distinct")
        if len(self.agent_params) != n:
            raise ValidationError(f"need {n} agent parameter sets, got {len(self.agent_params)}")
        if len(self.desired_shifts) != n - 1:
            raise ValidationError(
                f"desired_shifts must have agents-1 = {n - 1} entries, got {len(self.desired_shifts)}")
        if not all(math.isfinite(v) for v in self.desired_shifts):
            raise ValidationError("desired_shifts must be finite")
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.duration < 0:
            raise ValidationError(f"duration must be non-negative, got {self.duration}")
        if self.record_period < self.dt:
            raise ValidationError(
                f"record_period ({self.record_period}) must be at least dt ({self.dt})")
        _require_on_grid(self.record_period, self.dt, "record_period")
        _require_on_grid(self.duration, self.dt, "duration")
        if self.initial_phases.mode == "explicit":
            vals = self.initial_phases.values
            if len(vals) != n:
                raise ValidationError(f"explicit initial phases need {n} values, got {len(vals)}")
            if not all(math.isfinite(v) for v in vals):
                raise ValidationError("explicit initial phases must be finite")
        if self.model == "vehicle":
            if self.vehicle is None:
                raise ValidationError("vehicle model requires a vehicle configuration")
            for pp in self.agent_params:
                if not self.vehicle.v_min <= pp.v_nominal <= self.vehicle.v_max:
                    raise ValidationError(
                        f"nominal speed {pp.v_nominal} outside vehicle limits "
                        f"[{self.vehicle.v_min}, {self.vehicle.v_max}]")
        start = self.adaptation.start_time
        if start is not None and start < 0:
            raise ValidationError(f"adaptation start_time must be non-negative, got {start}")
        last_time = None
        for ev in self.events:
            if not 0.0 <= ev.time <= self.duration:
                raise ValidationError(
                    f"event time {ev.time} outside [0, {self.duration}]")
            _require_on_grid(ev.time, self.dt, f"event time {ev.time}")
            if last_time is not None and ev.time <= last_time:
                raise ValidationError("event times must be strictly increasing "
                                      "(simultaneous losses are not supported)")
            last_time = ev.time
        # structural dry-run: every loss must be legal when it happens
        self._structure_sequence()

    def _structure_sequence(self):
        """Topology/copy states at t=0 and after each event, in order."""
        top = build_chain_topology(self.agent_ids)
        copies = DesiredCopies.from_pattern(self.desired_shifts)
        seq = [(top, copies)]
        for ev in self.events:
            try:
                top, copies = apply_agent_loss(top, copies, ev.lost_agent)
            except Exception as exc:
                raise ValidationError(f"event at t={ev.time}: {exc}") from exc
            seq.append((top, copies))
        return seq

    def adaptation_start(self) -> float:
        """Resolved activation time: configured, else first loss, else zero."""
        if self.adaptation.start_time is not None:
            return self.adaptation.start_time
        if self.events:
            return self.events[0].time
        return 0.0

    def effective_params(self) -> dict:
        """Every effective parameter as JSON-ready primitives, stably ordered."""
        out = {
            "scenario.name": self.name,
            "scenario.model": self.model,
            "scenario.duration_s": self.duration,
            "scenario.dt_s": self.dt,
            "scenario.seed": self.seed,
            "scenario.record_period_s": self.record_period,
            "formation.agents": list(self.agent_ids),
            "formation.desired_shifts_rad": [float(v) for v in self.desired_shifts],
            "formation.orbit_radius_m": [pp.rho for pp in self.agent_params],
            "formation.nominal_speed_mps": [pp.v_nominal for pp in self.agent_params],
            "formation.v_f_mps": [pp.v_f for pp in self.agent_params],
            "formation.k_theta": [pp.k_theta for pp in self.agent_params],
            "formation.omega_radps": [pp.omega for pp in self.agent_params],
            "formation.initial_phase_mode": self.initial_phases.mode,
            "formation.initial_max_jitter_rad": self.initial_phases.max_jitter,
            "adaptation.enabled": self.adaptation.enabled,
            "adaptation.tau_p": self.adaptation.tau_p,
            "adaptation.a_s": self.adaptation.a_s,
            "adaptation.sigmoid": self.adaptation.sigmoid,
            "adaptation.start_time_s": self.adaptation_start(),
            "events": [[ev.time, "lose_agent", ev.lost_agent] for ev in self.events],
        }
        if self.initial_phases.values is not None:
            out["formation.initial_phases_rad"] = [float(v) for v in self.initial_phases.values]
        if self.vehicle is not None:
            g = self.vehicle.guidance
            out.update({
                "vehicle.k_r": g.k_r,
                "vehicle.heading_tc_s": g.heading_tc,
                "vehicle.speed_tc_s": g.speed_tc,
                "vehicle.orbit_direction": g.orbit_direction,
                "vehicle.v_min_mps": self.vehicle.v_min,
                "vehicle.v_max_mps": self.vehicle.v_max,
            })
        return out


def _require_on_grid(value, dt, label):
    steps = value / dt
    if abs(steps - round(steps)) > _GRID_TOL * max(1.0, abs(steps)):
        raise ValidationError(f"{label} must be an integer multiple of dt={dt}")


@dataclass(frozen=True)
class Trace:
    """Recorded time series with a fixed column layout and its provenance."""

    columns: tuple
    data: np.ndarray
    params: dict

    @property
    def times(self) -> np.ndarray:
        return self.data[:, 0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(f"no column {name!r}") from None

    def last(self, name: str) -> float:
        return float(self.column(name)[-1])


def step_rk4(f, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical four-stage Runge-Kutta step of y' = f(t, y)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = f(t, y)
    k2 = f(t + dt / 2.0, y + (dt / 2.0) * k1)
    k3 = f(t + dt / 2.0, y + (dt / 2.0) * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _edge_key(edge):
    return f"{edge[0]}_{edge[1]}"


def trace_columns(scenario: Scenario) -> tuple:
    """Column layout implied by a scenario: stable across the whole run.

    Agents come from the initial formation; edges are the initial chain
    edges followed by any bridging edges that loss events introduce, in
    event order.  Entries that do not exist in the current epoch are NaN.
    """
    structures = scenario._structure_sequence()
    edges = list(structures[0][0].edges)
    for top, _ in structures[1:]:
        for e in top.edges:
            if e not in edges:
                edges.append(e)
    cols = ["time_s"]
    for a in scenario.agent_ids:
        cols += [f"phase_{a}_rad", f"rate_{a}_radps", f"speed_{a}_mps", f"x_{a}_rad"]
    cols += [f"shift_{_edge_key(e)}_rad" for e in edges]
    for e in edges:
        cols += [f"desired_{_edge_key(e)}_{e[0]}_rad", f"desired_{_edge_key(e)}_{e[1]}_rad"]
    cols += ["E", "V"]
    return tuple(cols)


def initial_phase_values(scenario: Scenario) -> np.ndarray:
    """Starting phases per the scenario's mode, jitter and seed."""
    n = len(scenario.agent_ids)
    ip = scenario.initial_phases
    if ip.mode == "explicit":
        return np.array(ip.values, dtype=float)
    rng = np.random.default_rng(scenario.seed)
    jitter = rng.uniform(-ip.max_jitter, ip.max_jitter, n) if ip.max_jitter > 0 else np.zeros(n)
    if ip.mode == "equispaced_perturbed":
        base = np.arange(n) * (2.0 * np.pi / n)
    else:  # pattern_perturbed
        base = np.concatenate([[0.0], np.cumsum(np.array(scenario.desired_shifts, dtype=float))])
    return base + jitter


class _Recorder:
    """Accumulates full-width rows, NaN outside the current epoch's structure."""

    def __init__(self, scenario: Scenario):
        self.columns = trace_columns(scenario)
        self.index = {c: i for i, c in enumerate(self.columns)}
        self.rows = []

    def emit(self, t, agent_ids, edges, phase, rate, speed, x, p, copies, energy, potential):
        row = np.full(len(self.columns), np.nan)
        row[0] = t
        for i, a in enumerate(agent_ids):
            row[self.index[f"phase_{a}_rad"]] = phase[i]
            row[self.index[f"rate_{a}_radps"]] = rate[i]
            row[self.index[f"speed_{a}_mps"]] = speed[i]
            row[self.index[f"x_{a}_rad"]] = x[i]
        for k, e in enumerate(edges):
            key = _edge_key(e)
            row[self.index[f"shift_{key}_rad"]] = p[k]
            row[self.index[f"desired_{key}_{e[0]}_rad"]] = copies.tail[k]
            row[self.index[f"desired_{key}_{e[1]}_rad"]] = copies.head[k]
        row[self.index["E"]] = energy
        row[self.index["V"]] = potential
        self.rows.append(row)


class _PhaseEpoch:
    """Vectorized phase-model dynamics for one fixed topology."""

    state_label = "agent phases"

    def __init__(self, scenario, topology, params_list, q0, copies):
        self.topology = topology
        self.n = topology.n_agents
        self.m = topology.n_edges
        self.tails = topology.tail_indices()
        self.heads = topology.head_indices()
        self.T = np.zeros((self.n, self.m))
        self.H = np.zeros((self.n, self.m))
        self.T[self.tails, np.arange(self.m)] = 1.0
        self.H[self.heads, np.arange(self.m)] = 1.0
        self.omega = np.array([pp.omega for pp in params_list])
        self.gain = np.array([pp.v_f * 2.0 / (np.pi * pp.rho) for pp in params_list])
        self.k = np.array([pp.k_theta for pp in params_list])
        self.rho = np.array([pp.rho for pp in params_list])
        self.vnom = np.array([pp.v_nominal for pp in params_list])
        self.params_list = list(params_list)
        self.adapt = scenario.adaptation
        self.t_adapt = scenario.adaptation_start()
        self.y = np.concatenate([q0, copies.tail, copies.head])

    def split(self, y):
        n, m = self.n, self.m
        return y[:n], y[n:n + m], y[n + m:]

    def copies_of(self, y) -> DesiredCopies:
        _, d_tail, d_head = self.split(y)
        return DesiredCopies(d_tail, d_head)

    def deriv(self, t, y):
        n, m = self.n, self.m
        q, d_tail, d_head = y[:n], y[n:n + m], y[n + m:]
        p = q[self.heads] - q[self.tails]
        err_tail = wrap_angle(p - d_tail)
        err_head = wrap_angle(p - d_head)
        res = self.T @ err_tail - self.H @ err_head
        qdot = self.omega + self.gain * np.arctan(self.k * res)
        if self.adapt.enabled and t >= self.t_adapt:
            dd_tail = self.adapt.a_s * sigmoid_eval(self.adapt.sigmoid, self.adapt.tau_p * err_tail)
            dd_head = self.adapt.a_s * sigmoid_eval(self.adapt.sigmoid, self.adapt.tau_p * err_head)
        else:
            dd_tail = np.zeros(m)
            dd_head = np.zeros(m)
        return np.concatenate([qdot, dd_tail, dd_head])

    def observables(self, t, y):
        q, d_tail, d_head = self.split(y)
        p = q[self.heads] - q[self.tails]
        err_tail = wrap_angle(p - d_tail)
        err_head = wrap_angle(p - d_head)
        res = self.T @ err_tail - self.H @ err_head
        coupling = self.gain * np.arctan(self.k * res)
        rate = self.omega + coupling
        speed = self.vnom + self.rho * coupling
        x = -(self.topology.incidence.T @ p)
        copies = DesiredCopies(d_tail, d_head)
        energy = pattern_energy(self.topology, p, copies)
        potential = coupling_potential(res, self.params_list)
        return q, rate, speed, x, p, copies, energy, potential

    def restrict(self, y, survivor_positions, new_copies):
        q = y[:self.n][survivor_positions]
        return np.concatenate([q, new_copies.tail, new_copies.head])


class _VehicleEpoch:
    """Vectorized closed-loop vehicle dynamics for one fixed topology.

    The target sits at the origin.  Geometric phases are unwrapped against
    per-vehicle anchors refreshed once per step; within a step the motion
    is far below half a turn, so stage evaluations reuse the anchor safely.
    """

    state_label = "vehicle states"

    def __init__(self, scenario, topology, params_list, q0, copies, speeds=None,
                 states=None):
        self.topology = topology
        self.n = topology.n_agents
        self.m = topology.n_edges
        self.tails = topology.tail_indices()
        self.heads = topology.head_indices()
        self.T = np.zeros((self.n, self.m))
        self.H = np.zeros((self.n, self.m))
        self.T[self.tails, np.arange(self.m)] = 1.0
        self.H[self.heads, np.arange(self.m)] = 1.0
        self.omega = np.array([pp.omega for pp in params_list])
        self.gain = np.array([pp.v_f * 2.0 / (np.pi * pp.rho) for pp in params_list])
        self.k = np.array([pp.k_theta for pp in params_list])
        self.rho = np.array([pp.rho for pp in params_list])
        self.vnom = np.array([pp.v_nominal for pp in params_list])
        self.params_list = list(params_list)
        self.adapt = scenario.adaptation
        self.t_adapt = scenario.adaptation_start()
        cfg = scenario.vehicle
        self.g = cfg.guidance
        self.sign = self.g.direction_sign
        self.v_min, self.v_max = cfg.v_min, cfg.v_max
        if states is None:
            px = self.rho * np.cos(q0)
            py = self.rho * np.sin(q0)
            psi = q0 + self.sign * np.pi / 2.0
            v = self.vnom.copy() if speeds is None else np.asarray(speeds, dtype=float)
            states = np.concatenate([px, py, psi, v])
        self.anchor = np.asarray(q0, dtype=float).copy()
        self.y = np.concatenate([states, copies.tail, copies.head])

    def split(self, y):
        n, m = self.n, self.m
        return (y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:4 * n],
                y[4 * n:4 * n + m], y[4 * n + m:])

    def copies_of(self, y) -> DesiredCopies:
        parts = self.split(y)
        return DesiredCopies(parts[4], parts[5])

    def _phases(self, px, py):
        theta = np.arctan2(py, px)
        return self.anchor + wrap_angle(theta - self.anchor)

    def deriv(self, t, y):
        px, py, psi, v, d_tail, d_head = self.split(y)
        r = np.hypot(px, py)
        theta = np.arctan2(py, px)
        q = self.anchor + wrap_angle(theta - self.anchor)
        p = q[self.heads] - q[self.tails]
        err_tail = wrap_angle(p - d_tail)
        err_head = wrap_angle(p - d_head)
        res = self.T @ err_tail - self.H @ err_head
        coupling = self.gain * np.arctan(self.k * res)
        v_cmd = np.clip(self.vnom + self.rho * coupling, self.v_min, self.v_max)
        course = theta + self.sign * (np.pi / 2.0 + np.arctan(self.g.k_r * (r - self.rho) / self.rho))
        om_cmd = self.sign * v / np.maximum(r, 1e-6) + wrap_angle(course - psi) / self.g.heading_tc
        dv = (v_cmd - v) / self.g.speed_tc
        dv = np.where((v <= self.v_min) & (dv < 0.0), 0.0, dv)
        dv = np.where((v >= self.v_max) & (dv > 0.0), 0.0, dv)
        if self.adapt.enabled and t >= self.t_adapt:
            dd_tail = self.adapt.a_s * sigmoid_eval(self.adapt.sigmoid, self.adapt.tau_p * err_tail)
            dd_head = self.adapt.a_s * sigmoid_eval(self.adapt.sigmoid, self.adapt.tau_p * err_head)
        else:
            dd_tail = np.zeros(self.m)
            dd_head = np.zeros(self.m)
        return np.concatenate([v * np.cos(psi), v * np.sin(psi), om_cmd, dv, dd_tail, dd_head])

    def after_step(self, y):
        px, py = y[:self.n], y[self.n:2 * self.n]
        self.anchor = self._phases(px, py)

    def observables(self, t, y):
        px, py, psi, v, d_tail, d_head = self.split(y)
        r = np.hypot(px, py)
        theta = np.arctan2(py, px)
        q = self.anchor + wrap_angle(theta - self.anchor)
        p = q[self.heads] - q[self.tails]
        err_tail = wrap_angle(p - d_tail)
        err_head = wrap_angle(p - d_head)
        res = self.T @ err_tail - self.H @ err_head
        # geometric phase rate: tangential speed over radius
        rate = (-np.sin(theta) * v * np.cos(psi) + np.cos(theta) * v * np.sin(psi)) / np.maximum(r, 1e-6)
        x = -(self.topology.incidence.T @ p)
        copies = DesiredCopies(d_tail, d_head)
        energy = pattern_energy(self.topology, p, copies)
        potential = coupling_potential(res, self.params_list)
        return q, rate, v, x, p, copies, energy, potential

    def restrict(self, y, survivor_positions, new_copies):
        n = self.n
        keep = np.asarray(survivor_positions, dtype=int)
        states = np.concatenate([y[:n][keep], y[n:2 * n][keep],
                                 y[2 * n:3 * n][keep], y[3 * n:4 * n][keep]])
        self.anchor = self.anchor[keep]
        return np.concatenate([states, new_copies.tail, new_copies.head])


def run_scenario(scenario: Scenario) -> Trace:
    """Integrate a validated scenario and return its sampled trace."""
    scenario.validate()
    recorder = _Recorder(scenario)

    topology = build_chain_topology(scenario.agent_ids)
    copies = DesiredCopies.from_pattern(scenario.desired_shifts)
    params_list = list(scenario.agent_params)
    q0 = initial_phase_values(scenario)

    if scenario.model == "phase":
        epoch = _PhaseEpoch(scenario, topology, params_list, q0, copies)
    else:
        epoch = _VehicleEpoch(scenario, topology, params_list, q0, copies)

    dt = scenario.dt
    n_steps = round(scenario.duration / dt)
    record_every = round(scenario.record_period / dt)
    event_steps = {round(ev.time / dt): ev for ev in scenario.events}

    id_to_pos = {a: i for i, a in enumerate(scenario.agent_ids)}
    current_ids = list(scenario.agent_ids)

    y = epoch.y
    for i in range(n_steps + 1):
        t = i * dt
        if i in event_steps:
            ev = event_steps[i]
            old_copies = epoch.copies_of(y)
            new_topology, new_copies = apply_agent_loss(epoch.topology, old_copies, ev.lost_agent)
            survivors = [a for a in current_ids if a != ev.lost_agent]
            keep = [current_ids.index(a) for a in survivors]
            restricted = epoch.restrict(y, keep, new_copies)
            new_params = [params_list[id_to_pos[a]] for a in survivors]
            if scenario.model == "phase":
                epoch = _PhaseEpoch(scenario, new_topology, new_params,
                                    restricted[:len(survivors)], new_copies)
            else:
                nsv = len(survivors)
                epoch = _VehicleEpoch(scenario, new_topology, new_params,
                                      epoch.anchor, new_copies,
                                      states=restricted[:4 * nsv])
            y = epoch.y
            current_ids = survivors
        if i % record_every == 0:
            q, rate, speed, x, p, cps, energy, potential = epoch.observables(t, y)
            recorder.emit(t, current_ids, epoch.topology.edges,
                          q, rate, speed, x, p, cps, energy, potential)
        if i == n_steps:
            break
        y = step_rk4(epoch.deriv, t, y, dt)
        if not np.isfinite(y).all():
            bad = _diagnose_nonfinite(epoch, y)
            raise NumericError(f"non-finite state at t={t + dt:.6g}: {bad}")
        if hasattr(epoch, "after_step"):
            epoch.after_step(y)

    data = np.vstack(recorder.rows) if recorder.rows else np.empty((0, len(recorder.columns)))
    return Trace(columns=recorder.columns, data=data, params=scenario.effective_params())


def _diagnose_nonfinite(epoch, y):
    parts = epoch.split(y)
    if len(parts) == 3:
        names = ("agent phases", "tail desired copies", "head desired copies")
    else:
        names = ("vehicle x", "vehicle y", "vehicle heading", "vehicle speed",
                 "tail desired copies", "head desired copies")
    for name, arr in zip(names, parts):
        if not np.isfinite(arr).all():
            return f"non-finite values in {name}"
    return "non-finite values in state"


@dataclass(frozen=True)
class EquilibriumPrediction:
    """Closed-form (or numerically recovered) steady state of a fixed system.

    With uniform parameters every agent's coupling argument equals the
    common value ``delta`` and the whole formation shares one speed
    offset.  For non-uniform parameters only the shifts and per-agent
    speeds are reported (delta and speed_offset are None).
    """

    delta: float
    speed_offset: float
    steady_shifts: np.ndarray
    steady_speeds: np.ndarray


def predict_post_loss_equilibrium(topology: InteractionTopology, copies: DesiredCopies,
                                  params_list) -> EquilibriumPrediction:
    """Steady pattern of a chain with fixed (possibly stale) copies.

    For uniform parameters: zero net shift drift forces every coupling
    argument to one common value delta; summing residuals gives
    delta = -(sum of local targets)/n, and the shifts follow edge by edge.
    Non-uniform parameters defer to the numeric root search.
    """
    if isinstance(params_list, AgentParams):
        params_list = [params_list] * topology.n_agents
    params_list = list(params_list)
    if not topology.is_chain():
        raise NumericError("closed-form equilibrium requires a chain topology")
    uniform = all(pp == params_list[0] for pp in params_list)
    if not uniform:
        search = solve_equilibrium_numeric(topology, copies, params_list)
        if len(search.roots) != 1:
            raise NumericError(
                f"numeric equilibrium search found {len(search.roots)} roots; expected one")
        p = search.roots[0]
        res = coupling_residuals(topology, p, copies)
        gain = np.array([pp.v_f * 2.0 / np.pi for pp in params_list])
        k = np.array([pp.k_theta for pp in params_list])
        vnom = np.array([pp.v_nominal for pp in params_list])
        speeds = vnom + gain * np.arctan(k * res)
        return EquilibriumPrediction(None, None, p, speeds)

    pp = params_list[0]
    n = topology.n_agents
    sigma = consistency_report(copies, topology).imbalance
    delta = sigma / n
    speed_offset = pp.v_f * (2.0 / np.pi) * float(np.arctan(pp.k_theta * delta))
    shifts = np.empty(topology.n_edges)
    carry = 0.0  # running (p_{k-1} - head copy_{k-1})
    for k in range(topology.n_edges):
        shifts[k] = copies.tail[k] + delta + carry
        carry = shifts[k] - copies.head[k]
    # closing identity: the last agent's residual must equal delta too
    if abs(-carry - delta) > 1e-9:
        raise NumericError("equilibrium reconstruction failed to close the chain")
    speeds = np.full(n, pp.v_nominal + speed_offset)
    return EquilibriumPrediction(delta, speed_offset, shifts, speeds)


@dataclass(frozen=True)
class EquilibriumSearch:
    """Outcome of the multi-start numeric root search on the shift dynamics."""

    roots: tuple
    n_starts: int
    n_converged: int

    @property
    def inconclusive(self) -> bool:
        return self.n_converged == 0


def solve_equilibrium_numeric(topology: InteractionTopology, copies: DesiredCopies,
                              params_list, n_starts: int = 32, seed: int = 0,
                              spread: float = 2.0,
                              distinct_tol: float = 1e-4) -> EquilibriumSearch:
    """Root-solve the autonomous shift dynamics from many random starts.

    Starts scatter uniformly around the midpoint of the endpoint copies.
    Converged roots (shift-rate norm below 1e-10) are wrapped to the
    principal interval and deduplicated at ``distinct_tol``.  An empty
    root set is reported as inconclusive, never silently.
    """
    if isinstance(params_list, AgentParams):
        params_list = [params_list] * topology.n_agents
    params_list = list(params_list)

    def rates(p):
        return pattern_rates_from_pattern(topology, p, copies, params_list)

    base = 0.5 * (copies.tail + copies.head)
    rng = np.random.default_rng(seed)
    roots = []
    n_converged = 0
    for s in range(n_starts):
        p0 = base if s == 0 else base + rng.uniform(-spread, spread, topology.n_edges)
        sol = scipy.optimize.root(rates, p0, method="hybr", tol=1e-12)
        if not sol.success:
            continue
        root = wrap_angle(sol.x)
        if np.linalg.norm(rates(root), ord=np.inf) > 1e-10:
            continue
        n_converged += 1
        if not any(np.max(np.abs(root - r)) < distinct_tol for r in roots):
            roots.append(root)
    roots.sort(key=lambda r: tuple(r))
    return EquilibriumSearch(tuple(roots), n_starts, n_converged)
