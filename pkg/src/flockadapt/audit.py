"""Re-checks recorded traces against the invariants the engine promises.

The audit works purely from a trace file: the comment block provides every
parameter, the columns provide the data.  Tolerances account for the
9-significant-digit serialization; re-derived quantities are compared
against the propagated rounding bound, never against false exactness.
"""

from dataclasses import dataclass

import numpy as np

from .adaptation import AdaptationParams, lyapunov_rate
from .angles import wrap_angle
from .dynamics import AgentParams, coupling_potential
from .engine import Trace
from .errors import ValidationError
from .topology import DesiredCopies

_STEP_TOL = 1e-9


@dataclass(frozen=True)
class AuditReport:
    """Outcome of all audit checks on one trace."""

    checks_run: tuple
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def _ulp9(x):
    """Absolute rounding bound of a value stored with 9 significant digits."""
    mag = np.maximum(np.abs(x), 1e-30)
    return 10.0 ** (np.floor(np.log10(mag)) - 8.0)


class _TraceView:
    """Column access plus structure decoded from names and parameters."""

    def __init__(self, trace: Trace):
        self.trace = trace
        p = trace.params
        try:
            self.agent_ids = [a for a in p["formation.agents"]]
            self.model = p["scenario.model"]
            self.record_period = float(p["scenario.record_period_s"])
            self.omega = np.array(p["formation.omega_radps"], dtype=float)
            self.v_f = np.array(p["formation.v_f_mps"], dtype=float)
            self.rho = np.array(p["formation.orbit_radius_m"], dtype=float)
            self.k_theta = np.array(p["formation.k_theta"], dtype=float)
            self.v_nominal = np.array(p["formation.nominal_speed_mps"], dtype=float)
            self.adapt_enabled = bool(p["adaptation.enabled"])
            self.adapt_start = float(p["adaptation.start_time_s"])
            self.adapt = AdaptationParams(
                enabled=self.adapt_enabled,
                tau_p=float(p["adaptation.tau_p"]),
                a_s=float(p["adaptation.a_s"]),
                sigmoid=p["adaptation.sigmoid"],
                start_time=self.adapt_start,
            )
        except KeyError as exc:
            raise ValidationError(f"trace header is missing parameter {exc}") from exc
        self.times = trace.times
        # edges in column order, as (tail_id, head_id) strings matching agent ids
        self.edges = []
        for c in trace.columns:
            if c.startswith("shift_") and c.endswith("_rad"):
                tail, head = c[len("shift_"):-len("_rad")].split("_")
                self.edges.append((self._coerce(tail), self._coerce(head)))
        self.params_list = [
            AgentParams(omega=self.omega[i], rho=self.rho[i], v_f=self.v_f[i],
                        k_theta=self.k_theta[i], v_nominal=self.v_nominal[i])
            for i in range(len(self.agent_ids))
        ]

    def _coerce(self, token):
        return int(token) if token.lstrip("-").isdigit() else token

    def col(self, name):
        return self.trace.column(name)

    def phase(self, a):
        return self.col(f"phase_{a}_rad")

    def rate(self, a):
        return self.col(f"rate_{a}_radps")

    def speed(self, a):
        return self.col(f"speed_{a}_mps")

    def shift(self, e):
        return self.col(f"shift_{e[0]}_{e[1]}_rad")

    def desired(self, e, agent):
        return self.col(f"desired_{e[0]}_{e[1]}_{agent}_rad")


def audit_trace(trace: Trace) -> AuditReport:
    """Run every applicable audit and collect violations."""
    view = _TraceView(trace)
    checks = []
    violations = []

    def run(name, fn):
        checks.append(name)
        violations.extend(f"{name}: {msg}" for msg in fn(view))

    run("sampling-grid", _check_sampling)
    run("shift-phase-consistency", _check_shift_phase)
    run("shift-rate-identity", _check_shift_rate_identity)
    run("energy-rederivation", _check_energy)
    run("potential-rederivation", _check_potential)
    run("coupling-bounds", _check_bounds)
    if view.adapt_enabled:
        run("lyapunov-energy-monotone", _check_energy_monotone)
        run("lyapunov-rate-sign", _check_lyapunov_rate)
    elif view.model == "phase":
        # gradient-flow argument only covers the pure phase model
        run("potential-monotone", _check_potential_monotone)
    return AuditReport(checks_run=tuple(checks), violations=tuple(violations))


def _check_sampling(v):
    t = v.times
    if len(t) < 2:
        return []
    out = []
    dts = np.diff(t)
    if not (dts > 0).all():
        out.append("time stamps are not strictly increasing")
    if np.max(np.abs(dts - v.record_period)) > 1e-6:
        out.append(f"sampling period varies beyond tolerance "
                   f"(max {np.max(np.abs(dts - v.record_period)):.3g} from {v.record_period})")
    return out


def _segments(active_mask):
    """Runs of consecutive samples sharing one structure (nan pattern)."""
    keys = [tuple(row) for row in active_mask]
    segments = []
    start = 0
    for i in range(1, len(keys) + 1):
        if i == len(keys) or keys[i] != keys[start]:
            segments.append((start, i))
            start = i
    return segments


def _active_matrix(v):
    cols = [np.isfinite(v.shift(e)) for e in v.edges]
    return np.column_stack(cols) if cols else np.ones((len(v.times), 0), dtype=bool)


def _check_shift_phase(v):
    out = []
    for e in v.edges:
        shift = v.shift(e)
        diff = v.phase(e[1]) - v.phase(e[0])
        mask = np.isfinite(shift) & np.isfinite(diff)
        if not mask.any():
            continue
        tol = 4.0 * (_ulp9(v.phase(e[1])[mask]) + _ulp9(v.phase(e[0])[mask]) + _ulp9(shift[mask]))
        bad = np.abs(shift[mask] - diff[mask]) > tol
        if bad.any():
            i = int(np.flatnonzero(mask)[np.argmax(bad)])
            out.append(f"shift_{e[0]}_{e[1]} deviates from phase difference at t={v.times[i]:g}")
    return out


def _check_shift_rate_identity(v):
    """Centered differences of shifts must track rate differences."""
    out = []
    rp = v.record_period
    tol = 0.02 * rp * rp + 2e-5
    active = _active_matrix(v)
    for k, e in enumerate(v.edges):
        shift = v.shift(e)
        rate_diff = v.rate(e[1]) - v.rate(e[0])
        for lo, hi in _segments(active):
            if not active[lo, k] or hi - lo < 3:
                continue
            idx = np.arange(lo + 1, hi - 1)
            fd = (shift[idx + 1] - shift[idx - 1]) / (2.0 * rp)
            err = np.abs(fd - rate_diff[idx])
            if np.nanmax(err) > tol:
                i = idx[int(np.nanargmax(err))]
                out.append(
                    f"shift_{e[0]}_{e[1]} rate mismatch {np.nanmax(err):.3g} > {tol:.3g} "
                    f"at t={v.times[i]:g}")
    return out


def _edge_errors(v, i):
    """Wrapped (tail err, head err) arrays over active edges at sample i."""
    errs_tail, errs_head, active_edges = [], [], []
    for e in v.edges:
        p = v.shift(e)[i]
        if not np.isfinite(p):
            continue
        errs_tail.append(wrap_angle(p - v.desired(e, e[0])[i]))
        errs_head.append(wrap_angle(p - v.desired(e, e[1])[i]))
        active_edges.append(e)
    return np.array(errs_tail), np.array(errs_head), active_edges


def _rounding_bound_edge(v, e, i):
    p = v.shift(e)[i]
    return (_ulp9(p) + _ulp9(v.desired(e, e[0])[i]),
            _ulp9(p) + _ulp9(v.desired(e, e[1])[i]))


def _check_energy(v):
    out = []
    energy = v.col("E")
    for i in range(len(v.times)):
        et, eh, edges = _edge_errors(v, i)
        if len(edges) == 0:
            continue
        value = 0.25 * (np.sum(et**2) + np.sum(eh**2))
        bound = 0.0
        for k, e in enumerate(edges):
            dt_, dh_ = _rounding_bound_edge(v, e, i)
            bound += 0.5 * (np.abs(et[k]) * dt_ + np.abs(eh[k]) * dh_) + dt_**2 + dh_**2
        tol = max(1e-9 * abs(energy[i]), 4.0 * bound)
        if abs(value - energy[i]) > tol:
            out.append(f"recorded E={energy[i]:.6g} vs rederived {value:.6g} at t={v.times[i]:g}")
    return out


def _residuals_at(v, i):
    et, eh, edges = _edge_errors(v, i)
    idx = {a: j for j, a in enumerate(v.agent_ids)}
    res = np.zeros(len(v.agent_ids))
    dres = np.zeros(len(v.agent_ids))
    for k, e in enumerate(edges):
        dt_, dh_ = _rounding_bound_edge(v, e, i)
        res[idx[e[0]]] += et[k]
        res[idx[e[1]]] -= eh[k]
        dres[idx[e[0]]] += dt_
        dres[idx[e[1]]] += dh_
    alive = np.isfinite([v.phase(a)[i] for a in v.agent_ids])
    return res, dres, alive


def _check_potential(v):
    out = []
    potential = v.col("V")
    gain = v.v_f * 2.0 / (np.pi * v.rho)
    for i in range(len(v.times)):
        res, dres, alive = _residuals_at(v, i)
        if not alive.any():
            continue
        params_alive = [pp for pp, a in zip(v.params_list, alive) if a]
        value = coupling_potential(res[alive], params_alive)
        slope = gain[alive] * np.minimum(v.k_theta[alive] * np.abs(res[alive]), np.pi / 2.0)
        bound = float(np.sum(slope * dres[alive]))
        tol = max(1e-9 * abs(potential[i]), 4.0 * bound + 1e-15)
        if abs(value - potential[i]) > tol:
            out.append(f"recorded V={potential[i]:.6g} vs rederived {value:.6g} at t={v.times[i]:g}")
    return out


def _check_bounds(v):
    out = []
    for j, a in enumerate(v.agent_ids):
        rate = v.rate(a)
        mask = np.isfinite(rate)
        limit = v.v_f[j] / v.rho[j]
        if np.any(np.abs(rate[mask] - v.omega[j]) >= limit + 1e-9):
            out.append(f"agent {a}: |rate - omega| exceeded v_f/rho = {limit:.6g}")
        speed = v.speed(a)
        mask = np.isfinite(speed)
        if v.model == "phase":
            if np.any(np.abs(speed[mask] - v.v_nominal[j]) >= v.v_f[j] + 1e-9):
                out.append(f"agent {a}: speed left (v_nominal - v_f, v_nominal + v_f)")
        else:
            lo = float(v.trace.params.get("vehicle.v_min_mps", 0.0))
            hi = float(v.trace.params.get("vehicle.v_max_mps", np.inf))
            if np.any((speed[mask] < lo - 1e-6) | (speed[mask] > hi + 1e-6)):
                out.append(f"agent {a}: speed left [{lo}, {hi}]")
    return out


def _check_energy_monotone(v):
    out = []
    energy = v.col("E")
    sel = v.times >= v.adapt_start
    e_sel = energy[sel]
    t_sel = v.times[sel]
    rises = np.flatnonzero(np.diff(e_sel) > _STEP_TOL)
    for i in rises:
        out.append(f"E increases by {e_sel[i + 1] - e_sel[i]:.3g} "
                   f"between t={t_sel[i]:g} and t={t_sel[i + 1]:g}")
    return out


def _check_lyapunov_rate(v):
    out = []
    for i in range(len(v.times)):
        if v.times[i] < v.adapt_start:
            continue
        et, eh, edges = _edge_errors(v, i)
        if len(edges) == 0:
            continue
        p = np.zeros(len(edges))
        copies = DesiredCopies(-et, -eh)  # errors encode p - copy; shift reference to 0
        rate = lyapunov_rate(p, copies, v.adapt)
        if rate > 0.0:
            out.append(f"lyapunov rate {rate:.3g} > 0 at t={v.times[i]:g}")
    return out


def _check_potential_monotone(v):
    """Without adaptation and with uniform rates, V must not increase."""
    if len(set(v.omega)) != 1 or len(set(map(tuple, zip(v.v_f, v.rho, v.k_theta)))) != 1:
        return []
    out = []
    potential = v.col("V")
    active = _active_matrix(v)
    for lo, hi in _segments(active):
        seg = potential[lo:hi]
        rises = np.flatnonzero(np.diff(seg) > _STEP_TOL)
        for i in rises:
            out.append(f"V increases by {seg[i + 1] - seg[i]:.3g} "
                       f"between t={v.times[lo + i]:g} and t={v.times[lo + i + 1]:g}")
    return out
