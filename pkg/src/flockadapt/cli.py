"""Operator command line: run, predict, audit and plot.

Exit codes: 0 success, 2 validation problem, 3 numeric failure,
4 audit violation.  Set FLOCKADAPT_LOG=DEBUG|INFO|WARNING for verbosity.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .angles import wrap_angle
from .audit import audit_trace
from .engine import predict_post_loss_equilibrium, run_scenario
from .errors import NumericError, ValidationError
from .fault import apply_agent_loss
from .plotting import plot_trace
from .scenario_io import load_scenario
from .topology import DesiredCopies, build_chain_topology
from .trace_io import read_trace_csv, write_trace_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_AUDIT = 4

log = logging.getLogger("flockadapt")


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped inside the package (with or without suffix)."""
    from importlib.resources import files

    base = files("flockadapt") / "scenarios"
    candidate = name if name.endswith(".scenario") else f"{name}.scenario"
    path = Path(str(base / candidate))
    if not path.exists():
        available = sorted(p.name for p in Path(str(base)).glob("*.scenario"))
        raise ValidationError(f"no bundled scenario {name!r}; available: {available}")
    return path


def _resolve_scenario_arg(arg: str) -> Path:
    path = Path(arg)
    if path.exists():
        return path
    return bundled_scenario_path(arg)


def _load(args):
    scenario = load_scenario(_resolve_scenario_arg(args.scenario))
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "duration", None) is not None:
        overrides["duration"] = args.duration
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        scenario = replace(scenario, **overrides)
        scenario.validate()
    for note in scenario.defaults_applied:
        log.info("default applied: %s", note)
    return scenario


def cmd_run(args) -> int:
    scenario = _load(args)
    trace = run_scenario(scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{scenario.name}.csv"
    write_trace_csv(trace, csv_path)
    summary = _summarize(trace)
    summary_path = out_dir / f"{scenario.name}_summary.txt"
    summary_path.write_text(summary, encoding="utf-8")
    print(f"trace written to {csv_path}")
    print(summary, end="")
    return EXIT_OK


def _summarize(trace) -> str:
    agents = trace.params["formation.agents"]
    lines = [f"scenario: {trace.params['scenario.name']}",
             f"samples: {trace.data.shape[0]} (t = {trace.times[0]:g} .. {trace.times[-1]:g} s)"]
    for c in trace.columns:
        if c.startswith("shift_") and c.endswith("_rad"):
            key = c[len("shift_"):-len("_rad")]
            tail, head = key.split("_")
            shift = trace.column(c)[-1]
            if not np.isfinite(shift):
                continue
            for agent in (tail, head):
                desired = trace.column(f"desired_{key}_{agent}_rad")[-1]
                err = float(wrap_angle(shift - desired))
                lines.append(f"final shift error p{tail},{head} vs copy at {agent}: {err:+.6f} rad")
    for a in agents:
        speed = trace.column(f"speed_{a}_mps")[-1]
        if np.isfinite(speed):
            lines.append(f"final speed agent {a}: {speed:.4f} m/s")
    lines.append(f"final E: {trace.last('E'):.6g}")
    lines.append(f"final V: {trace.last('V'):.6g}")
    return "\n".join(lines) + "\n"


def cmd_predict(args) -> int:
    scenario = _load(args)
    topology = build_chain_topology(scenario.agent_ids)
    copies = DesiredCopies.from_pattern(scenario.desired_shifts)
    for ev in scenario.events:
        topology, copies = apply_agent_loss(topology, copies, ev.lost_agent)
    params_by_id = dict(zip(scenario.agent_ids, scenario.agent_params))
    params = [params_by_id[a] for a in topology.agent_ids]
    prediction = predict_post_loss_equilibrium(topology, copies, params)
    if prediction.delta is not None:
        print(f"balanced coupling argument delta: {prediction.delta:+.9f} rad")
        print(f"speed offset: {prediction.speed_offset:+.6f} m/s")
    print(f"steady cruise speeds (m/s): {np.array2string(prediction.steady_speeds, precision=6)}")
    for e, p in zip(topology.edges, prediction.steady_shifts):
        print(f"steady shift p{e[0]},{e[1]}: {p:.9f} rad")
    return EXIT_OK


def cmd_audit(args) -> int:
    trace = read_trace_csv(args.trace)
    report = audit_trace(trace)
    for name in report.checks_run:
        status = "ok" if not any(v.startswith(name + ":") for v in report.violations) else "FAIL"
        print(f"[{status}] {name}")
    for violation in report.violations:
        print(f"violation: {violation}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_AUDIT


def cmd_plot(args) -> int:
    trace = read_trace_csv(args.trace)
    stem = Path(args.trace).stem
    written = plot_trace(trace, args.out, stem=stem)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flockadapt",
        description="Simulate and analyze target-orbiting formations with agent loss.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a scenario and write trace + summary")
    run_p.add_argument("scenario", help="scenario file path or bundled scenario name")
    run_p.add_argument("-o", "--out", default=".", help="output directory")
    run_p.add_argument("--dt", type=float, default=None, help="override integrator step (s)")
    run_p.add_argument("--duration", type=float, default=None, help="override duration (s)")
    run_p.add_argument("--seed", type=int, default=None, help="override seed")
    run_p.set_defaults(func=cmd_run)

    pred_p = sub.add_parser("predict", help="print the equilibrium without simulating")
    pred_p.add_argument("scenario", help="scenario file path or bundled scenario name")
    pred_p.add_argument("--dt", type=float, default=None, help=argparse.SUPPRESS)
    pred_p.add_argument("--duration", type=float, default=None, help=argparse.SUPPRESS)
    pred_p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    pred_p.set_defaults(func=cmd_predict)

    audit_p = sub.add_parser("audit", help="re-check invariants on a recorded trace")
    audit_p.add_argument("trace", help="trace CSV path")
    audit_p.set_defaults(func=cmd_audit)

    plot_p = sub.add_parser("plot", help="emit SVG charts from a recorded trace")
    plot_p.add_argument("trace", help="trace CSV path")
    plot_p.add_argument("-o", "--out", default=".", help="output directory")
    plot_p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("FLOCKADAPT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
