"""Static SVG charts of recorded traces."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .angles import wrap_angle
from .engine import Trace


def plot_trace(trace: Trace, out_dir, stem: str = None) -> list:
    """Emit the four standard charts; returns the written file paths.

    Charts: per-copy shift errors, agent speeds, desired-copy values, and
    the objective E with the potential V on a log scale.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or str(trace.params.get("scenario.name", "trace"))
    t = trace.times
    agents = trace.params["formation.agents"]
    edges = [c[len("shift_"):-len("_rad")] for c in trace.columns
             if c.startswith("shift_") and c.endswith("_rad")]
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for key in edges:
        tail, head = key.split("_")
        shift = trace.column(f"shift_{key}_rad")
        for agent in (tail, head):
            desired = trace.column(f"desired_{key}_{agent}_rad")
            err = wrap_angle(shift - desired)
            ax.plot(t, err, label=f"p{tail},{head} vs copy at {agent}", lw=1.0)
    ax.set_xlabel("time, s")
    ax.set_ylabel("shift error, rad")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    written.append(_save(fig, out_dir / f"{stem}_phase_errors.svg"))

    fig, ax = plt.subplots(figsize=(7, 4))
    for a in agents:
        ax.plot(t, trace.column(f"speed_{a}_mps"), label=f"agent {a}", lw=1.0)
    ax.set_xlabel("time, s")
    ax.set_ylabel("speed, m/s")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    written.append(_save(fig, out_dir / f"{stem}_speeds.svg"))

    fig, ax = plt.subplots(figsize=(7, 4))
    for key in edges:
        tail, head = key.split("_")
        ax.plot(t, trace.column(f"shift_{key}_rad"), lw=1.0, label=f"p{tail},{head}")
        for agent in (tail, head):
            ax.plot(t, trace.column(f"desired_{key}_{agent}_rad"), lw=0.8, ls="--",
                    label=f"copy at {agent} (edge {tail},{head})")
    ax.set_xlabel("time, s")
    ax.set_ylabel("shift / desired copy, rad")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    written.append(_save(fig, out_dir / f"{stem}_desired_copies.svg"))

    fig, ax = plt.subplots(figsize=(7, 4))
    for name in ("E", "V"):
        vals = np.maximum(trace.column(name), 1e-300)
        ax.semilogy(t, vals, label=name, lw=1.0)
    ax.set_xlabel("time, s")
    ax.set_ylabel("objective / potential")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    written.append(_save(fig, out_dir / f"{stem}_energy.svg"))
    return written


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
