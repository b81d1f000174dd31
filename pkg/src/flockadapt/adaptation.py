"""Slow retuning of desired-shift copies toward the measured shifts.

Each endpoint copy drifts toward the current shift of its own edge through
a bounded odd sigmoid.  The drift needs no remote state, keeps the law
decentralized, and is deliberately slower than the phase dynamics so the
formation tracks quasi-steady states while the pattern is being retuned.
"""

from dataclasses import dataclass

import numpy as np

from .angles import wrap_angle
from .topology import DesiredCopies

SIGMOID_KINDS = ("arctan", "tanh")


@dataclass(frozen=True)
class AdaptationParams:
    """Configuration of the desired-pattern retuning law.

    tau_p scales the error before the sigmoid and must lie in (0, 1);
    a_s scales the output (2/pi bounds the arctan rate by 1 rad/s);
    start_time of None means "from the first loss event".
    """

    enabled: bool = False
    tau_p: float = 0.1
    a_s: float = 2.0 / np.pi
    sigmoid: str = "arctan"
    start_time: float | None = None

    def __post_init__(self):
        if not 0.0 < self.tau_p < 1.0:
            raise ValueError(f"tau_p must lie in (0,1), got {self.tau_p}")
        if self.a_s <= 0.0:
            raise ValueError(f"a_s must be positive, got {self.a_s}")
        if self.sigmoid not in SIGMOID_KINDS:
            raise ValueError(f"unknown sigmoid {self.sigmoid!r}; pick one of {SIGMOID_KINDS}")


def sigmoid_eval(kind: str, z):
    """Evaluate the named odd, strictly increasing, bounded shaping function."""
    z = np.asarray(z, dtype=float)
    if kind == "arctan":
        out = np.arctan(z)
    elif kind == "tanh":
        out = np.tanh(z)
    else:
        raise ValueError(f"unknown sigmoid {kind!r}; pick one of {SIGMOID_KINDS}")
    return float(out) if out.ndim == 0 else out


def desired_rates(p, copies: DesiredCopies, params: AdaptationParams,
                  t: float = 0.0, start_time: float = 0.0):
    """Drift rate of every endpoint copy toward its edge's measured shift.

    Returns a pair of arrays (tail rates, head rates).  All-zero while
    adaptation is disabled or t is before the resolved start time.  Each
    copy chases only the shift of its own edge, through the wrapped error.
    """
    p = np.asarray(p, dtype=float)
    n = copies.n_edges
    if p.shape != (n,):
        raise ValueError(f"expected {n} shifts, got shape {p.shape}")
    if not params.enabled or t < start_time:
        return np.zeros(n), np.zeros(n)
    rate_tail = params.a_s * sigmoid_eval(params.sigmoid, params.tau_p * wrap_angle(p - copies.tail))
    rate_head = params.a_s * sigmoid_eval(params.sigmoid, params.tau_p * wrap_angle(p - copies.head))
    return rate_tail, rate_head


def lyapunov_rate(p, copies: DesiredCopies, params: AdaptationParams) -> float:
    """Rate of the interaction objective under retuning with shifts held fixed.

    Returns -sum over copies of err * a_s * sigmoid(tau_p * err) with
    wrapped errors; each term pairs an odd increasing function with its own
    argument, so the result is strictly negative whenever any copy mismatch
    is nonzero and exactly zero otherwise.
    """
    p = np.asarray(p, dtype=float)
    errs = np.concatenate([wrap_angle(p - copies.tail), wrap_angle(p - copies.head)])
    return -float(np.sum(errs * params.a_s * sigmoid_eval(params.sigmoid, params.tau_p * errs)))
