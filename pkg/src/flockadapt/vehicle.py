"""Planar unicycle vehicles with orbit guidance for the closed-loop plant.

A four-state kinematic vehicle (position, heading, speed) flies a circular
loiter around a fixed target using a vector-field course law; the phase
controller's speed commands enter through a first-order speed loop.  Phase
is measured from geometry, so the coordination layer sees the plant the
way a real system would.
"""

from dataclasses import dataclass

import numpy as np

from .angles import unwrap_step, wrap_angle
from .dynamics import AgentParams

V_MIN_DEFAULT = 6.0
V_MAX_DEFAULT = 20.0


@dataclass(frozen=True)
class VehicleState:
    """Kinematic state in the target-centered frame."""

    x: float
    y: float
    heading: float
    speed: float


@dataclass(frozen=True)
class GuidanceParams:
    """Orbit-guidance configuration.

    k_r shapes how sharply the course field bends toward the orbit;
    heading_tc is the time constant of the first-order course-tracking
    loop that produces heading-rate commands; speed_tc the speed loop's.
    """

    k_r: float = 2.0
    heading_tc: float = 0.3
    speed_tc: float = 0.3
    orbit_direction: str = "ccw"

    def __post_init__(self):
        if self.k_r <= 0 or self.heading_tc <= 0 or self.speed_tc <= 0:
            raise ValueError("k_r, heading_tc and speed_tc must be positive")
        if self.orbit_direction not in ("ccw", "cw"):
            raise ValueError(f"orbit_direction must be 'ccw' or 'cw', got {self.orbit_direction!r}")

    @property
    def direction_sign(self) -> float:
        return 1.0 if self.orbit_direction == "ccw" else -1.0


def phase_of_position(position, target=(0.0, 0.0), previous_phase=None):
    """Azimuth of a vehicle about the target, continuous across turns.

    With ``previous_phase`` given, returns the unwrapped representative
    closest to it so consecutive samples never jump by 2*pi; otherwise the
    principal value in (-pi, pi].  The reference ray is +x, counterclockwise
    positive: (rho, 0) maps to 0 and (0, rho) to pi/2.
    """
    dx = float(position[0]) - float(target[0])
    dy = float(position[1]) - float(target[1])
    if dx == 0.0 and dy == 0.0:
        raise ValueError("vehicle position coincides with the target; phase undefined")
    angle = float(np.arctan2(dy, dx))
    if previous_phase is None:
        return angle
    return float(unwrap_step(angle, previous_phase))


def orbit_guidance(state: VehicleState, target, rho_desired: float, v_command: float,
                   params: GuidanceParams,
                   v_min: float = V_MIN_DEFAULT, v_max: float = V_MAX_DEFAULT):
    """Loiter law: (heading_rate_cmd, speed_cmd) steering onto the desired orbit.

    The desired course is the local tangent tilted toward the orbit by
    arctan(k_r * (r - rho) / rho); the heading-rate command combines the
    circular feedforward with the wrapped course error over heading_tc.
    On orbit and on course it reduces to speed/rho.  The speed command is
    the clamped pass-through of ``v_command``.
    """
    dx = state.x - float(target[0])
    dy = state.y - float(target[1])
    r = float(np.hypot(dx, dy))
    theta = float(np.arctan2(dy, dx))
    sign = params.direction_sign
    course_desired = theta + sign * (np.pi / 2.0 + np.arctan(params.k_r * (r - rho_desired) / rho_desired))
    feedforward = sign * state.speed / max(r, 1e-6)
    heading_rate_cmd = feedforward + float(wrap_angle(course_desired - state.heading)) / params.heading_tc
    speed_cmd = float(np.clip(v_command, v_min, v_max))
    return heading_rate_cmd, speed_cmd


def vehicle_rates(state: VehicleState, cmds, params: GuidanceParams,
                  v_min: float = V_MIN_DEFAULT, v_max: float = V_MAX_DEFAULT):
    """State derivatives (dx, dy, dheading, dspeed) under the given commands.

    Speed tracks its command through a first-order lag with time constant
    speed_tc and never integrates outside [v_min, v_max]; the heading rate
    follows the command directly (its lag lives in the course loop).
    """
    heading_rate_cmd, speed_cmd = cmds
    dv = (speed_cmd - state.speed) / params.speed_tc
    if (state.speed <= v_min and dv < 0.0) or (state.speed >= v_max and dv > 0.0):
        dv = 0.0
    return (
        state.speed * float(np.cos(state.heading)),
        state.speed * float(np.sin(state.heading)),
        float(heading_rate_cmd),
        float(dv),
    )


def speed_command_from_coupling(agent_coupling, params: AgentParams):
    """Linear speed command equivalent to an added orbit rate.

    An added angular rate at radius rho is an added linear speed of
    rho times that rate, so the command is v_nominal + rho * coupling,
    bounded inside (v_nominal - v_f, v_nominal + v_f).
    """
    coupling = np.asarray(agent_coupling, dtype=float)
    out = params.v_nominal + params.rho * coupling
    return float(out) if out.ndim == 0 else out
