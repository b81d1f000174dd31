"""Agent-level phase dynamics: saturated arctan couplings on formation residuals.

Every agent orbits at its nominal rate plus a bounded speed correction
driven by the mismatch between its formation vector and the local target.
The correction is a scaled arctan, so rates stay within +/- v_f/rho and
the closed loop is a gradient flow for uniform parameters.
"""

from dataclasses import dataclass

import numpy as np

from .topology import DesiredCopies, InteractionTopology, coupling_residuals, pattern_of


@dataclass(frozen=True)
class AgentParams:
    """Physical parameters of one orbiting agent.

    omega is the nominal orbit rate (rad/s), rho the orbit radius (m),
    v_f the largest speed the coupling may add or remove (m/s), k_theta
    the coupling sharpness, and v_nominal the cruising speed (m/s).
    """

    omega: float
    rho: float
    v_f: float
    k_theta: float
    v_nominal: float

    def __post_init__(self):
        if self.rho <= 0 or self.v_f <= 0 or self.k_theta <= 0 or self.v_nominal <= 0:
            raise ValueError("rho, v_f, k_theta and v_nominal must all be positive")

    @classmethod
    def default(cls) -> "AgentParams":
        """Reference parameter set: 100 m orbit at 12 m/s cruise."""
        return cls(omega=0.12, rho=100.0, v_f=3.0, k_theta=5.0, v_nominal=12.0)

    @classmethod
    def for_cruise(cls, rho: float = 100.0, v_nominal: float = 12.0,
                   v_f: float = 3.0, k_theta: float = 5.0) -> "AgentParams":
        """Uniform-cruise configuration with omega = v_nominal / rho."""
        return cls(omega=v_nominal / rho, rho=rho, v_f=v_f,
                   k_theta=k_theta, v_nominal=v_nominal)


def coupling_rate(u, params: AgentParams):
    """Added orbit rate (rad/s) for a formation residual u (rad).

    Returns v_f * (2 / (pi * rho)) * arctan(k_theta * u): odd, strictly
    increasing, and bounded in (-v_f/rho, +v_f/rho), which caps the speed
    correction and rules out windup.
    """
    u = np.asarray(u, dtype=float)
    out = params.v_f * (2.0 / (np.pi * params.rho)) * np.arctan(params.k_theta * u)
    return float(out) if out.ndim == 0 else out


def coupling_function(params: AgentParams):
    """The residual-to-rate map as a plain callable (for condition checks)."""
    return lambda u: coupling_rate(u, params)


def _params_arrays(params_list, n):
    if isinstance(params_list, AgentParams):
        params_list = [params_list] * n
    params_list = list(params_list)
    if len(params_list) != n:
        raise ValueError(f"expected {n} parameter sets, got {len(params_list)}")
    omega = np.array([pp.omega for pp in params_list])
    gain = np.array([pp.v_f * 2.0 / (np.pi * pp.rho) for pp in params_list])
    k = np.array([pp.k_theta for pp in params_list])
    return omega, gain, k


def phase_rates(topology: InteractionTopology, q, copies: DesiredCopies, params_list) -> np.ndarray:
    """Orbit-rate vector: nominal rate plus coupling on each wrapped residual.

    ``params_list`` is one AgentParams per agent (or a single set applied
    uniformly).  Residuals use per-edge errors wrapped to (-pi, pi].
    """
    q = np.asarray(q, dtype=float)
    p = pattern_of(topology, q)
    res = coupling_residuals(topology, p, copies)
    omega, gain, k = _params_arrays(params_list, topology.n_agents)
    return omega + gain * np.arctan(k * res)


def pattern_rates(topology: InteractionTopology, q, copies: DesiredCopies, params_list) -> np.ndarray:
    """Shift-rate vector: the incidence map applied to the phase rates."""
    return topology.incidence @ phase_rates(topology, q, copies, params_list)


def pattern_rates_from_pattern(topology: InteractionTopology, p, copies: DesiredCopies,
                               params_list) -> np.ndarray:
    """Shift rates as a function of the pattern alone.

    The phase dynamics depends on phases only through their pairwise
    shifts, so any phase vector realizing ``p`` gives the same answer;
    the pseudoinverse provides one.
    """
    p = np.asarray(p, dtype=float)
    q = topology.pinv @ p
    return pattern_rates(topology, q, copies, params_list)


def potential_antiderivative(u, params: AgentParams):
    """Closed-form antiderivative of the coupling, zero and minimal at u = 0."""
    u = np.asarray(u, dtype=float)
    k = params.k_theta
    gain = params.v_f * 2.0 / (np.pi * params.rho)
    val = gain * (u * np.arctan(k * u) - np.log1p((k * u) ** 2) / (2.0 * k))
    return float(val) if val.ndim == 0 else val


def coupling_potential(residuals, params_list) -> float:
    """Sum of coupling antiderivatives over per-agent residuals.

    Non-negative, zero exactly when every residual is zero.  Along
    trajectories with uniform parameters and uniform nominal rates this
    quantity never increases.
    """
    residuals = np.asarray(residuals, dtype=float)
    if isinstance(params_list, AgentParams):
        params_list = [params_list] * len(residuals)
    return float(sum(potential_antiderivative(u, pp)
                     for u, pp in zip(residuals, params_list)))


def autonomy_defect(topology: InteractionTopology, q, copies: DesiredCopies, params_list,
                    fd_step: float = 1e-6, rates_fn=None) -> float:
    """How far the shift dynamics is from being self-contained.

    Builds the Jacobian of the phase rates by central finite differences
    around ``q`` and returns the infinity norm of
    incidence @ J @ (I - pinv @ incidence).  The product vanishes exactly
    when shift rates depend on phases only through the shifts themselves.
    ``rates_fn`` (phases -> rates) overrides the built-in dynamics, e.g.
    to probe a deliberately corrupted variant.
    """
    q = np.asarray(q, dtype=float)
    n = topology.n_agents
    if rates_fn is None:
        rates_fn = lambda qq: phase_rates(topology, qq, copies, params_list)
    jac = np.zeros((n, n))
    for j in range(n):
        dq = np.zeros(n)
        dq[j] = fd_step
        jac[:, j] = (rates_fn(q + dq) - rates_fn(q - dq)) / (2.0 * fd_step)
    proj = np.eye(n) - topology.pinv @ topology.incidence
    defect = topology.incidence @ jac @ proj
    return float(np.linalg.norm(defect, ord=np.inf))


@dataclass(frozen=True)
class CouplingCheck:
    """Result of probing a coupling against the three equilibrium conditions."""

    zero_at_zero: bool
    positive_slope_at_zero: bool
    sign_condition: bool
    violations: tuple

    @property
    def all_passed(self) -> bool:
        return self.zero_at_zero and self.positive_slope_at_zero and self.sign_condition


def check_coupling_conditions(coupling, grid, fd_step: float = 1e-7,
                              atol: float = 1e-12) -> CouplingCheck:
    """Probe a scalar coupling on a symmetric grid of sample points.

    Checks f(0) = 0, a positive derivative at 0 (finite difference), and
    f(u) * u > 0 for every nonzero sample.  Scaling the coupling by any
    positive constant does not change the outcome.
    """
    grid = np.asarray(grid, dtype=float)
    violations = []

    f0 = float(coupling(0.0))
    zero_ok = abs(f0) <= atol
    if not zero_ok:
        violations.append(f"f(0) = {f0:g} is not zero")

    slope = (float(coupling(fd_step)) - float(coupling(-fd_step))) / (2.0 * fd_step)
    slope_ok = slope > 0.0
    if not slope_ok:
        violations.append(f"slope at zero = {slope:g} is not positive")

    sign_ok = True
    for u in grid:
        if u == 0.0:
            continue
        if float(coupling(u)) * u <= 0.0:
            sign_ok = False
            violations.append(f"f(u)*u <= 0 at u = {u:g}")
    return CouplingCheck(zero_ok, slope_ok, sign_ok, tuple(violations))
