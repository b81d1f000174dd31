"""Decentralized target-orbiting formations: simulation and analysis.

Agents hold relative orbit phases through bounded local couplings; losing
an agent leaves stale targets that settle into a balanced equilibrium with
an off-nominal cruise speed, and a slow sigmoid retuning of the desired
shifts removes the offset.  The package provides the topology algebra, the
phase and vehicle dynamics, the loss and adaptation laws, a deterministic
simulation engine with trace recording, equilibrium oracles, and a CLI.
"""

from .adaptation import AdaptationParams, desired_rates, lyapunov_rate, sigmoid_eval
from .angles import wrap_angle
from .dynamics import (
    AgentParams,
    CouplingCheck,
    autonomy_defect,
    check_coupling_conditions,
    coupling_function,
    coupling_potential,
    coupling_rate,
    pattern_rates,
    pattern_rates_from_pattern,
    phase_rates,
    potential_antiderivative,
)
from .engine import (
    EquilibriumPrediction,
    EquilibriumSearch,
    InitialPhases,
    Scenario,
    Trace,
    VehicleConfig,
    predict_post_loss_equilibrium,
    run_scenario,
    solve_equilibrium_numeric,
    step_rk4,
    trace_columns,
)
from .errors import (
    AuditViolation,
    FlockAdaptError,
    NumericError,
    TopologyError,
    ValidationError,
)
from .fault import ConsistencyReport, LossEvent, apply_agent_loss, consistency_report
from .topology import (
    DesiredCopies,
    FormationVectors,
    InteractionTopology,
    attainability_residual,
    build_chain_topology,
    build_topology,
    coupling_residuals,
    formation_vectors,
    interaction_for,
    interactions,
    pattern_energy,
    pattern_of,
)
from .vehicle import (
    GuidanceParams,
    VehicleState,
    orbit_guidance,
    phase_of_position,
    speed_command_from_coupling,
    vehicle_rates,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationParams", "AgentParams", "AuditViolation", "ConsistencyReport",
    "CouplingCheck", "DesiredCopies", "EquilibriumPrediction", "EquilibriumSearch",
    "FlockAdaptError", "FormationVectors", "GuidanceParams", "InitialPhases",
    "InteractionTopology", "LossEvent", "NumericError", "Scenario", "TopologyError",
    "Trace", "ValidationError", "VehicleConfig", "VehicleState",
    "apply_agent_loss", "attainability_residual", "autonomy_defect",
    "build_chain_topology", "build_topology", "check_coupling_conditions",
    "consistency_report", "coupling_function", "coupling_potential", "coupling_rate",
    "coupling_residuals", "desired_rates", "formation_vectors", "interaction_for",
    "interactions", "lyapunov_rate", "orbit_guidance", "pattern_energy",
    "pattern_of", "pattern_rates", "pattern_rates_from_pattern",
    "phase_of_position", "phase_rates", "potential_antiderivative",
    "predict_post_loss_equilibrium", "run_scenario", "sigmoid_eval",
    "solve_equilibrium_numeric", "speed_command_from_coupling", "step_rk4",
    "trace_columns", "vehicle_rates", "wrap_angle",
]
