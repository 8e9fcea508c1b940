"""probecast: deterministic twin of a winch-deployed water-column probe.

Physics plant, bang-bang winch depth controller with stall supervision,
mission execution, geo-tagged data products, and a live telemetry and
command endpoint for the browser operator console.
"""

__version__ = "0.1.0"

from .controller import (CommandRejected, ControlInput, ControllerMode,
                         ControllerState, acknowledge_fault,
                         command_target_depth, control_step, controller_for,
                         detect_stall, manual_step, set_underway)
from .datalog import (Profile, SampleRecord, assemble_profiles,
                      depth_normalized_summary)
from .environment import (Bathymetry, Environment, FieldProfile, Obstruction,
                          ScalarFieldModel, sample_fields)
from .mission import Cast, MissionPlan, MissionRunner, StationLeg, TransitLeg
from .plant import (PlantState, RelayCommand, SimulationFault, measure_depth,
                    step, terminal_velocity)
from .scenario import Scenario, build_session, load_scenario
from .session import ControllerConfig, SimSession
from .specs import (CompatibilityReport, PlatformSpec, ProbeSpec, SpecError,
                    StructuralCheck, WinchSpec, buoyant_force,
                    check_probe_compatibility, max_total_weight,
                    structural_safety_factor)
from .units import Quantity, Unit, UnitError, m_per_min, to_m_per_min

__all__ = [
    "CommandRejected", "ControlInput", "ControllerMode", "ControllerState",
    "acknowledge_fault", "command_target_depth", "control_step",
    "controller_for", "detect_stall", "manual_step", "set_underway",
    "Profile", "SampleRecord", "assemble_profiles",
    "depth_normalized_summary",
    "Bathymetry", "Environment", "FieldProfile", "Obstruction",
    "ScalarFieldModel", "sample_fields",
    "Cast", "MissionPlan", "MissionRunner", "StationLeg", "TransitLeg",
    "PlantState", "RelayCommand", "SimulationFault", "measure_depth", "step",
    "terminal_velocity",
    "Scenario", "build_session", "load_scenario",
    "ControllerConfig", "SimSession",
    "CompatibilityReport", "PlatformSpec", "ProbeSpec", "SpecError",
    "StructuralCheck", "WinchSpec", "buoyant_force",
    "check_probe_compatibility", "max_total_weight",
    "structural_safety_factor",
    "Quantity", "Unit", "UnitError", "m_per_min", "to_m_per_min",
    "__version__",
]
