"""One-dimensional DG hemodynamics solver."""
from .record import Station, WaveformRecord
from .riemann import (
    CouplingError,
    bifurcation_coupling,
    inlet_bc,
    invariants,
    outlet_bc,
    roe_interface,
)
from .simulation import FieldState, Mesh, Simulation, SimulationError, SolverConfig, initialize, run

__all__ = [
    "CouplingError",
    "FieldState",
    "Mesh",
    "Simulation",
    "SimulationError",
    "SolverConfig",
    "Station",
    "WaveformRecord",
    "bifurcation_coupling",
    "initialize",
    "inlet_bc",
    "invariants",
    "outlet_bc",
    "roe_interface",
    "run",
]
