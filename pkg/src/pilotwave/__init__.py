"""Bohmian trajectories for time-dependent harmonic oscillators via Lewis-Riesenfeld invariants."""

from .classical import (BogoliubovParams, ClassicalMode, Family, OscillatorModel, analytic_mode,
                        combine_mode, make_model, numeric_mode, wronskian)
from .config import ScenarioConfig, parse_config, serialize_config
from .errors import (BogoliubovError, ConfigError, IntegrationError, ModelError, NodeProximityError,
                     PilotWaveError, QuadratureError, StencilError, TruncationError, WronskianError)
from .invariant import InvariantFrame, build_frame, reconstruct_mode, theta
from .trajectory import (TrajectoryPath, closed_form_coherent, closed_form_eigen, ensemble_run,
                         guidance_integrate, newtonian_residual)
from .wavefunction import QuantumState, coherent, eigenstate, quantum_potential

__all__ = [name for name in dir() if not name.startswith("_")]
