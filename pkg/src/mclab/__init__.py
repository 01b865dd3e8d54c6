"""Trajectory simulator and channel analytics for noisy monitored quantum circuits."""

from .circuits import CircuitConfig, CircuitScript, TrajectoryRecord
from .ensemble import EnsembleResult, adaptive_ensemble, sweep_grid, u1_ensemble
from .statevec import ChargeMoments, StateVector

__all__ = [
    "ChargeMoments",
    "CircuitConfig",
    "CircuitScript",
    "EnsembleResult",
    "StateVector",
    "TrajectoryRecord",
    "adaptive_ensemble",
    "sweep_grid",
    "u1_ensemble",
]

__version__ = "0.1.0"
