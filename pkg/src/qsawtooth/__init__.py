"""Gate-level simulation of the quantum sawtooth map and its entanglement dynamics."""

__version__ = "0.1.0"

from .statevector import (DomainError, Gate, StateVector, basis_state, initial_state,
                          qft, uniform_state)
from .quantum_map import MapParams, NoiseModel, evolve, evolve_ensemble, map_step
from .entanglement import (NumericalError, concurrence, entanglement_of_formation,
                           reduce_top_two)
from .classical import estimate_D0, gamma_c, conductance
from .analysis import fit_exp_plateau, fit_noise_rate, residual_concurrence, scaling_fit
from .series import TimeSeries

__all__ = [
    "DomainError", "Gate", "StateVector", "basis_state", "initial_state", "qft", "uniform_state",
    "MapParams", "NoiseModel", "evolve", "evolve_ensemble", "map_step",
    "NumericalError", "concurrence", "entanglement_of_formation", "reduce_top_two",
    "estimate_D0", "gamma_c", "conductance",
    "fit_exp_plateau", "fit_noise_rate", "residual_concurrence", "scaling_fit",
    "TimeSeries",
]
