"""Time-discretized models: torus SDE, low/high toy system, spectral CGL."""

from .base import (BLOWUP_THRESHOLD, BlowUpError, LowHighModel, ModelContractError, PathSegment,
                   log_likelihood_ratio, noise_shift_drift, phi, recover_noise, simulate, simulate_path,
                   transition_logdensity)
from .cgl import CglModel, CollocationGrid, NoiseOperator, SpectralField, eigenvalues, sobolev_norm, step_cgl
from .config import ConfigError, PRESETS, build_model, trajectory_csv
from .energy import EnergyLedger, energy_path, energy_start, energy_update, running_integral
from .girsanov import girsanov_drift_binding, phi_reconstruct
from .lowhigh import LowHighToyModel, ToyCoefficients, step_lowhigh
from .torus import SineDrift, TorusModel, ZeroDrift, girsanov_drift_torus, step_torus, torus_delta, torus_dist
