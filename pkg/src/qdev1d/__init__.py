"""qdev1d: 1D ballistic quantum-device simulation.

Scattering states of the stationary Schrödinger equation on a finite
segment with transparent (open) boundaries, discretized with a fourth-order
compact interior scheme and a choice of three boundary closures, coupled
self-consistently to a compact-discretized Neumann Poisson equation.
Includes thermal-equilibrium electron densities, Landauer-style terminal
currents, device presets, convergence-study harnesses, and a ``qdev`` CLI.
"""

from .constants import (BOLTZMANN_EV, CURRENT_A_PER_CM2, HBAR2_OVER_2M0,
                        kinetic_prefactor, thermal_energy)
from .devices import DeviceSpec, PiecewiseProfile, linear_ramp, mollifier
from .errors import (DegenerateDenominator, DepthExceeded,
                     MaxIterationsExceeded, OuterMaxIterations, ParseError,
                     PreconditionViolated, QdevError, SingularSystem,
                     UnknownPreset, ValidationError)
from .experiments import (ConvergenceReport, build_preset, convergence_study,
                          list_presets, mollify, oscillation_metric,
                          transmission_curve)
from .kernels import BACKEND, available_backends, tridiag_solve
from .numerics import (Grid, QuadratureSpec, adaptive_simpson,
                       sbp_identity_residual, solve_banded)
from .poisson import NewtonConfig, PoissonState, newton_solve
from .schrodinger import (Direction, ScatteringState, SchrodingerContext,
                          TbcScheme, dispersion_roots, solve_scattering)
from .selfconsistent import (SelfConsistentConfig, SelfConsistentResult,
                             bias_sweep, run_self_consistent)
from .statistics import (DensityProfile, ScatteringProvider, ThermalContext,
                         current_density, electron_density, fermi_weight)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # constants
    "BOLTZMANN_EV", "CURRENT_A_PER_CM2", "HBAR2_OVER_2M0",
    "kinetic_prefactor", "thermal_energy",
    # errors
    "QdevError", "SingularSystem", "DegenerateDenominator",
    "PreconditionViolated", "MaxIterationsExceeded", "OuterMaxIterations",
    "UnknownPreset", "ParseError", "ValidationError", "DepthExceeded",
    # numerics / kernels
    "Grid", "QuadratureSpec", "adaptive_simpson", "solve_banded",
    "sbp_identity_residual", "tridiag_solve", "BACKEND",
    "available_backends",
    # scattering
    "TbcScheme", "Direction", "SchrodingerContext", "ScatteringState",
    "dispersion_roots", "solve_scattering",
    # statistics
    "ThermalContext", "DensityProfile", "ScatteringProvider", "fermi_weight",
    "electron_density", "current_density",
    # electrostatics + coupling
    "NewtonConfig", "PoissonState", "newton_solve", "SelfConsistentConfig",
    "SelfConsistentResult", "run_self_consistent", "bias_sweep",
    # devices + experiments
    "DeviceSpec", "PiecewiseProfile", "mollifier", "mollify", "linear_ramp",
    "build_preset", "list_presets", "ConvergenceReport", "convergence_study",
    "oscillation_metric", "transmission_curve",
]
