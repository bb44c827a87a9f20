"""Flow-model analysis of linear store-and-forward networks.

A chain of n buffers with n+1 link rates is analyzed three ways that must
agree: closed forms for the homogeneous chain, a spectral characterization of
the throughput for arbitrary profiles, and direct integration of the chain
ODE. A stochastic exclusion-process simulator validates the deterministic
predictions, and optimization modules pick the delay-minimizing hop length
and contention probability and the throughput-maximizing rate allocation
under a budget.

Hot loops run in a compiled extension when available; set
RFMNET_PURE_PYTHON=1 to force the pure NumPy/SciPy fallback.
"""

__version__ = "0.1.0"

from ._backend import COMPILED
from .capacity import BudgetConstraint, OptResult, kkt_residual, maximize_throughput
from .errors import (
    ConvergenceError,
    DegenerateChannelError,
    InsufficientStatisticsError,
    InvalidInputError,
    NumericalConsistencyError,
    StiffnessError,
)
from .homogeneous import (
    ThrfmSpec,
    thrfm_delays,
    thrfm_occupancies,
    thrfm_occupancy,
    thrfm_steady_state,
    thrfm_throughput,
)
from .model import integrate, rfm_rhs, solve_steady_state
from .multihop import (
    ChannelParams,
    ContentionOptimum,
    HopOptimum,
    optimal_contention,
    optimal_hop_length,
    sir_constant,
    sir_success_prob,
    snr_e2e_delay,
    snr_success_prob,
)
from .spectral import (
    SpectralMatrix,
    build_matrix,
    max_eigenvalue,
    spectral_steady_state,
    spectral_throughput,
)
from .tasep import ReplicateStats, SimStats, TasepConfig, replicate, run_tasep
from .types import OccupancyState, RateProfile, StepControl, SteadyState, Trajectory

__all__ = [
    "COMPILED",
    "BudgetConstraint",
    "ChannelParams",
    "ContentionOptimum",
    "ConvergenceError",
    "DegenerateChannelError",
    "HopOptimum",
    "InsufficientStatisticsError",
    "InvalidInputError",
    "NumericalConsistencyError",
    "OccupancyState",
    "OptResult",
    "RateProfile",
    "ReplicateStats",
    "SimStats",
    "SpectralMatrix",
    "StepControl",
    "SteadyState",
    "StiffnessError",
    "TasepConfig",
    "ThrfmSpec",
    "Trajectory",
    "build_matrix",
    "integrate",
    "kkt_residual",
    "max_eigenvalue",
    "maximize_throughput",
    "optimal_contention",
    "optimal_hop_length",
    "replicate",
    "rfm_rhs",
    "run_tasep",
    "sir_constant",
    "sir_success_prob",
    "snr_e2e_delay",
    "snr_success_prob",
    "solve_steady_state",
    "spectral_steady_state",
    "spectral_throughput",
    "thrfm_delays",
    "thrfm_occupancies",
    "thrfm_occupancy",
    "thrfm_steady_state",
    "thrfm_throughput",
]
