"""Work extraction by a measurement-driven wall in a particle-in-a-box.

The package computes canonical partition functions for N bosons, fermions
or distinguishable particles split across a movable wall, the per-outcome
forces on that wall, the stopping points where the wall settles or where
removal is optimal, and the average work extracted per measurement cycle.
"""

from .engine import (EngineModel, ProtocolSolution, Tolerances, Work,
                     balance_protocol, l_extremum_residual,
                     log_occupancy_fractions, occupancy_fractions,
                     optimal_protocol, optimize_insertion, sweep_temperature,
                     sweep_wall, total_work)
from .errors import (DomainError, EngineError, NoBracketError,
                     TruncationCapError, UnphysicalCancellationError)
from .forces import (StoppingPoints, backward_force, classical_balance_point,
                     force_sample, forward_force, solve_balance,
                     solve_optimal, stopping_points)
from .partition import (SplitPartition, Statistics, canonical_partition,
                        log_fraction_derivative, single_particle_sum,
                        split_partition, split_tables)
from .spectrum import (BoxGeometry, DEFAULT_GEOMETRY, level_energy,
                       level_energy_derivative, truncation_level)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BoxGeometry", "DEFAULT_GEOMETRY", "EngineModel", "Tolerances",
    "Statistics", "SplitPartition", "StoppingPoints", "Work",
    "ProtocolSolution",
    "level_energy", "level_energy_derivative", "truncation_level",
    "single_particle_sum", "canonical_partition", "split_partition",
    "split_tables", "log_fraction_derivative",
    "forward_force", "backward_force", "force_sample",
    "solve_balance", "solve_optimal", "stopping_points",
    "classical_balance_point",
    "occupancy_fractions", "log_occupancy_fractions", "total_work",
    "balance_protocol", "optimal_protocol", "l_extremum_residual",
    "sweep_temperature", "sweep_wall", "optimize_insertion",
    "EngineError", "DomainError", "TruncationCapError",
    "UnphysicalCancellationError", "NoBracketError",
]
