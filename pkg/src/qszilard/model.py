"""Engine configuration: particle number, statistics, temperature, tolerances."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError
from .partition import Statistics
from .spectrum import DEFAULT_GEOMETRY, BoxGeometry


@dataclass(frozen=True)
class Tolerances:
    """Numerical policy knobs shared by the solvers and sweep drivers."""

    truncation_eps: float = 1e-14
    scan_points: int = 1024
    scan_margin: float = 1e-4     # scan window is (margin*L, L - margin*L)
    root_xtol: float = 1e-10      # bisection stops below root_xtol * L
    insertion_grid_points: int = 401
    insertion_margin: float = 1e-2
    work_positivity_tol: float = 1e-12  # slack on the optimal-work bound, in kT

    def __post_init__(self):
        if not (0.0 < self.truncation_eps < 1.0):
            raise DomainError("truncation_eps must be in (0, 1)")
        if self.scan_points < 8:
            raise DomainError("scan_points must be at least 8")
        if not (0.0 < self.scan_margin < 0.5):
            raise DomainError("scan_margin must be in (0, 0.5)")
        if not (0.0 < self.root_xtol < 1.0):
            raise DomainError("root_xtol must be in (0, 1)")
        if self.insertion_grid_points < 3:
            raise DomainError("insertion_grid_points must be at least 3")
        if not (0.0 < self.insertion_margin < 0.5):
            raise DomainError("insertion_margin must be in (0, 0.5)")


@dataclass(frozen=True)
class EngineModel:
    """One engine configuration at a fixed reduced temperature t = kT / E0."""

    particle_count: int
    statistics: Statistics
    temperature: float
    geometry: BoxGeometry = DEFAULT_GEOMETRY
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.particle_count < 1:
            raise DomainError("particle_count must be at least 1")
        if not (self.temperature > 0.0):
            raise DomainError("temperature must be positive")
        if not isinstance(self.statistics, Statistics):
            object.__setattr__(self, "statistics",
                               Statistics.parse(str(self.statistics)))

    @property
    def length(self) -> float:
        return self.geometry.total_length

    @property
    def kt(self) -> float:
        """Thermal energy k_B T in the same units as the energy unit."""
        return self.temperature * self.geometry.energy_unit

    @property
    def beta(self) -> float:
        return 1.0 / self.kt
