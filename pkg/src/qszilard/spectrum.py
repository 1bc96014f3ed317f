"""Single-particle levels of an infinite-well segment and the truncation policy.

A rigid wall at position x splits a box of length L into segments of length
x and L - x.  A particle confined to a segment of length y has levels

    E_n(y) = n^2 * E0 * (L / y)^2,        n = 1, 2, ...

where E0 is the ground-state energy of the full box.  Everything downstream
works in units of E0 and L, with temperature expressed as t = kT / E0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, TruncationCapError

DEFAULT_TRUNCATION_EPS = 1e-14
TRUNCATION_FLOOR = 8
TRUNCATION_CEILING = 10_000


@dataclass(frozen=True)
class BoxGeometry:
    """Full box: total length and the single-particle ground-state energy."""

    total_length: float = 1.0
    energy_unit: float = 1.0

    def __post_init__(self):
        if not (self.total_length > 0.0) or not (self.energy_unit > 0.0):
            raise DomainError("box length and energy unit must be positive")


DEFAULT_GEOMETRY = BoxGeometry()


@dataclass(frozen=True)
class SubBox:
    """One segment of the split box.  The length must fit inside the box."""

    length: float
    geometry: BoxGeometry = DEFAULT_GEOMETRY

    def __post_init__(self):
        _check_segment(self.length, self.geometry)


def _check_segment(y: float, geometry: BoxGeometry) -> None:
    # y == total_length is allowed: that is the unsplit box (used to define E0).
    if not (0.0 < y <= geometry.total_length):
        raise DomainError(
            f"segment length {y!r} outside (0, {geometry.total_length}]")


def _check_level(n: int) -> None:
    if n < 1 or n != int(n):
        raise DomainError(f"level index must be a positive integer, got {n!r}")


def level_energy(n: int, y: float, geometry: BoxGeometry = DEFAULT_GEOMETRY) -> float:
    """Energy of level n in a segment of length y."""
    _check_level(n)
    _check_segment(y, geometry)
    ratio = geometry.total_length / y
    return n * n * geometry.energy_unit * ratio * ratio


def level_energy_derivative(n: int, y: float,
                            geometry: BoxGeometry = DEFAULT_GEOMETRY) -> float:
    """d E_n / d y.  Negative: widening a segment lowers every level."""
    _check_level(n)
    _check_segment(y, geometry)
    scale = geometry.total_length
    return -2.0 * n * n * geometry.energy_unit * scale * scale / y ** 3


def truncation_level(beta: float, y: float, eps: float = DEFAULT_TRUNCATION_EPS,
                     *, geometry: BoxGeometry = DEFAULT_GEOMETRY,
                     floor: int = TRUNCATION_FLOOR,
                     ceiling: int = TRUNCATION_CEILING) -> int:
    """Smallest n whose Boltzmann weight relative to the ground level is < eps.

    Returns max(floor, n) so that very cold segments still carry a few levels,
    and raises TruncationCapError when more than ``ceiling`` levels would be
    needed (temperature too high for the cap).
    """
    if not (beta > 0.0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must be in (0, 1), got {eps!r}")
    _check_segment(y, geometry)

    # e^{-beta (E_n - E_1)} < eps  <=>  beta*c*(n^2 - 1) > ln(1/eps)
    c = beta * level_energy(1, y, geometry)
    if math.isinf(c):
        return floor
    target = math.log(1.0 / eps)
    n = max(2, math.ceil(math.sqrt(1.0 + target / c)))
    # Guard the ceil against float rounding right at the threshold.
    while n > 2 and c * ((n - 1) ** 2 - 1) > target:
        n -= 1
    while c * (n * n - 1) <= target:
        n += 1
        if n > ceiling:
            raise TruncationCapError(
                f"truncation needs more than {ceiling} levels "
                f"(beta*E1 = {c:.3e}); temperature too high for the cap")
    if n > ceiling:
        raise TruncationCapError(
            f"truncation needs {n} levels, above the cap {ceiling}")
    return max(floor, n)
