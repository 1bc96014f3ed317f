"""Brute-force cross-checks for the recursive partition functions.

Everything here is deliberately slow and literal: partition functions are
built by enumerating occupancy configurations one by one and summing their
Boltzmann weights, with no recursion and no shared code with the production
path beyond the single-level energies.  The tests compare the two
implementations on identical level sets, where they must agree to roundoff.

Kept small on purpose: the enumeration is exponential in particle number.
"""

from __future__ import annotations

import math
from itertools import combinations, combinations_with_replacement

from .errors import DomainError
from .partition import Statistics
from .spectrum import DEFAULT_GEOMETRY, level_energy

__all__ = [
    "ORACLE_MAX_PARTICLES", "ORACLE_MAX_LEVELS",
    "segment_configurations", "enumerate_segment", "enumerate_split",
    "enumerate_fractions", "grid_maximize_fraction",
]

ORACLE_MAX_PARTICLES = 5
ORACLE_MAX_LEVELS = 14


def _logsumexp(terms):
    # local copy so the oracle shares no arithmetic with the production path
    peak = max(terms)
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(sum(math.exp(v - peak) for v in terms))


def segment_configurations(k: int, stats: Statistics, n_max: int):
    """Yield (levels, log_weight) for every k-particle configuration.

    Fermions occupy distinct levels; bosons may share them.  Distinguishable
    particles carry the permutation weight k!/prod(counts!) divided by the
    k! identical-particle factor, leaving 1/prod(counts!).
    """
    levels = range(1, n_max + 1)
    if stats is Statistics.FERMION:
        for occ in combinations(levels, k):
            yield occ, 0.0
    elif stats is Statistics.BOSON:
        for occ in combinations_with_replacement(levels, k):
            yield occ, 0.0
    elif stats is Statistics.DISTINGUISHABLE:
        for occ in combinations_with_replacement(levels, k):
            log_w = 0.0
            for n in set(occ):
                log_w -= math.lgamma(occ.count(n) + 1)
            yield occ, log_w
    else:
        raise DomainError(f"no enumeration for {stats}")


def _check_caps(k: int, n_max: int) -> None:
    if not 0 <= k <= ORACLE_MAX_PARTICLES:
        raise DomainError(f"oracle is capped at {ORACLE_MAX_PARTICLES} particles")
    if not 1 <= n_max <= ORACLE_MAX_LEVELS:
        raise DomainError(f"oracle is capped at {ORACLE_MAX_LEVELS} levels")


def enumerate_segment(k: int, beta: float, y: float, stats: Statistics,
                      n_max: int, geometry=DEFAULT_GEOMETRY) -> float:
    """ln Z(k|y) by explicit summation over configurations."""
    _check_caps(k, n_max)
    if k == 0:
        return 0.0
    energies = [level_energy(n, y, geometry) for n in range(1, n_max + 1)]
    terms = []
    for occ, log_w in segment_configurations(k, stats, n_max):
        terms.append(log_w - beta * sum(energies[n - 1] for n in occ))
    return _logsumexp(terms)


def enumerate_split(n_total: int, m: int, beta: float, y: float,
                    stats: Statistics, n_max: int,
                    geometry=DEFAULT_GEOMETRY) -> float:
    """ln Z_m(y): m particles in (0, y), the rest in (y, L)."""
    if not 0 <= m <= n_total:
        raise DomainError(f"outcome {m} outside 0..{n_total}")
    L = geometry.total_length
    if not 0.0 < y < L:
        raise DomainError(f"wall position {y!r} outside (0, L)")
    left = enumerate_segment(m, beta, y, stats, n_max, geometry)
    right = enumerate_segment(n_total - m, beta, L - y, stats, n_max, geometry)
    return left + right


def enumerate_fractions(n_total: int, beta: float, y: float,
                        stats: Statistics, n_max: int,
                        geometry=DEFAULT_GEOMETRY) -> list:
    """Measurement probabilities f_m(y) from the enumerated partitions."""
    logs = [enumerate_split(n_total, m, beta, y, stats, n_max, geometry)
            for m in range(n_total + 1)]
    total = _logsumexp(logs)
    return [math.exp(v - total) for v in logs]


def grid_maximize_fraction(model, m: int, grid_size: int = 256) -> float:
    """Maximize ln f_m(x) by dense scan plus golden-section refinement.

    Independent check of the bracketing root solver: same objective, no
    derivative information, no sign tracking.
    """
    import numpy as np

    from .engine import log_occupancy_fractions

    if grid_size < 16:
        raise DomainError("grid too coarse to trust the scan")
    L = model.length
    margin = model.tolerances.scan_margin * L
    grid = np.linspace(margin, L - margin, grid_size)
    values = log_occupancy_fractions(model, grid)[m]
    best = int(np.argmax(values))
    lo = grid[max(0, best - 1)]
    hi = grid[min(grid_size - 1, best + 1)]

    def objective(x):
        return float(log_occupancy_fractions(model, [x])[m, 0])

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > 1e-6 * L:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    return 0.5 * (a + b)
