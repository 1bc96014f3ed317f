"""Canonical partition functions of particles split by a wall.

For m particles in the left segment (length y) and N - m in the right one,

    Z_m(y) = Z(m | y) * Z(N - m | L - y),
    f_m(y) = Z_m(y) / sum_p Z_p(y),

with Z(n | y) the n-particle canonical partition function of one segment.
All values are carried in log scale, together with the analytic derivative
d ln Z / d(segment length) propagated through the same recursions, so forces
never touch a finite difference.

Two exact segment algorithms are provided:

* ``power_sum``: the standard recursion over particle number,
  Z_n = (1/n) * sum_k s^(k+1) z1(k*beta) Z_{n-k}, s = +1 bosons, -1 fermions.
  All terms are positive for bosons; for fermions the alternating sum
  cancels catastrophically once beta * (E_2 - E_1) is large, which makes it
  unusable in float64 at low temperature.
* ``level``: a recursion over levels building elementary (fermions) or
  complete homogeneous (bosons) symmetric functions of the Boltzmann
  weights.  Every update adds positive terms, so it is stable at any
  temperature, and it is exact for the same truncated spectrum.

The dispatch below uses power_sum for bosons and level for fermions;
distinguishable particles use z1^n / n! directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnphysicalCancellationError
from .logscale import NEG_INF, LogScaledValue, logsumexp, signed_logsumexp
from .spectrum import (DEFAULT_GEOMETRY, DEFAULT_TRUNCATION_EPS, BoxGeometry,
                       TRUNCATION_CEILING, TRUNCATION_FLOOR, truncation_level)


class Statistics(enum.Enum):
    """Particle statistics, including the analytic classical baseline."""

    BOSON = "boson"
    FERMION = "fermion"
    DISTINGUISHABLE = "distinguishable"
    CLASSICAL = "classical"

    @classmethod
    def parse(cls, name: str) -> "Statistics":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise DomainError(f"unknown statistics {name!r}; expected one of {valid}")


_QUANTUM = (Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE)


def _require_spectrum_stats(stats: Statistics) -> None:
    if stats not in _QUANTUM:
        raise DomainError(
            "the classical ideal gas is analytic-only; partition functions "
            "are defined for boson, fermion, or distinguishable statistics")


# ---------------------------------------------------------------------------
# Single-segment tables, vectorized over segment lengths.


def _levels_needed(beta: float, max_length: float, n_top: int, eps: float,
                   geometry: BoxGeometry) -> int:
    n = truncation_level(beta, max_length, eps, geometry=geometry,
                         floor=TRUNCATION_FLOOR, ceiling=TRUNCATION_CEILING)
    # Fermions need at least n_top occupied levels plus headroom.
    return max(n, n_top + 4)


def _log_z1_tables(k: int, beta: float, lengths: np.ndarray, n_levels: int,
                   geometry: BoxGeometry):
    """log z1(k*beta) and log dz1/dy for an array of segment lengths.

    z1(k*beta, y) = sum_n exp(-k*beta*E_n(y)); its length-derivative is
    sum_n (2*k*beta*E_n/y) exp(-k*beta*E_n), a positive series.
    """
    scale = geometry.total_length
    c = k * beta * geometry.energy_unit * (scale / lengths) ** 2  # (G,)
    n = np.arange(1, n_levels + 1, dtype=float)
    expo = -c[:, None] * (n * n)[None, :]  # (G, M)

    # Value: the n=1 column is always the largest term.
    shifted = expo - expo[:, :1]
    log_z1 = expo[:, 0] + np.log(np.sum(np.exp(shifted), axis=1))

    # Derivative: weight each term by 2*k*beta*E_n/y = 2*c*n^2/y.
    log_coef = np.log(2.0 * c)[:, None] + 2.0 * np.log(n)[None, :] \
        - np.log(lengths)[:, None]
    dterm = log_coef + expo
    shift = np.max(dterm, axis=1, keepdims=True)
    log_dz1 = shift[:, 0] + np.log(np.sum(np.exp(dterm - shift), axis=1))
    return log_z1, log_dz1


def _distinguishable_tables(n_top, beta, lengths, n_levels, geometry):
    log_z1, log_dz1 = _log_z1_tables(1, beta, lengths, n_levels, geometry)
    counts = np.arange(n_top + 1, dtype=float)
    log_z = counts[:, None] * log_z1[None, :] \
        - np.array([math.lgamma(c + 1.0) for c in counts])[:, None]
    dlog_z = counts[:, None] * np.exp(log_dz1 - log_z1)[None, :]
    return log_z, dlog_z


def _power_sum_tables(n_top, beta, lengths, stats, n_levels, geometry):
    """Recursion over particle number in signed log space."""
    G = lengths.size
    log_z1 = np.empty((n_top + 1, G))
    log_dz1 = np.empty((n_top + 1, G))
    for k in range(1, n_top + 1):
        log_z1[k], log_dz1[k] = _log_z1_tables(k, beta, lengths, n_levels,
                                               geometry)

    log_z = np.full((n_top + 1, G), NEG_INF)
    sgn_z = np.zeros((n_top + 1, G))
    log_dz = np.full((n_top + 1, G), NEG_INF)
    sgn_dz = np.zeros((n_top + 1, G))
    log_z[0] = 0.0
    sgn_z[0] = 1.0

    fermionic = stats is Statistics.FERMION
    for n in range(1, n_top + 1):
        term_sign = np.array([1.0 if not fermionic else (-1.0) ** (k + 1)
                              for k in range(1, n + 1)])
        v_logs = np.stack([log_z1[k] + log_z[n - k] for k in range(1, n + 1)])
        v_sgns = term_sign[:, None] * np.stack([sgn_z[n - k]
                                                for k in range(1, n + 1)])
        lz, sz = signed_logsumexp(v_logs, v_sgns, axis=0)
        log_z[n] = lz - math.log(n)
        sgn_z[n] = sz

        d_logs = np.concatenate([
            np.stack([log_dz1[k] + log_z[n - k] for k in range(1, n + 1)]),
            np.stack([log_z1[k] + log_dz[n - k] for k in range(1, n + 1)]),
        ])
        d_sgns = np.concatenate([
            term_sign[:, None] * np.stack([sgn_z[n - k]
                                           for k in range(1, n + 1)]),
            term_sign[:, None] * np.stack([sgn_dz[n - k]
                                           for k in range(1, n + 1)]),
        ])
        ld, sd = signed_logsumexp(d_logs, d_sgns, axis=0)
        log_dz[n] = ld - math.log(n)
        sgn_dz[n] = sd

        if fermionic and np.any(sz <= 0.0):
            raise UnphysicalCancellationError(
                f"fermionic power-sum recursion lost all digits at n={n}; "
                "use the level method or raise the temperature")

    dlog_z = np.zeros((n_top + 1, G))
    for n in range(1, n_top + 1):
        dlog_z[n] = sgn_dz[n] * np.exp(log_dz[n] - log_z[n])
    return log_z, dlog_z


def _level_tables(n_top, beta, lengths, stats, n_levels, geometry):
    """Recursion over levels; every accumulation is a sum of positive terms."""
    scale = geometry.total_length
    c = beta * geometry.energy_unit * (scale / lengths) ** 2  # (G,)
    n = np.arange(1, n_levels + 1, dtype=float)
    log_q = -c[:, None] * (n * n)[None, :]  # (G, M)
    log_dq = np.log(2.0 * c)[:, None] + 2.0 * np.log(n)[None, :] \
        - np.log(lengths)[:, None] + log_q

    G = lengths.size
    log_s = np.full((n_top + 1, G), NEG_INF)
    log_d = np.full((n_top + 1, G), NEG_INF)
    log_s[0] = 0.0

    if stats is Statistics.FERMION:
        # Elementary symmetric functions: e_j <- e_j + q_i e_{j-1}, with the
        # previous-level column preserved by updating j downwards.
        for i in range(n_levels):
            qi = log_q[:, i]
            dqi = log_dq[:, i]
            for j in range(n_top, 0, -1):
                log_d[j] = np.logaddexp(
                    log_d[j],
                    np.logaddexp(dqi + log_s[j - 1], qi + log_d[j - 1]))
                log_s[j] = np.logaddexp(log_s[j], qi + log_s[j - 1])
    else:
        # Complete homogeneous symmetric functions: h_j <- h_j + q_i h_{j-1}
        # with h_{j-1} already updated for the current level (re-occupation).
        for i in range(n_levels):
            qi = log_q[:, i]
            dqi = log_dq[:, i]
            for j in range(1, n_top + 1):
                log_d[j] = np.logaddexp(
                    log_d[j],
                    np.logaddexp(dqi + log_s[j - 1], qi + log_d[j - 1]))
                log_s[j] = np.logaddexp(log_s[j], qi + log_s[j - 1])

    dlog = np.zeros((n_top + 1, G))
    for j in range(1, n_top + 1):
        dlog[j] = np.exp(log_d[j] - log_s[j])
    return log_s, dlog


def _segment_tables(n_top: int, beta: float, lengths: np.ndarray,
                    stats: Statistics, *, geometry=DEFAULT_GEOMETRY,
                    eps=DEFAULT_TRUNCATION_EPS, n_max=None, method="auto"):
    """ln Z(n | y) and d ln Z / d y for n = 0..n_top over an array of lengths.

    Returns (log_z, dlog_z), each of shape (n_top + 1, G).
    """
    _require_spectrum_stats(stats)
    lengths = np.asarray(lengths, dtype=float)
    if lengths.ndim != 1 or lengths.size == 0:
        raise DomainError("lengths must be a nonempty 1-d array")
    if not np.all((lengths > 0.0) & (lengths <= geometry.total_length)):
        raise DomainError("segment lengths must lie in (0, L]")
    if n_top < 0:
        raise DomainError("particle count must be nonnegative")

    n_levels = n_max if n_max is not None else _levels_needed(
        beta, float(np.max(lengths)), n_top, eps, geometry)
    if n_levels < max(1, n_top):
        raise DomainError(f"need at least {max(1, n_top)} levels, got {n_levels}")

    if stats is Statistics.DISTINGUISHABLE:
        return _distinguishable_tables(n_top, beta, lengths, n_levels, geometry)
    if method == "auto":
        method = "power_sum" if stats is Statistics.BOSON else "level"
    if method == "power_sum":
        return _power_sum_tables(n_top, beta, lengths, stats, n_levels, geometry)
    if method == "level":
        return _level_tables(n_top, beta, lengths, stats, n_levels, geometry)
    raise DomainError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Public scalar operations.


def single_particle_sum(k: int, beta: float, y: float, *,
                        geometry: BoxGeometry = DEFAULT_GEOMETRY,
                        eps: float = DEFAULT_TRUNCATION_EPS,
                        n_max: int | None = None) -> LogScaledValue:
    """Truncated single-particle sum z1(k*beta, y) as a log-scaled value."""
    if k < 1 or k != int(k):
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if not (beta > 0.0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    n_levels = n_max if n_max is not None else truncation_level(
        k * beta, y, eps, geometry=geometry)
    log_z1, _ = _log_z1_tables(k, beta, np.array([y]), n_levels, geometry)
    return LogScaledValue.from_log(float(log_z1[0]), 1)


def canonical_partition(n_particles: int, beta: float, y: float,
                        stats: Statistics, *,
                        geometry: BoxGeometry = DEFAULT_GEOMETRY,
                        eps: float = DEFAULT_TRUNCATION_EPS,
                        n_max: int | None = None,
                        method: str = "auto") -> LogScaledValue:
    """Canonical partition function of n particles in one segment."""
    if not (beta > 0.0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    log_z, _ = _segment_tables(n_particles, beta, np.array([y]), stats,
                               geometry=geometry, eps=eps, n_max=n_max,
                               method=method)
    return LogScaledValue.from_log(float(log_z[n_particles, 0]), 1)


@dataclass(frozen=True)
class SplitPartition:
    """Per-outcome partition values and measurement probabilities at one wall
    position."""

    wall_position: float
    per_outcome: tuple  # LogScaledValue for m = 0..N
    total: LogScaledValue
    fractions: tuple  # float f_m, sums to 1

    @property
    def particle_count(self) -> int:
        return len(self.per_outcome) - 1


@dataclass(frozen=True)
class SplitTables:
    """Vectorized split-partition data over a grid of wall positions."""

    positions: np.ndarray        # (G,)
    log_per_outcome: np.ndarray  # (N+1, G): ln Z_m(x)
    dlog_per_outcome: np.ndarray  # (N+1, G): d ln Z_m / d x
    log_total: np.ndarray        # (G,): ln Z(x)
    log_fractions: np.ndarray    # (N+1, G): ln f_m(x)


def split_tables(n_total: int, beta: float, positions, stats: Statistics, *,
                 geometry: BoxGeometry = DEFAULT_GEOMETRY,
                 eps: float = DEFAULT_TRUNCATION_EPS,
                 n_max: int | None = None, method: str = "auto") -> SplitTables:
    """Split partition functions, fractions and log-derivatives on a grid."""
    _require_spectrum_stats(stats)
    if n_total < 1:
        raise DomainError("need at least one particle")
    if not (beta > 0.0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    x = np.asarray(positions, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("positions must be a nonempty 1-d array")
    L = geometry.total_length
    if not np.all((x > 0.0) & (x < L)):
        raise DomainError("wall positions must lie strictly inside (0, L)")

    left_z, left_d = _segment_tables(n_total, beta, x, stats,
                                     geometry=geometry, eps=eps,
                                     n_max=n_max, method=method)
    right_z, right_d = _segment_tables(n_total, beta, L - x, stats,
                                       geometry=geometry, eps=eps,
                                       n_max=n_max, method=method)

    m = np.arange(n_total + 1)
    log_zm = left_z[m] + right_z[n_total - m]
    dlog_zm = left_d[m] - right_d[n_total - m]  # chain rule for d(L-x)/dx
    log_total = logsumexp(log_zm, axis=0)
    log_f = log_zm - log_total[None, :]
    return SplitTables(positions=x, log_per_outcome=log_zm,
                       dlog_per_outcome=dlog_zm, log_total=log_total,
                       log_fractions=log_f)


def split_partition(n_total: int, beta: float, y: float, stats: Statistics, *,
                    geometry: BoxGeometry = DEFAULT_GEOMETRY,
                    eps: float = DEFAULT_TRUNCATION_EPS,
                    n_max: int | None = None) -> SplitPartition:
    """Z_m(y) for every measurement outcome m at a single wall position y."""
    tables = split_tables(n_total, beta, [y], stats, geometry=geometry,
                          eps=eps, n_max=n_max)
    per_outcome = tuple(LogScaledValue.from_log(float(v), 1)
                        for v in tables.log_per_outcome[:, 0])
    total = LogScaledValue.from_log(float(tables.log_total[0]), 1)
    fractions = tuple(float(f) for f in np.exp(tables.log_fractions[:, 0]))
    return SplitPartition(wall_position=float(y), per_outcome=per_outcome,
                          total=total, fractions=fractions)


def log_fraction_derivative(n_total: int, beta: float, y: float,
                            stats: Statistics, m: int, *,
                            geometry: BoxGeometry = DEFAULT_GEOMETRY,
                            eps: float = DEFAULT_TRUNCATION_EPS,
                            n_max: int | None = None) -> float:
    """d ln f_m / d y at wall position y.

    Assembled as d ln Z_m - d ln Z with d ln Z taken from the signed
    log-scaled sum of the per-outcome derivatives, a different reduction
    from the fraction-weighted average used by the force module.
    """
    if not (0 <= m <= n_total):
        raise DomainError(f"outcome m={m} outside 0..{n_total}")
    tables = split_tables(n_total, beta, [y], stats, geometry=geometry,
                          eps=eps, n_max=n_max)
    log_zm = tables.log_per_outcome[:, 0]
    dlog_zm = tables.dlog_per_outcome[:, 0]
    # dZ_p = Z_p * dlnZ_p, summed with signs, then divided by Z.
    logs = log_zm + np.log(np.abs(np.where(dlog_zm == 0.0, 1.0, dlog_zm)))
    logs = np.where(dlog_zm == 0.0, NEG_INF, logs)
    log_dz, sign = signed_logsumexp(logs, np.sign(dlog_zm), axis=0)
    if sign == 0.0:
        dlog_total = 0.0
    else:
        dlog_total = sign * math.exp(log_dz - tables.log_total[0])
    return float(dlog_zm[m] - dlog_total)
