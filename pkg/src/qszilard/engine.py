"""Work extracted per cycle and the sweep drivers.

A cycle inserts the wall at l, measures the outcome m, lets the wall move to
a stopping point x_m, and removes it.  The average extracted work is

    W = -kT * sum_m f_m(l) * ln[ f_m(l) / f_m(x_m) ],

where f_m is the outcome probability as a function of wall position.  The
endpoint outcomes use f_0(0) = f_N(L) = 1: an empty side lets the wall slide
to the box edge with certainty.  Choosing x_m at force balance reproduces
the passive protocol; choosing it at the maximum of f_m is optimal and
makes every summand, hence W, nonnegative.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import DomainError, EngineError
from .forces import StoppingPoints, force_tables, stopping_points
from .model import EngineModel, Tolerances
from .partition import Statistics, split_tables

__all__ = [
    "Work", "ProtocolSolution", "EngineModel", "Tolerances",
    "occupancy_fractions", "log_occupancy_fractions", "total_work",
    "balance_protocol", "optimal_protocol", "l_extremum_residual",
    "sweep_temperature", "sweep_wall", "optimize_insertion",
]


@dataclass(frozen=True)
class Work:
    """Extracted work in both unit systems, with per-outcome contributions."""

    in_kt: float
    in_e0: float
    per_outcome: tuple  # per-outcome work in kT: ln f_m(x_m) - ln f_m(l)


@dataclass(frozen=True)
class ProtocolSolution:
    """A solved cycle: insertion point, stopping points and the work split."""

    protocol: str
    insertion_point: float
    stopping_points: StoppingPoints
    per_outcome_work_kt: tuple
    total_work_kt: float
    total_work_e0: float


def log_occupancy_fractions(model: EngineModel, positions) -> np.ndarray:
    """ln f_m(x) for m = 0..N over a grid of wall positions."""
    x = np.asarray(positions, dtype=float)
    if model.statistics is Statistics.CLASSICAL:
        from .forces import _classical_log_weights
        return _classical_log_weights(model.particle_count, x, model.length)
    tables = split_tables(model.particle_count, model.beta, x,
                          model.statistics, geometry=model.geometry,
                          eps=model.tolerances.truncation_eps)
    return tables.log_fractions


def occupancy_fractions(model: EngineModel, y: float) -> tuple:
    """Measurement probabilities f_m(y), summing to one."""
    log_f = log_occupancy_fractions(model, [y])
    return tuple(float(v) for v in np.exp(log_f[:, 0]))


def _star_log_fractions(model: EngineModel, stopping) -> np.ndarray:
    """ln f_m(x_m) for the given stopping points, honoring the endpoint rules.

    A stopping point of None means the wall is removed where it was inserted
    and the outcome contributes no work; the returned entry is NaN, which the
    work assembly maps to a zero summand.
    """
    n = model.particle_count
    stopping = list(stopping)
    if len(stopping) != n + 1:
        raise DomainError(f"expected {n + 1} stopping points, got {len(stopping)}")
    L = model.length
    stars = np.zeros(n + 1)
    interior = []
    for m, x in enumerate(stopping):
        if x is None:
            stars[m] = math.nan
            continue
        if m == 0 and x == 0.0:
            continue  # f_0(0) = 1
        if m == n and x == L:
            continue  # f_N(L) = 1
        if not (0.0 < x < L):
            raise DomainError(
                f"stopping point x_{m}={x!r} outside (0, L); only m=0 may sit "
                f"at 0 and only m=N at L")
        interior.append((m, x))
    if interior:
        log_f = log_occupancy_fractions(model, [x for _, x in interior])
        for col, (m, _) in enumerate(interior):
            stars[m] = log_f[m, col]
    return stars


def _work_from_logs(log_f_at_l: np.ndarray, stars: np.ndarray):
    """Total work per kT and the per-outcome works, guarding empty outcomes."""
    lifted = np.where(np.isnan(stars), 0.0, stars)
    per_outcome = lifted[:, None] - log_f_at_l  # W_m = ln f_m(x_m) - ln f_m(l)
    per_outcome = np.where(np.isnan(stars)[:, None], 0.0, per_outcome)
    weights = np.exp(log_f_at_l)
    terms = np.where(log_f_at_l == -np.inf, 0.0, weights * per_outcome)
    return np.sum(terms, axis=0), per_outcome


def _check_insertion(model: EngineModel, l: float) -> None:
    if not (0.0 < l < model.length):
        raise DomainError(f"insertion point {l!r} outside (0, L)")


def total_work(model: EngineModel, l: float, stopping) -> Work:
    """Average extracted work for one insertion point and stopping points."""
    _check_insertion(model, l)
    stars = _star_log_fractions(model, stopping)
    log_f = log_occupancy_fractions(model, [l])[:, 0]
    w_kt, per_outcome = _work_from_logs(log_f[:, None], stars)
    w_kt = float(w_kt[0])
    return Work(in_kt=w_kt, in_e0=w_kt * model.temperature,
                per_outcome=tuple(float(v) for v in per_outcome[:, 0]))


@lru_cache(maxsize=512)
def _cached_stopping_points(model: EngineModel, protocol: str) -> StoppingPoints:
    return stopping_points(model, protocol)


def _protocol_solution(model, l, protocol, points) -> ProtocolSolution:
    _check_insertion(model, l)
    if points is None:
        points = _cached_stopping_points(model, protocol)
    chosen = (points.per_outcome_balance if protocol == "balance"
              else points.per_outcome_optimal)
    work = total_work(model, l, chosen)
    return ProtocolSolution(protocol=protocol, insertion_point=float(l),
                            stopping_points=points,
                            per_outcome_work_kt=work.per_outcome,
                            total_work_kt=work.in_kt,
                            total_work_e0=work.in_e0)


def balance_protocol(model: EngineModel, l: float,
                     points: StoppingPoints | None = None) -> ProtocolSolution:
    """Cycle with the wall released to its force-balance stopping points."""
    return _protocol_solution(model, l, "balance", points)


def optimal_protocol(model: EngineModel, l: float,
                     points: StoppingPoints | None = None) -> ProtocolSolution:
    """Cycle with work-optimal stopping points; the result is never negative."""
    solution = _protocol_solution(model, l, "optimal", points)
    slack = model.tolerances.work_positivity_tol
    if solution.total_work_kt < -slack:
        raise EngineError(
            f"optimal work {solution.total_work_kt:.3e} kT below -{slack:.1e}; "
            "stopping-point solve is inconsistent")
    return solution


def l_extremum_residual(model: EngineModel, l: float,
                        points: StoppingPoints | None = None) -> float:
    """Stationarity measure of W(l) under the optimal protocol.

    Equals beta * L * dW/dl, assembled as the outcome covariance
    <W_m F_m> - <W_p><F_q> of per-outcome work and force.  Zero at the
    symmetric insertion point l = L/2.
    """
    _check_insertion(model, l)
    if points is None:
        points = _cached_stopping_points(model, "optimal")
    stars = _star_log_fractions(model, points.per_outcome_optimal)
    forces, _, log_f, _ = force_tables(model, [l])
    log_f = log_f[:, 0]
    w_m = stars - log_f
    weights = np.exp(log_f)
    w_m = np.where(log_f == -np.inf, 0.0, w_m)
    force = forces[:, 0]
    mean_wf = float(np.sum(weights * w_m * force))
    mean_w = float(np.sum(weights * w_m))
    mean_f = float(np.sum(weights * force))
    return (mean_wf - mean_w * mean_f) * model.beta * model.length


# ---------------------------------------------------------------------------
# Sweep drivers.  Rows are plain dicts with a fixed key order so the CSV and
# JSON writers stay deterministic; a failed solve marks the row instead of
# aborting the sweep.


def sweep_fieldnames(n_total: int, protocol: str, axis: str) -> list:
    names = [axis]
    for proto in ("balance", "optimal"):
        if protocol in (proto, "both"):
            names += [f"x{m}_{proto}" for m in range(n_total + 1)]
            names += [f"work_kt_{proto}", f"work_e0_{proto}"]
            names += [f"w{m}_{proto}" for m in range(n_total + 1)]
    names.append("error")
    return names


def _failed_row(axis, value, fieldnames, message):
    row = {name: None for name in fieldnames}
    row[axis] = value
    row["error"] = message
    return row


def _sweep_temperature_row(args):
    model, t, l, protocol = args
    model = replace(model, temperature=t)
    fieldnames = sweep_fieldnames(model.particle_count, protocol, "t")
    try:
        points = stopping_points(model, protocol)
        row = {"t": t}
        for proto in ("balance", "optimal"):
            if protocol not in (proto, "both"):
                continue
            solution = _protocol_solution(model, l, proto, points)
            chosen = (points.per_outcome_balance if proto == "balance"
                      else points.per_outcome_optimal)
            for m, x in enumerate(chosen):
                row[f"x{m}_{proto}"] = x
            row[f"work_kt_{proto}"] = solution.total_work_kt
            row[f"work_e0_{proto}"] = solution.total_work_e0
            for m, w in enumerate(solution.per_outcome_work_kt):
                row[f"w{m}_{proto}"] = w
        row["error"] = None
        return row
    except EngineError as exc:
        return _failed_row("t", t, fieldnames, str(exc))


def sweep_temperature(model: EngineModel, t_grid, l: float,
                      protocol: str = "both", workers: int = 1) -> list:
    """One row per temperature: stopping points and work for the protocols."""
    _check_insertion(model, l)
    _check_protocol(protocol)
    t_grid = _check_grid(t_grid, "t")
    payloads = [(model, float(t), float(l), protocol) for t in t_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_temperature_row, payloads))
    return [_sweep_temperature_row(p) for p in payloads]


def sweep_wall(model: EngineModel, l_grid, protocol: str = "both") -> list:
    """One row per insertion point.

    Stopping points do not depend on l, so they are solved once and the work
    over the whole grid is evaluated in a single vectorized pass.
    """
    _check_protocol(protocol)
    l_grid = _check_grid(l_grid, "l")
    L = model.length
    if not np.all((l_grid > 0.0) & (l_grid < L)):
        raise DomainError("insertion grid must lie strictly inside (0, L)")
    fieldnames = sweep_fieldnames(model.particle_count, protocol, "l")
    try:
        points = stopping_points(model, protocol)
        log_f = log_occupancy_fractions(model, l_grid)
    except EngineError as exc:
        return [_failed_row("l", float(l), fieldnames, str(exc))
                for l in l_grid]

    blocks = {}
    for proto in ("balance", "optimal"):
        if protocol not in (proto, "both"):
            continue
        chosen = (points.per_outcome_balance if proto == "balance"
                  else points.per_outcome_optimal)
        stars = _star_log_fractions(model, chosen)
        w_kt, per_outcome = _work_from_logs(log_f, stars)
        blocks[proto] = (chosen, w_kt, per_outcome)

    rows = []
    for i, l in enumerate(l_grid):
        row = {"l": float(l)}
        for proto, (chosen, w_kt, per_outcome) in blocks.items():
            for m, x in enumerate(chosen):
                row[f"x{m}_{proto}"] = x
            row[f"work_kt_{proto}"] = float(w_kt[i])
            row[f"work_e0_{proto}"] = float(w_kt[i]) * model.temperature
            for m in range(model.particle_count + 1):
                row[f"w{m}_{proto}"] = float(per_outcome[m, i])
        row["error"] = None
        rows.append(row)
    return rows


def optimize_insertion(model: EngineModel, grid_points: int | None = None):
    """Scan W(l) under the optimal protocol and refine the best insertion.

    Returns (rows, footer): rows tabulate l, work and the stationarity
    residual; the footer records the refined optimum and stopping points.
    """
    tol = model.tolerances
    n_grid = grid_points if grid_points is not None else tol.insertion_grid_points
    if n_grid < 3:
        raise DomainError("need at least 3 grid points")
    L = model.length
    margin = tol.insertion_margin * L
    l_grid = np.linspace(margin, L - margin, n_grid)

    points = _cached_stopping_points(model, "optimal")
    stars = _star_log_fractions(model, points.per_outcome_optimal)
    log_f = log_occupancy_fractions(model, l_grid)
    w_kt, _ = _work_from_logs(log_f, stars)

    rows = []
    for i, l in enumerate(l_grid):
        rows.append({
            "l": float(l),
            "work_kt": float(w_kt[i]),
            "work_e0": float(w_kt[i]) * model.temperature,
            "stationarity_residual": l_extremum_residual(model, float(l),
                                                         points),
            "error": None,
        })

    best = int(np.argmax(w_kt))
    lo = l_grid[max(0, best - 1)]
    hi = l_grid[min(n_grid - 1, best + 1)]
    best_l = _golden_max(
        lambda l: float(_work_from_logs(
            log_occupancy_fractions(model, [l]), stars)[0][0]),
        float(lo), float(hi), 1e-6 * L)
    best_work = float(_work_from_logs(
        log_occupancy_fractions(model, [best_l]), stars)[0][0])

    footer = {"best_l": best_l, "best_work_kt": best_work,
              "best_work_e0": best_work * model.temperature}
    for m, x in enumerate(points.per_outcome_optimal):
        footer[f"x{m}_optimal"] = x
    return rows, footer


def _golden_max(fn, lo, hi, xtol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _check_protocol(protocol: str) -> None:
    if protocol not in ("balance", "optimal", "both"):
        raise DomainError(f"unknown protocol {protocol!r}")


def _check_grid(grid, name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError(f"{name} grid must be a nonempty 1-d array")
    if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
        raise DomainError(f"{name} grid must be strictly increasing")
    if name == "t" and not np.all(grid > 0.0):
        raise DomainError("temperatures must be positive")
    return grid
