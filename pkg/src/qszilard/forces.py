"""Forces on the wall and the stopping-point solvers.

After measuring m particles on the left, the gas pushes the wall with

    F_m(x) = kT * d ln Z_m / d x                       (forward force)

while the backward force an agent must balance is the outcome average

    <F_p(x)> = sum_p f_p(x) F_p(x) = kT * d ln Z / d x.

Force balance F_m(x) = 0 gives the passive stopping point; the work-optimal
removal point instead solves F_m(x) = <F_p(x)>, which is a stationary point
of f_m(x) because beta * (F_m - <F_p>) = d ln f_m / d x.

The classical ideal gas obeys F_p = kT * (p/x - (N-p)/(L-x)) with binomial
outcome weights, which average to exactly zero at every x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoBracketError
from .model import EngineModel
from .partition import Statistics, split_tables

__all__ = [
    "ForceSample", "BracketRecord", "RootCandidate", "BracketDiagnostics",
    "StoppingPoints", "forward_force", "backward_force", "force_sample",
    "classical_outcome_weight", "classical_outcome_force",
    "classical_average_force", "classical_balance_point",
    "solve_balance", "solve_optimal", "stopping_points",
]


@dataclass(frozen=True)
class ForceSample:
    """Forces at one wall position; residual = forward - backward exactly."""

    position: float
    forward_force: float
    backward_force: float
    residual: float


@dataclass(frozen=True)
class BracketRecord:
    lower: float
    upper: float
    sign_left: int  # sign of the residual at the lower edge


@dataclass(frozen=True)
class RootCandidate:
    position: float
    is_maximum: bool      # residual crosses + -> -, a local max of the objective
    objective_log: float  # ln Z_m (balance) or ln f_m (optimal) at the root


@dataclass(frozen=True)
class BracketDiagnostics:
    outcome: int
    criterion: str  # "balance" or "optimal"
    scan_points: int
    scan_margin: float
    brackets: tuple
    roots: tuple
    selected: float


@dataclass(frozen=True)
class StoppingPoints:
    """Stopping points for every outcome, endpoints fixed by convention."""

    per_outcome_balance: tuple
    per_outcome_optimal: tuple
    bracket_diagnostics: tuple


# ---------------------------------------------------------------------------
# Grid evaluation shared by the solvers and the report paths.


def _classical_force_grid(model: EngineModel, x: np.ndarray):
    n = model.particle_count
    p = np.arange(n + 1, dtype=float)[:, None]
    L = model.length
    forces = model.kt * (p / x[None, :] - (n - p) / (L - x[None, :]))
    log_weights = _classical_log_weights(n, x, L)
    avg = np.zeros_like(x)  # exact: binomial average force vanishes
    return forces, avg, log_weights, log_weights


def _classical_log_weights(n: int, x: np.ndarray, L: float) -> np.ndarray:
    p = np.arange(n + 1, dtype=float)[:, None]
    log_binom = np.array([math.lgamma(n + 1) - math.lgamma(k + 1)
                          - math.lgamma(n - k + 1) for k in range(n + 1)])
    return log_binom[:, None] + p * np.log(x[None, :] / L) \
        + (n - p) * np.log1p(-x[None, :] / L)


def force_tables(model: EngineModel, positions):
    """Per-outcome forces, average force, log fractions and log Z_m on a grid.

    Returns (forces (N+1, G), avg (G,), log_fractions (N+1, G),
    log_per_outcome (N+1, G)); the last entry holds binomial log-weights for
    the classical gas, which has no partition function.
    """
    x = np.asarray(positions, dtype=float)
    if model.statistics is Statistics.CLASSICAL:
        return _classical_force_grid(model, x)
    tables = split_tables(model.particle_count, model.beta, x,
                          model.statistics, geometry=model.geometry,
                          eps=model.tolerances.truncation_eps)
    forces = model.kt * tables.dlog_per_outcome
    weights = np.exp(tables.log_fractions)
    avg = np.sum(weights * forces, axis=0)
    return forces, avg, tables.log_fractions, tables.log_per_outcome


def forward_force(model: EngineModel, m: int, x: float) -> float:
    """Force of outcome m on the wall at position x, in units of E0 / L."""
    _check_outcome(model, m)
    forces, _, _, _ = force_tables(model, [x])
    return float(forces[m, 0])


def backward_force(model: EngineModel, x: float) -> float:
    """Outcome-averaged force at position x."""
    _, avg, _, _ = force_tables(model, [x])
    return float(avg[0])


def force_sample(model: EngineModel, m: int, x: float) -> ForceSample:
    _check_outcome(model, m)
    forces, avg, _, _ = force_tables(model, [x])
    fwd = float(forces[m, 0])
    bwd = float(avg[0])
    return ForceSample(position=float(x), forward_force=fwd,
                       backward_force=bwd, residual=fwd - bwd)


def _check_outcome(model: EngineModel, m: int) -> None:
    if not (0 <= m <= model.particle_count):
        raise DomainError(f"outcome m={m} outside 0..{model.particle_count}")


# ---------------------------------------------------------------------------
# Classical baseline, closed forms.


def classical_outcome_weight(n_total: int, p: int, y: float,
                             total_length: float = 1.0) -> float:
    """Binomial probability of finding p of N ideal-gas particles left of y."""
    if not (0 <= p <= n_total):
        raise DomainError(f"outcome p={p} outside 0..{n_total}")
    if not (0.0 < y < total_length):
        raise DomainError("y must lie strictly inside (0, L)")
    frac = y / total_length
    return math.comb(n_total, p) * frac ** p * (1.0 - frac) ** (n_total - p)


def classical_outcome_force(n_total: int, p: int, y: float,
                            total_length: float = 1.0, kt: float = 1.0) -> float:
    """Ideal-gas pressure difference for outcome p."""
    if not (0 <= p <= n_total):
        raise DomainError(f"outcome p={p} outside 0..{n_total}")
    if not (0.0 < y < total_length):
        raise DomainError("y must lie strictly inside (0, L)")
    return kt * (p / y - (n_total - p) / (total_length - y))


def classical_average_force(n_total: int, y: float,
                            total_length: float = 1.0) -> float:
    """Exactly zero: the binomial-weighted ideal-gas forces cancel."""
    if not (0.0 < y < total_length):
        raise DomainError("y must lie strictly inside (0, L)")
    if n_total < 1:
        raise DomainError("need at least one particle")
    return 0.0


def classical_balance_point(n_total: int, m: int,
                            total_length: float = 1.0) -> float:
    """Closed-form classical stopping point m * L / N (both protocols)."""
    if not (0 <= m <= n_total):
        raise DomainError(f"outcome m={m} outside 0..{n_total}")
    return m * total_length / n_total


# ---------------------------------------------------------------------------
# Root solving: uniform scan for sign-change brackets, then bisection.


def _residual_grid(model, m, x, criterion):
    forces, avg, log_f, log_zm = force_tables(model, x)
    if criterion == "balance":
        # Balance roots are stationary points of ln Z_m, so tie-break on it.
        return forces[m], log_zm[m]
    # Optimal roots are stationary points of ln f_m.
    return forces[m] - avg, log_f[m]


def _scan_positions(model: EngineModel) -> np.ndarray:
    tol = model.tolerances
    L = model.length
    lo = tol.scan_margin * L
    return np.linspace(lo, L - lo, tol.scan_points)


def _bisect_many(model, m, criterion, lo, hi, sign_lo):
    """Vector bisection: one residual evaluation per iteration for all roots."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    sign_lo = np.array(sign_lo, dtype=float)
    xtol = model.tolerances.root_xtol * model.length
    while np.max(hi - lo) > xtol:
        mid = 0.5 * (lo + hi)
        res, _ = _residual_grid(model, m, mid, criterion)
        go_right = np.sign(res) == sign_lo
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
        zero = res == 0.0
        lo = np.where(zero, mid, lo)
        hi = np.where(zero, mid, hi)
    return 0.5 * (lo + hi)


def _solve(model: EngineModel, m: int, criterion: str):
    x = _scan_positions(model)
    residual, _ = _residual_grid(model, m, x, criterion)
    signs = np.sign(residual)

    lo, hi, sign_left = [], [], []
    nonzero = np.flatnonzero(signs != 0.0)
    for a, b in zip(nonzero[:-1], nonzero[1:]):
        if signs[a] != signs[b]:
            lo.append(x[a])
            hi.append(x[b])
            sign_left.append(signs[a])
    brackets = tuple(BracketRecord(float(a), float(b), int(s))
                     for a, b, s in zip(lo, hi, sign_left))
    if not brackets:
        raise NoBracketError(
            f"no sign change for outcome {m} ({criterion}) on "
            f"{x.size} scan points; residual range "
            f"[{residual.min():.3e}, {residual.max():.3e}]",
            diagnostics=BracketDiagnostics(
                outcome=m, criterion=criterion, scan_points=x.size,
                scan_margin=model.tolerances.scan_margin, brackets=(),
                roots=(), selected=math.nan))

    roots = _bisect_many(model, m, criterion, lo, hi, sign_left)

    # Evaluate the tie-break objective at every root plus the scan edges.
    candidates = np.concatenate([roots, [x[0], x[-1]]])
    _, objective = _residual_grid(model, m, candidates, criterion)
    root_records = tuple(
        RootCandidate(position=float(r), is_maximum=(s > 0),
                      objective_log=float(o))
        for r, s, o in zip(roots, sign_left, objective[:len(roots)]))

    maxima = [rec for rec in root_records if rec.is_maximum]
    pool = maxima if maxima else list(root_records)
    if criterion == "optimal":
        # The scan edges compete too; a + -> - crossing always exists for
        # 0 < m < N, so edges matter only in degenerate flat cases.
        edge_recs = [RootCandidate(float(candidates[-2]), False,
                                   float(objective[-2])),
                     RootCandidate(float(candidates[-1]), False,
                                   float(objective[-1]))]
        pool = pool + edge_recs if not maxima else pool
    selected = max(pool, key=lambda rec: rec.objective_log).position

    diag = BracketDiagnostics(outcome=m, criterion=criterion,
                              scan_points=x.size,
                              scan_margin=model.tolerances.scan_margin,
                              brackets=brackets, roots=root_records,
                              selected=float(selected))
    return float(selected), diag


def solve_balance(model: EngineModel, m: int, *, full: bool = False):
    """Wall position where the forward force of outcome m vanishes."""
    _check_interior_outcome(model, m)
    if model.statistics is Statistics.CLASSICAL:
        root = classical_balance_point(model.particle_count, m, model.length)
        diag = _closed_form_diag(m, "balance", root)
        return (root, diag) if full else root
    root, diag = _solve(model, m, "balance")
    return (root, diag) if full else root


def solve_optimal(model: EngineModel, m: int, *, full: bool = False):
    """Wall position maximizing f_m, where F_m equals the average force."""
    _check_interior_outcome(model, m)
    if model.statistics is Statistics.CLASSICAL:
        root = classical_balance_point(model.particle_count, m, model.length)
        diag = _closed_form_diag(m, "optimal", root)
        return (root, diag) if full else root
    root, diag = _solve(model, m, "optimal")
    return (root, diag) if full else root


def _closed_form_diag(m, criterion, root):
    return BracketDiagnostics(outcome=m, criterion=criterion, scan_points=0,
                              scan_margin=0.0, brackets=(),
                              roots=(RootCandidate(root, True, 0.0),),
                              selected=root)


def _check_interior_outcome(model: EngineModel, m: int) -> None:
    if not (0 < m < model.particle_count):
        raise DomainError(
            f"solvers handle interior outcomes only (0 < m < N); outcome "
            f"{m} of N={model.particle_count} is fixed by convention")


def stopping_points(model: EngineModel, protocol: str = "both") -> StoppingPoints:
    """Assemble stopping points for every outcome.

    Endpoint outcomes have an empty side, so the optimal protocol pins them
    to the box edges where their fraction reaches one, while the balance
    protocol records None: with no interior zero of the force there is no
    balance stop, the wall is removed in place and the outcome contributes
    no work.
    """
    if protocol not in ("balance", "optimal", "both"):
        raise DomainError(f"unknown protocol {protocol!r}")
    n = model.particle_count
    L = model.length
    balance = [None] + [math.nan] * max(0, n - 1) + [None]
    optimal = [0.0] + [math.nan] * max(0, n - 1) + [L]
    diags = []
    for m in range(1, n):
        if protocol in ("balance", "both"):
            root, diag = solve_balance(model, m, full=True)
            balance[m] = root
            diags.append(diag)
        if protocol in ("optimal", "both"):
            root, diag = solve_optimal(model, m, full=True)
            optimal[m] = root
            diags.append(diag)
    return StoppingPoints(per_outcome_balance=tuple(balance),
                          per_outcome_optimal=tuple(optimal),
                          bracket_diagnostics=tuple(diags))
