"""Self-contained consistency checks behind the validate subcommand.

Each check pits two independent computations against each other: recursion
versus explicit enumeration, the two recursion schemes against each other,
numerics against closed forms, and solved quantities against identities
they must satisfy.  All inputs are fixed constants so the report is
deterministic run to run.
"""

from __future__ import annotations

import math

import numpy as np

from .engine import (EngineModel, l_extremum_residual, optimal_protocol,
                     total_work)
from .forces import (classical_average_force, classical_balance_point,
                     solve_balance, stopping_points)
from .oracle import enumerate_split
from .partition import Statistics, canonical_partition, split_tables

__all__ = ["run_checks"]


def _model(stats, n, t):
    return EngineModel(particle_count=n, statistics=stats, temperature=t)


def run_checks() -> list:
    """Run every check; returns (name, passed, detail) triples in order."""
    checks = []

    def record(name, passed, detail):
        checks.append((name, bool(passed), detail))

    # Recursions against brute-force enumeration on an identical level set.
    n_max, n, t, y = 10, 3, 1.0, 0.37
    beta = _model(Statistics.BOSON, n, t).beta
    for stats in (Statistics.BOSON, Statistics.FERMION,
                  Statistics.DISTINGUISHABLE):
        tables = split_tables(n, beta, [y], stats, n_max=n_max)
        worst = 0.0
        for m in range(n + 1):
            oracle = enumerate_split(n, m, beta, y, stats, n_max)
            worst = max(worst, abs(tables.log_per_outcome[m, 0] - oracle))
        record(f"enumeration agreement ({stats.value})", worst < 1e-10,
               f"max |dln Z|={worst:.2e}")

    # The two recursion schemes must agree wherever both are stable.
    model = _model(Statistics.BOSON, 4, 0.7)
    a = canonical_partition(4, model.beta, 0.6, Statistics.BOSON,
                            method="power_sum").log()
    b = canonical_partition(4, model.beta, 0.6, Statistics.BOSON,
                            method="level").log()
    record("recursion cross-check (bosons)", abs(a - b) < 1e-12,
           f"|dln Z|={abs(a - b):.2e}")

    # Measurement probabilities sum to one.
    model = _model(Statistics.FERMION, 4, 2.0)
    tables = split_tables(4, model.beta, [0.31], Statistics.FERMION)
    total = float(np.sum(np.exp(tables.log_fractions[:, 0])))
    record("fraction normalization", abs(total - 1.0) < 1e-12,
           f"|sum f - 1|={abs(total - 1.0):.2e}")

    # Swapping the two sides mirrors the outcome index exactly.
    model = _model(Statistics.BOSON, 3, 1.3)
    left = split_tables(3, model.beta, [0.28], Statistics.BOSON)
    right = split_tables(3, model.beta, [0.72], Statistics.BOSON)
    mirrored = (left.log_per_outcome[:, 0] ==
                right.log_per_outcome[::-1, 0]).all()
    record("mirror symmetry", mirrored, "bitwise")

    # Classical closed forms.
    avg = classical_average_force(4, 0.37)
    balance = solve_balance(_model(Statistics.CLASSICAL, 4, 1.0), 1)
    exact = classical_balance_point(4, 1)
    record("classical closed forms", avg == 0.0 and balance == exact,
           f"<F>={avg!r}, x1={balance!r}")

    # One particle, central insertion: exactly ln 2 of work at any t.
    model = _model(Statistics.BOSON, 1, 0.8)
    work = optimal_protocol(model, 0.5).total_work_kt
    err = abs(work - math.log(2.0))
    record("single-particle ln 2", err < 1e-12, f"|W - ln 2|={err:.2e}")

    # The symmetric insertion point is stationary for the optimal work.
    model = _model(Statistics.BOSON, 3, 1.0)
    residual = abs(l_extremum_residual(model, 0.5))
    record("central stationarity", residual < 1e-10,
           f"|residual|={residual:.2e}")

    # Optimal work is nonnegative wherever the solver runs.
    model = _model(Statistics.FERMION, 2, 0.5)
    points = stopping_points(model, "optimal")
    worst = min(total_work(model, l, points.per_outcome_optimal).in_kt
                for l in (0.3, 0.5, 0.7))
    record("optimal work nonnegative", worst > -1e-9, f"min W={worst:.2e}")

    return checks
