"""Command line front end.

Four subcommands:

  forces    tabulate the outcome force, mean force and their residual on a grid
  sweep     solve stopping points and work over a temperature or insertion grid
  optimize  scan extracted work over the insertion point and refine the best one
  validate  run the built-in consistency checks and report pass/fail

Every numeric option can also come from a key=value config file via --config;
explicit flags win over the file.  Grids use the syntax A:B:STEPS or
A:B:STEPS:log.  Output is CSV (default) or JSON; --plot renders a PNG next to
the output file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from importlib import metadata

import numpy as np

from .engine import (EngineModel, optimize_insertion, sweep_fieldnames,
                     sweep_temperature, sweep_wall)
from .errors import EngineError, NoBracketError
from .forces import force_tables, solve_balance, solve_optimal
from .partition import Statistics

__all__ = ["main"]

STATS_CHOICES = ("boson", "fermion", "distinguishable", "classical")


class UsageError(Exception):
    """Bad flag combination; reported on stderr with exit code 2."""


@dataclass
class RunConfig:
    command: str = ""
    stats: str | None = None
    n: int | None = None
    t: float | None = None
    m: int | None = None
    x_grid: str | None = None
    t_grid: str | None = None
    l_grid: str | None = None
    l: float | None = None
    protocol: str | None = None
    grid_points: int | None = None
    workers: int | None = None
    fmt: str | None = None
    out: str | None = None
    plot: bool | None = None


_COERCERS = {
    "n": int, "m": int, "grid_points": int, "workers": int,
    "t": float, "l": float,
    "plot": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}
_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}
_CONFIG_ALIASES = {"format": "fmt"}


def load_config_file(path: str) -> dict:
    options = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key = key.strip().replace("-", "_")
            key = _CONFIG_ALIASES.get(key, key)
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
            value = value.strip()
            try:
                options[key] = _COERCERS.get(key, str)(value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from exc
    return options


def parse_grid(text: str, name: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise UsageError(
            f"--{name}: expected A:B:STEPS or A:B:STEPS:log, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from exc
    if steps < 1:
        raise UsageError(f"--{name}: need at least one point")
    if len(parts) == 4:
        if lo <= 0.0 or hi <= 0.0:
            raise UsageError(f"--{name}: log spacing needs positive bounds")
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qszilard",
        description="measurement-driven wall engine for a particle-in-a-box")
    try:
        version = metadata.version("qszilard")
    except metadata.PackageNotFoundError:
        version = "unknown"
    parser.add_argument("--version", action="version", version=version)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("--config", help="key=value option file; flags override")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       help="output format (default csv)")
        p.add_argument("--out", help="output file path (default stdout)")
        p.add_argument("--plot", action="store_const", const=True,
                       help="also render a PNG next to --out")

    def add_model(p):
        p.add_argument("--stats", choices=STATS_CHOICES,
                       help="particle statistics")
        p.add_argument("--n", type=int, help="particle count")
        p.add_argument("--t", type=float,
                       help="temperature in ground-state units kT/E1")

    p = sub.add_parser("forces", help="force profiles for one outcome")
    add_model(p)
    p.add_argument("--m", type=int, help="left-side outcome to profile")
    p.add_argument("--x-grid", help="wall positions, A:B:STEPS[:log]")
    add_output(p)

    p = sub.add_parser("sweep", help="stopping points and work over a grid")
    add_model(p)
    p.add_argument("--t-grid", help="temperature grid, A:B:STEPS[:log]")
    p.add_argument("--l-grid", help="insertion grid, A:B:STEPS[:log]")
    p.add_argument("--l", type=float, help="insertion point for --t-grid runs")
    p.add_argument("--protocol", choices=("balance", "optimal", "both"))
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")
    add_output(p)

    p = sub.add_parser("optimize", help="best insertion point by scan+refine")
    add_model(p)
    p.add_argument("--grid-points", type=int, help="scan resolution")
    add_output(p)

    p = sub.add_parser("validate", help="run built-in consistency checks")
    p.add_argument("--out", help="write the report here instead of stdout")

    return parser


def merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    file_opts = {}
    if getattr(args, "config", None):
        file_opts = load_config_file(args.config)
    for field in fields(RunConfig):
        if field.name == "command":
            continue
        value = getattr(args, field.name, None)
        if value is None:
            value = file_opts.get(field.name)
        setattr(cfg, field.name, value)
    if cfg.fmt is None:
        cfg.fmt = "csv"
    if cfg.plot is None:
        cfg.plot = False
    if cfg.plot and not cfg.out:
        raise UsageError("--plot needs --out to place the image next to")
    return cfg


def require(cfg: RunConfig, *names: str):
    values = []
    for name in names:
        value = getattr(cfg, name)
        if value is None:
            flag = "--" + name.replace("_", "-")
            raise UsageError(f"{cfg.command} needs {flag} (flag or config file)")
        values.append(value)
    return values


def build_model(cfg: RunConfig) -> EngineModel:
    stats, n, t = require(cfg, "stats", "n", "t")
    return EngineModel(particle_count=n, statistics=Statistics.parse(stats),
                       temperature=t)


# ---------------------------------------------------------------------------
# Output writers.  CSV keeps full precision with %.17g and appends the footer
# as "# key=value" comment lines; JSON emits a bare row array for sweeps and
# {"rows": ..., "footer": ...} elsewhere.


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(stream, fieldnames, rows, footer=None) -> None:
    stream.write(",".join(fieldnames) + "\n")
    for row in rows:
        stream.write(",".join(_cell(row.get(k)) for k in fieldnames) + "\n")
    for key, value in (footer or {}).items():
        stream.write(f"# {key}={_cell(value)}\n")


def write_json(stream, payload) -> None:
    json.dump(payload, stream, indent=2, allow_nan=True)
    stream.write("\n")


def emit(cfg: RunConfig, fieldnames, rows, footer, render) -> None:
    if cfg.fmt == "json":
        payload = rows if cfg.command == "sweep" else {
            "rows": rows, "footer": footer}
    else:
        payload = None

    def write(stream):
        if cfg.fmt == "json":
            write_json(stream, payload)
        else:
            write_csv(stream, fieldnames, rows, footer)

    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as handle:
            write(handle)
    else:
        write(sys.stdout)
    if cfg.plot and render is not None:
        stem = cfg.out.rsplit(".", 1)[0] if "." in cfg.out.rsplit("/", 1)[-1] \
            else cfg.out
        render(stem + ".png")


def _native_rows(rows):
    out = []
    for row in rows:
        out.append({k: (float(v) if isinstance(v, (np.floating, float))
                        else v) for k, v in row.items()})
    return out


# ---------------------------------------------------------------------------
# Subcommands.


def cmd_forces(cfg: RunConfig) -> int:
    model = build_model(cfg)
    (m,), (grid_text,) = require(cfg, "m"), require(cfg, "x_grid")
    if not 0 <= m <= model.particle_count:
        raise UsageError(f"--m must lie in 0..{model.particle_count}")
    grid = parse_grid(grid_text, "x-grid")
    L = model.length
    if not np.all((grid > 0.0) & (grid < L)):
        raise UsageError("--x-grid must stay strictly inside (0, L)")

    forces, average, log_f, _ = force_tables(model, grid)
    rows = [{"x": float(x),
             "force": float(forces[m, i]),
             "average_force": float(average[i]),
             "residual": float(forces[m, i] - average[i]),
             "fraction": float(math.exp(log_f[m, i]))}
            for i, x in enumerate(grid)]

    footer = {"stats": cfg.stats, "n": model.particle_count,
              "t": model.temperature, "m": m}
    if 0 < m < model.particle_count:
        for key, solver in (("x_balance", solve_balance),
                            ("x_optimal", solve_optimal)):
            try:
                footer[key] = solver(model, m)
            except NoBracketError:
                footer[key] = None

    def render(path):
        from .figures import render_forces
        render_forces(rows, footer, path)

    emit(cfg, ["x", "force", "average_force", "residual", "fraction"],
         rows, footer, render)
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if (cfg.t_grid is None) == (cfg.l_grid is None):
        raise UsageError("sweep needs exactly one of --t-grid or --l-grid")
    protocol = cfg.protocol or "both"
    workers = cfg.workers or 1
    if workers < 1:
        raise UsageError("--workers must be positive")

    if cfg.t_grid is not None:
        # the model temperature is replaced row by row, so --t is not needed
        stats, n = require(cfg, "stats", "n")
        model = EngineModel(particle_count=n,
                            statistics=Statistics.parse(stats),
                            temperature=cfg.t if cfg.t is not None else 1.0)
        axis = "t"
        grid = parse_grid(cfg.t_grid, "t-grid")
        l = cfg.l if cfg.l is not None else 0.5 * model.length
        rows = sweep_temperature(model, grid, l, protocol, workers)
        footer = {"stats": cfg.stats, "n": model.particle_count, "l": l,
                  "protocol": protocol}
    else:
        model = build_model(cfg)
        axis = "l"
        grid = parse_grid(cfg.l_grid, "l-grid")
        rows = sweep_wall(model, grid, protocol)
        footer = {"stats": cfg.stats, "n": model.particle_count,
                  "t": model.temperature, "protocol": protocol}

    rows = _native_rows(rows)

    def render(path):
        from .figures import render_sweep
        render_sweep(rows, axis, path)

    emit(cfg, sweep_fieldnames(model.particle_count, protocol, axis),
         rows, footer, render)
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    model = build_model(cfg)
    rows, footer = optimize_insertion(model, cfg.grid_points)
    rows = _native_rows(rows)
    footer = {"stats": cfg.stats, "n": model.particle_count,
              "t": model.temperature, **footer}

    def render(path):
        from .figures import render_optimize
        render_optimize(rows, footer, path)

    emit(cfg, ["l", "work_kt", "work_e0", "stationarity_residual", "error"],
         rows, footer, render)
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    from .validation import run_checks
    checks = run_checks()
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})"
             for name, ok, detail in checks]
    report = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as handle:
            handle.write(report)
    else:
        sys.stdout.write(report)
    return 0 if all(ok for _, ok, _ in checks) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
        handler = {"forces": cmd_forces, "sweep": cmd_sweep,
                   "optimize": cmd_optimize, "validate": cmd_validate}
        return handler[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
