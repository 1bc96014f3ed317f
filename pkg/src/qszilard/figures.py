"""Matplotlib rendering for the CLI report path.

Imports of matplotlib stay inside the functions so the library core never
pays for them; the Agg backend keeps rendering headless.
"""

from __future__ import annotations

import re

__all__ = ["render_sweep", "render_forces", "render_optimize"]

_M_COLORS = "tab:blue tab:orange tab:green tab:red tab:purple tab:brown".split()


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _clean(rows, keys):
    cols = {k: [] for k in keys}
    for row in rows:
        if row.get("error"):
            continue
        for k in keys:
            cols[k].append(row[k])
    return cols


def render_sweep(rows, axis: str, out_path) -> None:
    """Per-outcome detail (top) and extracted work (bottom) against the axis.

    Temperature sweeps show the stopping points on top; insertion sweeps
    show the per-outcome works instead, since stopping points do not depend
    on the insertion point.
    """
    plt = _pyplot()
    keys = [k for k in rows[0] if k != "error"]
    cols = _clean(rows, keys)
    x = cols[axis]
    top_prefix, top_label = (("x", "stopping point") if axis == "t"
                             else ("w", "per-outcome work / kT"))

    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, sharex=True, figsize=(6.0, 6.5),
        gridspec_kw={"height_ratios": [3, 2]})
    styles = {"balance": "--", "optimal": "-"}
    pattern = re.compile(rf"^{top_prefix}(\d+)_(balance|optimal)$")
    for proto, style in styles.items():
        for key in keys:
            match = pattern.match(key)
            if match is None or match.group(2) != proto:
                continue
            m = int(match.group(1))
            values = cols[key]
            if len(set(values)) == 1:
                continue  # pinned or empty outcomes carry no information
            ax_top.plot(x, values, style, color=_M_COLORS[m % len(_M_COLORS)],
                        label=f"${top_prefix}_{{{m}}}$ ({proto})")
        work_key = f"work_kt_{proto}"
        if work_key in cols:
            ax_bot.plot(x, cols[work_key], style, color="black",
                        label=f"work ({proto})")
    ax_top.set_ylabel(top_label)
    if ax_top.get_legend_handles_labels()[0]:
        ax_top.legend(fontsize=8, ncol=2)
    ax_bot.axhline(0.0, color="gray", lw=0.6)
    ax_bot.set_ylabel("work / kT")
    ax_bot.legend(fontsize=8)
    if axis == "t":
        ax_bot.set_xlabel("temperature (ground-state units)")
        if x and max(x) / min(x) > 10.0:
            ax_bot.set_xscale("log")
    else:
        ax_bot.set_xlabel("insertion point")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_forces(rows, footer, out_path) -> None:
    """Outcome force against the weighted mean force, plus their residual."""
    plt = _pyplot()
    cols = _clean(rows, ["x", "force", "average_force", "residual"])
    fig, (ax_top, ax_bot) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 6.0))
    ax_top.plot(cols["x"], cols["force"], "-", label="outcome force")
    ax_top.plot(cols["x"], cols["average_force"], "--", label="mean force")
    ax_bot.plot(cols["x"], cols["residual"], "-", color="tab:red")
    ax_bot.axhline(0.0, color="gray", lw=0.6)
    for key, style in (("x_balance", ":"), ("x_optimal", "-.")):
        value = footer.get(key)
        if value is not None:
            for ax in (ax_top, ax_bot):
                ax.axvline(value, color="gray", ls=style, lw=0.8)
    ax_top.set_ylabel("force")
    ax_top.legend(fontsize=8)
    ax_bot.set_ylabel("residual")
    ax_bot.set_xlabel("wall position")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_optimize(rows, footer, out_path) -> None:
    """Work against insertion point with the refined optimum marked."""
    plt = _pyplot()
    cols = _clean(rows, ["l", "work_kt", "stationarity_residual"])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(cols["l"], cols["work_kt"], "-", color="black", label="work / kT")
    best = footer.get("best_l")
    if best is not None:
        ax.axvline(best, color="tab:blue", ls="--", lw=0.8,
                   label="best insertion")
    twin = ax.twinx()
    twin.plot(cols["l"], cols["stationarity_residual"], "-",
              color="tab:red", lw=0.7, alpha=0.6)
    twin.set_ylabel("stationarity residual", color="tab:red")
    ax.set_xlabel("insertion point")
    ax.set_ylabel("work / kT")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
