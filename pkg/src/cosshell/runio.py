"""CSV and report output: 17 significant digits, '.' decimal, LF endings.

All delimited outputs are byte-deterministic given identical inputs; figures
(optional) are rendered alongside the CSVs when requested but are not part of
the data contract.
"""

from __future__ import annotations

import os

import numpy as np

from .energy import TERM_KEYS

__all__ = ["fmt", "write_csv", "write_text", "write_solution_csv",
           "write_energy_csv", "write_strain_csv", "read_solution_csv",
           "render_solution_figure", "render_convergence_figure",
           "render_compare_figure"]


def fmt(x) -> str:
    """One value, 17 significant digits for floats."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_text(path, lines):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_solution_csv(path, fg, values):
    rows = []
    for i in range(fg.n1):
        for j in range(fg.n2):
            rows.append([i, j, fg.x1[i], fg.x2[j],
                         values[i, j, 0], values[i, j, 1], values[i, j, 2]])
    write_csv(path, ["i", "j", "x1", "x2", "v1", "v2", "v3"], rows)


def read_solution_csv(path):
    with open(path, newline="") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    if header != ["i", "j", "x1", "x2", "v1", "v2", "v3"]:
        raise ValueError(f"{path}: expected header i,j,x1,x2,v1,v2,v3")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    n1 = int(data[:, 0].max()) + 1
    n2 = int(data[:, 1].max()) + 1
    vals = np.zeros((n1, n2, 3))
    for row in data:
        vals[int(row[0]), int(row[1])] = row[4:7]
    return vals


def write_energy_csv(path, breakdowns):
    header = ["model"] + list(TERM_KEYS) + ["total_internal", "load_work", "grand_total"]
    rows = []
    for eb in breakdowns:
        row = eb.as_row()
        rows.append([row[k] for k in header])
    write_csv(path, header, rows)


def write_strain_csv(path, fg, sf):
    header = ["i", "j", "x1", "x2",
              "G11", "G22", "G12", "RK11", "RK22", "RK12",
              "Rinf11", "Rinf12", "Rinf21", "Rinf22",
              "theta1", "theta2", "theta3", "r1", "r2"]
    rows = []
    for i in range(fg.n1):
        for j in range(fg.n2):
            g = sf.G[i, j]
            rk = sf.RK[i, j]
            ri = sf.R_inf[i, j]
            th = sf.theta[i, j]
            rows.append([i, j, fg.x1[i], fg.x2[j],
                         g[0, 0], g[1, 1], g[0, 1], rk[0, 0], rk[1, 1], rk[0, 1],
                         ri[0, 0], ri[0, 1], ri[1, 0], ri[1, 1],
                         th[0], th[1], th[2], sf.r1[i, j], sf.r2[i, j]])
    write_csv(path, header, rows)


# ---------------------------------------------------------------------------
# optional figures (matplotlib, Agg); not part of the data contract
# ---------------------------------------------------------------------------

def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_solution_figure(path, fg, values):
    plt = _plt()
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), constrained_layout=True)
    for c, ax in enumerate(axes):
        im = ax.pcolormesh(fg.x1, fg.x2, values[:, :, c].T, shading="gouraud")
        ax.set_title(f"v{c + 1}")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        fig.colorbar(im, ax=ax)
    fig.savefig(path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def render_convergence_figure(path, table):
    """table rows: (model, n, energy)."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.2, 4.0), constrained_layout=True)
    models = sorted({r[0] for r in table})
    for model in models:
        pts = [(r[1], r[2]) for r in table if r[0] == model]
        pts.sort()
        ns = np.array([p[0] for p in pts], dtype=float)
        es = np.array([p[1] for p in pts])
        ref = es[-1]
        err = np.abs(es[:-1] - ref)
        ax.loglog(ns[:-1], np.maximum(err, 1e-300), "o-", label=model)
    ax.set_xlabel("nodes per side")
    ax.set_ylabel("|E(n) - E(finest)|")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def render_compare_figure(path, breakdowns):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0), constrained_layout=True)
    models = [eb.model for eb in breakdowns]
    x = np.arange(len(TERM_KEYS))
    width = 0.8 / max(len(models), 1)
    for k, eb in enumerate(breakdowns):
        vals = [eb.terms.get(t, 0.0) for t in TERM_KEYS]
        ax.bar(x + k * width, vals, width, label=eb.model)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(TERM_KEYS, rotation=30, ha="right")
    ax.set_ylabel("energy")
    ax.legend()
    fig.savefig(path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
