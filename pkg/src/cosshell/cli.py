"""Scenario driver: solve, compare, convergence, check, and oracle runs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Errors
print one machine-readable line ``ERROR kind=<class> msg=<message>`` on
stderr.  All CSV output is byte-deterministic; PNG figures are opt-in via
--plots and sit outside the data contract.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import runio
from .config import RunConfig
from .energy import (ALPHA_STAR, curv_form_eigenvalues, lemma_ly_estimate,
                     shell_form_eigenvalues, thickness_check_h3,
                     thickness_check_h5)
from .errors import ConfigError, CosshellError
from .geometry import FrameGrid
from .kinematics import build_strain_field
from .oracle import (MEASURES, linear_measure, linearization_slope_test,
                     oracle_linear_measure)
from .solver import assemble, min_eigen_estimate, solve_cg
from .testfields import random_smooth_field

def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.set or (), seed=args.seed)
        outdir = runio.ensure_dir(args.out)
        args.func(cfg, outdir, args)
    except ConfigError as exc:
        print(f"ERROR kind=ConfigError msg={exc}", file=sys.stderr)
        return 2
    except CosshellError as exc:
        print(f"ERROR kind={type(exc).__name__} msg={exc}", file=sys.stderr)
        return 3
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cosshell",
        description="Linear constrained Cosserat shell models up to O(h^5)")
    sub = parser.add_subparsers(required=True)

    def common(p, func):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--set", action="append", metavar="K=V",
                       help="override one config key (repeatable)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for random test fields")
        p.add_argument("--plots", action="store_true",
                       help="also render PNG figures next to the CSVs")
        p.set_defaults(func=func)

    common(sub.add_parser("solve", help="assemble and solve one model"), cmd_solve)
    common(sub.add_parser("compare", help="solve several models and compare"),
           cmd_compare)
    common(sub.add_parser("convergence", help="grid-refinement study"),
           cmd_convergence)
    common(sub.add_parser("check", help="thickness/coercivity checks, no solve"),
           cmd_check)
    common(sub.add_parser("oracle", help="linearization slope tests"), cmd_oracle)
    return parser


def _report_header(cfg):
    lines = ["# cosshell report", "", "[resolved configuration]"]
    lines += cfg.resolved_lines()
    lines.append("")
    return lines


def _thickness_lines(fg, h, material):
    rep5 = thickness_check_h5(fg, h)
    rep3 = thickness_check_h3(fg, h, material)
    return rep5, rep3, rep5.lines() + rep3.lines()


def _solve_one(cfg, chart, fg, model=None, h=None, load=None, min_eig=False):
    mc = cfg.model_config(model=model, h=h)
    load = cfg.load_array(fg) if load is None else load
    problem = assemble(chart, mc, fg.n1, fg.n2, load=load, fg=fg)
    max_iter = cfg["solver.max_iter"] or None
    result = solve_cg(problem, tol=cfg["solver.tol"], max_iter=max_iter)
    if min_eig:
        result.min_eigen = min_eigen_estimate(problem, seed=cfg["seed"])
    return problem, result


def cmd_solve(cfg, outdir, args):
    chart = cfg.chart()
    fg = FrameGrid(chart, cfg["grid.n1"], cfg["grid.n2"])
    _, result = _solve_one(cfg, chart, fg, min_eig=True)

    runio.write_solution_csv(os.path.join(outdir, "solution.csv"), fg,
                             result.field.values)
    runio.write_energy_csv(os.path.join(outdir, "energy.csv"), [result.energy])
    sf = build_strain_field(fg, result.field)
    runio.write_strain_csv(os.path.join(outdir, "strains.csv"), fg, sf)

    lines = _report_header(cfg)
    _, _, tl = _thickness_lines(fg, cfg["model.h"], cfg.material())
    lines += tl
    lines += [
        "",
        f"solver iterations = {result.iterations}",
        f"solver relative residual = {runio.fmt(result.residual)}",
        f"coercivity estimate (min stiffness eigenvalue) = {runio.fmt(result.min_eigen)}",
        "",
        "[constraint residuals]",
        *(f"{k} = {runio.fmt(v)}" for k, v in result.constraint_summary.items()),
        "",
        "[energy]",
        *(f"{k} = {runio.fmt(v)}" for k, v in result.energy.as_row().items()
          if k != "model"),
    ]
    runio.write_text(os.path.join(outdir, "report.txt"), lines)
    if args.plots:
        runio.render_solution_figure(os.path.join(outdir, "solution.png"), fg,
                                     result.field.values)


def cmd_compare(cfg, outdir, args):
    models = [m.strip() for m in cfg["compare.models"].split(",") if m.strip()]
    h_list = cfg["model.h_sweep"] or (cfg["model.h"],)
    runs = []
    for model in models:
        for h in h_list:
            label = model if len(h_list) == 1 else f"{model}[h={h:g}]"
            runs.append((label, model, h))
    if len(runs) < 2:
        raise ConfigError("compare needs at least two runs "
                          "(two models, or one model with an h sweep)")
    chart = cfg.chart()
    fg = FrameGrid(chart, cfg["grid.n1"], cfg["grid.n2"])
    w = fg.quadrature_weights()
    results = {}
    problems = {}
    for label, model, h in runs:
        problems[label], results[label] = _solve_one(cfg, chart, fg,
                                                     model=model, h=h)
        results[label].energy.model = label
    labels = [r[0] for r in runs]
    runio.write_energy_csv(os.path.join(outdir, "energy.csv"),
                           [results[m].energy for m in labels])

    rows = []
    for ia, ma in enumerate(labels):
        for mb in labels[ia + 1:]:
            va = results[ma].field.values
            vb = results[mb].field.values
            diff = va - vb
            l2 = float(np.sqrt(np.sum(w * np.sum(diff ** 2, axis=2))))
            ref = float(np.sqrt(np.sum(w * np.sum(va ** 2, axis=2))))
            du = results[ma].field.interior_dofs() - results[mb].field.interior_dofs()
            en = float(np.sqrt(max(du @ problems[ma].apply_stiffness(du), 0.0)))
            en_ref = float(np.sqrt(max(2.0 * results[ma].energy.total_internal, 0.0)))
            rows.append([ma, mb, l2, l2 / ref if ref > 0 else 0.0,
                         en, en / en_ref if en_ref > 0 else 0.0])
    runio.write_csv(os.path.join(outdir, "comparison.csv"),
                    ["model_a", "model_b", "l2_diff", "l2_rel",
                     "energy_norm_diff", "energy_norm_rel"], rows)

    lines = _report_header(cfg)
    _, _, tl = _thickness_lines(fg, cfg["model.h"], cfg.material())
    lines += tl + ["", "[pairwise differences]"]
    for row in rows:
        lines.append(f"{row[0]} vs {row[1]}: L2 {runio.fmt(row[2])} "
                     f"(rel {runio.fmt(row[3])}), energy-norm {runio.fmt(row[4])} "
                     f"(rel {runio.fmt(row[5])})")
    runio.write_text(os.path.join(outdir, "report.txt"), lines)
    if args.plots:
        runio.render_compare_figure(os.path.join(outdir, "compare.png"),
                                    [results[m].energy for m in labels])


def cmd_convergence(cfg, outdir, args):
    grids = list(cfg["grid.sweep"])
    if len(grids) < 3:
        raise ConfigError("grid.sweep needs at least three nested sizes")
    models = [m.strip() for m in cfg["compare.models"].split(",") if m.strip()]
    chart = cfg.chart()
    table = []
    for model in models:
        energies = []
        for n in grids:
            fg = FrameGrid(chart, n, n)
            _, result = _solve_one(cfg, chart, fg, model=model)
            energies.append(result.energy.total_internal)
            table.append((model, n, result.energy.total_internal, ""))
        orders = []
        for k in range(len(grids) - 2):
            e0, e1, e2 = energies[k:k + 3]
            num, den = abs(e0 - e1), abs(e1 - e2)
            orders.append(np.log2(num / den) if den > 0 else np.inf)
        table.append((model, 0, energies[-1], ";".join(f"{o:.6g}" for o in orders)))
    runio.write_csv(os.path.join(outdir, "convergence.csv"),
                    ["model", "n", "total_internal", "richardson_orders"],
                    table)
    lines = _report_header(cfg) + ["[convergence]"]
    for row in table:
        if row[1] == 0:
            lines.append(f"{row[0]}: Richardson orders {row[3]}")
    runio.write_text(os.path.join(outdir, "report.txt"), lines)
    if args.plots:
        runio.render_convergence_figure(os.path.join(outdir, "convergence.png"),
                                        [(r[0], r[1], r[2]) for r in table if r[1]])


def cmd_check(cfg, outdir, args):
    chart = cfg.chart()
    fg = FrameGrid(chart, cfg["grid.n1"], cfg["grid.n2"])
    mat = cfg.material()
    rep5, rep3, tl = _thickness_lines(fg, cfg["model.h"], mat)
    c1p, big_c1p = shell_form_eigenvalues(mat)
    c2p, big_c2p = curv_form_eigenvalues(mat)

    rng = np.random.default_rng(cfg["seed"])
    samples = 1000
    frame = fg.frame(fg.n1 // 2, fg.n2 // 2)
    viol_stated = 0
    viol_proved = 0
    for _ in range(samples):
        g = rng.standard_normal((2, 2))
        g = 0.5 * (g + g.T)
        rk = rng.standard_normal((2, 2))
        rk = 0.5 * (rk + rk.T)
        lhs, rhs, c_used = lemma_ly_estimate(frame, g, rk)
        if lhs < c_used * rhs - 1e-12:
            viol_stated += 1
        if lhs < 0.5 * c_used * rhs - 1e-12:
            viol_proved += 1

    rows = [
        ("alpha_star", ALPHA_STAR),
        ("h_max_kappa", rep5.h_max_kappa),
        ("thickness_h5_pass", int(rep5.passed)),
        ("thickness_h3_pass", int(rep3.passed)),
        ("c1_plus", c1p), ("C1_plus", big_c1p),
        ("c2_plus", c2p), ("C2_plus", big_c2p),
        ("poisson_ratio", mat.poisson),
        ("lemma_samples", samples),
        ("lemma_violations_c_stated", viol_stated),
        ("lemma_violations_c_halved", viol_proved),
    ]
    runio.write_csv(os.path.join(outdir, "checks.csv"), ["quantity", "value"], rows)
    lines = _report_header(cfg) + tl + [
        "",
        f"W_shell eigenvalue bounds: c1+ = {runio.fmt(c1p)}, C1+ = {runio.fmt(big_c1p)}",
        f"W_curv eigenvalue bounds: c2+ = {runio.fmt(c2p)}, C2+ = {runio.fmt(big_c2p)}",
        f"Poisson ratio (reported only) = {runio.fmt(mat.poisson)}",
        f"norm-equivalence check on {samples} random strain pairs: "
        f"{viol_stated} violations at the stated constant, "
        f"{viol_proved} at half of it",
    ]
    runio.write_text(os.path.join(outdir, "report.txt"), lines)


def cmd_oracle(cfg, outdir, args):
    chart = cfg.chart()
    rng = np.random.default_rng(cfg["seed"])
    t_values = tuple(cfg["oracle.t_values"])
    n_fields = cfg["oracle.fields"]
    n_points = cfg["oracle.points"]
    fractions = np.linspace(0.3, 0.7, n_points)
    points = [(chart.x1_min + f * chart.extents[0],
               chart.x2_min + (1 - f) * chart.extents[1]) for f in fractions]

    rows = []
    report_lines = []
    all_pass = True
    for k in range(n_fields):
        field = random_smooth_field(chart, rng)
        for measure in MEASURES:
            rep = linearization_slope_test(chart, field, measure, points,
                                           t_values=t_values,
                                           min_slope=cfg["oracle.min_slope"])
            equ22 = ""
            if measure == "R_inf":
                worst = 0.0
                for p in points:
                    est = oracle_linear_measure(chart, field, "R_inf", p,
                                                t=1e-4, richardson=False)
                    lin = linear_measure(chart, field, "R_inf", p)
                    worst = max(worst, float(np.linalg.norm(est - lin)))
                equ22 = worst
            rows.append([k, measure,
                         rep.slope if rep.slope is not None else np.inf,
                         *rep.defects, int(rep.passed), equ22])
            report_lines.append(f"field {k}: {rep.line()}"
                                + (f"  bending-identity resid {runio.fmt(equ22)}"
                                   if equ22 != "" else ""))
            all_pass = all_pass and rep.passed
    header = (["field", "measure", "slope"]
              + [f"D_t{ti:g}" for ti in t_values] + ["passed", "bending_identity_resid"])
    runio.write_csv(os.path.join(outdir, "oracle.csv"), header, rows)
    lines = _report_header(cfg) + ["[linearization slope tests]"] + report_lines
    lines.append(f"overall: {'PASS' if all_pass else 'FAIL'}")
    runio.write_text(os.path.join(outdir, "report.txt"), lines)
    if args.plots:
        _render_oracle_figure(os.path.join(outdir, "oracle.png"), rows, t_values)


def _render_oracle_figure(path, rows, t_values):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5.2, 4.0), constrained_layout=True)
    for row in rows:
        ds = row[3:3 + len(t_values)]
        ax.loglog(t_values, np.maximum(ds, 1e-300), "o-", alpha=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("linearization defect D(t)")
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, dpi=130, metadata={"Software": None})
    plt.close(fig)


if __name__ == "__main__":
    sys.exit(main())
