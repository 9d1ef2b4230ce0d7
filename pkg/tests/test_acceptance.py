"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Criterion 7 checks the stated norm-equivalence constant
c = 1/2 min{1, 1/||2L||^2} on random strain pairs; on the cylinder that
constant admits violations (the provable constant is half of it, see
test_energy.py), so the criterion is expected to fail honestly there.
"""

import filecmp
import math
import time

import numpy as np

from cosshell.cli import main as cli_main
from cosshell.energy import (ALPHA_STAR, MaterialParams, ModelConfig,
                             curv_form_eigenvalues, integrate_energy,
                             lemma_ly_estimate, shell_form_eigenvalues,
                             thickness_check_h3, thickness_check_h5,
                             W_curv, W_shell_inf)
from cosshell.geometry import FrameGrid, evaluate_frame, make_chart, third_order_data
from cosshell.kinematics import (DisplacementField, build_strain_field,
                                 change_of_metric, change_of_metric_rotated,
                                 koiter_bending, koiter_bending_covariant,
                                 rotation_vector)
from cosshell.oracle import (MEASURES, linear_measure, linearization_slope_test,
                             oracle_linear_measure)
from cosshell.solver import assemble, min_eigen_estimate, solve_cg
from cosshell.testfields import random_smooth_field, rigid_motion_field

from conftest import CATALOG, catalog_chart, interior_points

MODELS = ("koiter", "cosserat-h3", "cosserat-h5", "modified-h3", "modified-h5")


def _report(num, description, ok):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {num} failed: {description}"


class TestAcceptance:
    def test_01_coercivity_threshold_constant(self):
        t0 = time.perf_counter()
        alpha = math.sqrt((2.0 / 3.0) * (29.0 - math.sqrt(761.0)))
        elapsed = time.perf_counter() - t0
        ok = abs(alpha - 0.97083) < 5e-6 and alpha == ALPHA_STAR and elapsed < 1e-3
        _report(1, f"alpha* = {alpha:.10f} (5 digits: 0.97083), "
                   f"{elapsed * 1e6:.1f} us", ok)

    def test_02_linearization_oracle_suite(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(42)
        ok = True
        worst_slope = np.inf
        worst_resid = 0.0
        for name in CATALOG:
            chart = catalog_chart(name)
            points = interior_points(chart, 3)
            for _ in range(5):
                field = random_smooth_field(chart, rng)
                for measure in MEASURES:
                    rep = linearization_slope_test(chart, field, measure, points,
                                                   t_values=(1e-2, 1e-3, 1e-4),
                                                   min_slope=0.9)
                    ok = ok and rep.passed
                    if rep.slope is not None:
                        worst_slope = min(worst_slope, rep.slope)
                for p in points:
                    est = oracle_linear_measure(chart, field, "R_inf", p,
                                                t=1e-4, richardson=False)
                    lin = linear_measure(chart, field, "R_inf", p)
                    worst_resid = max(worst_resid,
                                      float(np.linalg.norm(est - lin)))
        elapsed = time.perf_counter() - t0
        ok = ok and worst_resid <= 1e-6 and elapsed < 30.0
        _report(2, f"slopes >= {worst_slope:.3f}, bending-identity residual "
                   f"{worst_resid:.2e} <= 1e-6 at t=1e-4, {elapsed:.1f}s", ok)

    def test_03_identity_suite(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(7)
        worst_g = 0.0
        worst_r = 0.0
        for name in CATALOG:
            chart = catalog_chart(name)
            fg = FrameGrid(chart, 33, 33)
            field = random_smooth_field(chart, rng)
            for i in range(1, 32):
                for j in range(1, 32):
                    fr = fg.frame(i, j)
                    p = (fg.x1[i], fg.x2[j])
                    v = np.asarray(field.fn(p))
                    dv = np.asarray(field.dfn(p))
                    ddv = np.asarray(field.ddfn(p))
                    g1 = change_of_metric(fr, dv)
                    g2 = change_of_metric_rotated(fr, dv, rotation_vector(fr, dv))
                    worst_g = max(worst_g, float(np.abs(g1 - g2).max()))
                    ddn0, d_l = third_order_data(chart, p, fr)
                    r1 = koiter_bending(fr, dv, ddv)
                    r2 = koiter_bending_covariant(fr, v, dv, ddv, ddn0, d_l)
                    worst_r = max(worst_r, float(np.abs(r1 - r2).max()))
        elapsed = time.perf_counter() - t0
        ok = worst_g <= 1e-10 and worst_r <= 1e-10 and elapsed < 5.0
        _report(3, f"metric identity {worst_g:.2e}, bending-form equivalence "
                   f"{worst_r:.2e} (both <= 1e-10 at 33x33 interior), "
                   f"{elapsed:.1f}s", ok)

    def test_04_rigid_motion_annihilation(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(11)
        mat = MaterialParams(mu=1.0, lam=1.0, Lc=0.5)
        worst = 0.0
        for name in CATALOG:
            chart = catalog_chart(name)
            fg = FrameGrid(chart, 17, 17)
            for _ in range(10):
                field = rigid_motion_field(chart, rng.normal(size=3),
                                           rng.normal(size=3))
                disp = DisplacementField.from_function(fg, field.fn, field.dfn,
                                                       field.ddfn, bc="free")
                sf = build_strain_field(fg, disp)
                scale = disp.norm_l2(fg) ** 2
                for model in MODELS:
                    cfg = ModelConfig(model, 0.1, mat,
                                      constraint_warn_threshold=np.inf)
                    eb = integrate_energy(fg, sf, cfg)
                    worst = max(worst, abs(eb.total_internal) / scale)
        elapsed = time.perf_counter() - t0
        ok = worst <= 1e-9 and elapsed < 10.0
        _report(4, f"rigid-motion relative energy {worst:.2e} <= 1e-9 "
                   f"(10 motions x 5 models x 3 surfaces), {elapsed:.1f}s", ok)

    def test_05_flat_plate_reduction(self):
        t0 = time.perf_counter()
        chart = make_chart("plate")
        fg = FrameGrid(chart, 33, 33)
        mat = MaterialParams(mu=1.0, lam=1.0, Lc=0.0)
        load = fg.n0.copy()
        prob_k = assemble(chart, ModelConfig("koiter", 0.05, mat), 33, 33,
                          load=load, fg=fg)
        res_k = solve_cg(prob_k)
        prob_m = assemble(chart, ModelConfig("modified-h5", 0.05, mat), 33, 33,
                          load=load, fg=fg)
        res_m = solve_cg(prob_m)
        du = res_k.field.interior_dofs() - res_m.field.interior_dofs()
        gap = math.sqrt(max(float(du @ prob_k.apply_stiffness(du)), 0.0))
        ref = math.sqrt(2.0 * res_k.energy.total_internal)
        elapsed = time.perf_counter() - t0
        ok = gap <= 1e-8 * ref and elapsed < 30.0
        _report(5, f"Koiter vs modified-h5 (Lc=0) energy-norm gap "
                   f"{gap / ref:.2e} <= 1e-8, {elapsed:.1f}s", ok)

    def test_06_discrete_well_posedness(self):
        t0 = time.perf_counter()
        chart = catalog_chart("cylinder")
        fg = FrameGrid(chart, 33, 33)
        mat = MaterialParams(mu=1.0, lam=1.0, Lc=0.2)
        h = 0.05
        assert thickness_check_h5(fg, h).passed
        assert thickness_check_h3(fg, h, mat).passed
        load = fg.n0.copy()
        ok = True
        details = []
        for model in ("modified-h3", "modified-h5"):
            prob = assemble(chart, ModelConfig(model, h, mat), 33, 33,
                            load=load, fg=fg)
            res = solve_cg(prob, tol=1e-10)  # raises beyond 20*dof iterations
            res_b = solve_cg(prob, tol=1e-10,
                             x0=0.01 * np.ones(prob.ndof))
            diff = np.linalg.norm(res.field.interior_dofs()
                                  - res_b.field.interior_dofs())
            rel = diff / np.linalg.norm(res.field.interior_dofs())
            eig = min_eigen_estimate(prob, seed=0)
            ok = ok and eig > 0.0 and res.residual <= 1e-10 and rel <= 1e-8
            details.append(f"{model}: eig {eig:.2e}, iters {res.iterations}, "
                           f"two-start {rel:.1e}")
        elapsed = time.perf_counter() - t0
        ok = ok and elapsed < 120.0
        _report(6, "; ".join(details) + f", {elapsed:.1f}s", ok)

    def test_07_norm_equivalence_constant(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(0)
        violations = {}
        for name in CATALOG:
            chart = catalog_chart(name)
            frame = evaluate_frame(chart, interior_points(chart, 1)[0])
            count = 0
            for _ in range(1000):
                g = rng.standard_normal((2, 2))
                g = 0.5 * (g + g.T)
                rk = rng.standard_normal((2, 2))
                rk = 0.5 * (rk + rk.T)
                lhs, rhs, c = lemma_ly_estimate(frame, g, rk)
                if lhs < c * rhs - 1e-12:
                    count += 1
            violations[name] = count
        elapsed = time.perf_counter() - t0
        total = sum(violations.values())
        ok = total == 0 and elapsed < 1.0
        _report(7, f"norm-equivalence with c = 1/2 min(1, 1/||2L||^2): "
                   f"violations {violations} over 1000 pairs each, "
                   f"{elapsed * 1e3:.0f} ms", ok)

    def test_08_quadratic_form_bounds(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(3)
        mat = MaterialParams(mu=1.3, lam=0.9, Lc=0.7, b1=1.2, b2=0.8, b3=1.5)
        c1, big_c1 = shell_form_eigenvalues(mat)
        c2, big_c2 = curv_form_eigenvalues(mat)
        worst = 0.0
        for _ in range(1000):
            s = rng.standard_normal((3, 3))
            s = 0.5 * (s + s.T)
            n2 = float(np.sum(s * s))
            w = float(W_shell_inf(s, mat))
            worst = max(worst, c1 * n2 - w, w - big_c1 * n2)
            x = rng.standard_normal((3, 3))
            n2 = float(np.sum(x * x))
            w = float(W_curv(x, mat))
            worst = max(worst, c2 * n2 - w, w - big_c2 * n2)
        c1u, big_c1u = shell_form_eigenvalues(MaterialParams(mu=1.0, lam=0.0))
        exact = abs(c1u - 1.0) <= 1e-12 and abs(big_c1u - 1.0) <= 1e-12
        elapsed = time.perf_counter() - t0
        ok = worst <= 1e-10 and exact and elapsed < 1.0
        _report(8, f"eigenvalue bounds slack {worst:.2e} <= 1e-10; "
                   f"mu=1, lam=0 gives c1+=C1+=1 exactly, "
                   f"{elapsed * 1e3:.0f} ms", ok)

    def test_09_convergence_orders(self):
        t0 = time.perf_counter()
        chart = make_chart("plate")
        mat = MaterialParams(mu=1.0, lam=1.0, Lc=0.0)
        orders = {}
        for model in ("koiter", "modified-h5"):
            energies = []
            for n in (17, 33, 65):  # 16, 32, 64 cells
                fg = FrameGrid(chart, n, n)
                load = np.zeros((n, n, 3))
                load[:, :, 2] = (np.sin(np.pi * fg.x1)[:, None]
                                 * np.sin(np.pi * fg.x2)[None, :])
                prob = assemble(chart, ModelConfig(model, 0.05, mat), n, n,
                                load=load, fg=fg)
                energies.append(solve_cg(prob).energy.total_internal)
            orders[model] = math.log2(abs(energies[0] - energies[1])
                                      / abs(energies[1] - energies[2]))
        elapsed = time.perf_counter() - t0
        ok = all(o >= 1.8 for o in orders.values()) and elapsed < 300.0
        _report(9, f"Richardson orders {orders} >= 1.8 over 16/32/64 cells, "
                   f"{elapsed:.1f}s", ok)

    def test_10_determinism(self, tmp_path):
        cfg_text = (
            "chart.kind = cylinder\nchart.radius = 2.0\nchart.x1_max = 1.2\n"
            "chart.x2_max = 1.0\nmodel.kind = modified-h5\nmodel.h = 0.05\n"
            "material.Lc = 0.1\nload.kind = normal\ngrid.n1 = 17\ngrid.n2 = 17\n")
        cfg = tmp_path / "run.cfg"
        cfg.write_text(cfg_text)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert cli_main(["solve", "--config", str(cfg), "--out", str(out_a)]) == 0
        assert cli_main(["solve", "--config", str(cfg), "--out", str(out_b)]) == 0
        names = ("solution.csv", "energy.csv", "strains.csv", "report.txt")
        same = all(filecmp.cmp(out_a / n, out_b / n, shallow=False) for n in names)
        _report(10, f"repeated runs byte-identical across {names}", same)
