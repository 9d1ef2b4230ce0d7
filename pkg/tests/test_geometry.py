"""Surface geometry: frames, lifted tensors, numeric-derivative oracle."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cosshell.errors import DegenerateMetric, OutOfDomain, StepUnderflow
from cosshell.geometry import (FrameGrid, evaluate_frame, lifted_tensors,
                               load_graph_chart, load_tabulated_chart, make_chart,
                               numeric_derivatives, third_order_data)

from conftest import CATALOG, catalog_chart, interior_points


class TestEvaluateFrame:
    def test_flat_plate(self):
        fr = evaluate_frame(make_chart("plate"), (0.37, 0.81))
        assert_allclose(fr.I, np.eye(2), atol=1e-15)
        assert_allclose(fr.II, 0.0, atol=1e-15)
        assert_allclose(fr.L, 0.0, atol=1e-15)
        assert fr.H == 0.0 and fr.K == 0.0
        assert_allclose(fr.Gamma, 0.0, atol=1e-15)
        assert_allclose(fr.n0, [0.0, 0.0, 1.0], atol=1e-15)

    def test_cylinder_hand_values(self):
        # hand differentiation, cross-checked against the numeric oracle below
        ch = catalog_chart("cylinder")
        fr = evaluate_frame(ch, (0.4, 0.5))
        assert_allclose(fr.I, np.diag([4.0, 1.0]), atol=1e-12)
        assert_allclose(fr.II, np.diag([-2.0, 0.0]), atol=1e-12)
        assert_allclose(fr.L, np.diag([-0.5, 0.0]), atol=1e-12)
        assert_allclose(fr.H, -0.25, atol=1e-13)
        assert_allclose(fr.K, 0.0, atol=1e-13)
        # outward normal
        assert fr.n0 @ np.array([np.cos(0.4), np.sin(0.4), 0.0]) > 0.99

    def test_cylinder_numeric_mode_agrees(self):
        pt = (0.4, 0.5)
        closed = evaluate_frame(catalog_chart("cylinder"), pt)
        numeric = evaluate_frame(catalog_chart("cylinder", "numeric"), pt)
        assert_allclose(numeric.I, closed.I, atol=1e-9)
        assert_allclose(numeric.II, closed.II, atol=1e-8)
        assert_allclose(numeric.L, closed.L, atol=1e-8)

    def test_sphere_shape_operator(self):
        ch = catalog_chart("sphere")
        for pt in interior_points(ch):
            fr = evaluate_frame(ch, pt)
            assert_allclose(fr.L, -np.eye(2), atol=1e-10)
            assert_allclose(fr.H, -1.0, atol=1e-12)
            assert_allclose(fr.K, 1.0, atol=1e-12)
            assert_allclose(fr.n0, fr.y0, atol=1e-12)  # outward, R = 1

    @pytest.mark.parametrize("name", CATALOG)
    def test_frame_invariants(self, name):
        ch = catalog_chart(name)
        for pt in interior_points(ch, n=4):
            fr = evaluate_frame(ch, pt)
            assert_allclose(fr.I, fr.I.T, atol=1e-14)
            assert np.linalg.eigvalsh(fr.I)[0] > 0
            assert_allclose(fr.II, fr.II.T, atol=1e-12)
            assert_allclose(fr.I @ fr.L, fr.II, atol=1e-13)
            assert_allclose(np.trace(fr.L), 2 * fr.H, atol=1e-13)
            assert_allclose(np.linalg.det(fr.L), fr.K, atol=1e-13)
            assert_allclose(fr.grad_theta_inv @ fr.grad_theta, np.eye(3),
                            atol=1e-12)
            assert abs(fr.n0 @ fr.a1) < 1e-12 and abs(fr.n0 @ fr.a2) < 1e-12
            assert abs(np.linalg.norm(fr.n0) - 1.0) < 1e-12
            assert_allclose(fr.Gamma, fr.Gamma.transpose(0, 2, 1), atol=1e-12)
            # ||a1 x a2|| = sqrt(det I)
            assert_allclose(np.linalg.norm(np.cross(fr.a1, fr.a2)),
                            np.sqrt(np.linalg.det(fr.I)), atol=1e-10)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            evaluate_frame(make_chart("plate"), (1.5, 0.5))

    def test_degenerate_metric(self):
        # collapse the x2 direction of a graph chart: f(x1, x2) with dependent
        # columns is hard to fabricate analytically, so shrink c0 instead
        ch = make_chart("cylinder", radius=1e-6, x1_max=1.0, c0=1e-6)
        with pytest.raises(DegenerateMetric):
            evaluate_frame(ch, (0.5, 0.5))


class TestGaussWeingarten:
    @pytest.mark.parametrize("name", CATALOG)
    def test_gauss_formula(self, name):
        # d_a a_b = Gamma^g_ab a_g + b_ab n0
        ch = catalog_chart(name)
        for pt in interior_points(ch, n=4):
            fr = evaluate_frame(ch, pt)
            jac = np.column_stack([fr.a1, fr.a2])
            for a in range(2):
                for b in range(2):
                    resid = (fr.ddy0[:, a, b]
                             - jac @ fr.Gamma[:, a, b] - fr.II[a, b] * fr.n0)
                    assert np.linalg.norm(resid) <= 1e-8

    @pytest.mark.parametrize("name", CATALOG)
    def test_weingarten_formula(self, name):
        # d_a n0 = -sum_b b^b_a a_b, with the mixed components b^b_a = L[b,a]
        ch = catalog_chart(name)
        for pt in interior_points(ch, n=4):
            fr = evaluate_frame(ch, pt)
            jac = np.column_stack([fr.a1, fr.a2])
            for a in range(2):
                resid = fr.dn0[:, a] + jac @ fr.L[:, a]
                assert np.linalg.norm(resid) <= 1e-8

    @pytest.mark.parametrize("name", CATALOG)
    def test_lifted_inverse_eigenvalue_bound(self, name):
        # lambda_min(I_hat^{-1}) >= 1/(sqrt(2) ||Cof I||) on catalog surfaces
        ch = catalog_chart(name)
        for pt in interior_points(ch, n=4):
            fr = evaluate_frame(ch, pt)
            i_hat = lifted_tensors(fr)[0]
            lam_min = np.linalg.eigvalsh(np.linalg.inv(i_hat))[0]
            cof = np.array([[fr.I[1, 1], -fr.I[0, 1]], [-fr.I[1, 0], fr.I[0, 0]]])
            assert lam_min >= 1.0 / (np.sqrt(2.0) * np.linalg.norm(cof)) - 1e-12


class TestLiftedTensors:
    def test_flat_plate(self):
        fr = evaluate_frame(make_chart("plate"), (0.3, 0.3))
        i_hat, ii_hat, l_flat = lifted_tensors(fr)
        assert_allclose(i_hat, np.eye(3), atol=1e-15)
        assert_allclose(l_flat, 0.0, atol=1e-15)
        assert_allclose(ii_hat, np.diag([0.0, 0.0, -1.0]), atol=1e-15)

    def test_cylinder_hand_value(self):
        fr = evaluate_frame(catalog_chart("cylinder"), (0.4, 0.5))
        i_hat = lifted_tensors(fr)[0]
        assert_allclose(i_hat, np.diag([4.0, 1.0, 1.0]), atol=1e-12)

    @pytest.mark.parametrize("name", CATALOG)
    def test_i_hat_spd_smallest_eigenvalue(self, name):
        ch = catalog_chart(name)
        for pt in interior_points(ch):
            fr = evaluate_frame(ch, pt)
            i_hat = lifted_tensors(fr)[0]
            ev = np.linalg.eigvalsh(i_hat)
            assert ev[0] > 0
            expected = min(np.linalg.eigvalsh(fr.I)[0], 1.0)
            assert_allclose(ev[0], expected, rtol=1e-12)


class TestNumericDerivatives:
    def test_flat_plate_first_order_exact(self):
        ch = make_chart("plate")
        d = numeric_derivatives(ch, (0.5, 0.5), order=1)
        assert_allclose(d, ch.jacobian((0.5, 0.5)), atol=1e-12)

    def test_cylinder_second_derivatives(self):
        ch = catalog_chart("cylinder")
        pt = (0.5, 0.5)
        d = numeric_derivatives(ch, pt, order=2, step=1e-3)
        exact = ch.hessian(pt)
        assert np.abs(d - exact).max() / np.abs(exact).max() <= 1e-8

    def test_sphere_normal_derivative(self):
        # d n0 = d y0 / R for the outward unit sphere normal n0 = y0/R
        ch = catalog_chart("sphere")
        pt = (0.5, 0.1)

        def n0_of(q):
            return evaluate_frame(ch, q).n0

        d = numeric_derivatives(ch, pt, order=1, func=n0_of)
        assert np.abs(d - ch.jacobian(pt) / ch.radius).max() <= 1e-8

    def test_one_sided_near_boundary(self):
        ch = catalog_chart("cylinder")
        pt = (ch.x1_min + 1e-4, 0.5)  # closer than 2*step to the edge
        d = numeric_derivatives(ch, pt, order=1)
        assert np.abs(d - ch.jacobian(pt)).max() <= 1e-5

    def test_step_underflow(self):
        ch = make_chart("plate")
        with pytest.raises(StepUnderflow):
            numeric_derivatives(ch, (0.5, 0.5), order=1, step=1e-12)


class TestSampledCharts:
    def _write_graph(self, tmp_path):
        xs = np.linspace(0.0, 1.0, 21)
        rows = ["x1,x2,f"]
        for u in xs:
            for w in xs:
                rows.append(f"{u},{w},{0.1 * np.sin(2 * u) * np.cos(w):.17g}")
        path = tmp_path / "graph.csv"
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_graph_chart_frames(self, tmp_path):
        path = self._write_graph(tmp_path)
        ch = load_graph_chart(path)
        fr = evaluate_frame(ch, (0.5, 0.5))
        # compare against the closed form of the sampled function
        du = 0.1 * 2 * np.cos(1.0) * np.cos(0.5)
        dw = -0.1 * np.sin(1.0) * np.sin(0.5)
        assert_allclose(fr.a1, [1.0, 0.0, du], atol=1e-8)
        assert_allclose(fr.a2, [0.0, 1.0, dw], atol=1e-8)
        assert np.linalg.eigvalsh(fr.I)[0] > 0.9

    def test_tabulated_chart_roundtrip(self, tmp_path):
        ch0 = catalog_chart("cylinder")
        xs = np.linspace(0.1, 1.1, 25)
        ys = np.linspace(0.0, 1.0, 25)
        rows = ["x1,x2,y0_1,y0_2,y0_3"]
        for u in xs:
            for w in ys:
                p = ch0.point((u, w))
                rows.append(f"{u},{w},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}")
        path = tmp_path / "surf.csv"
        path.write_text("\n".join(rows) + "\n")
        ch = load_tabulated_chart(path)
        pt = (0.6, 0.5)
        fr = evaluate_frame(ch, pt)
        fr0 = evaluate_frame(ch0, pt)
        assert_allclose(fr.I, fr0.I, atol=1e-6)
        assert_allclose(fr.L, fr0.L, atol=1e-5)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            load_tabulated_chart(path)


class TestThirdOrderData:
    @pytest.mark.parametrize("name", CATALOG)
    def test_against_fd_of_fields(self, name):
        ch = catalog_chart(name)
        pt = interior_points(ch, n=1, margin=0.4)[0]
        fr = evaluate_frame(ch, pt)
        ddn0, d_l = third_order_data(ch, pt, fr)
        h = 1e-4

        def l_of(q):
            return evaluate_frame(ch, q).L

        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            fd = (l_of(np.asarray(pt) + e) - l_of(np.asarray(pt) - e)) / (2 * h)
            assert np.abs(fd - d_l[a]).max() < 1e-6

        def n_of(q):
            return evaluate_frame(ch, q).n0

        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            fd2 = (n_of(np.asarray(pt) + e) - 2 * n_of(pt)
                   + n_of(np.asarray(pt) - e)) / h ** 2
            assert np.abs(fd2 - ddn0[:, a, a]).max() < 1e-5


class TestFrameGrid:
    def test_quadrature_weights_total_area(self):
        ch = make_chart("plate")
        fg = FrameGrid(ch, 17, 17)
        assert_allclose(fg.quadrature_weights().sum(), 1.0, rtol=1e-12)

    def test_max_principal_curvature(self):
        fg = FrameGrid(catalog_chart("cylinder"), 9, 9)
        assert_allclose(fg.max_principal_curvature(), 0.5, atol=1e-12)
        fg = FrameGrid(catalog_chart("sphere"), 9, 9)
        assert_allclose(fg.max_principal_curvature(), 1.0, atol=1e-10)


class TestSaddleChart:
    def test_negative_gauss_curvature_closed_form(self):
        from conftest import saddle_chart
        ch = saddle_chart()
        u0, w0 = 0.17, -0.08
        fr = evaluate_frame(ch, (u0, w0))
        fu, fw = 2 * u0, -2 * w0
        e = 1 + fu * fu
        g = 1 + fw * fw
        f = fu * fw
        den = np.sqrt(1 + fu * fu + fw * fw)
        k_exact = (2 / den) * (-2 / den) / (e * g - f * f)
        assert k_exact < 0
        assert_allclose(fr.K, k_exact, rtol=1e-12)
