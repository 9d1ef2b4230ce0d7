"""Nonlinear strain oracle: matrix kernels, measures, slope tests."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cosshell.errors import NotSPD, SingularF
from cosshell.geometry import make_chart
from cosshell.oracle import (MEASURES, consistency_residuals, displaced_map,
                             linearization_slope_test, nonlinear_measure,
                             nonlinear_strains, polar_rotation, rotated_map,
                             spd_sqrt)
from cosshell.testfields import AnalyticField, random_smooth_field

from conftest import catalog_chart, interior_points


def _rotation(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


class TestSpdSqrt:
    def test_identity(self):
        assert_allclose(spd_sqrt(np.eye(3)), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        assert_allclose(spd_sqrt(np.diag([4.0, 9.0, 1.0])),
                        np.diag([2.0, 3.0, 1.0]), atol=1e-14)

    def test_random_spd_residual(self, rng):
        for _ in range(20):
            m = rng.standard_normal((3, 3))
            m = m @ m.T + 0.5 * np.eye(3)
            s = spd_sqrt(m)
            assert_allclose(s, s.T, atol=1e-13)
            assert np.linalg.norm(s @ s - m) / np.linalg.norm(m) <= 1e-12

    def test_not_spd(self):
        with pytest.raises(NotSPD):
            spd_sqrt(np.diag([1.0, 1.0, -0.1]))
        with pytest.raises(NotSPD):
            spd_sqrt(np.diag([1.0, 1.0, 0.0]))


class TestPolarRotation:
    def test_rotation_fixed_point(self):
        r = _rotation([0.3, -0.5, 0.8], 0.9)
        assert_allclose(polar_rotation(r), r, atol=1e-14)

    def test_spd_absorbed(self):
        assert_allclose(polar_rotation(np.diag([2.0, 3.0, 1.0])), np.eye(3),
                        atol=1e-14)

    def test_rotation_properties(self, rng):
        for _ in range(10):
            f = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
            if np.linalg.det(f) <= 0:
                continue
            q = polar_rotation(f)
            assert np.linalg.norm(q.T @ q - np.eye(3)) <= 1e-10
            assert abs(np.linalg.det(q) - 1.0) <= 1e-10

    def test_singular_rejected(self):
        with pytest.raises(SingularF):
            polar_rotation(np.diag([1.0, 1.0, 0.0]))
        with pytest.raises(SingularF):
            polar_rotation(np.diag([1.0, 1.0, -2.0]))


class TestNonlinearStrains:
    def test_reference_configuration(self, chart):
        # m = y0: Q = 1, all measures vanish
        field = AnalyticField(fn=lambda p: np.zeros(3),
                              dfn=lambda p: np.zeros((3, 2)),
                              ddfn=lambda p: np.zeros((3, 2, 2)))
        mmap = displaced_map(chart, field, 1.0)
        for p in interior_points(chart):
            s = nonlinear_strains(chart, mmap, p)
            assert_allclose(s.Q_inf, np.eye(3), atol=1e-12)
            assert np.abs(s.E_inf).max() <= 1e-12
            assert np.abs(s.G_inf).max() <= 1e-12
            assert np.abs(s.R_inf).max() <= 1e-12
            assert np.abs(s.K_inf).max() <= 1e-12

    def test_plate_normal_bump_quadratic_metric(self):
        # m = y0 + (0, 0, eps x1^2): G_inf = O(eps^2), ratio test over eps
        ch = make_chart("plate")
        field = AnalyticField(
            fn=lambda p: np.array([0.0, 0.0, p[0] ** 2]),
            dfn=lambda p: np.array([[0.0, 0.0], [0.0, 0.0], [2 * p[0], 0.0]]),
            ddfn=lambda p: np.array([[[0.0, 0.0], [0.0, 0.0]],
                                     [[0.0, 0.0], [0.0, 0.0]],
                                     [[2.0, 0.0], [0.0, 0.0]]]))
        p = (0.5, 0.5)
        norms = []
        for eps in (1e-2, 1e-3, 1e-4):
            g = nonlinear_measure(ch, field, "G", p, eps)
            norms.append(np.linalg.norm(g))
        # quadratic decay: each decade in eps drops two decades in ||G||
        assert norms[0] / norms[1] == pytest.approx(100.0, rel=1e-2)
        assert norms[1] / norms[2] == pytest.approx(100.0, rel=1e-2)

    def test_frame_indifference_rigid_rotation(self):
        ch = catalog_chart("cylinder")
        rot = _rotation([0.2, 0.7, -0.4], 0.8)
        mmap = rotated_map(ch, rot)
        for p in interior_points(ch, 2):
            s = nonlinear_strains(ch, mmap, p)
            assert np.abs(s.E_inf).max() <= 1e-10
            assert np.abs(s.K_inf).max() <= 1e-10

    def test_invariants_at_finite_deformation(self, chart, rng):
        field = random_smooth_field(chart, rng)
        mmap = displaced_map(chart, field, 0.05)
        for p in interior_points(chart, 2):
            res = consistency_residuals(chart, mmap, p)
            assert res["polar_two_ways"] <= 1e-10
            assert res["orthonormal"] <= 1e-10
            assert res["det_one"] <= 1e-10
            assert res["E_symmetric"] <= 1e-10
            assert res["E_two_forms"] <= 1e-9
            assert res["transverse_shear"] <= 1e-10
            for key in ("eq_E_lift", "eq_CK", "eq_CKB", "eq_CKB2",
                        "eq_EB_CK", "eq_EB2_CKB"):
                assert res[key] <= 1e-9, key


class TestSlopeTests:
    def test_zero_field(self, chart):
        field = AnalyticField(fn=lambda p: np.zeros(3),
                              dfn=lambda p: np.zeros((3, 2)),
                              ddfn=lambda p: np.zeros((3, 2, 2)))
        rep = linearization_slope_test(chart, field, "G", interior_points(chart))
        assert rep.passed
        assert max(rep.defects) <= 1e-12

    def test_plate_saddle_metric_slope(self):
        ch = make_chart("plate")
        field = AnalyticField(
            fn=lambda p: np.array([0.0, 0.0, p[0] * p[1]]),
            dfn=lambda p: np.array([[0.0, 0.0], [0.0, 0.0], [p[1], p[0]]]),
            ddfn=lambda p: np.array([[[0.0, 0.0], [0.0, 0.0]],
                                     [[0.0, 0.0], [0.0, 0.0]],
                                     [[0.0, 1.0], [1.0, 0.0]]]))
        rep = linearization_slope_test(ch, field, "G", interior_points(ch))
        assert rep.passed and 0.9 <= rep.slope <= 1.1

    @pytest.mark.parametrize("measure", MEASURES)
    def test_all_measures_cylinder(self, measure, rng):
        ch = catalog_chart("cylinder")
        field = random_smooth_field(ch, rng)
        rep = linearization_slope_test(ch, field, measure, interior_points(ch))
        assert rep.passed, rep.line()


class TestSaddleOracle:
    def test_identities_on_hyperbolic_patch(self, rng):
        # K < 0 exercises the full-rank shape-operator branch of every identity
        from conftest import saddle_chart
        ch = saddle_chart()
        field = random_smooth_field(ch, rng, scale=0.2)
        mmap = displaced_map(ch, field, 0.05)
        res = consistency_residuals(ch, mmap, (0.1, 0.05))
        assert max(res.values()) <= 1e-9

    @pytest.mark.parametrize("measure", MEASURES)
    def test_slopes_on_hyperbolic_patch(self, measure, rng):
        from conftest import saddle_chart
        ch = saddle_chart()
        field = random_smooth_field(ch, rng, scale=0.2)
        rep = linearization_slope_test(ch, field, measure,
                                       [(0.1, 0.05), (-0.12, 0.2)])
        assert rep.passed, rep.line()
