"""Analytic displacement fields for oracle runs and diagnostics.

Fields carry closed-form first and second partials so that identity and
linearization checks are not limited by grid differencing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SurfaceChart

__all__ = ["AnalyticField", "random_smooth_field", "rigid_motion_field",
           "normal_bump_field"]


@dataclass
class AnalyticField:
    """Displacement with callables fn(p), dfn(p) (3,2), ddfn(p) (3,2,2)."""

    fn: callable
    dfn: callable
    ddfn: callable


def random_smooth_field(chart: SurfaceChart, rng: np.random.Generator,
                        scale: float = 0.3) -> AnalyticField:
    """Random low-order polynomial + sinusoid field on the chart rectangle.

    Components are combinations of {1, u, w, u^2, uw, w^2, sin(pi u) sin(pi w)}
    in coordinates (u, w) normalized to [0,1]^2, with coefficients ~ scale.
    """
    c = scale * rng.standard_normal((3, 7))
    x1_min, ext1 = chart.x1_min, chart.extents[0]
    x2_min, ext2 = chart.x2_min, chart.extents[1]

    def coords(p):
        return (p[0] - x1_min) / ext1, (p[1] - x2_min) / ext2

    def fn(p):
        u, w = coords(p)
        basis = np.array([1.0, u, w, u * u, u * w, w * w,
                          np.sin(np.pi * u) * np.sin(np.pi * w)])
        return c @ basis

    def dfn(p):
        u, w = coords(p)
        pi = np.pi
        du = np.array([0.0, 1.0, 0.0, 2 * u, w, 0.0,
                       pi * np.cos(pi * u) * np.sin(pi * w)]) / ext1
        dw = np.array([0.0, 0.0, 1.0, 0.0, u, 2 * w,
                       pi * np.sin(pi * u) * np.cos(pi * w)]) / ext2
        return np.stack([c @ du, c @ dw], axis=-1)

    def ddfn(p):
        u, w = coords(p)
        pi = np.pi
        duu = np.array([0.0, 0.0, 0.0, 2.0, 0.0, 0.0,
                        -pi * pi * np.sin(pi * u) * np.sin(pi * w)]) / ext1 ** 2
        duw = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
                        pi * pi * np.cos(pi * u) * np.cos(pi * w)]) / (ext1 * ext2)
        dww = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 2.0,
                        -pi * pi * np.sin(pi * u) * np.sin(pi * w)]) / ext2 ** 2
        out = np.empty((3, 2, 2))
        out[:, 0, 0] = c @ duu
        out[:, 0, 1] = out[:, 1, 0] = c @ duw
        out[:, 1, 1] = c @ dww
        return out

    return AnalyticField(fn, dfn, ddfn)


def rigid_motion_field(chart: SurfaceChart, a, b) -> AnalyticField:
    """Infinitesimal rigid motion v = a + b x y0 with exact derivatives."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def fn(p):
        return a + np.cross(b, chart.point(p))

    def dfn(p):
        jac = chart.jacobian(p)
        return np.cross(b, jac.T).T

    def ddfn(p):
        hes = chart.hessian(p)
        return np.cross(b, hes.reshape(3, 4).T).T.reshape(3, 2, 2)

    return AnalyticField(fn, dfn, ddfn)


def normal_bump_field(chart: SurfaceChart, amplitude: float = 1.0) -> AnalyticField:
    """Pure normal bump v = amp * s1(u) s1(w) n0-free test shape (0,0,bump).

    Cartesian third component only; vanishes with zero slope on the boundary.
    """
    x1_min, ext1 = chart.x1_min, chart.extents[0]
    x2_min, ext2 = chart.x2_min, chart.extents[1]

    def parts(p):
        u = (p[0] - x1_min) / ext1
        w = (p[1] - x2_min) / ext2
        return u, w

    def fn(p):
        u, w = parts(p)
        return np.array([0.0, 0.0, amplitude * (u * (1 - u)) ** 2 * (w * (1 - w)) ** 2])

    def dfn(p):
        u, w = parts(p)
        gu = 2 * u * (1 - u) * (1 - 2 * u) / ext1
        gw = 2 * w * (1 - w) * (1 - 2 * w) / ext2
        fu = (u * (1 - u)) ** 2
        fw = (w * (1 - w)) ** 2
        out = np.zeros((3, 2))
        out[2, 0] = amplitude * gu * fw
        out[2, 1] = amplitude * fu * gw
        return out

    def ddfn(p):
        u, w = parts(p)
        fu = (u * (1 - u)) ** 2
        fw = (w * (1 - w)) ** 2
        gu = 2 * u * (1 - u) * (1 - 2 * u) / ext1
        gw = 2 * w * (1 - w) * (1 - 2 * w) / ext2
        hu = 2 * (1 - 6 * u + 6 * u * u) / ext1 ** 2
        hw = 2 * (1 - 6 * w + 6 * w * w) / ext2 ** 2
        out = np.zeros((3, 2, 2))
        out[2, 0, 0] = amplitude * hu * fw
        out[2, 0, 1] = out[2, 1, 0] = amplitude * gu * gw
        out[2, 1, 1] = amplitude * fu * hw
        return out

    return AnalyticField(fn, dfn, ddfn)
