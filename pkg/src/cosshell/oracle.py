"""Geometrically nonlinear strain measures as a linearization oracle.

For a midsurface map m with unit normal n, the constrained rotation is the
polar factor

    Q = polar((grad m | n) [gradTheta]^{-1})
      = (grad m | n) [gradTheta]^{-1} sqrt([gradTheta] I_hat_m^{-1} [gradTheta]^T)

and the nonlinear measures are

    E = sqrt(T^{-T} I_m^flat T^{-1}) - sqrt(T^{-T} I_y0^flat T^{-1})
    G = (Q grad y0)^T grad m - I
    R = -(Q grad y0)^T grad(Q n0) - II
    K = ( axl(Q^T d1 Q) | axl(Q^T d2 Q) | 0 ) T^{-1}

with T = gradTheta.  d_a Q is taken by 4th-order central differences over the
chart coordinates.  Slope tests check that one-sided difference quotients of
these measures converge at first order to the linear measures of
`kinematics`; high-accuracy linearizations use symmetric differences in t
plus Richardson extrapolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSPD, SingularF
from .geometry import GeometryFrame, SurfaceChart, evaluate_frame, flat
from .kinematics import (axl, bending_curvature, change_of_metric, koiter_bending,
                         rotation_vector)

__all__ = [
    "spd_sqrt", "polar_rotation", "MidsurfaceMap", "displaced_map", "rotated_map",
    "NonlinearStrainSample", "nonlinear_strains", "nonlinear_measure",
    "linear_measure", "oracle_linear_measure", "linearization_slope_test",
    "consistency_residuals", "SlopeReport", "MEASURES",
]

MEASURES = ("E", "G", "R_inf", "K", "normal")


def spd_sqrt(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Symmetric positive definite square root via eigendecomposition."""
    m = np.asarray(m, dtype=float)
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    if w[0] <= tol * max(abs(w[-1]), 1.0):
        raise NotSPD(f"smallest eigenvalue {w[0]} not positive")
    return (v * np.sqrt(w)) @ v.T


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    # rank-deficient lifts (I^flat sandwiches) are PSD by construction
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


def _strain_sqrt_diff(frame: GeometryFrame, jm: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Two-square-roots strain sqrt(T^{-T} I_m^flat T^{-1}) - sqrt(... I_y0 ...).

    Both lifted metrics annihilate n0, so adding the rank-one completion
    n0 n0^T to each argument shifts both roots by the same projector and
    cancels in the difference; it keeps the square roots away from the zero
    eigenvalue (the hatted sandwiches are SPD).
    """
    ti = frame.grad_theta_inv
    cm = np.column_stack([jm, n])
    a = ti.T @ (cm.T @ cm) @ ti
    b = ti.T @ (frame.grad_theta.T @ frame.grad_theta) @ ti
    return spd_sqrt(a) - spd_sqrt(b)


def polar_rotation(f: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotation factor R = F (F^T F)^{-1/2} of a matrix with det F > 0."""
    f = np.asarray(f, dtype=float)
    det = np.linalg.det(f)
    if det <= tol:
        raise SingularF(f"det F = {det} not positive")
    u = spd_sqrt(f.T @ f)
    return f @ np.linalg.inv(u)


# ---------------------------------------------------------------------------
# midsurface maps
# ---------------------------------------------------------------------------

@dataclass
class MidsurfaceMap:
    """Deformed midsurface with point and Jacobian callables."""

    point: callable   # p -> (3,)
    jac: callable     # p -> (3,2)

    def normal(self, p):
        j = self.jac(p)
        w = np.cross(j[:, 0], j[:, 1])
        return w / np.linalg.norm(w)


def displaced_map(chart: SurfaceChart, field, t: float) -> MidsurfaceMap:
    """m = y0 + t v for a field exposing fn(p) and dfn(p)."""
    return MidsurfaceMap(
        point=lambda p: chart.point(p) + t * np.asarray(field.fn(p)),
        jac=lambda p: chart.jacobian(p) + t * np.asarray(field.dfn(p)))


def rotated_map(chart: SurfaceChart, rot: np.ndarray) -> MidsurfaceMap:
    """Rigidly rotated reference surface m = R y0 (frame-indifference probe)."""
    rot = np.asarray(rot, dtype=float)
    return MidsurfaceMap(point=lambda p: rot @ chart.point(p),
                         jac=lambda p: rot @ chart.jacobian(p))


@dataclass
class NonlinearStrainSample:
    """Nonlinear measures at one chart point for a given midsurface map."""

    Q_inf: np.ndarray   # (3,3) rotation
    E_inf: np.ndarray   # (3,3) symmetric
    G_inf: np.ndarray   # (2,2)
    R_inf: np.ndarray   # (2,2)
    K_inf: np.ndarray   # (3,3)


def _rotation_at(chart: SurfaceChart, mmap: MidsurfaceMap, p,
                 frame: GeometryFrame | None = None) -> np.ndarray:
    frame = frame if frame is not None else evaluate_frame(chart, p)
    jm = mmap.jac(p)
    n = mmap.normal(p)
    f = np.column_stack([jm, n]) @ frame.grad_theta_inv
    return polar_rotation(f)


def _dq(chart: SurfaceChart, mmap: MidsurfaceMap, p, step: float | None):
    """4th-order central differences of Q over the chart coordinates."""
    p = np.asarray(p, dtype=float)
    out = []
    for ax in range(2):
        ext = chart.extents[ax]
        h = (chart.fd_step_rel * ext) if step is None else step
        e = np.zeros(2)
        e[ax] = h

        def q(q_pt):
            return _rotation_at(chart, mmap, q_pt)

        out.append((-q(p + 2 * e) + 8 * q(p + e) - 8 * q(p - e) + q(p - 2 * e))
                   / (12 * h))
    return out


def nonlinear_strains(chart: SurfaceChart, mmap: MidsurfaceMap, p,
                      dq_step: float | None = None) -> NonlinearStrainSample:
    """Evaluate (Q, E, G, R, K) at p; propagates NotSPD / SingularF."""
    frame = evaluate_frame(chart, p)
    ti = frame.grad_theta_inv
    q = _rotation_at(chart, mmap, p, frame)
    jm = mmap.jac(p)
    jac0 = np.column_stack([frame.a1, frame.a2])

    n = mmap.normal(p)
    e_inf = _strain_sqrt_diff(frame, jm, n)

    g_inf = (q @ jac0).T @ jm - frame.I

    dq = _dq(chart, mmap, p, dq_step)
    grad_qn0 = np.column_stack([dq[0] @ frame.n0 + q @ frame.dn0[:, 0],
                                dq[1] @ frame.n0 + q @ frame.dn0[:, 1]])
    r_inf = -(q @ jac0).T @ grad_qn0 - frame.II

    cols = []
    for a in range(2):
        qtq = q.T @ dq[a]
        cols.append(axl(0.5 * (qtq - qtq.T)))
    k_inf = np.column_stack(cols + [np.zeros(3)]) @ ti

    return NonlinearStrainSample(Q_inf=q, E_inf=e_inf, G_inf=g_inf,
                                 R_inf=r_inf, K_inf=k_inf)


# ---------------------------------------------------------------------------
# measures for the slope tests
# ---------------------------------------------------------------------------

def nonlinear_measure(chart, field, measure: str, p, t: float,
                      dq_step: float | None = None) -> np.ndarray:
    """Selected nonlinear measure at m = y0 + t v."""
    mmap = displaced_map(chart, field, t)
    if measure == "normal":
        return mmap.normal(p)
    if measure in ("E", "G"):
        frame = evaluate_frame(chart, p)
        ti = frame.grad_theta_inv
        jm = mmap.jac(p)
        if measure == "E":
            return _strain_sqrt_diff(frame, jm, mmap.normal(p))
        q = _rotation_at(chart, mmap, p, frame)
        return (q @ np.column_stack([frame.a1, frame.a2])).T @ jm - frame.I
    sample = nonlinear_strains(chart, mmap, p, dq_step=dq_step)
    if measure == "R_inf":
        return sample.R_inf
    if measure == "K":
        return sample.K_inf
    raise ValueError(f"unknown measure {measure!r}; pick one of {MEASURES}")


def linear_measure(chart, field, measure: str, p,
                   theta_step: float | None = None) -> np.ndarray:
    """Linear measure of the displacement field at p (kinematics formulas)."""
    frame = evaluate_frame(chart, p)
    dv = np.asarray(field.dfn(p))
    if measure == "G":
        return change_of_metric(frame, dv)
    if measure == "E":
        g = change_of_metric(frame, dv)
        ti = frame.grad_theta_inv
        return ti.T @ flat(g) @ ti
    if measure == "R_inf":
        g = change_of_metric(frame, dv)
        rk = koiter_bending(frame, dv, np.asarray(field.ddfn(p)))
        return rk - g @ frame.L
    if measure == "normal":
        return np.cross(rotation_vector(frame, dv), frame.n0)
    if measure == "K":
        gth = _grad_theta_pointwise(chart, field, p, theta_step)
        return bending_curvature(frame, gth)[0]
    raise ValueError(f"unknown measure {measure!r}")


def _grad_theta_pointwise(chart, field, p, step: float | None):
    """4th-order FD of the pointwise rotation-vector field."""
    p = np.asarray(p, dtype=float)

    def theta(q_pt):
        return rotation_vector(evaluate_frame(chart, q_pt), np.asarray(field.dfn(q_pt)))

    cols = []
    for ax in range(2):
        h = (chart.fd_step_rel * chart.extents[ax]) if step is None else step
        e = np.zeros(2)
        e[ax] = h
        cols.append((-theta(p + 2 * e) + 8 * theta(p + e)
                     - 8 * theta(p - e) + theta(p - 2 * e)) / (12 * h))
    return np.column_stack(cols)


def oracle_linear_measure(chart, field, measure: str, p, t: float = 1e-3,
                          richardson: bool = True) -> np.ndarray:
    """Finite-difference linearization of a nonlinear measure.

    Symmetric difference (M(+t) - M(-t)) / 2t, optionally Richardson
    extrapolated with t/2 to kill the O(t^2) term.
    """

    def central(tt):
        return (nonlinear_measure(chart, field, measure, p, tt)
                - nonlinear_measure(chart, field, measure, p, -tt)) / (2 * tt)

    c1 = central(t)
    if not richardson:
        return c1
    c2 = central(0.5 * t)
    return (4.0 * c2 - c1) / 3.0


@dataclass
class SlopeReport:
    """Log-log fit of the one-sided linearization defect D(t)."""

    measure: str
    t_values: tuple
    defects: tuple          # max over sample points, one per t
    slope: float | None     # None when D is at rounding level
    passed: bool

    def line(self) -> str:
        ds = ", ".join(f"{d:.3e}" for d in self.defects)
        s = "---" if self.slope is None else f"{self.slope:.3f}"
        return f"{self.measure:6s} slope {s}  D(t) = [{ds}]  {'PASS' if self.passed else 'FAIL'}"


def linearization_slope_test(chart, field, measure: str, points,
                             t_values=(1e-2, 1e-3, 1e-4), min_slope: float = 0.9,
                             zero_floor: float = 1e-11) -> SlopeReport:
    """One-sided defect D(t) = ||(M(t) - M(0))/t - M_lin|| must be O(t).

    D is the max over the sample points; the fitted log-log slope must reach
    `min_slope`.  Fields with vanishing quadratic remainder (D below
    `zero_floor` for all t) pass trivially.
    """
    points = [np.asarray(p, dtype=float) for p in points]
    lins = [linear_measure(chart, field, measure, p) for p in points]
    base = [nonlinear_measure(chart, field, measure, p, 0.0) for p in points]
    defects = []
    for t in t_values:
        worst = 0.0
        for p, lin, m0 in zip(points, lins, base):
            mt = nonlinear_measure(chart, field, measure, p, t)
            worst = max(worst, float(np.linalg.norm((mt - m0) / t - lin)))
        defects.append(worst)
    defects = tuple(defects)
    if max(defects) <= zero_floor:
        return SlopeReport(measure, tuple(t_values), defects, None, True)
    slope = float(np.polyfit(np.log10(t_values), np.log10(defects), 1)[0])
    return SlopeReport(measure, tuple(t_values), defects, slope, slope >= min_slope)


# ---------------------------------------------------------------------------
# internal-consistency residuals (reformulation identities)
# ---------------------------------------------------------------------------

def consistency_residuals(chart, mmap: MidsurfaceMap, p) -> dict:
    """Residuals of the defining identities of the nonlinear measures.

    Includes the two polar-decomposition routes, the two forms of E, rotation
    orthonormality, the vanishing transverse shear, and the six lifted-tensor
    reformulation identities tying (E, K) to (G, R).
    """
    frame = evaluate_frame(chart, p)
    ti = frame.grad_theta_inv
    tmat = frame.grad_theta
    jm = mmap.jac(p)
    n = mmap.normal(p)
    sample = nonlinear_strains(chart, mmap, p)
    q = sample.Q_inf

    i_hat_m = np.column_stack([jm, n]).T @ np.column_stack([jm, n])
    q_explicit = (np.column_stack([jm, n]) @ ti
                  @ spd_sqrt(tmat @ np.linalg.inv(i_hat_m) @ tmat.T))
    e_first_form = q.T @ np.column_stack([jm, q @ frame.n0]) @ ti - np.eye(3)

    b3 = frame.b3()
    c3 = frame.alternator3()
    lift = lambda two: ti.T @ flat(two) @ ti
    e, k = sample.E_inf, sample.K_inf
    g, r = sample.G_inf, sample.R_inf
    lg = frame.L

    res = {
        "polar_two_ways": np.linalg.norm(q - q_explicit),
        "orthonormal": np.linalg.norm(q.T @ q - np.eye(3)),
        "det_one": abs(np.linalg.det(q) - 1.0),
        "E_symmetric": np.linalg.norm(e - e.T),
        "E_two_forms": np.linalg.norm(e - e_first_form),
        "transverse_shear": np.linalg.norm((q @ frame.n0) @ jm),
        "eq_E_lift": np.linalg.norm(e - lift(g)),
        "eq_CK": np.linalg.norm(c3 @ k + lift(r)),
        "eq_CKB": np.linalg.norm(c3 @ k @ b3 + lift(r @ lg)),
        "eq_CKB2": np.linalg.norm(c3 @ k @ b3 @ b3 + lift(r @ lg @ lg)),
        "eq_EB_CK": np.linalg.norm(e @ b3 + c3 @ k + lift(r - g @ lg)),
        "eq_EB2_CKB": np.linalg.norm(e @ b3 @ b3 + c3 @ k @ b3
                                     + lift((r - g @ lg) @ lg)),
    }
    return {key: float(val) for key, val in res.items()}
