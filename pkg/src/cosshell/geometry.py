"""Midsurface charts and first/second-order surface geometry.

A chart is a C2 parametrization y0 : [x1_min,x1_max] x [x2_min,x2_max] -> R3
with linearly independent tangents a_alpha = d_alpha y0.  From it we build the
per-point frame used by every strain and energy routine:

    gradTheta = (a1 | a2 | n0),   n0 = a1 x a2 / ||a1 x a2||,
    I  = (grad y0)^T grad y0,     II = -(grad y0)^T grad n0,
    L  = I^{-1} II  (shape operator; eigenvalues = principal curvatures),
    Gamma^g_{ab} = <a^g, d_a a_b>  (Christoffel symbols),
    C  = sqrt(det I) [[0,1],[-1,0]]  (in-plane alternator).

Closed-form charts (plane, cylinder, sphere patch) supply derivatives up to
third order exactly; sampled charts (graph z=f(x1,x2), tabulated y0 grids) go
through quintic tensor splines.  A 4th-order finite-difference oracle
(`numeric_derivatives`) is available for any chart and is used by the tests to
cross-check the closed forms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import DegenerateMetric, OutOfDomain, StepUnderflow

__all__ = [
    "SurfaceChart",
    "PlaneChart",
    "CylinderChart",
    "SphereChart",
    "SplineChart",
    "GeometryFrame",
    "FrameGrid",
    "evaluate_frame",
    "evaluate_frame_grid",
    "lifted_tensors",
    "numeric_derivatives",
    "principal_curvature_bound",
    "third_order_data",
    "flat",
    "hat",
    "make_chart",
    "load_tabulated_chart",
    "load_graph_chart",
]

_FLAT_PAD = ((0, 1), (0, 1))


def flat(m2: np.ndarray) -> np.ndarray:
    """Embed a 2x2 block into 3x3 with zero third row and column."""
    out = np.zeros(m2.shape[:-2] + (3, 3))
    out[..., :2, :2] = m2
    return out


def hat(m2: np.ndarray) -> np.ndarray:
    """Embed a 2x2 block into 3x3 with unit (3,3) entry."""
    out = flat(m2)
    out[..., 2, 2] = 1.0
    return out


@dataclass
class SurfaceChart:
    """Parametrized midsurface over a rectangle in chart coordinates.

    Subclasses provide `point` and, in closed-form mode, `jacobian`,
    `hessian` and optionally `third`.  In numeric mode the derivatives come
    from `numeric_derivatives`.
    """

    x1_min: float = 0.0
    x1_max: float = 1.0
    x2_min: float = 0.0
    x2_max: float = 1.0
    c0: float = 1e-8          # floor for det I
    derivative_mode: str = "closed-form"
    fd_step_rel: float = 1e-3  # numeric-derivative step, relative to extent

    name = "abstract"

    # --- geometry supply -------------------------------------------------
    def point(self, p) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, p) -> np.ndarray:
        if self.derivative_mode == "numeric":
            return numeric_derivatives(self, p, order=1)
        return self._jacobian(p)

    def hessian(self, p) -> np.ndarray:
        if self.derivative_mode == "numeric":
            return numeric_derivatives(self, p, order=2)
        return self._hessian(p)

    def third(self, p):
        """Third partials (3,2,2,2) if available, else None."""
        return None

    def _jacobian(self, p) -> np.ndarray:
        raise NotImplementedError

    def _hessian(self, p) -> np.ndarray:
        raise NotImplementedError

    # --- domain helpers ---------------------------------------------------
    @property
    def extents(self):
        return (self.x1_max - self.x1_min, self.x2_max - self.x2_min)

    def contains(self, p, tol=1e-12) -> bool:
        e1, e2 = self.extents
        return (self.x1_min - tol * e1 <= p[0] <= self.x1_max + tol * e1
                and self.x2_min - tol * e2 <= p[1] <= self.x2_max + tol * e2)

    def require_inside(self, p):
        if not self.contains(p):
            raise OutOfDomain(f"point {tuple(p)} outside chart domain "
                              f"[{self.x1_min},{self.x1_max}]x[{self.x2_min},{self.x2_max}]")

    def grid(self, n1: int, n2: int):
        """Tensor grid of (n1 x n2) nodes covering the closed domain."""
        x1 = np.linspace(self.x1_min, self.x1_max, n1)
        x2 = np.linspace(self.x2_min, self.x2_max, n2)
        return x1, x2


@dataclass
class PlaneChart(SurfaceChart):
    """Flat reference plate y0 = (x1, x2, 0)."""

    name = "plate"

    def point(self, p):
        return np.array([p[0], p[1], 0.0])

    def _jacobian(self, p):
        return np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])

    def _hessian(self, p):
        return np.zeros((3, 2, 2))

    def third(self, p):
        return np.zeros((3, 2, 2, 2))


@dataclass
class CylinderChart(SurfaceChart):
    """Circular cylinder y0 = (R cos x1, R sin x1, x2), outward normal."""

    radius: float = 2.0
    x1_max: float = 1.2
    name = "cylinder"

    def point(self, p):
        r = self.radius
        return np.array([r * np.cos(p[0]), r * np.sin(p[0]), p[1]])

    def _jacobian(self, p):
        r = self.radius
        return np.array([[-r * np.sin(p[0]), 0.0],
                         [r * np.cos(p[0]), 0.0],
                         [0.0, 1.0]])

    def _hessian(self, p):
        r = self.radius
        d = np.zeros((3, 2, 2))
        d[0, 0, 0] = -r * np.cos(p[0])
        d[1, 0, 0] = -r * np.sin(p[0])
        return d

    def third(self, p):
        r = self.radius
        d = np.zeros((3, 2, 2, 2))
        d[0, 0, 0, 0] = r * np.sin(p[0])
        d[1, 0, 0, 0] = -r * np.cos(p[0])
        return d


@dataclass
class SphereChart(SurfaceChart):
    """Pole-free longitude/latitude sphere patch, outward normal n0 = y0/R.

    y0 = R (cos x2 cos x1, cos x2 sin x1, sin x2); keep |x2| < pi/2.
    """

    radius: float = 1.0
    x1_max: float = 1.0
    x2_min: float = -0.6
    x2_max: float = 0.6
    name = "sphere"

    def point(self, p):
        r = self.radius
        c1, s1 = np.cos(p[0]), np.sin(p[0])
        c2, s2 = np.cos(p[1]), np.sin(p[1])
        return r * np.array([c2 * c1, c2 * s1, s2])

    def _jacobian(self, p):
        r = self.radius
        c1, s1 = np.cos(p[0]), np.sin(p[0])
        c2, s2 = np.cos(p[1]), np.sin(p[1])
        return r * np.array([[-c2 * s1, -s2 * c1],
                             [c2 * c1, -s2 * s1],
                             [0.0, c2]])

    def _hessian(self, p):
        r = self.radius
        c1, s1 = np.cos(p[0]), np.sin(p[0])
        c2, s2 = np.cos(p[1]), np.sin(p[1])
        d = np.zeros((3, 2, 2))
        d[:, 0, 0] = r * np.array([-c2 * c1, -c2 * s1, 0.0])
        d[:, 0, 1] = r * np.array([s2 * s1, -s2 * c1, 0.0])
        d[:, 1, 0] = d[:, 0, 1]
        d[:, 1, 1] = r * np.array([-c2 * c1, -c2 * s1, -s2])
        return d

    def third(self, p):
        r = self.radius
        c1, s1 = np.cos(p[0]), np.sin(p[0])
        c2, s2 = np.cos(p[1]), np.sin(p[1])
        d = np.zeros((3, 2, 2, 2))
        d[:, 0, 0, 0] = r * np.array([c2 * s1, -c2 * c1, 0.0])
        d[:, 0, 0, 1] = r * np.array([s2 * c1, s2 * s1, 0.0])
        d[:, 0, 1, 1] = r * np.array([c2 * s1, -c2 * c1, 0.0])
        d[:, 1, 1, 1] = r * np.array([s2 * c1, s2 * s1, -c2])
        # symmetric completion over the last two indices
        d[:, 0, 1, 0] = d[:, 0, 0, 1]
        d[:, 1, 0, 0] = d[:, 0, 0, 1]
        d[:, 1, 0, 1] = d[:, 0, 1, 1]
        d[:, 1, 1, 0] = d[:, 0, 1, 1]
        return d


@dataclass
class SplineChart(SurfaceChart):
    """Chart backed by quintic tensor splines of sampled data.

    Covers both the graph surface z = f(x1,x2) (f sampled on a grid) and the
    fully tabulated case (all three components of y0 sampled).
    """

    splines: tuple = field(default_factory=tuple)  # one spline per component
    name = "spline"

    def point(self, p):
        return np.array([s(p[0], p[1]).item() for s in self.splines])

    def _jacobian(self, p):
        return np.array([[s(p[0], p[1], dx=1).item(), s(p[0], p[1], dy=1).item()]
                         for s in self.splines])

    def _hessian(self, p):
        d = np.zeros((3, 2, 2))
        for i, s in enumerate(self.splines):
            d[i, 0, 0] = s(p[0], p[1], dx=2).item()
            d[i, 0, 1] = d[i, 1, 0] = s(p[0], p[1], dx=1, dy=1).item()
            d[i, 1, 1] = s(p[0], p[1], dy=2).item()
        return d

    def third(self, p):
        d = np.zeros((3, 2, 2, 2))
        for i, s in enumerate(self.splines):
            d[i, 0, 0, 0] = s(p[0], p[1], dx=3).item()
            d[i, 1, 1, 1] = s(p[0], p[1], dy=3).item()
            mixed_xxy = s(p[0], p[1], dx=2, dy=1).item()
            mixed_xyy = s(p[0], p[1], dx=1, dy=2).item()
            for a, b, c, val in [(0, 0, 1, mixed_xxy), (0, 1, 0, mixed_xxy),
                                 (1, 0, 0, mixed_xxy), (0, 1, 1, mixed_xyy),
                                 (1, 0, 1, mixed_xyy), (1, 1, 0, mixed_xyy)]:
                d[i, a, b, c] = val
        return d


def _spline_chart_from_samples(x1, x2, components, name):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if len(x1) < 6 or len(x2) < 6:
        raise ValueError("sampled charts need at least a 6x6 grid for quintic splines")
    splines = tuple(RectBivariateSpline(x1, x2, comp, kx=5, ky=5) for comp in components)
    chart = SplineChart(x1_min=float(x1[0]), x1_max=float(x1[-1]),
                        x2_min=float(x2[0]), x2_max=float(x2[-1]),
                        splines=splines)
    chart.name = name
    return chart


def load_graph_chart(path) -> SplineChart:
    """Graph surface z = f(x1,x2) from a CSV with header x1,x2,f on a tensor grid."""
    x1, x2, cols = _read_grid_csv(path, ("x1", "x2", "f"))
    f = cols[0]
    zero = np.zeros_like(f)
    xx1 = np.broadcast_to(x1[:, None], f.shape)
    xx2 = np.broadcast_to(x2[None, :], f.shape)
    return _spline_chart_from_samples(x1, x2, (xx1, xx2 + zero, f), "graph")


def load_tabulated_chart(path) -> SplineChart:
    """Tabulated chart from a CSV with header x1,x2,y0_1,y0_2,y0_3."""
    x1, x2, cols = _read_grid_csv(path, ("x1", "x2", "y0_1", "y0_2", "y0_3"))
    return _spline_chart_from_samples(x1, x2, cols, "tabulated")


def _read_grid_csv(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != list(header):
        raise ValueError(f"{path}: expected CSV header {','.join(header)}")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r])
    x1 = np.unique(data[:, 0])
    x2 = np.unique(data[:, 1])
    if len(x1) * len(x2) != len(data):
        raise ValueError(f"{path}: samples do not form a tensor grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    data = data[order]
    cols = tuple(data[:, 2 + k].reshape(len(x1), len(x2)) for k in range(len(header) - 2))
    return x1, x2, cols


def make_chart(kind: str, **params) -> SurfaceChart:
    """Catalog lookup: plate | cylinder | sphere | graph | tabulated."""
    domain_keys = {k: params.pop(k) for k in
                   ("x1_min", "x1_max", "x2_min", "x2_max", "c0", "derivative_mode",
                    "fd_step_rel") if k in params}
    if kind == "plate":
        chart = PlaneChart(**domain_keys)
    elif kind == "cylinder":
        chart = CylinderChart(radius=float(params.pop("radius", 2.0)), **domain_keys)
    elif kind == "sphere":
        chart = SphereChart(radius=float(params.pop("radius", 1.0)), **domain_keys)
    elif kind == "graph":
        chart = load_graph_chart(params.pop("path"))
        for k, v in domain_keys.items():
            setattr(chart, k, v)
    elif kind == "tabulated":
        chart = load_tabulated_chart(params.pop("path"))
        for k, v in domain_keys.items():
            setattr(chart, k, v)
    else:
        raise ValueError(f"unknown chart kind {kind!r}")
    if params:
        raise ValueError(f"unused chart parameters: {sorted(params)}")
    return chart


# ---------------------------------------------------------------------------
# numeric derivative oracle
# ---------------------------------------------------------------------------

def numeric_derivatives(chart: SurfaceChart, p, order: int, step: float | None = None,
                        func=None) -> np.ndarray:
    """Finite-difference partials of y0 (or `func`) at p.

    4th-order central stencils where the point is at least 2*step from the
    domain boundary; 2nd-order one-sided stencils otherwise.  The default step
    is fd_step_rel * extent per axis.  Raises StepUnderflow below 1e-10 of the
    extent.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    chart.require_inside(p)
    f = chart.point if func is None else func
    p = np.asarray(p, dtype=float)
    lits = [(chart.x1_min, chart.x1_max), (chart.x2_min, chart.x2_max)]
    steps = []
    for ax, (lo, hi) in enumerate(lits):
        ext = hi - lo
        h = chart.fd_step_rel * ext if step is None else step
        if h < 1e-10 * ext:
            raise StepUnderflow(f"step {h} below 1e-10 of extent {ext}")
        steps.append(h)

    def d1(g, ax):
        h = steps[ax]
        lo, hi = lits[ax]
        e = np.zeros(2)
        e[ax] = 1.0
        if p[ax] - 2 * h >= lo and p[ax] + 2 * h <= hi:
            return (-g(p + 2 * h * e) + 8 * g(p + h * e)
                    - 8 * g(p - h * e) + g(p - 2 * h * e)) / (12 * h)
        if p[ax] + 2 * h <= hi:
            return (-3 * g(p) + 4 * g(p + h * e) - g(p + 2 * h * e)) / (2 * h)
        return (3 * g(p) - 4 * g(p - h * e) + g(p - 2 * h * e)) / (2 * h)

    if order == 1:
        return np.stack([d1(f, 0), d1(f, 1)], axis=-1)

    def d2(ax_a, ax_b):
        if ax_a == ax_b:
            h = steps[ax_a]
            lo, hi = lits[ax_a]
            e = np.zeros(2)
            e[ax_a] = 1.0
            if p[ax_a] - 2 * h >= lo and p[ax_a] + 2 * h <= hi:
                return (-f(p + 2 * h * e) + 16 * f(p + h * e) - 30 * f(p)
                        + 16 * f(p - h * e) - f(p - 2 * h * e)) / (12 * h * h)
            if p[ax_a] + 3 * h <= hi:
                return (2 * f(p) - 5 * f(p + h * e) + 4 * f(p + 2 * h * e)
                        - f(p + 3 * h * e)) / (h * h)
            return (2 * f(p) - 5 * f(p - h * e) + 4 * f(p - 2 * h * e)
                    - f(p - 3 * h * e)) / (h * h)

        def g(q):
            qq = np.asarray(q, dtype=float)
            h = steps[ax_b]
            lo, hi = lits[ax_b]
            e = np.zeros(2)
            e[ax_b] = 1.0
            if qq[ax_b] - 2 * h >= lo and qq[ax_b] + 2 * h <= hi:
                return (-f(qq + 2 * h * e) + 8 * f(qq + h * e)
                        - 8 * f(qq - h * e) + f(qq - 2 * h * e)) / (12 * h)
            if qq[ax_b] + 2 * h <= hi:
                return (-3 * f(qq) + 4 * f(qq + h * e) - f(qq + 2 * h * e)) / (2 * h)
            return (3 * f(qq) - 4 * f(qq - h * e) + f(qq - 2 * h * e)) / (2 * h)

        return d1(g, ax_a)

    out = np.zeros((3, 2, 2))
    out[:, 0, 0] = d2(0, 0)
    out[:, 1, 1] = d2(1, 1)
    out[:, 0, 1] = out[:, 1, 0] = d2(0, 1)
    return out


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometryFrame:
    """Per-point differential-geometry bundle consumed by strain/energy code."""

    p: np.ndarray            # chart coordinates (2,)
    y0: np.ndarray           # surface point (3,)
    a1: np.ndarray           # tangent d1 y0 (3,)
    a2: np.ndarray           # tangent d2 y0 (3,)
    n0: np.ndarray           # unit normal (3,)
    grad_theta: np.ndarray   # (a1|a2|n0) (3,3)
    grad_theta_inv: np.ndarray
    det_grad_theta: float    # = sqrt(det I)
    I: np.ndarray            # first fundamental form (2,2)
    II: np.ndarray           # second fundamental form (2,2)
    L: np.ndarray            # Weingarten matrix I^{-1} II (2,2)
    Gamma: np.ndarray        # Gamma[g,a,b] = Gamma^g_{ab} (2,2,2)
    H: float                 # mean curvature
    K: float                 # Gauss curvature
    Cskew: np.ndarray        # sqrt(det I) [[0,1],[-1,0]] (2,2)
    dn0: np.ndarray          # grad n0 (3,2)
    ddy0: np.ndarray         # second partials of y0 (3,2,2)

    @property
    def b_mixed(self) -> np.ndarray:
        """Mixed curvature components b^a_b = L[a,b]."""
        return self.L

    @property
    def a_contra(self) -> np.ndarray:
        """Contravariant tangent basis, rows a^1, a^2 of [gradTheta]^{-1}."""
        return self.grad_theta_inv[:2, :]

    @property
    def Cskew_inv(self) -> np.ndarray:
        # closed form, no pivoting: C^{-1} = (1/sqrt(det I)) [[0,-1],[1,0]]
        return np.array([[0.0, -1.0], [1.0, 0.0]]) / self.det_grad_theta

    def alternator3(self) -> np.ndarray:
        """Surface alternator tensor det(gradTheta) T^{-T} J T^{-1} (3,3)."""
        j = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        ti = self.grad_theta_inv
        return self.det_grad_theta * ti.T @ j @ ti

    def b3(self) -> np.ndarray:
        """Lifted curvature tensor -(grad n0|0) [gradTheta]^{-1} (3,3)."""
        m = np.zeros((3, 3))
        m[:, :2] = self.dn0
        return -m @ self.grad_theta_inv

    def a3(self) -> np.ndarray:
        """Lifted tangent projector (grad y0|0) [gradTheta]^{-1} (3,3)."""
        m = np.zeros((3, 3))
        m[:, 0] = self.a1
        m[:, 1] = self.a2
        return m @ self.grad_theta_inv


def evaluate_frame(chart: SurfaceChart, p) -> GeometryFrame:
    """Evaluate the full geometry frame at a chart point.

    Raises OutOfDomain / DegenerateMetric per the chart invariants.
    """
    chart.require_inside(p)
    p = np.asarray(p, dtype=float)
    y0 = chart.point(p)
    jac = chart.jacobian(p)
    hes = chart.hessian(p)
    a1, a2 = jac[:, 0], jac[:, 1]
    w = np.cross(a1, a2)
    wn = np.linalg.norm(w)
    first = jac.T @ jac
    det_i = first[0, 0] * first[1, 1] - first[0, 1] * first[1, 0]
    if det_i < chart.c0:
        raise DegenerateMetric(f"det I = {det_i} < c0 = {chart.c0} at {tuple(p)}")
    n0 = w / wn

    # grad n0 by the chain rule through the normalization
    dn0 = np.empty((3, 2))
    for a in range(2):
        dw = np.cross(hes[:, 0, a], a2) + np.cross(a1, hes[:, 1, a])
        dn0[:, a] = (dw - n0 * (n0 @ dw)) / wn

    grad_theta = np.column_stack([a1, a2, n0])
    grad_theta_inv = np.linalg.inv(grad_theta)
    second = -jac.T @ dn0
    second = 0.5 * (second + second.T)
    weingarten = np.linalg.solve(first, second)

    gamma = np.einsum("gi,iab->gab", grad_theta_inv[:2, :], hes)
    gamma = 0.5 * (gamma + gamma.transpose(0, 2, 1))

    sqrt_det_i = np.sqrt(det_i)
    cskew = sqrt_det_i * np.array([[0.0, 1.0], [-1.0, 0.0]])
    return GeometryFrame(
        p=p, y0=y0, a1=a1, a2=a2, n0=n0,
        grad_theta=grad_theta, grad_theta_inv=grad_theta_inv,
        det_grad_theta=sqrt_det_i,
        I=first, II=second, L=weingarten, Gamma=gamma,
        H=0.5 * np.trace(weingarten),
        K=weingarten[0, 0] * weingarten[1, 1] - weingarten[0, 1] * weingarten[1, 0],
        Cskew=cskew, dn0=dn0, ddy0=hes)


def lifted_tensors(frame: GeometryFrame):
    """Lifted 3x3 quantities (I_hat, II_hat, L_flat)."""
    i_hat = flat(frame.I)
    i_hat[2, 2] = 1.0
    ii_hat = flat(frame.II)
    ii_hat[2, 2] = -1.0
    return i_hat, ii_hat, flat(frame.L)


def principal_curvature_bound(frame: GeometryFrame) -> float:
    """max(|kappa_1|, |kappa_2|) from the closed-form 2x2 eigenvalues of L."""
    disc = max(frame.H * frame.H - frame.K, 0.0)
    root = np.sqrt(disc)
    return max(abs(frame.H + root), abs(frame.H - root))


def third_order_data(chart: SurfaceChart, p, frame: GeometryFrame | None = None):
    """Second partials of n0 and first partials of the Weingarten matrix.

    Uses closed-form third derivatives of y0 when the chart supplies them,
    otherwise 4th-order finite differences of the n0 and L fields.  Returns
    (ddn0 (3,2,2), dL (2,2,2)) with dL[a] = d_a L.
    """
    if frame is None:
        frame = evaluate_frame(chart, p)
    third = chart.third(p) if chart.derivative_mode == "closed-form" else None
    if third is not None:
        jac = np.column_stack([frame.a1, frame.a2])
        hes = frame.ddy0
        w = np.cross(frame.a1, frame.a2)
        wn = np.linalg.norm(w)
        n0 = frame.n0
        dw = np.empty((3, 2))
        for a in range(2):
            dw[:, a] = np.cross(hes[:, 0, a], jac[:, 1]) + np.cross(jac[:, 0], hes[:, 1, a])
        dwn = dw.T @ n0                       # d_a ||w||
        dn0 = frame.dn0
        ddn0 = np.empty((3, 2, 2))
        for a in range(2):
            for b in range(2):
                ddw = (np.cross(third[:, 0, a, b], jac[:, 1])
                       + np.cross(hes[:, 0, a], hes[:, 1, b])
                       + np.cross(hes[:, 0, b], hes[:, 1, a])
                       + np.cross(jac[:, 0], third[:, 1, a, b]))
                ddwn = ddw @ n0 + dw[:, a] @ dn0[:, b]
                ddn0[:, a, b] = (ddw - dn0[:, a] * dwn[b] - dn0[:, b] * dwn[a]
                                 - n0 * ddwn) / wn
        d_first = np.einsum("iab,ic->acb", hes, jac) + np.einsum("ja,jcb->acb", jac, hes)
        # d_first[a,c,b] = d_b I[a,c]
        d_second = -(np.einsum("iab,ic->acb", hes, dn0)
                     + np.einsum("ia,icb->acb", jac, ddn0))
        inv_first = np.linalg.inv(frame.I)
        dL = np.empty((2, 2, 2))
        for b in range(2):
            dI = d_first[:, :, b]
            dII = d_second[:, :, b]
            dII = 0.5 * (dII + dII.T)
            dL[b] = inv_first @ (dII - dI @ frame.L)
        return ddn0, dL

    # finite-difference fallback on the n0 and L fields
    def n0_of(q):
        return evaluate_frame(chart, q).n0

    def L_of(q):
        return evaluate_frame(chart, q).L

    def dfield(g, q, ax):
        ext = chart.extents[ax]
        h = chart.fd_step_rel * ext
        lo = (chart.x1_min, chart.x2_min)[ax]
        hi = (chart.x1_max, chart.x2_max)[ax]
        e = np.zeros(2)
        e[ax] = 1.0
        q = np.asarray(q, dtype=float)
        if q[ax] - 2 * h >= lo and q[ax] + 2 * h <= hi:
            return (-g(q + 2 * h * e) + 8 * g(q + h * e)
                    - 8 * g(q - h * e) + g(q - 2 * h * e)) / (12 * h)
        if q[ax] + 2 * h <= hi:
            return (-3 * g(q) + 4 * g(q + h * e) - g(q + 2 * h * e)) / (2 * h)
        return (3 * g(q) - 4 * g(q - h * e) + g(q - 2 * h * e)) / (2 * h)

    ddn0 = np.empty((3, 2, 2))
    for a in range(2):
        for b in range(2):
            ddn0[:, a, b] = dfield(lambda q, bb=b: dfield(n0_of, q, bb), p, a)
    ddn0 = 0.5 * (ddn0 + ddn0.transpose(0, 2, 1))
    dL = np.stack([dfield(L_of, p, a) for a in range(2)])
    return ddn0, dL


# ---------------------------------------------------------------------------
# frame grids (stacked arrays for field-level work)
# ---------------------------------------------------------------------------

class FrameGrid:
    """Frames at all nodes of a tensor grid, with stacked array views."""

    def __init__(self, chart: SurfaceChart, n1: int, n2: int):
        self.chart = chart
        self.n1, self.n2 = n1, n2
        self.x1, self.x2 = chart.grid(n1, n2)
        self.d1 = (chart.x1_max - chart.x1_min) / (n1 - 1)
        self.d2 = (chart.x2_max - chart.x2_min) / (n2 - 1)
        self.frames = [[evaluate_frame(chart, (u, w)) for w in self.x2] for u in self.x1]

        def stack(attr):
            return np.array([[getattr(f, attr) for f in row] for row in self.frames])

        self.y0 = stack("y0")
        self.n0 = stack("n0")
        self.grad_theta = stack("grad_theta")
        self.grad_theta_inv = stack("grad_theta_inv")
        self.sqrt_det_i = stack("det_grad_theta")
        self.I = stack("I")
        self.II = stack("II")
        self.L = stack("L")
        self.Gamma = stack("Gamma")
        self.H = stack("H")
        self.K = stack("K")
        self.dn0 = stack("dn0")
        self.ddy0 = stack("ddy0")
        self.jac = np.stack([stack("a1"), stack("a2")], axis=-1)

    def frame(self, i: int, j: int) -> GeometryFrame:
        return self.frames[i][j]

    def max_principal_curvature(self) -> float:
        disc = np.sqrt(np.maximum(self.H ** 2 - self.K, 0.0))
        return float(np.max(np.maximum(np.abs(self.H + disc), np.abs(self.H - disc))))

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid nodal weights times the area element sqrt(det I)."""
        w1 = np.full(self.n1, self.d1)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        w2 = np.full(self.n2, self.d2)
        w2[0] *= 0.5
        w2[-1] *= 0.5
        return np.outer(w1, w2) * self.sqrt_det_i
