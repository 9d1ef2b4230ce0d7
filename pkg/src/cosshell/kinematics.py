"""Linear strain measures of the constrained Cosserat shell model.

Per-point operations take a GeometryFrame plus displacement partials and
return the measures entering the quadratic energies:

    G      = sym[(grad y0)^T grad v]                     change of metric
    R_K    = ( <n0, d_ab v - Gamma^g_ab d_g v> )_ab      Koiter bending
    theta  = axl skew[ (grad v | -sum_a <n0, d_a v> a^a) [gradTheta]^{-1} ]
    R_inf  = R_K - G L                                   Cosserat bending
    K0..K2 = (grad theta | 0) (L^flat)^k [gradTheta]^{-1}

together with the lifted 3x3 tensors

    E  =  T^{-T} [G]^flat T^{-1}
    M1 = -T^{-T} [R_K - 2 G L]^flat T^{-1}      ( = E B + C K0 )
    M2 = -T^{-T} [(R_K - 2 G L) L]^flat T^{-1}  ( = (E B + C K0) B )

The rotation vector is defined so that the linearized transverse shear
n0^T grad v + (theta x n0)^T grad y0 vanishes identically and so that the
polar factor of (grad m|n)[gradTheta]^{-1} linearizes to 1 + Anti(theta);
both properties are enforced by the oracle tests.

Field-level routines sample displacements on a uniform tensor grid.  Clamped
fields use one ring of ghost nodes carrying the local-frame reflection
(2 n0 n0^T - 1): even in the normal displacement, which encodes the clamped
condition <grad(v.n0), nu> = 0, odd in the tangential part, and central
stencils throughout; free fields use one-sided stencils at the edges.  The
theta field is always differentiated with interior-central /
edge-one-sided stencils.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import FrameGrid, GeometryFrame, flat

__all__ = [
    "axl", "anti",
    "change_of_metric", "change_of_metric_rotated", "change_of_metric_covariant",
    "koiter_bending", "koiter_bending_covariant",
    "rotation_vector", "microrotation", "normal_rotation_component",
    "transverse_shear_lin", "bending_curvature", "lifted_strains",
    "constraint_residuals", "StrainState", "strain_state",
    "DisplacementField", "StrainField", "build_strain_field",
    "d1_edge_matrix", "clamped_pad_operator", "cached_pad_operator", "d1_central_matrix",
    "d2_central_matrix", "mid_matrix", "d2_edge_matrix",
]

def axl(a: np.ndarray) -> np.ndarray:
    """Axial vector of a skew 3x3 matrix."""
    return np.array([-a[1, 2], a[0, 2], -a[0, 1]])


def anti(w) -> np.ndarray:
    """Skew matrix with axial vector w (inverse of axl)."""
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


# ---------------------------------------------------------------------------
# per-point measures
# ---------------------------------------------------------------------------

def change_of_metric(frame: GeometryFrame, dv: np.ndarray) -> np.ndarray:
    """G = sym[(grad y0)^T grad v], symmetric 2x2."""
    jac = np.column_stack([frame.a1, frame.a2])
    m = jac.T @ dv
    return 0.5 * (m + m.T)


def change_of_metric_rotated(frame: GeometryFrame, dv, theta) -> np.ndarray:
    """Alternative route (grad y0)^T (grad v - theta x grad y0).

    Equals change_of_metric once theta carries the correct normal component;
    used as an identity check, not in the energy path.
    """
    jac = np.column_stack([frame.a1, frame.a2])
    rot = np.cross(theta, jac.T).T  # theta x columns
    return jac.T @ (dv - rot)


def _covariant_data(frame: GeometryFrame, v, dv, ddv=None, ddn0=None):
    """Covariant components v_a = <v,a_a>, v_3 = <v,n0> and their partials."""
    jac = np.column_stack([frame.a1, frame.a2])
    va = jac.T @ v
    v3 = frame.n0 @ v
    dva = np.empty((2, 2))  # dva[al, be] = d_be v_al
    for al in range(2):
        for be in range(2):
            dva[al, be] = dv[:, be] @ jac[:, al] + v @ frame.ddy0[:, al, be]
    dv3 = dv.T @ frame.n0 + frame.dn0.T @ v
    ddv3 = None
    if ddv is not None and ddn0 is not None:
        ddv3 = np.empty((2, 2))
        for a in range(2):
            for b in range(2):
                ddv3[a, b] = (ddv[:, a, b] @ frame.n0 + dv[:, a] @ frame.dn0[:, b]
                              + dv[:, b] @ frame.dn0[:, a] + v @ ddn0[:, a, b])
    return va, v3, dva, dv3, ddv3


def change_of_metric_covariant(frame: GeometryFrame, v, dv) -> np.ndarray:
    """Covariant-component form of G (Ciarlet-style), equivalent to change_of_metric."""
    va, v3, dva, _, _ = _covariant_data(frame, v, dv)
    g = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            g[a, b] = (0.5 * (dva[a, b] + dva[b, a])
                       - frame.Gamma[:, a, b] @ va - frame.II[a, b] * v3)
    return g


def koiter_bending(frame: GeometryFrame, dv, ddv) -> np.ndarray:
    """R_K[a,b] = <n0, d_ab v - sum_g Gamma^g_ab d_g v>, symmetric 2x2."""
    ndv = dv.T @ frame.n0  # <n0, d_g v>
    r = np.einsum("iab,i->ab", ddv, frame.n0) - np.einsum("gab,g->ab", frame.Gamma, ndv)
    return 0.5 * (r + r.T)


def koiter_bending_covariant(frame: GeometryFrame, v, dv, ddv, ddn0, dL) -> np.ndarray:
    """Covariant-component form of the bending tensor.

    Needs third-order geometry data (ddn0, dL from geometry.third_order_data);
    equivalent to koiter_bending on C3 charts.
    """
    va, v3, dva, dv3, ddv3 = _covariant_data(frame, v, dv, ddv, ddn0)
    gam = frame.Gamma
    bcov = frame.II
    bmix = frame.L  # b^s_a = L[s,a]
    r = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            t = ddv3[a, b] - gam[:, a, b] @ dv3
            t -= sum(bmix[s, a] * bcov[s, b] for s in range(2)) * v3
            t += sum(bmix[s, a] * (dva[s, b] - gam[:, b, s] @ va) for s in range(2))
            t += sum(bmix[s, b] * (dva[s, a] - gam[:, a, s] @ va) for s in range(2))
            t += sum((dL[a][s, b] + gam[s, a, :] @ bmix[:, b] - gam[:, a, b] @ bmix[s, :])
                     * va[s] for s in range(2))
            r[a, b] = t
    return r


def _tilt_covector(frame: GeometryFrame, dv) -> np.ndarray:
    """s = sum_a <n0, d_a v> a^a; the linearized normal is n0 - s."""
    ndv = dv.T @ frame.n0
    return ndv @ frame.a_contra


def microrotation(frame: GeometryFrame, dv) -> np.ndarray:
    """Infinitesimal rotation A_theta = skew[(grad v | -s) [gradTheta]^{-1}]."""
    m = np.column_stack([dv, -_tilt_covector(frame, dv)]) @ frame.grad_theta_inv
    return 0.5 * (m - m.T)


def rotation_vector(frame: GeometryFrame, dv) -> np.ndarray:
    """Rotation vector theta = axl(A_theta).

    Normal component equals -1/2 tr(skew[(grad y0)^T grad v] C^{-1}); the
    tangential part is fixed by theta x n0 = -sum_a <n0, d_a v> a^a, which
    makes the linearized transverse shear vanish.
    """
    return axl(microrotation(frame, dv))


def normal_rotation_component(frame: GeometryFrame, dv) -> float:
    """<theta, n0> = -1/2 tr(skew[(grad y0)^T grad v] C^{-1}) (drill rotation)."""
    jac = np.column_stack([frame.a1, frame.a2])
    m = jac.T @ dv
    sk = 0.5 * (m - m.T)
    return -0.5 * np.trace(sk @ frame.Cskew_inv)


def transverse_shear_lin(frame: GeometryFrame, dv, theta) -> np.ndarray:
    """T = n0^T grad v + (theta x n0)^T grad y0 (2,); zero for the model's theta."""
    jac = np.column_stack([frame.a1, frame.a2])
    return dv.T @ frame.n0 + jac.T @ np.cross(theta, frame.n0)


def bending_curvature(frame: GeometryFrame, grad_theta: np.ndarray):
    """Curvature measures (K0, K1, K2) from grad theta (3,2).

    K_k = (grad theta | 0) (L^flat)^k [gradTheta]^{-1}, k = 0, 1, 2.
    """
    g = np.zeros((3, 3))
    g[:, :2] = grad_theta
    lf = flat(frame.L)
    ti = frame.grad_theta_inv
    k0 = g @ ti
    k1 = g @ lf @ ti
    k2 = g @ lf @ lf @ ti
    return k0, k1, k2


def lifted_strains(frame: GeometryFrame, g, rk):
    """Lifted tensors (E, M1, M2) of the energy functionals.

    E  =  T^{-T} [G]^flat T^{-1}
    M1 = -T^{-T} [R_K - 2 G L]^flat T^{-1}
    M2 = -T^{-T} [(R_K - 2 G L) L]^flat T^{-1}
    """
    ti = frame.grad_theta_inv
    bend = rk - 2.0 * g @ frame.L
    e = ti.T @ flat(g) @ ti
    m1 = -ti.T @ flat(bend) @ ti
    m2 = -ti.T @ flat(bend @ frame.L) @ ti
    return e, m1, m2


def constraint_residuals(frame: GeometryFrame, g, rk):
    """Symmetry-constraint residuals (r1, r2) of the conditional admissible set.

    r1 = ||skew(G L)||, r2 = ||skew((R_K - 2 G L) L)||; reported, never raised.
    """
    gl = g @ frame.L
    bend_l = (rk - 2.0 * gl) @ frame.L
    r1 = np.linalg.norm(0.5 * (gl - gl.T))
    r2 = np.linalg.norm(0.5 * (bend_l - bend_l.T))
    return r1, r2


@dataclass
class StrainState:
    """All linear strain measures at one chart point."""

    G_lin: np.ndarray            # (2,2) symmetric
    R_Koiter_lin: np.ndarray     # (2,2) symmetric
    R_inf_lin: np.ndarray        # (2,2) = R_K - G L
    theta_inf: np.ndarray        # (3,)
    gradTheta_inf: np.ndarray    # (3,2)
    A_theta: np.ndarray          # (3,3) skew
    E_lin: np.ndarray            # (3,3)
    EB_plus_CK: np.ndarray       # (3,3)
    EB2_plus_CKB: np.ndarray     # (3,3)
    K_lin: np.ndarray            # (3,3)
    K_lin_B: np.ndarray          # (3,3)
    K_lin_B2: np.ndarray         # (3,3)


def strain_state(frame: GeometryFrame, dv, ddv, grad_theta) -> StrainState:
    """Assemble the full StrainState from displacement partials at a point."""
    g = change_of_metric(frame, dv)
    rk = koiter_bending(frame, dv, ddv)
    theta = rotation_vector(frame, dv)
    e, m1, m2 = lifted_strains(frame, g, rk)
    k0, k1, k2 = bending_curvature(frame, grad_theta)
    return StrainState(G_lin=g, R_Koiter_lin=rk, R_inf_lin=rk - g @ frame.L,
                       theta_inf=theta, gradTheta_inf=np.asarray(grad_theta),
                       A_theta=anti(theta), E_lin=e, EB_plus_CK=m1, EB2_plus_CKB=m2,
                       K_lin=k0, K_lin_B=k1, K_lin_B2=k2)


# ---------------------------------------------------------------------------
# 1-D stencil matrices (shared with the solver, which Kronecker-lifts them)
# ---------------------------------------------------------------------------

def _block_coo(entries, shape):
    """Sparse matrix from (row_node, col_node, 3x3 block) triples."""
    rows, cols, vals = [], [], []
    for rn, cn, block in entries:
        for a in range(3):
            for b in range(3):
                v = block[a, b]
                if v != 0.0:
                    rows.append(3 * rn + a)
                    cols.append(3 * cn + b)
                    vals.append(v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(3 * shape[0], 3 * shape[1]))


def cached_pad_operator(fg: FrameGrid) -> sp.csr_matrix:
    """clamped_pad_operator memoized on the frame grid."""
    op = getattr(fg, "_clamped_pad_op", None)
    if op is None:
        op = clamped_pad_operator(fg)
        fg._clamped_pad_op = op
    return op


def clamped_pad_operator(fg: FrameGrid) -> sp.csr_matrix:
    """Sparse ghost-pad of clamped fields, ((n1+2)(n2+2)*3) x (n1*n2*3).

    Ghost nodes carry the boundary reflector R = 2 n0 n0^T - 1 (even in the
    normal part, odd in the tangential part) applied to the paired interior
    node; corners compose the two axis reflections.  Field code and solver
    share this one operator, so their stencils agree exactly.
    """
    n1, n2 = fg.n1, fg.n2
    eye = np.eye(3)
    refl = 2.0 * np.einsum("ijk,ijl->ijkl", fg.n0, fg.n0) - eye

    # stage 1: (n1, n2) -> (n1+2, n2), ghost rows reflect about rows 0, n1-1
    ent1 = []
    for i in range(n1):
        for j in range(n2):
            ent1.append(((i + 1) * n2 + j, i * n2 + j, eye))
    for j in range(n2):
        ent1.append((j, 1 * n2 + j, refl[0, j]))
        ent1.append(((n1 + 1) * n2 + j, (n1 - 2) * n2 + j, refl[n1 - 1, j]))
    p1 = _block_coo(ent1, ((n1 + 2) * n2, n1 * n2))

    # stage 2: (n1+2, n2) -> (n1+2, n2+2), ghost columns (corners included)
    ent2 = []
    for r in range(n1 + 2):
        for j in range(n2):
            ent2.append((r * (n2 + 2) + j + 1, r * n2 + j, eye))
        i = min(max(r - 1, 0), n1 - 1)
        ent2.append((r * (n2 + 2), r * n2 + 1, refl[i, 0]))
        ent2.append((r * (n2 + 2) + n2 + 1, r * n2 + n2 - 2, refl[i, n2 - 1]))
    p2 = _block_coo(ent2, ((n1 + 2) * (n2 + 2), (n1 + 2) * n2))
    return (p2 @ p1).tocsr()


def d1_central_matrix(n: int, d: float) -> np.ndarray:
    """n x (n+2) central first derivative on a padded line."""
    m = np.zeros((n, n + 2))
    for i in range(n):
        m[i, i] = -1.0
        m[i, i + 2] = 1.0
    return m / (2.0 * d)


def d2_central_matrix(n: int, d: float) -> np.ndarray:
    """n x (n+2) central second derivative on a padded line."""
    m = np.zeros((n, n + 2))
    for i in range(n):
        m[i, i] = 1.0
        m[i, i + 1] = -2.0
        m[i, i + 2] = 1.0
    return m / (d * d)


def mid_matrix(n: int) -> np.ndarray:
    """n x (n+2) selector of the unpadded entries."""
    m = np.zeros((n, n + 2))
    m[:, 1:-1] = np.eye(n)
    return m


def d1_edge_matrix(n: int, d: float) -> np.ndarray:
    """n x n first derivative: central interior, 2nd-order one-sided edges."""
    m = np.zeros((n, n))
    for i in range(1, n - 1):
        m[i, i - 1] = -0.5
        m[i, i + 1] = 0.5
    m[0, 0], m[0, 1], m[0, 2] = -1.5, 2.0, -0.5
    m[-1, -1], m[-1, -2], m[-1, -3] = 1.5, -2.0, 0.5
    return m / d


def d2_edge_matrix(n: int, d: float) -> np.ndarray:
    """n x n second derivative: central interior, 2nd-order one-sided edges."""
    m = np.zeros((n, n))
    for i in range(1, n - 1):
        m[i, i - 1] = 1.0
        m[i, i] = -2.0
        m[i, i + 1] = 1.0
    m[0, :4] = [2.0, -5.0, 4.0, -1.0]
    m[-1, -4:] = [-1.0, 4.0, -5.0, 2.0]
    return m / (d * d)


def _apply_rows(mat, arr):
    """Apply a 1-D operator along axis 0 of arr (n1, n2, ...)."""
    return np.tensordot(mat, arr, axes=(1, 0))


def _apply_cols(mat, arr):
    """Apply a 1-D operator along axis 1 of arr (n1, n2, ...)."""
    out = np.tensordot(mat, np.moveaxis(arr, 1, 0), axes=(1, 0))
    return np.moveaxis(out, 0, 1)


# ---------------------------------------------------------------------------
# displacement and strain fields
# ---------------------------------------------------------------------------

class DisplacementField:
    """Grid-sampled midsurface displacement with derivative access.

    bc "clamped" requires v = 0 on all boundary nodes and realizes
    <grad v3, nu> = 0 through the even ghost reflection of v3; bc "free" is
    for diagnostic fields (rigid motions, oracle test fields).  If analytic
    derivative callables are supplied they take precedence over stencils.
    """

    def __init__(self, values: np.ndarray, bc: str = "clamped",
                 fn=None, dfn=None, ddfn=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or values.shape[2] != 3:
            raise ValueError("values must have shape (n1, n2, 3)")
        if bc not in ("clamped", "free"):
            raise ValueError("bc must be 'clamped' or 'free'")
        if bc == "clamped":
            edge = np.concatenate([values[0].ravel(), values[-1].ravel(),
                                   values[:, 0].ravel(), values[:, -1].ravel()])
            if np.any(edge != 0.0):
                raise ValueError("clamped fields must vanish exactly on boundary nodes")
        self.values = values
        self.bc = bc
        self.fn, self.dfn, self.ddfn = fn, dfn, ddfn

    @property
    def shape(self):
        return self.values.shape[:2]

    @classmethod
    def from_function(cls, fg: FrameGrid, fn, dfn=None, ddfn=None, bc: str = "free"):
        vals = np.array([[fn((u, w)) for w in fg.x2] for u in fg.x1])
        return cls(vals, bc=bc, fn=fn, dfn=dfn, ddfn=ddfn)

    @classmethod
    def from_dofs(cls, fg: FrameGrid, dofs: np.ndarray):
        """Clamped field from an interior dof vector (lexicographic i, j, comp)."""
        n1, n2 = fg.n1, fg.n2
        vals = np.zeros((n1, n2, 3))
        vals[1:-1, 1:-1, :] = dofs.reshape(n1 - 2, n2 - 2, 3)
        return cls(vals, bc="clamped")

    def interior_dofs(self) -> np.ndarray:
        return self.values[1:-1, 1:-1, :].ravel()

    def derivatives(self, fg: FrameGrid):
        """(dv (n1,n2,3,2), ddv (n1,n2,3,2,2)) per the stencil policy."""
        if self.dfn is not None and self.ddfn is not None:
            dv = np.array([[self.dfn((u, w)) for w in fg.x2] for u in fg.x1])
            ddv = np.array([[self.ddfn((u, w)) for w in fg.x2] for u in fg.x1])
            return dv, ddv
        n1, n2 = self.shape
        dv = np.empty((n1, n2, 3, 2))
        ddv = np.empty((n1, n2, 3, 2, 2))
        if self.bc == "clamped":
            c1 = d1_central_matrix(n1, fg.d1)
            c2 = d1_central_matrix(n2, fg.d2)
            s1 = d2_central_matrix(n1, fg.d1)
            s2 = d2_central_matrix(n2, fg.d2)
            m1 = mid_matrix(n1)
            m2 = mid_matrix(n2)
            padded = (cached_pad_operator(fg) @ self.values.ravel()
                      ).reshape(n1 + 2, n2 + 2, 3)
            for c in range(3):
                pad = padded[:, :, c]
                dv[:, :, c, 0] = c1 @ pad @ m2.T
                dv[:, :, c, 1] = m1 @ pad @ c2.T
                ddv[:, :, c, 0, 0] = s1 @ pad @ m2.T
                ddv[:, :, c, 1, 1] = m1 @ pad @ s2.T
                cross = c1 @ pad @ c2.T
                ddv[:, :, c, 0, 1] = cross
                ddv[:, :, c, 1, 0] = cross
        else:
            e1 = d1_edge_matrix(n1, fg.d1)
            e2 = d1_edge_matrix(n2, fg.d2)
            q1 = d2_edge_matrix(n1, fg.d1)
            q2 = d2_edge_matrix(n2, fg.d2)
            for c in range(3):
                vals = self.values[:, :, c]
                dv[:, :, c, 0] = e1 @ vals
                dv[:, :, c, 1] = vals @ e2.T
                ddv[:, :, c, 0, 0] = q1 @ vals
                ddv[:, :, c, 1, 1] = vals @ q2.T
                cross = e1 @ vals @ e2.T
                ddv[:, :, c, 0, 1] = cross
                ddv[:, :, c, 1, 0] = cross
        return dv, ddv

    def norm_l2(self, fg: FrameGrid) -> float:
        """Discrete L2 norm with the area-weighted trapezoid rule."""
        w = fg.quadrature_weights()
        return float(np.sqrt(np.sum(w * np.sum(self.values ** 2, axis=2))))


def theta_field(fg: FrameGrid, dv: np.ndarray) -> np.ndarray:
    """Rotation vector at every node from the dv array (vectorized)."""
    ndv = np.einsum("ijka,ijk->ija", dv, fg.n0)              # <n0, d_a v>
    s = np.einsum("ija,ijab->ijb", ndv, fg.grad_theta_inv[:, :, :2, :])
    m = np.concatenate([dv, -s[:, :, :, None]], axis=3)
    n_mat = np.einsum("ijka,ijab->ijkb", m, fg.grad_theta_inv)
    a = 0.5 * (n_mat - n_mat.transpose(0, 1, 3, 2))
    return np.stack([-a[:, :, 1, 2], a[:, :, 0, 2], -a[:, :, 0, 1]], axis=-1)


def grad_theta_field(fg: FrameGrid, theta: np.ndarray) -> np.ndarray:
    """grad theta (n1,n2,3,2): central interior, one-sided edges."""
    e1 = d1_edge_matrix(fg.n1, fg.d1)
    e2 = d1_edge_matrix(fg.n2, fg.d2)
    g1 = _apply_rows(e1, theta)
    g2 = _apply_cols(e2, theta)
    return np.stack([g1, g2], axis=-1)


@dataclass
class StrainField:
    """Stacked strain measures over a FrameGrid."""

    G: np.ndarray            # (n1,n2,2,2)
    RK: np.ndarray           # (n1,n2,2,2)
    R_inf: np.ndarray        # (n1,n2,2,2)
    theta: np.ndarray        # (n1,n2,3)
    grad_theta: np.ndarray   # (n1,n2,3,2)
    E: np.ndarray            # (n1,n2,3,3)
    M1: np.ndarray           # (n1,n2,3,3)  E B + C K0
    M2: np.ndarray           # (n1,n2,3,3)  (E B + C K0) B
    K0: np.ndarray           # (n1,n2,3,3)
    K1: np.ndarray           # (n1,n2,3,3)
    K2: np.ndarray           # (n1,n2,3,3)
    r1: np.ndarray           # (n1,n2) constraint residual ||skew(G L)||
    r2: np.ndarray           # (n1,n2) constraint residual ||skew((R_K-2GL)L)||


def build_strain_field(fg: FrameGrid, disp: DisplacementField) -> StrainField:
    """Compute every linear strain measure of the model on the grid."""
    dv, ddv = disp.derivatives(fg)
    jac_t = fg.jac.transpose(0, 1, 3, 2)
    m = np.einsum("ijak,ijkb->ijab", jac_t, dv)
    g = 0.5 * (m + m.transpose(0, 1, 3, 2))

    ndv = np.einsum("ijkg,ijk->ijg", dv, fg.n0)
    rk = (np.einsum("ijkab,ijk->ijab", ddv, fg.n0)
          - np.einsum("ijgab,ijg->ijab", fg.Gamma, ndv))
    rk = 0.5 * (rk + rk.transpose(0, 1, 3, 2))

    theta = theta_field(fg, dv)
    gth = grad_theta_field(fg, theta)

    ti = fg.grad_theta_inv
    bend = rk - 2.0 * np.einsum("ijab,ijbc->ijac", g, fg.L)
    bend_l = np.einsum("ijab,ijbc->ijac", bend, fg.L)

    def lift(two, sign=1.0):
        return sign * np.einsum("ijba,ijbc,ijcd->ijad", ti, flat(two), ti)

    e = lift(g)
    m1 = lift(bend, -1.0)
    m2 = lift(bend_l, -1.0)

    gth3 = np.concatenate([gth, np.zeros(gth.shape[:2] + (3, 1))], axis=3)
    lf = flat(fg.L)
    k0 = np.einsum("ijab,ijbc->ijac", gth3, ti)
    k1 = np.einsum("ijab,ijbc,ijcd->ijad", gth3, lf, ti)
    k2 = np.einsum("ijab,ijbc,ijcd,ijde->ijae", gth3, lf, lf, ti)

    gl = np.einsum("ijab,ijbc->ijac", g, fg.L)
    r1 = np.linalg.norm(0.5 * (gl - gl.transpose(0, 1, 3, 2)), axis=(2, 3))
    r2 = np.linalg.norm(0.5 * (bend_l - bend_l.transpose(0, 1, 3, 2)), axis=(2, 3))

    return StrainField(G=g, RK=rk, R_inf=rk - gl, theta=theta, grad_theta=gth,
                       E=e, M1=m1, M2=m2, K0=k0, K1=k1, K2=k2, r1=r1, r2=r2)
