"""Finite-difference discretization and solve of the quadratic shell problems.

The displacement lives on a uniform (n1 x n2) tensor grid with clamped
boundary: v = 0 on boundary nodes, and the zero normal derivative of the
normal displacement is encoded by the local-frame ghost reflection of
cosshell.kinematics.  Unknowns are the 3 components at interior nodes in
lexicographic (i, j, component) order.

The stiffness action is matrix-free in the form

    A u = 2 S^T (W Q) S u

where S is the sparse linear strain operator mapping dofs to the per-node
strain stack [G11, G22, G12, RK11, RK22, RK12, grad theta (3x2)], built from
exactly the same 1-D stencil matrices as the kinematics field code, and WQ is
the quadrature-weighted per-node quadratic form of the selected energy
density.  By construction A is symmetric, <A u, u> = 2 * internal energy(u),
and the discrete weak problem A v = rhs reproduces the variational problem
with the dead-load work on the right-hand side.

The linear solve is Jacobi-preconditioned conjugate gradients; the smallest
stiffness eigenvalue (discrete coercivity/Korn certificate) comes from inverse
power iteration with CG inner solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .energy import (EnergyBreakdown, ModelConfig, TERM_KEYS, W_curv_pair,
                     W_mp_pair, W_shell_pair, integrate_energy,
                     thickness_check_h3, thickness_check_h5)
from .errors import GridTooCoarse, NoConvergence
from .geometry import FrameGrid, SurfaceChart, flat
from .kinematics import (DisplacementField, build_strain_field, cached_pad_operator,
                         d1_central_matrix, d1_edge_matrix, d2_central_matrix,
                         mid_matrix, theta_field)

__all__ = ["DiscreteProblem", "SolveResult", "assemble", "solve_cg",
           "min_eigen_estimate"]

N_STRAIN = 12  # G (3) + R_K (3) + grad theta (6)


def _unit_quadratic_matrix(pair_fn, mat) -> np.ndarray:
    """9x9 matrix of a quadratic form on 3x3 tensors in vec (row-major) coords."""
    basis = []
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3))
            e[i, j] = 1.0
            basis.append(e)
    return np.array([[pair_fn(a, b, mat) for b in basis] for a in basis])


def _strain_tensor_maps(fg: FrameGrid, symmetrize: bool):
    """Per-node 9x12 maps from the strain stack to the lifted energy tensors.

    Returns dict of arrays (N, 9, 12) for E, M1, M2, K0, K1, K2 and RKlift
    (plain lift of R_K, used by the Koiter functional).
    """
    n1, n2 = fg.n1, fg.n2
    nn = n1 * n2
    ti = fg.grad_theta_inv.reshape(nn, 3, 3)
    lf = flat(fg.L.reshape(nn, 2, 2))
    lmat = fg.L.reshape(nn, 2, 2)
    maps = {k: np.zeros((nn, 9, N_STRAIN)) for k in
            ("E", "M1", "M2", "K0", "K1", "K2", "RKlift")}

    # stack entries are the (1,1), (2,2), (1,2) tensor entries
    sym22 = [np.array([[1.0, 0.0], [0.0, 0.0]]),
             np.array([[0.0, 0.0], [0.0, 1.0]]),
             np.array([[0.0, 1.0], [1.0, 0.0]])]

    def sandwich(two):
        # ti^T @ flat(two) @ ti per node, two: (nn,2,2)
        return np.einsum("nba,nbc,ncd->nad", ti, flat(two), ti)

    for k, unit in enumerate(sym22):
        two = np.broadcast_to(unit, (nn, 2, 2))
        e = sandwich(two)
        maps["E"][:, :, k] = e.reshape(nn, 9)
        maps["RKlift"][:, :, 3 + k] = e.reshape(nn, 9)
        # G contributes -2 G L to the bending combination, R_K contributes +1
        bend_g = -2.0 * two @ lmat
        bend_r = two
        for src, col in ((bend_g, k), (bend_r, 3 + k)):
            m1 = -sandwich(src)
            m2 = -sandwich(src @ lmat)
            if symmetrize:
                m1 = 0.5 * (m1 + m1.transpose(0, 2, 1))
                m2 = 0.5 * (m2 + m2.transpose(0, 2, 1))
            maps["M1"][:, :, col] += m1.reshape(nn, 9)
            maps["M2"][:, :, col] += m2.reshape(nn, 9)

    for comp in range(3):
        for ax in range(2):
            col = 6 + 2 * comp + ax
            g3 = np.zeros((nn, 3, 3))
            g3[:, comp, ax] = 1.0
            k0 = np.einsum("nab,nbc->nac", g3, ti)
            k1 = np.einsum("nab,nbc,ncd->nad", g3, lf, ti)
            k2 = np.einsum("nab,nbc,ncd,nde->nae", g3, lf, lf, ti)
            maps["K0"][:, :, col] = k0.reshape(nn, 9)
            maps["K1"][:, :, col] = k1.reshape(nn, 9)
            maps["K2"][:, :, col] = k2.reshape(nn, 9)
    return maps


def _node_quadratic_forms(fg: FrameGrid, config: ModelConfig) -> np.ndarray:
    """Per-node 12x12 quadratic forms: density(u) = s^T Q s on the strain stack."""
    mat = config.material
    nn = fg.n1 * fg.n2
    maps = _strain_tensor_maps(fg, config.symmetrized)
    w_sh = _unit_quadratic_matrix(W_shell_pair, mat)
    w_mp = _unit_quadratic_matrix(W_mp_pair, mat)
    w_cv = _unit_quadratic_matrix(W_curv_pair, mat)

    def form(ta, w, tb):
        q = np.einsum("nka,kl,nlb->nab", ta, w, tb)
        return 0.5 * (q + q.transpose(0, 2, 1))

    h = config.h
    h3 = h ** 3 / 12.0
    h5 = h ** 5 / 80.0
    kk = fg.K.reshape(nn)
    hh = fg.H.reshape(nn)
    q = np.zeros((nn, N_STRAIN, N_STRAIN))
    if config.model == "koiter":
        q += h * form(maps["E"], w_sh, maps["E"])
        q += h3 * form(maps["RKlift"], w_sh, maps["RKlift"])
        return q
    five = config.model.endswith("h5")
    pre_bend = (h3 - kk * h5) if five else np.full(nn, h3)
    q += (h + kk * h3)[:, None, None] * form(maps["E"], w_sh, maps["E"])
    q += pre_bend[:, None, None] * form(maps["M1"], w_sh, maps["M1"])
    q += (-(h ** 3 / 3.0) * hh)[:, None, None] * form(maps["E"], w_sh, maps["M1"])
    q += (h ** 3 / 6.0) * form(maps["E"], w_sh, maps["M2"])
    q += (h - kk * h3)[:, None, None] * form(maps["K0"], w_cv, maps["K0"])
    q += pre_bend[:, None, None] * form(maps["K1"], w_cv, maps["K1"])
    if five:
        q += h5 * form(maps["M2"], w_mp, maps["M2"])
        q += h5 * form(maps["K2"], w_cv, maps["K2"])
    return q


def _component_derivative_ops(fg: FrameGrid):
    """Sparse dv/ddv operators per component, full-grid 3-vectors -> scalars.

    Keys (kind, comp) with kind in d1, d2, d11, d22, d12; each matrix maps the
    clamped field (node-major, component-minor, length 3 n1 n2) to the
    component's derivative at all nodes, ghost reflection folded in through
    the shared clamped_pad_operator.
    """
    n1, n2 = fg.n1, fg.n2
    pad = cached_pad_operator(fg)
    c1 = sp.csr_matrix(d1_central_matrix(n1, fg.d1))
    c2 = sp.csr_matrix(d1_central_matrix(n2, fg.d2))
    s1 = sp.csr_matrix(d2_central_matrix(n1, fg.d1))
    s2 = sp.csr_matrix(d2_central_matrix(n2, fg.d2))
    m1 = sp.csr_matrix(mid_matrix(n1))
    m2 = sp.csr_matrix(mid_matrix(n2))
    kinds = {"d1": sp.kron(c1, m2, format="csr"),
             "d2": sp.kron(m1, c2, format="csr"),
             "d11": sp.kron(s1, m2, format="csr"),
             "d22": sp.kron(m1, s2, format="csr"),
             "d12": sp.kron(c1, c2, format="csr")}
    ops = {}
    for comp in range(3):
        sel = sp.csr_matrix((np.ones(1), ([0], [comp])), shape=(1, 3))
        for kind, mat in kinds.items():
            ops[(kind, comp)] = (sp.kron(mat, sel, format="csr") @ pad).tocsr()
    return ops


def _strain_operator(fg: FrameGrid) -> sp.csr_matrix:
    """Sparse map from interior dofs to the stacked strain fields.

    Row layout: 12 field blocks of N rows each, in the strain-stack order;
    column layout: interior dofs, lexicographic (i, j, component).
    """
    n1, n2 = fg.n1, fg.n2
    nn = n1 * n2
    nint = (n1 - 2) * (n2 - 2)
    ops = _component_derivative_ops(fg)

    # scatter interior dofs to full-grid 3-vectors (node-major, comp-minor)
    inner = (np.arange(1, n1 - 1)[:, None] * n2 + np.arange(1, n2 - 1)[None, :]).ravel()
    rows = (3 * inner[:, None] + np.arange(3)[None, :]).ravel()
    scat = sp.csr_matrix((np.ones(3 * nint), (rows, np.arange(3 * nint))),
                         shape=(3 * nn, 3 * nint))

    dv_ops = {(comp, ax): (ops[(f"d{ax + 1}", comp)] @ scat).tocsr()
              for comp in range(3) for ax in range(2)}
    dd_ops = {(comp, key): (ops[(key, comp)] @ scat).tocsr()
              for comp in range(3) for key in ("d11", "d22", "d12")}

    def diag(arr):
        return sp.diags(np.asarray(arr).reshape(nn))

    jac = fg.jac.reshape(nn, 3, 2)
    n0 = fg.n0.reshape(nn, 3)
    gam = fg.Gamma.reshape(nn, 2, 2, 2)

    # G = sym(J^T dv)
    g_rows = []
    for a, b in ((0, 0), (1, 1), (0, 1)):
        op = None
        for comp in range(3):
            term = (0.5 * (diag(jac[:, comp, a]) @ dv_ops[(comp, b)]
                           + diag(jac[:, comp, b]) @ dv_ops[(comp, a)]))
            op = term if op is None else op + term
        g_rows.append(op.tocsr())

    # R_K[a,b] = <n0, d_ab v> - Gamma^g_ab <n0, d_g v>
    dd_key = {(0, 0): "d11", (1, 1): "d22", (0, 1): "d12"}
    rk_rows = []
    for a, b in ((0, 0), (1, 1), (0, 1)):
        op = None
        for comp in range(3):
            term = diag(n0[:, comp]) @ dd_ops[(comp, dd_key[(a, b)])]
            for g in range(2):
                term = term - diag(gam[:, g, a, b] * n0[:, comp]) @ dv_ops[(comp, g)]
            op = term if op is None else op + term
        rk_rows.append(op.tocsr())

    # theta: pointwise linear in dv; coefficients from unit responses
    theta_ops = [None, None, None]
    for comp in range(3):
        for ax in range(2):
            unit = np.zeros((n1, n2, 3, 2))
            unit[:, :, comp, ax] = 1.0
            resp = theta_field(fg, unit).reshape(nn, 3)
            for i in range(3):
                term = diag(resp[:, i]) @ dv_ops[(comp, ax)]
                theta_ops[i] = term if theta_ops[i] is None else theta_ops[i] + term

    e1 = sp.csr_matrix(d1_edge_matrix(n1, fg.d1))
    e2 = sp.csr_matrix(d1_edge_matrix(n2, fg.d2))
    dth1 = sp.kron(e1, sp.identity(n2), format="csr")
    dth2 = sp.kron(sp.identity(n1), e2, format="csr")
    gth_rows = []
    for i in range(3):
        gth_rows.append((dth1 @ theta_ops[i]).tocsr())
        gth_rows.append((dth2 @ theta_ops[i]).tocsr())

    return sp.vstack(g_rows + rk_rows + gth_rows, format="csr")


@dataclass
class SolveResult:
    """Outcome of a clamped solve."""

    field: DisplacementField
    iterations: int
    residual: float
    energy: EnergyBreakdown
    constraint_summary: dict
    thickness_h5: object
    thickness_h3: object
    min_eigen: float | None = None


class DiscreteProblem:
    """Assembled weak problem: symmetric stiffness action and load vector."""

    def __init__(self, fg: FrameGrid, config: ModelConfig, load=None):
        n1, n2 = fg.n1, fg.n2
        if n1 < 8 or n2 < 8:
            raise GridTooCoarse(f"grid {n1}x{n2} below the 8x8 minimum")
        self.fg = fg
        self.config = config
        self.ndof = 3 * (n1 - 2) * (n2 - 2)
        self.strain_op = _strain_operator(fg)
        w = fg.quadrature_weights().reshape(n1 * n2)
        q_nodes = _node_quadratic_forms(fg, config)
        nn = n1 * n2
        blocks = [[sp.diags(q_nodes[:, r, s] * w) for s in range(N_STRAIN)]
                  for r in range(N_STRAIN)]
        self.wq = sp.bmat(blocks, format="csr")
        self._sws = (self.wq @ self.strain_op).tocsr()
        self.load = load
        self.rhs = np.zeros(self.ndof)
        if load is not None:
            wf = w.reshape(n1, n2)[1:-1, 1:-1, None] * np.asarray(load)[1:-1, 1:-1, :]
            self.rhs = wf.ravel()

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        """A u = 2 S^T WQ S u; <A u, u> equals twice the internal energy."""
        return 2.0 * (self.strain_op.T @ (self.wq @ (self.strain_op @ u)))

    def bilinear(self, u, w) -> float:
        return float(w @ self.apply_stiffness(u))

    def load_functional(self, w) -> float:
        return float(self.rhs @ w)

    def stiffness_diagonal(self) -> np.ndarray:
        d = 2.0 * np.asarray(self.strain_op.multiply(self._sws).sum(axis=0)).ravel()
        return d


def assemble(chart: SurfaceChart, config: ModelConfig, n1: int, n2: int,
             load=None, fg: FrameGrid | None = None) -> DiscreteProblem:
    """Assemble the discrete problem on an (n1 x n2) node grid."""
    fg = fg if fg is not None else FrameGrid(chart, n1, n2)
    return DiscreteProblem(fg, config, load=load)


def solve_cg(problem: DiscreteProblem, tol: float = 1e-10,
             max_iter: int | None = None, x0=None,
             compute_energy: bool = True) -> SolveResult:
    """Jacobi-preconditioned conjugate gradients on the assembled problem."""
    b = problem.rhs
    n = problem.ndof
    max_iter = 20 * n if max_iter is None else max_iter
    bnorm = float(np.linalg.norm(b))
    diag = problem.stiffness_diagonal()
    inv_diag = np.where(diag > 0.0, 1.0 / np.where(diag > 0.0, diag, 1.0), 1.0)

    if bnorm == 0.0 and x0 is None:
        x = np.zeros(n)
        iters = 0
        res = 0.0
    else:
        x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
        r = b - problem.apply_stiffness(x)
        z = inv_diag * r
        p = z.copy()
        rz = float(r @ z)
        res = float(np.linalg.norm(r)) / (bnorm if bnorm > 0.0 else 1.0)
        iters = 0
        while res > tol and iters < max_iter:
            ap = problem.apply_stiffness(p)
            alpha = rz / float(p @ ap)
            x += alpha * p
            r -= alpha * ap
            res = float(np.linalg.norm(r)) / (bnorm if bnorm > 0.0 else 1.0)
            z = inv_diag * r
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
            iters += 1
        if res > tol:
            raise NoConvergence(
                f"CG stalled at relative residual {res:.3e} after {iters} iterations "
                f"(possible coercivity failure; check the thickness report)")

    field = DisplacementField.from_dofs(problem.fg, x)
    energy = EnergyBreakdown(model=problem.config.model,
                             terms=dict.fromkeys(TERM_KEYS, 0.0))
    summary = {"r1_max": 0.0, "r1_mean": 0.0, "r2_max": 0.0, "r2_mean": 0.0}
    if compute_energy:
        sf = build_strain_field(problem.fg, field)
        energy = integrate_energy(problem.fg, sf, problem.config,
                                  load=problem.load, displacement=field.values)
        summary = {"r1_max": float(sf.r1.max()), "r1_mean": float(sf.r1.mean()),
                   "r2_max": float(sf.r2.max()), "r2_mean": float(sf.r2.mean())}
    return SolveResult(
        field=field, iterations=iters, residual=res, energy=energy,
        constraint_summary=summary,
        thickness_h5=thickness_check_h5(problem.fg, problem.config.h),
        thickness_h3=thickness_check_h3(problem.fg, problem.config.h,
                                        problem.config.material))


def min_eigen_estimate(problem: DiscreteProblem, iters: int = 25,
                       inner_tol: float = 1e-10, seed: int = 0) -> float:
    """Smallest Ritz value of the stiffness action via inverse power iteration.

    Each step solves A y = x by Jacobi-preconditioned CG; a positive value is
    the discrete Korn/coercivity certificate.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(problem.ndof)
    x /= np.linalg.norm(x)
    ritz = float(x @ problem.apply_stiffness(x))
    diag = problem.stiffness_diagonal()
    inv_diag = np.where(diag > 0.0, 1.0 / np.where(diag > 0.0, diag, 1.0), 1.0)
    for _ in range(iters):
        y = _cg_plain(problem, x, inv_diag, tol=inner_tol)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            raise NoConvergence("inverse iteration produced a degenerate vector")
        x = y / ny
        ax = problem.apply_stiffness(x)
        ritz = float(x @ ax)
        if np.linalg.norm(ax - ritz * x) <= 1e-8 * max(abs(ritz), 1e-30):
            break
    return ritz


def _cg_plain(problem, b, inv_diag, tol=1e-10, max_iter=None):
    n = problem.ndof
    max_iter = 20 * n if max_iter is None else max_iter
    x = np.zeros(n)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    bnorm = float(np.linalg.norm(b))
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol * bnorm:
            break
        ap = problem.apply_stiffness(p)
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x
