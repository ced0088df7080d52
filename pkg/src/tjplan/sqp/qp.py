"""Dense convex QP via a dual active-set method (Goldfarb-Idnani).

Solves min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq, A_in x >= b_in with H
symmetric positive definite.  Starts from the unconstrained minimizer
and adds violated constraints one at a time, so no phase-1 is needed;
an unbounded dual step certifies infeasibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import solve_triangular


class QpInfeasible(Exception):
    """Constraint linearization admits no feasible point."""


@dataclass
class QpSolution:
    x: np.ndarray
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray
    active_set: list
    iterations: int


class _ActiveSet:
    """Active normals with H^-1 N and N' H^-1 N maintained incrementally."""

    def __init__(self, n, Hinv):
        self.Hinv = Hinv
        self.ids: list[int] = []
        self.N = np.zeros((0, n))  # active normals, one per row
        self.HinvN = np.zeros((n, 0))  # H^-1 N'
        self.B = np.zeros((0, 0))  # N H^-1 N'
        self.R = np.zeros((0, 0))  # upper Cholesky factor, B = R'R
        self.healthy = True  # R valid; else fall back to least squares on B

    def append(self, cid, nvec):
        hn = self.Hinv @ nvec
        cross = self.N @ hn
        diag = float(nvec @ hn)
        q = len(self.ids)
        B = np.empty((q + 1, q + 1))
        B[:q, :q] = self.B
        B[:q, q] = cross
        B[q, :q] = cross
        B[q, q] = diag
        self.B = B
        if self.healthy:
            w = (
                solve_triangular(self.R.T, cross, lower=True)
                if q
                else np.zeros(0)
            )
            rest = diag - float(w @ w)
            if rest > 1e-14 * max(diag, 1.0):
                R = np.zeros((q + 1, q + 1))
                R[:q, :q] = self.R
                R[:q, q] = w
                R[q, q] = np.sqrt(rest)
                self.R = R
            else:
                self.healthy = False
        self.N = np.vstack([self.N, nvec[None, :]])
        self.HinvN = np.column_stack([self.HinvN, hn])
        self.ids.append(cid)

    def pop(self, k):
        self.ids.pop(k)
        self.N = np.delete(self.N, k, axis=0)
        self.HinvN = np.delete(self.HinvN, k, axis=1)
        self.B = np.delete(np.delete(self.B, k, axis=0), k, axis=1)
        if self.healthy:
            # deleting a column leaves a Hessenberg factor; Givens restores it
            R = np.delete(self.R, k, axis=1)
            q = R.shape[1]
            for i in range(k, q):
                a, b = R[i, i], R[i + 1, i]
                rad = np.hypot(a, b)
                if rad == 0.0:
                    self.healthy = False
                    return
                c, s = a / rad, b / rad
                rows = np.array([[c, s], [-s, c]]) @ R[i : i + 2, i:]
                R[i : i + 2, i:] = rows
            self.R = R[:q, :]
        else:
            self._refactor()

    def _refactor(self):
        try:
            self.R = np.linalg.cholesky(self.B).T
            self.healthy = True
        except LinAlgError:
            self.healthy = False

    def project(self, nvec):
        """(r, z): dual direction and the H^-1-projected primal direction."""
        Hinv_n = self.Hinv @ nvec
        if not self.ids:
            return np.zeros(0), Hinv_n
        rhs = self.N @ Hinv_n
        if self.healthy:
            y = solve_triangular(self.R.T, rhs, lower=True)
            r = solve_triangular(self.R, y, lower=False)
        else:
            r = np.linalg.lstsq(self.B, rhs, rcond=None)[0]
        return r, Hinv_n - self.HinvN @ r


def solve_qp(H, g, A_eq=None, b_eq=None, A_in=None, b_in=None, max_iter=None) -> QpSolution:
    H = np.asarray(H, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    n = len(g)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=np.float64)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=np.float64)
    A_in = np.zeros((0, n)) if A_in is None else np.asarray(A_in, dtype=np.float64)
    b_in = np.zeros(0) if b_in is None else np.asarray(b_in, dtype=np.float64)
    p, m = len(b_eq), len(b_in)
    if max_iter is None:
        max_iter = 100 + 20 * (n + p + m)

    try:
        L = np.linalg.cholesky(H)
    except LinAlgError as exc:
        raise ValueError("QP Hessian must be positive definite") from exc
    eye = np.eye(n)
    Linv = np.linalg.solve(L, eye)
    Hinv = Linv.T @ Linv

    x = -(Hinv @ g)
    # active constraint ids: 0..p-1 equalities, p..p+m-1 inequalities
    act = _ActiveSet(n, Hinv)
    signs: dict[int, float] = {}  # equality normals may be negated on entry
    u = np.zeros(0)
    feas_tol = 1e-10 * max(1.0, float(np.abs(b_eq).max(initial=0.0)), float(np.abs(b_in).max(initial=0.0)))

    def normal(cid):
        if cid < p:
            return signs[cid] * A_eq[cid], signs[cid] * b_eq[cid]
        return A_in[cid - p], b_in[cid - p]

    def add_constraint(cid, iters):
        nonlocal x, u
        if cid < p:
            s0 = float(A_eq[cid] @ x - b_eq[cid])
            signs[cid] = -1.0 if s0 > 0.0 else 1.0
        nplus, bplus = normal(cid)
        uplus = 0.0
        while True:
            iters[0] += 1
            if iters[0] > max_iter:
                raise QpInfeasible("active-set iteration limit exceeded")
            r, z = act.project(nplus)
            s = float(nplus @ x - bplus)
            if s >= -feas_tol:
                # became satisfied through earlier drops; record if tight
                if uplus > 0.0:
                    act.append(cid, nplus)
                    u = np.append(u, uplus)
                return
            nz = float(nplus @ z)
            t2 = -s / nz if nz > 1e-14 * max(1.0, float(np.abs(nplus).max())) else np.inf
            # dual blocking step over active inequalities only
            t1, k1 = np.inf, -1
            for j, cid_j in enumerate(act.ids):
                if cid_j >= p and r[j] > 1e-14:
                    ratio = u[j] / r[j]
                    if ratio < t1:
                        t1, k1 = ratio, j
            t = min(t1, t2)
            if not np.isfinite(t):
                raise QpInfeasible(f"constraint {cid} cannot be satisfied")
            if np.isfinite(t2) and t == t2:
                x = x + t * z
                if len(u):
                    u = u - t * r
                uplus += t
                act.append(cid, nplus)
                u = np.append(u, uplus)
                return
            # partial step: drop blocking constraint k1
            if np.isfinite(t2):
                x = x + t * z
            u = u - t * r
            uplus += t
            act.pop(k1)
            u = np.delete(u, k1)

    iters = [0]
    if p:
        # batch equality phase: with no inequalities active yet nothing can
        # block, so adding all equalities lands on the equality-constrained
        # minimizer; compute it in one factorization and seed the active set.
        hn_all = Hinv @ A_eq.T  # (n, p)
        B_eq = A_eq @ hn_all
        try:
            lam0 = np.linalg.solve(B_eq, b_eq - A_eq @ x)
        except LinAlgError:
            raise QpInfeasible("equality rows are linearly dependent")
        x = x + hn_all @ lam0
        sign_vec = np.where(lam0 < 0.0, -1.0, 1.0)
        for cid in range(p):
            signs[cid] = sign_vec[cid]
        act.ids = list(range(p))
        act.N = sign_vec[:, None] * A_eq
        act.HinvN = hn_all * sign_vec[None, :]
        act.B = B_eq * np.outer(sign_vec, sign_vec)
        act._refactor()
        u = np.abs(lam0)
        iters[0] += p
    in_active = np.zeros(m, dtype=bool)
    while True:
        in_active[:] = False
        for cid in act.ids:
            if cid >= p:
                in_active[cid - p] = True
        slacks = A_in @ x - b_in if m else np.zeros(0)
        slacks = np.where(in_active, np.inf, slacks)
        worst = int(np.argmin(slacks)) if m else -1
        if worst < 0 or slacks[worst] >= -feas_tol:
            break
        add_constraint(p + worst, iters)

    lam = np.zeros(p)
    mu = np.zeros(m)
    for j, cid in enumerate(act.ids):
        if cid < p:
            lam[cid] = signs[cid] * u[j]
        else:
            mu[cid - p] = u[j]
    return QpSolution(x, lam, mu, act.ids, iters[0])


def qp_step(H, g, eq_jac, eq_res, ineq_jac, ineq_res, bounds=None):
    """One SQP subproblem: step d and multiplier estimates.

    Minimizes 1/2 d'Hd + g'd subject to eq_jac d + eq_res = 0,
    ineq_jac d + ineq_res >= 0 and step bounds (lo, hi) on d.
    """
    n = len(g)
    eq_jac = np.zeros((0, n)) if eq_jac is None else np.asarray(eq_jac, dtype=np.float64)
    eq_res = np.zeros(0) if eq_res is None else np.asarray(eq_res, dtype=np.float64)
    ineq_jac = np.zeros((0, n)) if ineq_jac is None else np.asarray(ineq_jac, dtype=np.float64)
    ineq_res = np.zeros(0) if ineq_res is None else np.asarray(ineq_res, dtype=np.float64)
    rows = [ineq_jac]
    offs = [-ineq_res]
    n_in = len(ineq_res)
    if bounds is not None:
        lo, hi = bounds
        eye = np.eye(n)
        fin_lo = np.isfinite(lo)
        fin_hi = np.isfinite(hi)
        rows.append(eye[fin_lo])
        offs.append(lo[fin_lo])
        rows.append(-eye[fin_hi])
        offs.append(-hi[fin_hi])
    A_in = np.vstack(rows)
    b_in = np.concatenate(offs)
    sol = solve_qp(H, g, eq_jac, -eq_res, A_in, b_in)
    return sol.x, sol.eq_multipliers, sol.ineq_multipliers[:n_in]
