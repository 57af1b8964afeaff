"""Homogeneous self-dual interior-point method for SOC programs.

Solves  min c'x  s.t.  A x = b,  G x + s = h,  s in K  with K a product
of a nonnegative orthant and second-order cones, via the self-dual
embedding (x, y, z, s, tau, kappa) with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step.  Directions come from a sparse LU
factorization of the quasidefinite KKT system with static regularization
and one round of iterative refinement against the unregularized matrix.

Infeasibility and unboundedness are reported through the standard
certificates (tau -> 0 with kappa > 0).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time_limit"
NUMERICAL_LIMIT = "numerical_limit"

_REG = 1e-9          # static KKT regularization
_STEP_FRAC = 0.99    # fraction of the distance to the cone boundary
_MAX_ITER = 100


@dataclass
class ConeLayout:
    """Index bookkeeping for a product cone, with SOC blocks grouped by dim."""

    l: int
    socs: list[int]
    dim: int = 0
    degree: int = 0
    groups: list[tuple[int, np.ndarray]] = field(default_factory=list)
    # groups: (block_dim, index matrix of shape (count, block_dim))

    def __post_init__(self):
        self.dim = self.l + sum(self.socs)
        self.degree = self.l + len(self.socs)
        by_dim: dict[int, list[int]] = {}
        off = self.l
        for q in self.socs:
            by_dim.setdefault(q, []).append(off)
            off += q
        self.groups = []
        for q in sorted(by_dim):
            starts = np.array(by_dim[q], dtype=int)
            idx = starts[:, None] + np.arange(q)[None, :]
            self.groups.append((q, idx))


def cone_e(lay: ConeLayout) -> np.ndarray:
    e = np.zeros(lay.dim)
    e[:lay.l] = 1.0
    for q, idx in lay.groups:
        e[idx[:, 0]] = 1.0
    return e


def min_eig(lay: ConeLayout, v: np.ndarray) -> float:
    m = np.inf
    if lay.l:
        m = min(m, float(v[:lay.l].min()))
    for q, idx in lay.groups:
        V = v[idx]
        eig = V[:, 0] - np.linalg.norm(V[:, 1:], axis=1)
        if eig.size:
            m = min(m, float(eig.min()))
    return m


def shift_into_cone(lay: ConeLayout, v: np.ndarray) -> np.ndarray:
    m = min_eig(lay, v)
    if m <= 1e-10:
        return v + (1.0 - m) * cone_e(lay)
    return v


def jordan_prod(lay: ConeLayout, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.empty(lay.dim)
    out[:lay.l] = u[:lay.l] * v[:lay.l]
    for q, idx in lay.groups:
        U, V = u[idx], v[idx]
        out[idx[:, 0]] = np.einsum("ij,ij->i", U, V)
        out[idx[:, 1:]] = U[:, :1] * V[:, 1:] + V[:, :1] * U[:, 1:]
    return out


def jordan_div(lay: ConeLayout, lmb: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve lmb o q = r for q (lmb strictly interior)."""
    out = np.empty(lay.dim)
    out[:lay.l] = r[:lay.l] / lmb[:lay.l]
    for q, idx in lay.groups:
        L, R = lmb[idx], r[idx]
        det = L[:, 0] ** 2 - np.einsum("ij,ij->i", L[:, 1:], L[:, 1:])
        q0 = (L[:, 0] * R[:, 0] - np.einsum("ij,ij->i", L[:, 1:], R[:, 1:])) / det
        out[idx[:, 0]] = q0
        out[idx[:, 1:]] = (R[:, 1:] - q0[:, None] * L[:, 1:]) / L[:, :1]
    return out


def max_step(lay: ConeLayout, v: np.ndarray, dv: np.ndarray) -> float:
    """Largest alpha with v + alpha*dv in K (v strictly interior)."""
    alpha = np.inf
    if lay.l:
        neg = dv[:lay.l] < 0
        if neg.any():
            alpha = min(alpha, float((-v[:lay.l][neg] / dv[:lay.l][neg]).min()))
    for q, idx in lay.groups:
        V, D = v[idx], dv[idx]
        a = D[:, 0] ** 2 - np.einsum("ij,ij->i", D[:, 1:], D[:, 1:])
        b = V[:, 0] * D[:, 0] - np.einsum("ij,ij->i", V[:, 1:], D[:, 1:])
        c = V[:, 0] ** 2 - np.einsum("ij,ij->i", V[:, 1:], V[:, 1:])
        steps = _first_pos_roots(a, b, np.maximum(c, 0.0))
        if steps.size:
            alpha = min(alpha, float(steps.min()))
    return alpha


def _first_pos_roots(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Per entry, the first root > 0 of a t^2 + 2 b t + c = 0 (inf if none).

    c is assumed nonnegative; the stable two-root form avoids cancellation.
    """
    out = np.full(a.shape, np.inf)
    lin = np.abs(a) < 1e-16
    linneg = lin & (b < -1e-16)
    if linneg.any():
        out[linneg] = np.maximum(c[linneg] / (-2.0 * b[linneg]), 0.0)
    quad = ~lin
    if quad.any():
        disc = b * b - a * c
        ok = quad & (disc >= 0.0)
        sq = np.sqrt(np.where(disc > 0.0, disc, 0.0))
        qq = -(b + np.where(b >= 0.0, sq, -sq))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(ok, qq / np.where(quad, a, 1.0), np.inf)
            r2 = np.where(ok & (np.abs(qq) > 1e-300),
                          c / np.where(np.abs(qq) > 1e-300, qq, 1.0), np.inf)
        r1 = np.where(r1 > 1e-14, r1, np.inf)
        r2 = np.where(r2 > 1e-14, r2, np.inf)
        out = np.where(quad, np.minimum(r1, r2), out)
    return out


class Scaling:
    """Nesterov-Todd scaling point for the current (s, z)."""

    def __init__(self, lay: ConeLayout, s: np.ndarray, z: np.ndarray):
        self.lay = lay
        l = lay.l
        self.w_lin = np.sqrt(s[:l] / z[:l]) if l else np.zeros(0)
        self.lmb = np.empty(lay.dim)
        self.lmb[:l] = np.sqrt(s[:l] * z[:l])
        self.soc = []  # per group: dict of arrays
        for q, idx in lay.groups:
            S, Z = s[idx], z[idx]
            a = np.sqrt(np.maximum(S[:, 0] ** 2 - np.einsum("ij,ij->i", S[:, 1:], S[:, 1:]), 1e-300))
            b = np.sqrt(np.maximum(Z[:, 0] ** 2 - np.einsum("ij,ij->i", Z[:, 1:], Z[:, 1:]), 1e-300))
            st, zt = S / a[:, None], Z / b[:, None]
            gam = np.sqrt(np.maximum(
                (1.0 + np.einsum("ij,ij->i", st, zt)) / 2.0, 1e-150))
            wbar = (st + _J(zt)) / (2.0 * gam[:, None])
            eta = np.sqrt(a / b)
            w = eta[:, None] * wbar
            rho = np.sqrt((w[:, 0] + eta) / 2.0)
            v = np.empty_like(w)
            v[:, 0] = rho
            v[:, 1:] = w[:, 1:] / (2.0 * rho[:, None])
            self.soc.append({"idx": idx, "eta": eta, "w": w, "v": v})
            lam = self._apply_group(v, eta, z[idx])
            self.lmb[idx] = lam

    @staticmethod
    def _apply_group(v, eta, U):
        # W u = 2 v (v'u) - eta J u
        dot = np.einsum("ij,ij->i", v, U)
        return 2.0 * v * dot[:, None] - eta[:, None] * _J(U)

    def W(self, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        l = self.lay.l
        out[:l] = self.w_lin * u[:l]
        for g in self.soc:
            out[g["idx"]] = self._apply_group(g["v"], g["eta"], u[g["idx"]])
        return out

    def Winv(self, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        l = self.lay.l
        out[:l] = u[:l] / self.w_lin
        for g in self.soc:
            v, eta = g["v"], g["eta"]
            U = u[g["idx"]]
            jv = _J(v)
            dot = np.einsum("ij,ij->i", jv, U)
            out[g["idx"]] = (2.0 / eta[:, None] ** 2) * jv * dot[:, None] \
                - _J(U) / eta[:, None]
        return out


def _J(U: np.ndarray) -> np.ndarray:
    out = U.copy()
    out[..., 1:] *= -1.0
    return out


@dataclass
class IPMResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    pres: float
    dres: float
    relgap: float
    message: str = ""


class _KKT:
    """Sparse KKT factorization with static regularization and refinement.

    The sparsity pattern is fixed across iterations, so the COO-to-CSC
    permutation is computed once and later factorizations just scatter fresh
    scaling data into a cached structure.  Regularization is folded into the
    entry values; refinement recovers the unregularized residual as
    M0 x = M x - reg * x.
    """

    def __init__(self, A: sp.csc_matrix, G: sp.csc_matrix, lay: ConeLayout):
        A, G = A.tocoo(), G.tocoo()
        self.lay = lay
        self.p, self.nf = A.shape
        self.m = G.shape[0]
        self.N = self.nf + self.p + self.m
        nf, p = self.nf, self.p
        zoff = nf + p
        rows = [A.row + nf, A.col, G.row + zoff, G.col,
                np.arange(nf), np.arange(nf, zoff)]
        cols = [A.col, A.row + nf, G.col, G.row + zoff,
                np.arange(nf), np.arange(nf, zoff)]
        data = [A.data, A.data, G.data, G.data,
                np.full(nf, _REG), np.full(p, -_REG)]
        # dynamic -W^2 - reg entries: orthant diagonal, then dense SOC blocks
        if lay.l:
            rng = np.arange(lay.l) + zoff
            rows.append(rng)
            cols.append(rng)
        for q, idx in lay.groups:
            shifted = idx + zoff
            rows.append(np.repeat(shifted, q, axis=1).ravel())
            cols.append(np.tile(shifted, (1, q)).ravel())
        self.rows = np.concatenate(rows).astype(np.int32)
        self.cols = np.concatenate(cols).astype(np.int32)
        self.static_data = np.concatenate(data) if data else np.zeros(0)
        self._dyn_len = lay.l + sum(
            idx.shape[0] * q * q for q, idx in lay.groups)
        self.regvec = np.concatenate([
            np.full(nf, _REG), np.full(p, -_REG), np.full(self.m, -_REG)])
        self._perm = None
        self._indices = None
        self._indptr = None
        self.lu = None
        self.M = None

    def _dyn_data(self, scaling: Scaling) -> np.ndarray:
        lay = self.lay
        dyn = np.empty(self._dyn_len)
        pos = lay.l
        if lay.l:
            dyn[:pos] = -(scaling.w_lin ** 2) - _REG
        for g in scaling.soc:
            w, eta = g["w"], g["eta"]
            cnt, q = w.shape
            blocks = -2.0 * w[:, :, None] * w[:, None, :]
            sign = np.ones(q)
            sign[0] = -1.0
            rng = np.arange(q)
            blocks[:, rng, rng] -= eta[:, None] ** 2 * sign + _REG
            dyn[pos:pos + cnt * q * q] = blocks.reshape(-1)
            pos += cnt * q * q
        return dyn

    def factor(self, scaling: Scaling) -> bool:
        full = np.concatenate([self.static_data, self._dyn_data(scaling)])
        if self._perm is None:
            probe = sp.csc_matrix(
                (np.arange(full.size, dtype=float), (self.rows, self.cols)),
                shape=(self.N, self.N))
            if probe.nnz != full.size:
                raise AssertionError("duplicate KKT coordinates")
            self._perm = probe.data.astype(np.int64)
            self._indices = probe.indices
            self._indptr = probe.indptr
        self.M = sp.csc_matrix(
            (full[self._perm], self._indices, self._indptr),
            shape=(self.N, self.N), copy=False)
        try:
            # symmetric-pattern ordering; markedly faster than COLAMD on
            # these quasi-definite systems
            self.lu = spla.splu(self.M, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError:
            return False
        return True

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self.lu.solve(rhs)
        for _ in range(2):
            r = rhs - self.M @ x + self.regvec * x
            nr = np.linalg.norm(r)
            if nr <= 1e-11 * (1.0 + np.linalg.norm(rhs)):
                break
            x = x + self.lu.solve(r)
        return x


def solve_hsd(c, A, b, G, h, dims_l, dims_soc,
              tol_feas: float = 1e-7, tol_gap: float = 1e-7,
              max_iter: int = _MAX_ITER, budget: float | None = None) -> IPMResult:
    """Run the self-dual IPM on a standard-form problem."""
    t0 = time.perf_counter()
    lay = ConeLayout(dims_l, list(dims_soc))
    nf, p, m = c.size, b.size, h.size
    A = sp.csc_matrix(A)
    G = sp.csc_matrix(G)
    kkt = _KKT(A, G, lay)
    e = cone_e(lay)

    nb, nh, nc = np.linalg.norm(b), np.linalg.norm(h), np.linalg.norm(c)

    # initial point from two least-squares style solves with W = I
    ident = Scaling.__new__(Scaling)
    ident.lay = lay
    ident.w_lin = np.ones(lay.l)
    ident.soc = []
    for q, idx in lay.groups:
        cnt = idx.shape[0]
        v = np.zeros((cnt, q))
        v[:, 0] = 1.0
        ident.soc.append({"idx": idx, "eta": np.ones(cnt), "w": v.copy(), "v": v})
    ident.lmb = e.copy()
    if not kkt.factor(ident):
        return IPMResult(NUMERICAL_LIMIT, None, None, 0, np.inf, np.inf, np.inf,
                         "initial KKT factorization failed")
    sol_p = kkt.solve(np.concatenate([np.zeros(nf), b, h]))
    x = sol_p[:nf]
    s = shift_into_cone(lay, h - G @ x)
    sol_d = kkt.solve(np.concatenate([-c, np.zeros(p), np.zeros(m)]))
    y = sol_d[nf:nf + p]
    z = shift_into_cone(lay, sol_d[nf + p:])
    tau, kappa = 1.0, 1.0

    status, msg = NUMERICAL_LIMIT, "iteration limit"
    it = 0
    pres = dres = relgap = np.inf
    for it in range(1, max_iter + 1):
        if budget is not None and time.perf_counter() - t0 > budget:
            status, msg = TIME_LIMIT, "budget exhausted"
            break
        f1 = A.T @ y + G.T @ z + c * tau
        f2 = A @ x - b * tau
        f3 = G @ x + s - h * tau
        f4 = float(c @ x + b @ y + h @ z + kappa)
        gap = float(s @ z)
        mu = (gap + tau * kappa) / (lay.degree + 1)

        pcost = float(c @ x) / tau
        pres = max(np.linalg.norm(f2) / (1 + nb), np.linalg.norm(f3) / (1 + nh)) / tau
        dres = np.linalg.norm(f1) / (1 + nc) / tau
        relgap = (gap / tau ** 2) / max(1.0, abs(pcost))
        if pres <= tol_feas and dres <= tol_feas and relgap <= tol_gap:
            status, msg = OPTIMAL, ""
            break

        # infeasibility certificates; the tau/kappa gate separates genuine
        # divergence (tau -> 0 with kappa positive) from ordinary progress
        hard_gate = tau <= 1e-2 * kappa
        by_hz = float(b @ y + h @ z)
        if by_hz < -1e-300 and hard_gate:
            cert = np.linalg.norm(A.T @ y + G.T @ z) / (-by_hz)
            if cert / max(1.0, nc) <= tol_feas:
                status, msg = INFEASIBLE, "primal infeasibility certificate"
                break
        ctx = float(c @ x)
        if ctx < -1e-300 and hard_gate:
            cert = max(np.linalg.norm(A @ x) / max(1.0, nb),
                       np.linalg.norm(G @ x + s) / max(1.0, nh)) / (-ctx)
            if cert <= tol_feas:
                status, msg = UNBOUNDED, "dual infeasibility certificate"
                break
        if tau <= 1e-11 and kappa <= 1e-11:
            status, msg = NUMERICAL_LIMIT, "tau and kappa collapsed"
            break

        scaling = Scaling(lay, s, z)
        lmb = scaling.lmb
        if not kkt.factor(scaling):
            status, msg = NUMERICAL_LIMIT, "KKT factorization failed"
            break
        rhs_tau_dir = np.concatenate([-c, b, h])
        v_dir = kkt.solve(rhs_tau_dir)
        vx, vy, vz = v_dir[:nf], v_dir[nf:nf + p], v_dir[nf + p:]

        def newton(bx, by_, bz, btau, bs, bkappa):
            bs_sc = jordan_div(lay, lmb, bs)
            rhs = np.concatenate([bx, by_, bz - scaling.W(bs_sc)])
            u = kkt.solve(rhs)
            ux, uy, uz = u[:nf], u[nf:nf + p], u[nf + p:]
            denom = float(c @ vx + b @ vy + h @ vz) - kappa / tau
            if abs(denom) < 1e-300:
                return None
            dtau = (btau - bkappa / tau - float(c @ ux + b @ uy + h @ uz)) / denom
            dx, dy, dz = ux + dtau * vx, uy + dtau * vy, uz + dtau * vz
            ds = scaling.W(bs_sc - scaling.W(dz))
            dkappa = (bkappa - kappa * dtau) / tau
            return dx, dy, dz, dtau, ds, dkappa

        aff = newton(-f1, -f2, -f3, -f4, -jordan_prod(lay, lmb, lmb), -tau * kappa)
        if aff is None:
            status, msg = NUMERICAL_LIMIT, "singular tau pivot"
            break
        adx, ady, adz, adtau, ads, adkappa = aff
        alpha_aff = min(
            max_step(lay, s, ads), max_step(lay, z, adz),
            (-tau / adtau) if adtau < 0 else np.inf,
            (-kappa / adkappa) if adkappa < 0 else np.inf, 1.0)
        sigma = float(np.clip((1.0 - alpha_aff) ** 3, 0.0, 1.0))

        corr = jordan_prod(lay, scaling.Winv(ads), scaling.W(adz))
        bs = -jordan_prod(lay, lmb, lmb) - corr + sigma * mu * e
        bkap = -tau * kappa - adtau * adkappa + sigma * mu
        comb = newton(-(1 - sigma) * f1, -(1 - sigma) * f2, -(1 - sigma) * f3,
                      -(1 - sigma) * f4, bs, bkap)
        if comb is None:
            status, msg = NUMERICAL_LIMIT, "singular tau pivot"
            break
        dx, dy, dz, dtau, ds, dkappa = comb
        alpha = min(
            max_step(lay, s, ds), max_step(lay, z, dz),
            (-tau / dtau) if dtau < 0 else np.inf,
            (-kappa / dkappa) if dkappa < 0 else np.inf)
        alpha = min(1.0, _STEP_FRAC * alpha)
        if alpha <= 1e-13:
            status, msg = NUMERICAL_LIMIT, "step length collapsed"
            break
        x += alpha * dx
        y += alpha * dy
        z += alpha * dz
        s += alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa

    if status == OPTIMAL:
        xs = x / tau
        return IPMResult(OPTIMAL, xs, float(c @ xs), it, pres, dres, relgap)
    if status in (INFEASIBLE, UNBOUNDED):
        return IPMResult(status, None, None, it, pres, dres, relgap, msg)
    # near-feasible fallback: accept modestly looser tolerances rather than fail
    if status == NUMERICAL_LIMIT and tau > 1e-9:
        loose_f, loose_g = 100 * tol_feas, 100 * tol_gap
        if pres <= loose_f and dres <= loose_f and relgap <= loose_g:
            xs = x / tau
            return IPMResult(OPTIMAL, xs, float(c @ xs), it, pres, dres, relgap,
                             "loosened tolerance")
    xbest = x / tau if tau > 1e-9 else None
    obj = float(c @ xbest) if xbest is not None else None
    return IPMResult(status, xbest, obj, it, pres, dres, relgap, msg)
