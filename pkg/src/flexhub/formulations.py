"""Mixed-binary conic formulations of the flexible hub location problem.

Two families are built here.  The compact one (build_f1) carries explicit
transfer variables for every origin-hub-destination-hub quadruple and is
self-contained.  The master problem (build_f2_master) drops the quadruples,
aggregates transfer cost into one variable per ordered hub pair, and prices
those variables with pooled cuts that a branch-and-cut loop supplies.

Both share the same base block: hub indicators y_k, single-allocation
indicators z_ik (z_kk doubles as y_k), dilations r_k in [0, R_k], placed
points x_k constrained to the dilated neighborhood, and the setup objective
f_k y_k + g_k(r_k).  Nodes without any flow still need a serving hub but
contribute no service term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conic import ProgramBuilder, ConicProgram, GE, LE, EQ, BINARY, INF, expr
from .geometry import (
    NeighborhoodSpec, big_m_bounds, big_m_lower_bounds, emit_distance_epigraph,
    emit_membership, nominal_distance_data, norm_eval, power_cone_rep,
)
from .instance import Instance, LINEAR, POWER
from .solution import HubSolution, evaluate_solution


def _lin(idx, coef, const=0.0):
    return expr(zip(idx, coef), const)


@dataclass(frozen=True)
class CutRecord:
    """One pooled transfer cut: ordered hub pair (k, m) and the origin-
    destination pairs that were routed across it when the cut was found."""

    k: int
    m: int
    pairs: tuple   # sorted tuple of (i, j)

    def key(self):
        return (self.k, self.m, self.pairs)

    def weight(self, flow: np.ndarray) -> float:
        return float(sum(flow[i, j] for i, j in self.pairs))


@dataclass
class VariableCatalog:
    """Index map from model entities to program variables."""

    y: list = field(default_factory=list)          # k -> idx
    z: dict = field(default_factory=dict)          # (i, k) -> idx
    r: list = field(default_factory=list)          # k -> idx
    x: list = field(default_factory=list)          # k -> [idx per coord]
    dC: dict = field(default_factory=dict)         # (i, k) -> idx
    dD: dict = field(default_factory=dict)         # (i, k) -> idx (alias of dC when merged)
    etaC: dict = field(default_factory=dict)       # (i, k) -> idx
    etaD: dict = field(default_factory=dict)
    dH: dict = field(default_factory=dict)         # (k, m) with k < m -> idx
    nu: dict = field(default_factory=dict)         # (i, k, j, m) -> idx
    mu: dict = field(default_factory=dict)         # ordered (k, m) -> idx
    theta: dict = field(default_factory=dict)      # (i, k, m) -> idx
    merged_service: bool = False
    DC: np.ndarray = None
    DD: np.ndarray = None
    DH: np.ndarray = None
    LC: np.ndarray = None
    LD: np.ndarray = None
    LH: np.ndarray = None
    dC0: np.ndarray = None
    dD0: np.ndarray = None
    dH0: np.ndarray = None
    kC: np.ndarray = None
    kD: np.ndarray = None
    kH: np.ndarray = None
    slack_factor: float = 1.0


def build_common(inst: Instance, b: ProgramBuilder, cat: VariableCatalog) -> None:
    """Selection, allocation, geometry, and setup cost; shared by every model."""
    n, dim = inst.n, inst.dim
    for k in range(n):
        cat.y.append(b.add_var(f"y[{k}]", kind=BINARY))
    for i in range(n):
        for k in range(n):
            if i == k:
                cat.z[(i, k)] = cat.y[k]
                b.alias_var(f"z[{i},{k}]", cat.y[k])
            else:
                cat.z[(i, k)] = b.add_var(f"z[{i},{k}]", kind=BINARY)
    for k in range(n):
        Rk = float(inst.R[k])
        cat.r.append(b.add_var(f"r[{k}]", lb=0.0, ub=Rk))
        if Rk == 0.0:
            # the neighborhood degenerates to the site itself
            coords = [b.add_var(f"x[{k},{j}]", lb=inst.points[k, j],
                                ub=inst.points[k, j]) for j in range(dim)]
            cat.x.append(coords)
            continue
        coords = [b.add_var(f"x[{k},{j}]", lb=inst.points[k, j] - Rk,
                            ub=inst.points[k, j] + Rk) for j in range(dim)]
        cat.x.append(coords)
        nb = NeighborhoodSpec(center=inst.points[k], gauge=inst.gauges[k],
                              radius_cap=Rk)
        emit_membership(b, nb, coords, cat.r[k], tag=f"member[{k}]")
        # a closed site has no neighborhood to dilate
        b.add_row(_lin([cat.r[k], cat.y[k]], [1.0, -Rk]), LE, 0.0,
                  tag=f"rvub[{k}]")

    for i in range(n):
        idx = [cat.z[(i, k)] for k in range(n)]
        b.add_row(_lin(idx, [1.0] * n), EQ, 1.0, tag=f"assign[{i}]")
    for i in range(n):
        for k in range(n):
            if i != k:
                b.add_row(_lin([cat.y[k], cat.z[(i, k)]], [1.0, -1.0]),
                          GE, 0.0, tag=f"link[{i},{k}]")

    for k in range(n):
        if inst.fixed_cost[k]:
            b.add_obj(cat.y[k], float(inst.fixed_cost[k]))
        Rk = float(inst.R[k])
        lam = float(inst.setup.Lambda[k])
        if Rk == 0.0 or lam == 0.0:
            continue
        if inst.setup.kind == LINEAR or inst.setup.degree == 1:
            b.add_obj(cat.r[k], lam)
        else:
            d = inst.setup.degree
            g = b.add_var(f"gpow[{k}]", lb=0.0, ub=Rk ** d)
            power_cone_rep(b, d, cat.r[k], g, tag=f"pow[{k}]")
            b.add_obj(g, lam)


def _service_blocks(inst: Instance, b: ProgramBuilder, cat: VariableCatalog) -> None:
    """Distance epigraphs plus activation-gated service costs.

    eta_ik >= dC_ik - M(1 - z_ik) prices collection only on the serving hub.
    Two companion floors keep fractional allocations priced without touching
    integer points: eta_ik >= L_ik z_ik with L a worst-case distance floor,
    and the dilation-coupled eta_ik >= dC0_ik z_ik - kC_k r_k, which charges
    the full nominal distance whenever the hub stays near its site.  When the
    collection and distribution norms coincide the two blocks fold into one
    with weight O_i + D_i.
    """
    n = inst.n
    merged = inst.norm_c == inst.norm_d
    cat.merged_service = merged

    def floors(ev, zi, k, L, d0, kap, tag):
        if L > 0.0:
            b.add_row(_lin([ev, zi], [1.0, -L]), GE, 0.0, tag=f"vlb{tag}")
        if d0 > 0.0 and float(inst.R[k]) > 0.0:
            b.add_row(_lin([ev, cat.r[k], zi], [1.0, kap, -d0]), GE, 0.0,
                      tag=f"vlbr{tag}")

    for i in range(n):
        wc, wd = float(inst.O[i]), float(inst.D[i])
        if wc == 0.0 and wd == 0.0:
            continue
        for k in range(n):
            zi = cat.z[(i, k)]
            if merged:
                M = float(cat.DC[i, k])
                dv = b.add_var(f"dC[{i},{k}]", lb=0.0, ub=M)
                emit_distance_epigraph(b, inst.norm_c, inst.points[i],
                                       cat.x[k], dv, tag=f"depi:c[{i},{k}]")
                ev = b.add_var(f"eta[{i},{k}]", lb=0.0, ub=M)
                b.add_row(_lin([ev, dv, zi], [1.0, -1.0, -M]), GE, -M,
                          tag=f"serv[{i},{k}]")
                floors(ev, zi, k, float(cat.LC[i, k]), float(cat.dC0[i, k]),
                       float(cat.kC[k]), f"[{i},{k}]")
                b.add_obj(ev, wc + wd)
                cat.dC[(i, k)] = dv
                cat.dD[(i, k)] = dv
                cat.etaC[(i, k)] = ev
                continue
            if wc > 0.0:
                M = float(cat.DC[i, k])
                dv = b.add_var(f"dC[{i},{k}]", lb=0.0, ub=M)
                emit_distance_epigraph(b, inst.norm_c, inst.points[i],
                                       cat.x[k], dv, tag=f"depi:c[{i},{k}]")
                ev = b.add_var(f"etaC[{i},{k}]", lb=0.0, ub=M)
                b.add_row(_lin([ev, dv, zi], [1.0, -1.0, -M]), GE, -M,
                          tag=f"servC[{i},{k}]")
                floors(ev, zi, k, float(cat.LC[i, k]), float(cat.dC0[i, k]),
                       float(cat.kC[k]), f"C[{i},{k}]")
                b.add_obj(ev, wc)
                cat.dC[(i, k)] = dv
                cat.etaC[(i, k)] = ev
            if wd > 0.0:
                M = float(cat.DD[i, k])
                dv = b.add_var(f"dD[{i},{k}]", lb=0.0, ub=M)
                emit_distance_epigraph(b, inst.norm_d, inst.points[i],
                                       cat.x[k], dv, tag=f"depi:d[{i},{k}]")
                ev = b.add_var(f"etaD[{i},{k}]", lb=0.0, ub=M)
                b.add_row(_lin([ev, dv, zi], [1.0, -1.0, -M]), GE, -M,
                          tag=f"servD[{i},{k}]")
                floors(ev, zi, k, float(cat.LD[i, k]), float(cat.dD0[i, k]),
                       float(cat.kD[k]), f"D[{i},{k}]")
                b.add_obj(ev, wd)
                cat.dD[(i, k)] = dv
                cat.etaD[(i, k)] = ev


def _ensure_dh(inst: Instance, b: ProgramBuilder, cat: VariableCatalog,
               k: int, m: int) -> int:
    """Transfer distance variable for the unordered pair, with its epigraph."""
    lo, hi = (k, m) if k < m else (m, k)
    got = cat.dH.get((lo, hi))
    if got is not None:
        return got
    M = float(cat.DH[lo, hi])
    dv = b.add_var(f"dH[{lo},{hi}]", lb=0.0, ub=M)
    emit_distance_epigraph(b, inst.norm_h, cat.x[lo], cat.x[hi], dv,
                           tag=f"depi:h[{lo},{hi}]", scale=inst.alpha)
    cat.dH[(lo, hi)] = dv
    return dv


def _flow_pairs(inst: Instance):
    for i in range(inst.n):
        for j in range(inst.n):
            if i != j and inst.flow[i, j] > 0.0:
                yield i, j, float(inst.flow[i, j])


def build_f1(inst: Instance, *, slack_factor: float = 1.0,
             split_nu: bool = False) -> tuple[ConicProgram, VariableCatalog]:
    """Compact formulation with per-quadruple transfer variables.

    nu_ikjm bounds the discounted transfer distance when i sits at hub k and
    j at hub m; a two-sided big-M switch keeps it free otherwise.  With
    split_nu the switch is chained through a per-(i,k,m) intermediate, which
    trades more variables for sparser rows; both variants agree at integer
    points.
    """
    b = ProgramBuilder()
    cat = VariableCatalog(slack_factor=slack_factor)
    cat.DC, cat.DD, cat.DH = big_m_bounds(inst, slack_factor)
    cat.LC, cat.LD, cat.LH = big_m_lower_bounds(inst)
    (cat.dC0, cat.dD0, cat.dH0,
     cat.kC, cat.kD, cat.kH) = nominal_distance_data(inst)
    build_common(inst, b, cat)
    _service_blocks(inst, b, cat)

    n = inst.n
    for k in range(n):
        for m in range(k + 1, n):
            _ensure_dh(inst, b, cat, k, m)

    t_mid: dict = {}
    for i, j, w in _flow_pairs(inst):
        for k in range(n):
            for m in range(n):
                if k == m:
                    continue
                dh = cat.dH[(k, m) if k < m else (m, k)]
                M = float(cat.DH[min(k, m), max(k, m)])
                L = float(cat.LH[min(k, m), max(k, m)])
                nv = b.add_var(f"nu[{i},{k},{j},{m}]", lb=0.0, ub=M)
                cat.nu[(i, k, j, m)] = nv
                zik, zjm = cat.z[(i, k)], cat.z[(j, m)]
                if not split_nu:
                    b.add_row(_lin([nv, dh, zik, zjm], [1.0, -1.0, -M, -M]),
                              GE, -2.0 * M, tag=f"trans[{i},{k},{j},{m}]")
                else:
                    tk = t_mid.get((i, k, m))
                    if tk is None:
                        tk = b.add_var(f"tnu[{i},{k},{m}]", lb=0.0, ub=M)
                        b.add_row(_lin([tk, dh, zik], [1.0, -1.0, -M]),
                                  GE, -M, tag=f"trans1[{i},{k},{m}]")
                        t_mid[(i, k, m)] = tk
                    b.add_row(_lin([nv, tk, zjm], [1.0, -1.0, -M]),
                              GE, -M, tag=f"trans2[{i},{k},{j},{m}]")
                if L > 0.0:
                    b.add_row(_lin([nv, zik, zjm], [1.0, -L, -L]), GE, -L,
                              tag=f"vlbT[{i},{k},{j},{m}]")
                d0 = inst.alpha * float(cat.dH0[k, m])
                if d0 > 0.0 and (inst.R[k] > 0.0 or inst.R[m] > 0.0):
                    ak = inst.alpha * float(cat.kH[k])
                    am = inst.alpha * float(cat.kH[m])
                    b.add_row(_lin([nv, cat.r[k], cat.r[m], zik, zjm],
                                   [1.0, ak, am, -d0, -d0]), GE, -d0,
                              tag=f"vlbTr[{i},{k},{j},{m}]")
                b.add_obj(nv, w)
    return b.build(), cat


def build_f1_split_nu(inst: Instance, *, slack_factor: float = 1.0):
    return build_f1(inst, slack_factor=slack_factor, split_nu=True)


def build_f2_master(inst: Instance, pool=(), *, slack_factor: float = 1.0
                    ) -> tuple[ConicProgram, VariableCatalog]:
    """Relaxed master with aggregated transfer variables mu_km.

    Without cuts the mu variables sit at zero and the master underestimates
    transfer cost.  Each pooled cut prices one ordered pair against the
    origin-destination set it was separated from; the activation variables
    theta it needs are materialized on first reference, so an empty pool
    adds no conic machinery at all.
    """
    b = ProgramBuilder()
    cat = VariableCatalog(slack_factor=slack_factor)
    cat.DC, cat.DD, cat.DH = big_m_bounds(inst, slack_factor)
    cat.LC, cat.LD, cat.LH = big_m_lower_bounds(inst)
    (cat.dC0, cat.dD0, cat.dH0,
     cat.kC, cat.kD, cat.kH) = nominal_distance_data(inst)
    build_common(inst, b, cat)
    _service_blocks(inst, b, cat)

    n = inst.n
    for k in range(n):
        for m in range(n):
            if k != m:
                v = b.add_var(f"mu[{k},{m}]", lb=0.0, ub=INF)
                cat.mu[(k, m)] = v
                b.add_obj(v, 1.0)

    def theta_for(i: int, k: int, m: int) -> int:
        got = cat.theta.get((i, k, m))
        if got is not None:
            return got
        dh = _ensure_dh(inst, b, cat, k, m)
        M = float(cat.DH[min(k, m), max(k, m)])
        L = float(cat.LH[min(k, m), max(k, m)])
        tv = b.add_var(f"theta[{i},{k},{m}]", lb=0.0, ub=M)
        b.add_row(_lin([tv, dh, cat.z[(i, k)]], [1.0, -1.0, -M]), GE, -M,
                  tag=f"act[{i},{k},{m}]")
        if L > 0.0:
            b.add_row(_lin([tv, cat.z[(i, k)]], [1.0, -L]), GE, 0.0,
                      tag=f"vlbA[{i},{k},{m}]")
        d0 = inst.alpha * float(cat.dH0[k, m])
        if d0 > 0.0 and (inst.R[k] > 0.0 or inst.R[m] > 0.0):
            b.add_row(_lin([tv, cat.r[k], cat.r[m], cat.z[(i, k)]],
                           [1.0, inst.alpha * float(cat.kH[k]),
                            inst.alpha * float(cat.kH[m]), -d0]), GE, 0.0,
                      tag=f"vlbAr[{i},{k},{m}]")
        cat.theta[(i, k, m)] = tv
        return tv

    for ci, cut in enumerate(pool):
        k, m = cut.k, cut.m
        dh = _ensure_dh(inst, b, cat, k, m)
        out_w: dict = {}
        in_w: dict = {}
        total = 0.0
        for (i, j) in cut.pairs:
            w = float(inst.flow[i, j])
            out_w[i] = out_w.get(i, 0.0) + w
            in_w[j] = in_w.get(j, 0.0) + w
            total += w
        idx = [cat.mu[(k, m)], dh]
        coef = [1.0, total]
        for i, w in out_w.items():
            idx.append(theta_for(i, k, m))
            coef.append(-w)
        for j, w in in_w.items():
            idx.append(theta_for(j, m, k))
            coef.append(-w)
        b.add_row(_lin(idx, coef), GE, 0.0, tag=f"cut[{ci}:{k},{m}]")
    return b.build(), cat


def build_fixed_assignment(inst: Instance, assignment, open_hubs=None
                           ) -> tuple[ConicProgram, VariableCatalog]:
    """Continuous pricing problem for a frozen allocation.

    Only geometry remains: place each used hub in its neighborhood, pick the
    dilations, and minimize exact (big-M free) service plus transfer cost.
    """
    assignment = [int(a) for a in assignment]
    hubs = sorted(set(assignment) | set(int(k) for k in (open_hubs or [])))
    b = ProgramBuilder()
    cat = VariableCatalog()
    dim = inst.dim
    xv: dict = {}
    rv: dict = {}
    for k in hubs:
        Rk = float(inst.R[k])
        rv[k] = b.add_var(f"r[{k}]", lb=0.0, ub=Rk)
        if Rk == 0.0:
            xv[k] = [b.add_var(f"x[{k},{j}]", lb=inst.points[k, j],
                               ub=inst.points[k, j]) for j in range(dim)]
        else:
            xv[k] = [b.add_var(f"x[{k},{j}]", lb=inst.points[k, j] - Rk,
                               ub=inst.points[k, j] + Rk) for j in range(dim)]
            nb = NeighborhoodSpec(center=inst.points[k], gauge=inst.gauges[k],
                                  radius_cap=Rk)
            emit_membership(b, nb, xv[k], rv[k], tag=f"member[{k}]")
        b.add_obj_const(float(inst.fixed_cost[k]))
        lam = float(inst.setup.Lambda[k])
        if Rk > 0.0 and lam > 0.0:
            if inst.setup.kind == LINEAR or inst.setup.degree == 1:
                b.add_obj(rv[k], lam)
            else:
                d = inst.setup.degree
                g = b.add_var(f"gpow[{k}]", lb=0.0, ub=Rk ** d)
                power_cone_rep(b, d, rv[k], g, tag=f"pow[{k}]")
                b.add_obj(g, lam)

    merged = inst.norm_c == inst.norm_d
    for i in range(inst.n):
        k = assignment[i]
        wc, wd = float(inst.O[i]), float(inst.D[i])
        if merged and wc + wd > 0.0:
            dv = b.add_var(f"dC[{i}]", lb=0.0, ub=INF)
            emit_distance_epigraph(b, inst.norm_c, inst.points[i], xv[k], dv,
                                   tag=f"depi:c[{i}]")
            b.add_obj(dv, wc + wd)
            cat.dC[(i, k)] = dv
        elif not merged:
            if wc > 0.0:
                dv = b.add_var(f"dC[{i}]", lb=0.0, ub=INF)
                emit_distance_epigraph(b, inst.norm_c, inst.points[i], xv[k],
                                       dv, tag=f"depi:c[{i}]")
                b.add_obj(dv, wc)
                cat.dC[(i, k)] = dv
            if wd > 0.0:
                dv = b.add_var(f"dD[{i}]", lb=0.0, ub=INF)
                emit_distance_epigraph(b, inst.norm_d, inst.points[i], xv[k],
                                       dv, tag=f"depi:d[{i}]")
                b.add_obj(dv, wd)
                cat.dD[(i, k)] = dv

    W: dict = {}
    for i, j, w in _flow_pairs(inst):
        k, m = assignment[i], assignment[j]
        if k != m:
            lo, hi = (k, m) if k < m else (m, k)
            W[(lo, hi)] = W.get((lo, hi), 0.0) + w
    for (lo, hi), w in sorted(W.items()):
        dv = b.add_var(f"dH[{lo},{hi}]", lb=0.0, ub=INF)
        emit_distance_epigraph(b, inst.norm_h, xv[lo], xv[hi], dv,
                               tag=f"depi:h[{lo},{hi}]", scale=inst.alpha)
        b.add_obj(dv, w)
        cat.dH[(lo, hi)] = dv

    cat.r = rv
    cat.x = xv
    return b.build(), cat


# -- reading solutions out of relaxation vectors ------------------------------

def integral_assignment(inst: Instance, cat: VariableCatalog, xvec,
                        tol: float = 1e-6):
    """The allocation encoded by an integral z, or None if any z is fractional."""
    out = []
    for i in range(inst.n):
        best_k, best_v = -1, -1.0
        for k in range(inst.n):
            v = xvec[cat.z[(i, k)]]
            if v > best_v:
                best_k, best_v = k, v
            if tol < v < 1.0 - tol:
                return None
        if best_v < 1.0 - tol:
            return None
        out.append(best_k)
    return out


def fractional_entries(inst: Instance, cat: VariableCatalog, xvec,
                       tol: float = 1e-6):
    """All (i, k, value) with z strictly between its bounds."""
    out = []
    for (i, k), idx in cat.z.items():
        v = float(xvec[idx])
        if tol < v < 1.0 - tol:
            out.append((i, k, v))
    return out


def solution_from_vector(inst: Instance, cat: VariableCatalog, xvec,
                         meta=None) -> HubSolution:
    """Decode an integral relaxation point and re-price it from scratch."""
    assignment = integral_assignment(inst, cat, xvec, tol=1e-4)
    if assignment is None:
        raise ValueError("relaxation point is not integral")
    hubs = sorted(set(assignment))
    xs = {k: np.array([xvec[j] for j in cat.x[k]]) for k in hubs}
    rs = {}
    for k in hubs:
        # the cheapest dilation covering the placed point; cap violations are
        # then genuine and land in the referee's report
        g = norm_eval(inst.gauges[k], xs[k] - inst.points[k])
        rs[k] = max(0.0, float(xvec[cat.r[k]]), g)
    return evaluate_solution(inst, assignment, xs, rs, meta=meta)
