"""Compilation of a ConicProgram to solver standard form.

Standard form:  minimize c'x  subject to  A x = b,  G x + s = h,
s in K = R^l_+ x SOC(q_1) x ... x SOC(q_k), x free.

Fixed variables (explicit fixings, collapsed bounds, singleton equality
rows) are eliminated by substitution before assembly, which keeps the
remaining cone interior nonempty for the degenerate instances we care
about (pinned hub positions, fixed binaries at tree nodes).  Rotated SOC
atoms are mapped to plain SOC blocks at compile time via
(s, t, u) in RSOC  <=>  ((s+t)/sqrt2, (s-t)/sqrt2, u) in SOC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .program import (
    ConicProgram, LINEAR_ROW, SOC_BLOCK, ROTATED_SOC_BLOCK, LE, GE, EQ,
)

_SENSE_CODE = {LE: 0, GE: 1, EQ: 2}
_SQ2 = math.sqrt(2.0)


@dataclass
class CompiledProgram:
    """Row/cone data of a program in matrix form (pre-fixing)."""

    n: int
    rows: sp.csr_matrix          # R x n, one row per linear atom
    row_sense: np.ndarray        # int8 codes
    row_rhs: np.ndarray          # rhs minus expr constant
    row_tags: list[str]
    cone_stack: sp.csr_matrix    # all cone rows stacked, SOC form
    cone_offsets: np.ndarray     # row offsets per cone, len ncones+1
    cone_consts: np.ndarray      # constants per stacked row
    cone_tags: list[str]
    lb: np.ndarray
    ub: np.ndarray
    obj: np.ndarray
    obj_const: float

    @property
    def n_cones(self) -> int:
        return self.cone_offsets.size - 1


def compile_program(prog: ConicProgram) -> CompiledProgram:
    cached = getattr(prog, "_compiled", None)
    if cached is not None:
        return cached
    n = prog.n_vars
    r_rows, r_cols, r_data = [], [], []
    sense, rhs, tags = [], [], []
    c_rows, c_cols, c_data, c_consts = [], [], [], []
    cone_offsets = [0]
    cone_tags = []
    nrow = 0
    crow = 0
    for a in prog.atoms:
        if a.kind == LINEAR_ROW:
            e = a.exprs[0]
            r_rows.extend([nrow] * len(e.idx))
            r_cols.extend(e.idx)
            r_data.extend(e.coef)
            sense.append(_SENSE_CODE[a.sense])
            rhs.append(a.rhs - e.const)
            tags.append(a.tag)
            nrow += 1
        else:
            if a.kind == ROTATED_SOC_BLOCK:
                s_e, t_e, rest = a.exprs[0], a.exprs[1], a.exprs[2:]
                # map to plain SOC
                top = _combine(s_e, t_e, 1 / _SQ2, 1 / _SQ2)
                second = _combine(s_e, t_e, 1 / _SQ2, -1 / _SQ2)
                exprs = (top, second, *rest)
            else:
                exprs = a.exprs
            for e in exprs:
                c_rows.extend([crow] * len(e.idx))
                c_cols.extend(e.idx)
                c_data.extend(e.coef)
                c_consts.append(e.const)
                crow += 1
            cone_offsets.append(crow)
            cone_tags.append(a.tag)
    rows = sp.csr_matrix((r_data, (r_rows, r_cols)), shape=(nrow, n))
    stack = sp.csr_matrix((c_data, (c_rows, c_cols)), shape=(crow, n))
    compiled = CompiledProgram(
        n=n, rows=rows,
        row_sense=np.array(sense, dtype=np.int8),
        row_rhs=np.array(rhs, dtype=float),
        row_tags=tags,
        cone_stack=stack,
        cone_offsets=np.array(cone_offsets, dtype=np.int64),
        cone_consts=np.array(c_consts, dtype=float),
        cone_tags=cone_tags,
        lb=prog.lb.copy(), ub=prog.ub.copy(),
        obj=prog.obj.copy(), obj_const=prog.obj_const,
    )
    prog._compiled = compiled
    return compiled


def primal_violation(prog: ConicProgram, x: np.ndarray) -> float:
    """Worst scaled constraint violation of a full-length point (vectorized).

    Used as a fast acceptance gate after each relaxation solve; the atom-level
    checker in verify.py remains the authoritative (and independent) referee.
    """
    cp = compile_program(prog)
    worst = 0.0
    fin = np.isfinite(cp.lb)
    if fin.any():
        worst = max(worst, float(
            ((cp.lb[fin] - x[fin]) / (1.0 + np.abs(cp.lb[fin]))).max()))
    fin = np.isfinite(cp.ub)
    if fin.any():
        worst = max(worst, float(
            ((x[fin] - cp.ub[fin]) / (1.0 + np.abs(cp.ub[fin]))).max()))
    if cp.rows.shape[0]:
        r = cp.rows @ x
        scale = 1.0 + np.abs(cp.row_rhs)
        res = (r - cp.row_rhs) / scale
        s = cp.row_sense
        le = np.where(s != _SENSE_CODE[GE], res, -np.inf)
        ge = np.where(s != _SENSE_CODE[LE], -res, -np.inf)
        worst = max(worst, float(np.maximum(le, ge).max()))
    if cp.n_cones:
        vals = cp.cone_stack @ x + cp.cone_consts
        heads = cp.cone_offsets[:-1]
        t = vals[heads]
        ss = np.add.reduceat(vals * vals, heads) - t * t
        unorm = np.sqrt(np.maximum(ss, 0.0))
        worst = max(worst, float(((unorm - t) / (1.0 + np.abs(t))).max()))
    return worst


def _combine(e1, e2, c1: float, c2: float):
    from .program import expr
    terms = list(zip(e1.idx, (c1 * c for c in e1.coef)))
    terms += list(zip(e2.idx, (c2 * c for c in e2.coef)))
    return expr(terms, c1 * e1.const + c2 * e2.const)


@dataclass
class StandardForm:
    """Eliminated, matrix-form program plus the bookkeeping to undo it."""

    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    G: sp.csc_matrix
    h: np.ndarray
    dims_l: int
    dims_soc: list[int]
    free_idx: np.ndarray         # original indices of free variables
    fixed_vals: np.ndarray       # full-length; NaN where free
    obj_const: float
    infeasible: str | None = None    # set when presolve proves infeasibility
    conflict: str | None = None      # set on inconsistent fixings

    def lift(self, x_free: np.ndarray) -> np.ndarray:
        full = self.fixed_vals.copy()
        full[self.free_idx] = x_free
        return full


def presolve(prog: ConicProgram, fixings: dict | None = None,
             feas_eps: float = 1e-8) -> StandardForm:
    """Apply fixings, propagate, and assemble standard form.

    ``fixings`` maps variable index or tag to a value.  Values must lie
    inside the variable's bounds (ValueError otherwise).
    """
    cp = compile_program(prog)
    n = cp.n
    fixed_vals = np.full(n, np.nan)

    if fixings:
        for key, val in fixings.items():
            i = prog.tag_to_idx[key] if isinstance(key, str) else int(key)
            v = float(val)
            if v < cp.lb[i] - 1e-9 or v > cp.ub[i] + 1e-9:
                raise ValueError(
                    f"fixing {prog.var_tags[i]}={v} outside bounds "
                    f"[{cp.lb[i]}, {cp.ub[i]}]")
            if not np.isnan(fixed_vals[i]) and abs(fixed_vals[i] - v) > 1e-9:
                return _conflict(cp, f"conflicting fixings for {prog.var_tags[i]}")
            fixed_vals[i] = min(max(v, cp.lb[i]), cp.ub[i])

    collapsed = (cp.ub - cp.lb) <= 1e-12
    pin = collapsed & np.isnan(fixed_vals)
    fixed_vals[pin] = 0.5 * (cp.lb[pin] + cp.ub[pin])

    # propagate singleton equality rows to a fixpoint
    eq_mask = cp.row_sense == _SENSE_CODE[EQ]
    pattern = cp.rows.copy()
    pattern.data = np.ones_like(pattern.data)
    for _ in range(50):
        free_mask = np.isnan(fixed_vals)
        unfixed_per_row = pattern @ free_mask.astype(float)
        cand = np.flatnonzero(eq_mask & (np.abs(unfixed_per_row - 1.0) < 0.5))
        if cand.size == 0:
            break
        fv = np.where(free_mask, 0.0, fixed_vals)
        contrib = cp.rows @ fv
        changed = False
        for r in cand:
            lo, hi = cp.rows.indptr[r], cp.rows.indptr[r + 1]
            cols = cp.rows.indices[lo:hi]
            coefs = cp.rows.data[lo:hi]
            free_here = [(j, co) for j, co in zip(cols, coefs) if free_mask[j]]
            if len(free_here) != 1:
                continue
            j, co = free_here[0]
            if abs(co) < 1e-14:
                continue
            val = (cp.row_rhs[r] - (contrib[r])) / co
            if val < cp.lb[j] - feas_eps * (1 + abs(val)) or \
               val > cp.ub[j] + feas_eps * (1 + abs(val)):
                return _infeasible(cp, fixed_vals,
                                   f"propagation drives {prog.var_tags[j]} out of bounds")
            fixed_vals[j] = min(max(val, cp.lb[j]), cp.ub[j])
            free_mask[j] = False
            changed = True
        if not changed:
            break

    free_mask = np.isnan(fixed_vals)
    free_idx = np.flatnonzero(free_mask)
    fv = np.where(free_mask, 0.0, fixed_vals)

    # linear rows: split by remaining support
    contrib = cp.rows @ fv
    unfixed_per_row = pattern @ free_mask.astype(float)
    eff_rhs = cp.row_rhs - contrib
    closed = unfixed_per_row < 0.5
    scale = 1.0 + np.abs(cp.row_rhs)
    for r in np.flatnonzero(closed):
        v = eff_rhs[r]
        s = cp.row_sense[r]
        bad = (s == _SENSE_CODE[EQ] and abs(v) > feas_eps * scale[r]) or \
              (s == _SENSE_CODE[LE] and v < -feas_eps * scale[r]) or \
              (s == _SENSE_CODE[GE] and v > feas_eps * scale[r])
        if bad:
            return _infeasible(cp, fixed_vals,
                               f"row {cp.row_tags[r] or r} violated after fixing")

    sub = cp.rows[:, free_idx].tocsr()
    open_rows = ~closed

    eq_rows = np.flatnonzero(open_rows & eq_mask)
    le_rows = np.flatnonzero(open_rows & (cp.row_sense == _SENSE_CODE[LE]))
    ge_rows = np.flatnonzero(open_rows & (cp.row_sense == _SENSE_CODE[GE]))

    A_parts = [sub[eq_rows]]
    b_parts = [eff_rhs[eq_rows]]

    nf = free_idx.size
    g_parts, h_parts = [], []
    # bound rows for free variables
    lbf, ubf = cp.lb[free_idx], cp.ub[free_idx]
    lb_rows = np.flatnonzero(np.isfinite(lbf))
    ub_rows = np.flatnonzero(np.isfinite(ubf))
    if lb_rows.size:
        g_parts.append(sp.csr_matrix(
            (-np.ones(lb_rows.size), (np.arange(lb_rows.size), lb_rows)),
            shape=(lb_rows.size, nf)))
        h_parts.append(-lbf[lb_rows])
    if ub_rows.size:
        g_parts.append(sp.csr_matrix(
            (np.ones(ub_rows.size), (np.arange(ub_rows.size), ub_rows)),
            shape=(ub_rows.size, nf)))
        h_parts.append(ubf[ub_rows])
    if le_rows.size:
        g_parts.append(sub[le_rows])
        h_parts.append(eff_rhs[le_rows])
    if ge_rows.size:
        g_parts.append(-sub[ge_rows])
        h_parts.append(-eff_rhs[ge_rows])

    # cones: slice the whole stack once, classify per block
    soc_G, soc_h, dims_soc = [], [], []
    if cp.n_cones:
        sfree = cp.cone_stack[:, free_idx].tocsr()
        cvals = cp.cone_stack @ fv + cp.cone_consts
        nnz_all = np.diff(sfree.indptr)
        off = cp.cone_offsets
        soc_sel: list[np.ndarray] = []
        lin_head_rows: list[int] = []
        lin_head_h: list[float] = []
        eq_member_rows: list[int] = []
        eq_member_b: list[float] = []
        for ci in range(cp.n_cones):
            lo, hi = off[ci], off[ci + 1]
            nnz_per = nnz_all[lo:hi]
            vals = cvals[lo:hi]
            if not nnz_per.any():
                # fully constant block
                if vals[0] < np.linalg.norm(vals[1:]) - feas_eps * (1 + abs(vals[0])):
                    return _infeasible(
                        cp, fixed_vals,
                        f"cone {cp.cone_tags[ci] or '?'} violated after fixing")
                continue
            if nnz_per[0] == 0 and abs(vals[0]) <= feas_eps:
                # t pinned to ~0: members must vanish
                for j in range(1, hi - lo):
                    if nnz_per[j]:
                        eq_member_rows.append(lo + j)
                        eq_member_b.append(-vals[j])
                    elif abs(vals[j]) > feas_eps:
                        return _infeasible(
                            cp, fixed_vals,
                            f"cone {cp.cone_tags[ci] or '?'} forces nonzero member to 0")
                continue
            if not nnz_per[1:].any():
                # all members constant: linear row t >= ||u||
                lin_head_rows.append(lo)
                lin_head_h.append(vals[0] - float(np.linalg.norm(vals[1:])))
                continue
            soc_sel.append(np.arange(lo, hi))
            dims_soc.append(int(hi - lo))

        if eq_member_rows:
            A_parts.append(sfree[eq_member_rows])
            b_parts.append(np.array(eq_member_b, dtype=float))
        if lin_head_rows:
            g_parts.append(-sfree[lin_head_rows])
            h_parts.append(np.array(lin_head_h, dtype=float))
        if soc_sel:
            keep = np.concatenate(soc_sel)
            soc_G.append(-sfree[keep])
            soc_h.append(cvals[keep])

    A = sp.vstack(A_parts, format="csc") if A_parts else sp.csc_matrix((0, nf))
    b = np.concatenate(b_parts) if b_parts else np.zeros(0)
    dims_l = sum(g.shape[0] for g in g_parts)
    if dims_l == 0 and not soc_G:
        # avoid an empty cone: add a vacuous slack row 0 <= 1
        g_parts.append(sp.csr_matrix((1, nf)))
        h_parts.append(np.ones(1))
        dims_l = 1
    G = sp.vstack(g_parts + soc_G, format="csc")
    h = np.concatenate(h_parts + soc_h)

    return StandardForm(
        c=cp.obj[free_idx],
        A=A.tocsc(), b=b, G=G.tocsc(), h=h,
        dims_l=dims_l, dims_soc=dims_soc,
        free_idx=free_idx, fixed_vals=fixed_vals,
        obj_const=float(cp.obj_const + cp.obj @ fv),
    )


def _infeasible(cp, fixed_vals, msg: str) -> StandardForm:
    nf = 0
    return StandardForm(
        c=np.zeros(0), A=sp.csc_matrix((0, nf)), b=np.zeros(0),
        G=sp.csc_matrix((0, nf)), h=np.zeros(0), dims_l=0, dims_soc=[],
        free_idx=np.zeros(0, dtype=int), fixed_vals=fixed_vals,
        obj_const=cp.obj_const, infeasible=msg)


def _conflict(cp, msg: str) -> StandardForm:
    sf = _infeasible(cp, np.full(cp.n, np.nan), msg)
    sf.conflict = msg
    return sf
