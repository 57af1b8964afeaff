"""Planar norms, gauge neighborhoods, and their conic encodings.

The three supported norms are the classical l1, l2, linf family; they also
serve as the gauges whose unit balls define hub neighborhoods.  Pointwise
they satisfy linf <= l2 <= l1, which is what makes discounted inter-hub
transfer by a "larger" norm an economy of scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conic import (
    ProgramBuilder, SocAtom, Expr, expr, var_expr, const_expr, GE, LE, INF,
)

L1 = "l1"
L2 = "l2"
LINF = "linf"
NORMS = (L1, L2, LINF)

# position in the pointwise chain l1 >= l2 >= linf (larger index = smaller norm)
_CHAIN = {L1: 0, L2: 1, LINF: 2}

Point = np.ndarray


def chain_leq(a: str, b: str) -> bool:
    """True when ||v||_a <= ||v||_b pointwise (a at or below b in the chain)."""
    return _CHAIN[a] >= _CHAIN[b]


def norm_eval(norm: str, v) -> float:
    v = np.asarray(v, dtype=float)
    if norm == L1:
        return float(np.abs(v).sum())
    if norm == L2:
        return float(math.sqrt(float(v @ v)))
    if norm == LINF:
        return float(np.abs(v).max()) if v.size else 0.0
    raise ValueError(f"unknown norm {norm!r}")


def equivalence_factor(from_gauge: str, to_norm: str, dim: int = 2) -> float:
    """Smallest kappa with ||v||_to <= kappa whenever gauge(v) <= 1.

    Exact for the nine R^2 pairs; safe (possibly loose) values for other
    dimensions.
    """
    if from_gauge == to_norm:
        return 1.0
    if from_gauge == L1:
        return 1.0                      # l1 ball sits inside the others
    rt = math.sqrt(dim)
    table = {
        (L2, L1): rt, (L2, LINF): 1.0,
        (LINF, L1): float(dim), (LINF, L2): rt,
    }
    return table[(from_gauge, to_norm)]


@dataclass(frozen=True)
class NeighborhoodSpec:
    """A gauge ball around a center: {center + v : gauge(v) <= radius_cap}."""

    center: Point
    gauge: str
    radius_cap: float

    def contains(self, x, radius: float | None = None, tol: float = 1e-9) -> bool:
        r = self.radius_cap if radius is None else radius
        return norm_eval(self.gauge, np.asarray(x) - self.center) <= r + tol


def _as_exprs(point_or_vars, builder: ProgramBuilder) -> list[Expr]:
    """A fixed point becomes constants; an index sequence becomes variables."""
    arr = np.asarray(point_or_vars)
    if arr.dtype.kind in "fc":
        return [const_expr(float(v)) for v in arr]
    return [var_expr(int(i)) for i in arr]


def _diff_exprs(anchor, target, builder: ProgramBuilder, scale: float) -> list[Expr]:
    ea, et = _as_exprs(anchor, builder), _as_exprs(target, builder)
    if len(ea) != len(et):
        raise ValueError("anchor/target dimension mismatch")
    out = []
    for a, t in zip(ea, et):
        terms = list(zip(t.idx, t.coef)) + list(zip(a.idx, (-c for c in a.coef)))
        out.append(expr([(i, scale * c) for i, c in terms],
                        scale * (t.const - a.const)))
    return out


def emit_distance_epigraph(builder: ProgramBuilder, norm: str, anchor, target,
                           bound_var: int, tag: str = "",
                           scale: float = 1.0) -> list[SocAtom]:
    """Append atoms asserting bound_var >= scale * ||target - anchor||_norm.

    anchor and target are each either a fixed float array or a sequence of
    variable indices.  Returns the appended atoms.  The projection of the
    feasible set onto (anchor, target, bound_var) is exactly the epigraph.
    """
    u = _diff_exprs(anchor, target, builder, scale)
    bound = var_expr(bound_var)
    atoms: list[SocAtom] = []
    if norm == L2:
        atoms.append(builder.add_soc(bound, u, tag=tag))
        return atoms
    if norm == LINF:
        for j, uj in enumerate(u):
            neg = Expr(bound.idx + uj.idx, bound.coef + tuple(-c for c in uj.coef),
                       -uj.const)
            pos = Expr(bound.idx + uj.idx, bound.coef + uj.coef, uj.const)
            atoms.append(builder.add_row(neg, GE, 0.0, f"{tag}|abs{j}+"))
            atoms.append(builder.add_row(pos, GE, 0.0, f"{tag}|abs{j}-"))
        return atoms
    if norm == L1:
        aux = []
        for j, uj in enumerate(u):
            a = builder.add_var(f"{tag}|abs{j}", 0.0, INF)
            aux.append(a)
            up = Expr((a,) + uj.idx, (1.0,) + tuple(-c for c in uj.coef), -uj.const)
            dn = Expr((a,) + uj.idx, (1.0,) + uj.coef, uj.const)
            atoms.append(builder.add_row(up, GE, 0.0, f"{tag}|abs{j}+"))
            atoms.append(builder.add_row(dn, GE, 0.0, f"{tag}|abs{j}-"))
        s = expr([(bound_var, 1.0)] + [(a, -1.0) for a in aux])
        atoms.append(builder.add_row(s, GE, 0.0, f"{tag}|sum"))
        return atoms
    raise ValueError(f"unknown norm {norm!r}")


def emit_membership(builder: ProgramBuilder, nbhd: NeighborhoodSpec,
                    x_vars, r_var: int, tag: str = "") -> list[SocAtom]:
    """Append atoms asserting gauge(x - center) <= r (x inside the dilated ball)."""
    return emit_distance_epigraph(builder, nbhd.gauge, nbhd.center, x_vars,
                                  r_var, tag=tag or "membership")


def power_cone_rep(builder: ProgramBuilder, d: int, r_var: int, gamma_var: int,
                   tag: str = "pow") -> list[SocAtom]:
    """Append atoms whose projection onto (r, gamma) is {gamma >= r^d}, r >= 0.

    d = 1 is a linear row; d = 2 a single rotated SOC; d >= 3 uses the
    standard tower of q rotated cones driven by the binary digits of d-1,
    with auxiliaries omega_1..omega_{q-1}.
    """
    if d < 1 or d != int(d):
        raise ValueError("degree must be a positive integer")
    r, g = var_expr(r_var), var_expr(gamma_var)
    atoms: list[SocAtom] = []
    if d == 1:
        e = expr([(gamma_var, 1.0), (r_var, -1.0)])
        atoms.append(builder.add_row(e, GE, 0.0, f"{tag}|lin"))
        return atoms
    if d == 2:
        atoms.append(builder.add_rsoc(var_expr(gamma_var, 0.5), const_expr(1.0),
                                      [r], tag=f"{tag}|sq"))
        return atoms
    q = int(d).bit_length()
    bits = [(d - 1) >> i & 1 for i in range(q)]   # alpha_0 .. alpha_{q-1}
    omegas = [builder.add_var(f"{tag}|omega{i}", 0.0, INF) for i in range(1, q)]

    def partner(bit: int) -> Expr:
        return r if bit == 0 else const_expr(1.0)

    # r^2 <= omega_{q-1} * r^(1 - alpha_{q-1})
    atoms.append(builder.add_rsoc(var_expr(omegas[q - 2], 0.5),
                                  partner(bits[q - 1]), [r], tag=f"{tag}|top"))
    # omega_{i+1}^2 <= omega_i * r^(1 - alpha_i)
    for i in range(q - 2, 0, -1):
        atoms.append(builder.add_rsoc(var_expr(omegas[i - 1], 0.5),
                                      partner(bits[i]),
                                      [var_expr(omegas[i])], tag=f"{tag}|mid{i}"))
    # omega_1^2 <= gamma * r^(1 - alpha_0)
    atoms.append(builder.add_rsoc(var_expr(gamma_var, 0.5), partner(bits[0]),
                                  [var_expr(omegas[0])], tag=f"{tag}|base"))
    return atoms


def big_m_bounds(inst, slack_factor: float = 1.0):
    """Valid upper bounds on realized distances for the big-M rows.

    Returns (DC, DD, DH): DC[i,k] bounds the collection distance from a_i to
    any feasible x_k, DD likewise for distribution, DH[k,m] bounds the
    discounted inter-hub distance alpha*||x_k - x_m||_H.  Monte-Carlo
    domination of these bounds is part of the test suite.
    """
    pts = inst.points
    n, dim = pts.shape
    diff = pts[:, None, :] - pts[None, :, :]
    dC = _pairwise(inst.norm_c, diff)
    dD = _pairwise(inst.norm_d, diff)
    dH = _pairwise(inst.norm_h, diff)
    kC = np.array([equivalence_factor(g, inst.norm_c, dim) for g in inst.gauges])
    kD = np.array([equivalence_factor(g, inst.norm_d, dim) for g in inst.gauges])
    kH = np.array([equivalence_factor(g, inst.norm_h, dim) for g in inst.gauges])
    R = inst.R
    DC = dC + slack_factor * (kC * R)[None, :]
    DD = dD + slack_factor * (kD * R)[None, :]
    DH = inst.alpha * (dH + (kH * R)[None, :] + (kH * R)[:, None])
    return DC, DD, DH


def big_m_lower_bounds(inst):
    """Valid lower bounds on realized distances over the neighborhoods.

    Returns (LC, LD, LH): LC[i,k] under-estimates the collection distance
    from a_i to every feasible x_k (zero when a_i can fall inside the
    neighborhood), LD likewise, LH[k,m] under-estimates the discounted
    inter-hub distance.  Activation-scaled rows built on these tighten the
    relaxations without touching any integer point.
    """
    dC, dD, dH, kC, kD, kH = nominal_distance_data(inst)
    R = inst.R
    LC = np.maximum(0.0, dC - (kC * R)[None, :])
    LD = np.maximum(0.0, dD - (kD * R)[None, :])
    LH = np.maximum(0.0, inst.alpha * (dH - (kH * R)[None, :] - (kH * R)[:, None]))
    return LC, LD, LH


def nominal_distance_data(inst):
    """Site-to-site distances plus gauge-to-norm conversion factors.

    Returns (dC, dD, dH, kC, kD, kH).  dC[i,k] measures the collection norm
    between nominal sites; kC[k] converts hub k's dilation into collection
    units, so any feasible placement obeys

        d(a_i, x_k) >= dC[i,k] - kC[k] * r_k.

    These back the dilation-coupled floor rows, which stay exact whenever
    the hub does not move.
    """
    pts = inst.points
    dim = pts.shape[1]
    diff = pts[:, None, :] - pts[None, :, :]
    dC = _pairwise(inst.norm_c, diff)
    dD = _pairwise(inst.norm_d, diff)
    dH = _pairwise(inst.norm_h, diff)
    kC = np.array([equivalence_factor(g, inst.norm_c, dim) for g in inst.gauges])
    kD = np.array([equivalence_factor(g, inst.norm_d, dim) for g in inst.gauges])
    kH = np.array([equivalence_factor(g, inst.norm_h, dim) for g in inst.gauges])
    return dC, dD, dH, kC, kD, kH


def _pairwise(norm: str, diff: np.ndarray) -> np.ndarray:
    if norm == L1:
        return np.abs(diff).sum(axis=2)
    if norm == L2:
        return np.sqrt((diff ** 2).sum(axis=2))
    if norm == LINF:
        return np.abs(diff).max(axis=2)
    raise ValueError(f"unknown norm {norm!r}")
