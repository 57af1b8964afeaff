"""Mixed-binary conic program representation.

A program is a list of tagged variables with bounds and integrality marks,
a linear objective, linear rows, and second-order cone blocks whose members
are affine expressions of the variables.  Everything downstream (presolve,
the interior-point solver, verification, external adapters, the textual
dump) consumes this one structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# variable kinds
CONTINUOUS = "continuous"
BINARY = "binary"

# row senses
LE = "<="
GE = ">="
EQ = "=="

# atom kinds
LINEAR_ROW = "linear_row"
SOC_BLOCK = "soc_block"
ROTATED_SOC_BLOCK = "rotated_soc_block"

INF = math.inf


@dataclass(frozen=True)
class Expr:
    """Sparse affine expression: sum(coef[t] * x[idx[t]]) + const."""

    idx: tuple[int, ...] = ()
    coef: tuple[float, ...] = ()
    const: float = 0.0

    def value(self, x: np.ndarray) -> float:
        v = self.const
        for i, c in zip(self.idx, self.coef):
            v += c * x[i]
        return v

    def scaled(self, s: float) -> "Expr":
        return Expr(self.idx, tuple(s * c for c in self.coef), s * self.const)


def expr(terms=(), const: float = 0.0) -> Expr:
    """Build an Expr from (var_index, coef) pairs, merging duplicates."""
    acc: dict[int, float] = {}
    for i, c in terms:
        acc[int(i)] = acc.get(int(i), 0.0) + float(c)
    items = sorted(acc.items())
    return Expr(tuple(i for i, _ in items), tuple(c for _, c in items), float(const))


def var_expr(i: int, coef: float = 1.0, const: float = 0.0) -> Expr:
    return Expr((int(i),), (float(coef),), float(const))


def const_expr(c: float) -> Expr:
    return Expr((), (), float(c))


@dataclass(frozen=True)
class SocAtom:
    """One structural element of a conic program.

    kind LINEAR_ROW:        exprs = (lhs,), lhs  sense  rhs
    kind SOC_BLOCK:         exprs = (t, u_1..u_d)   asserting  ||u||_2 <= t
    kind ROTATED_SOC_BLOCK: exprs = (s, t, u_1..u_d) asserting ||u||_2^2 <= 2*s*t, s,t >= 0
    """

    kind: str
    exprs: tuple[Expr, ...]
    sense: str | None = None
    rhs: float = 0.0
    tag: str = ""


@dataclass
class ConicProgram:
    """Frozen program produced by ProgramBuilder.build()."""

    var_tags: list[str]
    tag_to_idx: dict[str, int]
    lb: np.ndarray
    ub: np.ndarray
    is_binary: np.ndarray
    obj: np.ndarray
    obj_const: float
    atoms: list[SocAtom]

    @property
    def n_vars(self) -> int:
        return len(self.var_tags)

    def index_of(self, tag: str) -> int:
        return self.tag_to_idx[tag]

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.obj @ x + self.obj_const)


class ProgramBuilder:
    """Incremental construction of a ConicProgram.

    Variable tags are unique; the tag map is total over the variables.
    Atoms are kept in insertion order, which makes builds deterministic.
    """

    def __init__(self) -> None:
        self.var_tags: list[str] = []
        self.tag_to_idx: dict[str, int] = {}
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.is_binary: list[bool] = []
        self.obj: dict[int, float] = {}
        self.obj_const = 0.0
        self.atoms: list[SocAtom] = []

    # -- variables ---------------------------------------------------------

    def add_var(self, tag: str, lb: float = -INF, ub: float = INF,
                kind: str = CONTINUOUS, obj: float = 0.0) -> int:
        if tag in self.tag_to_idx:
            raise ValueError(f"duplicate variable tag {tag!r}")
        if kind == BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub + 1e-12:
            raise ValueError(f"variable {tag!r} has empty bound box [{lb}, {ub}]")
        i = len(self.var_tags)
        self.var_tags.append(tag)
        self.tag_to_idx[tag] = i
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.is_binary.append(kind == BINARY)
        if obj:
            self.obj[i] = float(obj)
        return i

    def alias_var(self, tag: str, idx: int) -> None:
        """Register an extra tag for an existing variable (e.g. z[k,k] = y[k])."""
        if tag in self.tag_to_idx:
            raise ValueError(f"duplicate variable tag {tag!r}")
        self.tag_to_idx[tag] = int(idx)

    def add_obj(self, idx: int, coef: float) -> None:
        self.obj[idx] = self.obj.get(idx, 0.0) + float(coef)

    def add_obj_const(self, c: float) -> None:
        self.obj_const += float(c)

    # -- atoms -------------------------------------------------------------

    def add_row(self, e: Expr, sense: str, rhs: float, tag: str = "") -> SocAtom:
        if sense not in (LE, GE, EQ):
            raise ValueError(f"bad row sense {sense!r}")
        atom = SocAtom(LINEAR_ROW, (e,), sense, float(rhs), tag)
        self.atoms.append(atom)
        return atom

    def add_soc(self, t: Expr, u: list[Expr], tag: str = "") -> SocAtom:
        atom = SocAtom(SOC_BLOCK, (t, *u), tag=tag)
        self.atoms.append(atom)
        return atom

    def add_rsoc(self, s: Expr, t: Expr, u: list[Expr], tag: str = "") -> SocAtom:
        atom = SocAtom(ROTATED_SOC_BLOCK, (s, t, *u), tag=tag)
        self.atoms.append(atom)
        return atom

    def add_atoms(self, atoms) -> None:
        self.atoms.extend(atoms)

    # -----------------------------------------------------------------------

    def build(self) -> ConicProgram:
        n = len(self.var_tags)
        c = np.zeros(n)
        for i, v in self.obj.items():
            c[i] = v
        return ConicProgram(
            var_tags=list(self.var_tags),
            tag_to_idx=dict(self.tag_to_idx),
            lb=np.array(self.lb, dtype=float),
            ub=np.array(self.ub, dtype=float),
            is_binary=np.array(self.is_binary, dtype=bool),
            obj=c,
            obj_const=self.obj_const,
            atoms=list(self.atoms),
        )


# -- textual dump -----------------------------------------------------------

def _fmt_expr(e: Expr, tags: list[str]) -> str:
    parts = []
    for i, c in zip(e.idx, e.coef):
        parts.append(f"{c:+g}*{tags[i]}")
    if e.const or not parts:
        parts.append(f"{e.const:+g}")
    return " ".join(parts)


def dump_text(prog: ConicProgram) -> str:
    """Plain-text dump of a program, one entity per line.

    Sections: VERSION, VARS (tag lb ub kind obj-coef), OBJCONST, ROWS,
    SOC, RSOC.  Deterministic for a given program; intended for debugging
    and interchange, not round-tripping.
    """
    out = ["CONIC-DUMP v1", f"VARS {prog.n_vars}"]
    for i, tag in enumerate(prog.var_tags):
        kind = "B" if prog.is_binary[i] else "C"
        out.append(f"  {tag} {prog.lb[i]:g} {prog.ub[i]:g} {kind} {prog.obj[i]:g}")
    out.append(f"OBJCONST {prog.obj_const:g}")
    tags = prog.var_tags
    for a in prog.atoms:
        if a.kind == LINEAR_ROW:
            out.append(f"ROW [{a.tag}] {_fmt_expr(a.exprs[0], tags)} {a.sense} {a.rhs:g}")
        elif a.kind == SOC_BLOCK:
            members = "; ".join(_fmt_expr(e, tags) for e in a.exprs)
            out.append(f"SOC [{a.tag}] {members}")
        else:
            members = "; ".join(_fmt_expr(e, tags) for e in a.exprs)
            out.append(f"RSOC [{a.tag}] {members}")
    return "\n".join(out) + "\n"
