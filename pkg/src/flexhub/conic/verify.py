"""Independent feasibility checking of primal points.

Evaluates a candidate point against the original atoms of a ConicProgram
(not against the solver's internal standard form), so a bug in presolve
or in the interior-point code cannot certify its own output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .program import ConicProgram, LINEAR_ROW, SOC_BLOCK, ROTATED_SOC_BLOCK, LE, GE, EQ


@dataclass
class CheckReport:
    max_violation: float
    worst: str
    objective: float


def check_primal(prog: ConicProgram, x: np.ndarray) -> CheckReport:
    """Max constraint violation of x over rows, cones, and bounds."""
    worst, where = 0.0, ""

    viol_lb = np.max(prog.lb - x) if x.size else 0.0
    viol_ub = np.max(x - prog.ub) if x.size else 0.0
    for v, lab in ((viol_lb, "lower bound"), (viol_ub, "upper bound")):
        if v > worst:
            worst, where = float(v), lab

    for a in prog.atoms:
        if a.kind == LINEAR_ROW:
            val = a.exprs[0].value(x)
            if a.sense == LE:
                v = val - a.rhs
            elif a.sense == GE:
                v = a.rhs - val
            else:
                v = abs(val - a.rhs)
            v /= 1.0 + abs(a.rhs)
        elif a.kind == SOC_BLOCK:
            t = a.exprs[0].value(x)
            u = np.array([e.value(x) for e in a.exprs[1:]])
            v = (np.linalg.norm(u) - t) / (1.0 + abs(t))
        else:
            sv = a.exprs[0].value(x)
            tv = a.exprs[1].value(x)
            u = np.array([e.value(x) for e in a.exprs[2:]])
            v = max(u @ u - 2.0 * sv * tv, -sv, -tv) / (1.0 + abs(sv * tv))
        if v > worst:
            worst, where = float(v), a.tag or a.kind
    return CheckReport(worst, where, prog.objective_value(x))
