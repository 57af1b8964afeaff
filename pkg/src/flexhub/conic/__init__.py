"""Conic programming core: program IR, interior-point solver, verification."""

from .program import (
    BINARY, CONTINUOUS, EQ, GE, LE, INF,
    LINEAR_ROW, ROTATED_SOC_BLOCK, SOC_BLOCK,
    ConicProgram, Expr, ProgramBuilder, SocAtom,
    const_expr, dump_text, expr, var_expr,
)
from .ipm import INFEASIBLE, NUMERICAL_LIMIT, OPTIMAL, TIME_LIMIT, UNBOUNDED
from .adapters import (
    ContinuousSolution, SolverHandle, solve_relaxation, solver_interface,
)
from .verify import CheckReport, check_primal

__all__ = [
    "BINARY", "CONTINUOUS", "EQ", "GE", "LE", "INF",
    "LINEAR_ROW", "ROTATED_SOC_BLOCK", "SOC_BLOCK",
    "ConicProgram", "Expr", "ProgramBuilder", "SocAtom",
    "const_expr", "dump_text", "expr", "var_expr",
    "INFEASIBLE", "NUMERICAL_LIMIT", "OPTIMAL", "TIME_LIMIT", "UNBOUNDED",
    "ContinuousSolution", "SolverHandle", "solve_relaxation", "solver_interface",
    "CheckReport", "check_primal",
]
