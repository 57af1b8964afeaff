"""Solver routing: the built-in interior-point method plus external adapters.

An adapter takes the standard-form data and returns (status, x_free) in the
built-in solver's vocabulary.  Whatever the backend, the reconstructed full
primal is re-verified against the original program before a solution is
reported, so adapter output is never trusted blindly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import ipm
from .ipm import OPTIMAL, INFEASIBLE, UNBOUNDED, TIME_LIMIT, NUMERICAL_LIMIT
from .presolve import presolve, primal_violation, StandardForm
from .program import ConicProgram
from .verify import check_primal


@dataclass
class ContinuousSolution:
    """Result of one continuous conic solve."""

    status: str
    objective: float | None
    x: np.ndarray | None          # full-length primal (fixed values included)
    primal_inf: float = 0.0       # independent re-check, scaled
    relgap: float = 0.0
    iterations: int = 0
    solve_time: float = 0.0
    message: str = ""


def _builtin_backend(sf: StandardForm, tol: float, budget: float | None):
    res = ipm.solve_hsd(sf.c, sf.A, sf.b, sf.G, sf.h, sf.dims_l, sf.dims_soc,
                        tol_feas=tol, tol_gap=tol, budget=budget)
    return res.status, res.x, res.iterations, res.relgap, res.message


def _cvxopt_backend(sf: StandardForm, tol: float, budget: float | None):
    """Optional cross-check backend; requires cvxopt at call time."""
    from cvxopt import matrix, solvers, spmatrix
    A = sf.A.tocoo()
    G = sf.G.tocoo()
    Ac = spmatrix(A.data, A.row.tolist(), A.col.tolist(), A.shape)
    Gc = spmatrix(G.data, G.row.tolist(), G.col.tolist(), G.shape)
    dims = {"l": sf.dims_l, "q": list(sf.dims_soc), "s": []}
    opts = {"show_progress": False, "abstol": tol, "reltol": tol,
            "feastol": tol, "maxiters": 200}
    sol = solvers.conelp(matrix(sf.c), Gc, matrix(sf.h), dims,
                         Ac, matrix(sf.b), options=opts)
    st = sol["status"]
    if st == "optimal":
        x = np.array(sol["x"]).ravel()
        return OPTIMAL, x, 0, 0.0, ""
    if st == "primal infeasible":
        return INFEASIBLE, None, 0, 0.0, "cvxopt certificate"
    if st == "dual infeasible":
        return UNBOUNDED, None, 0, 0.0, "cvxopt certificate"
    return NUMERICAL_LIMIT, None, 0, 0.0, f"cvxopt status {st}"


_REGISTRY: dict[str, object] = {"builtin": _builtin_backend, "cvxopt": _cvxopt_backend}
_DEFAULT = "builtin"


@dataclass
class SolverHandle:
    """Callable routing handle returned by solver_interface()."""

    name: str
    backend: object

    def __call__(self, prog, fixings=None, tol=1e-7, budget=None):
        return solve_relaxation(prog, fixings, tol=tol, budget=budget, solver=self)


def solver_interface(register=None, name: str | None = None) -> SolverHandle:
    """Return a solve handle; optionally register an external adapter first.

    solver_interface() -> handle for the built-in solver.
    solver_interface(fn, name="mylp") registers fn and returns its handle.
    """
    if register is not None:
        key = name or getattr(register, "__name__", "adapter")
        _REGISTRY[key] = register
        return SolverHandle(key, register)
    key = name or _DEFAULT
    return SolverHandle(key, _REGISTRY[key])


def solve_relaxation(prog: ConicProgram, fixings: dict | None = None,
                     tol: float = 1e-7, budget: float | None = None,
                     solver: SolverHandle | None = None) -> ContinuousSolution:
    """Solve the continuous relaxation of prog with optional fixings.

    Binary marks are ignored (relaxed to their bound boxes).  Fixings map
    variable tags or indices to values inside their bounds; fixed variables
    are eliminated before the backend runs.  Every claimed-optimal point is
    re-verified against the original program.
    """
    t0 = time.perf_counter()
    backend = (solver or solver_interface()).backend
    sf = presolve(prog, fixings)
    if sf.infeasible is not None:
        return ContinuousSolution(INFEASIBLE, None, None, message=sf.infeasible,
                                  solve_time=time.perf_counter() - t0)
    if sf.free_idx.size == 0:
        x = sf.fixed_vals.copy()
        rep = check_primal(prog, x)
        scale = 1.0 + float(np.max(np.abs(x))) if x.size else 1.0
        if rep.max_violation > 1e-6 * scale:
            return ContinuousSolution(
                INFEASIBLE, None, None, primal_inf=rep.max_violation,
                message=f"fully fixed point violates {rep.worst}",
                solve_time=time.perf_counter() - t0)
        return ContinuousSolution(OPTIMAL, rep.objective, x,
                                  primal_inf=rep.max_violation,
                                  solve_time=time.perf_counter() - t0)

    status, x_free, iters, relgap, msg = backend(sf, tol, budget)
    elapsed = time.perf_counter() - t0
    if status != OPTIMAL or x_free is None:
        return ContinuousSolution(status, None, None, iterations=iters,
                                  relgap=relgap, message=msg, solve_time=elapsed)

    x_full = sf.lift(np.asarray(x_free, dtype=float))
    # clip round-off excursions outside the bound box before re-checking
    x_full = np.minimum(np.maximum(x_full, prog.lb), prog.ub)
    viol = primal_violation(prog, x_full)
    obj = prog.objective_value(x_full)
    if viol > 5e3 * tol:
        rep = check_primal(prog, x_full)   # slow pass names the offender
        return ContinuousSolution(
            NUMERICAL_LIMIT, obj, x_full, primal_inf=rep.max_violation,
            iterations=iters, relgap=relgap, solve_time=elapsed,
            message=f"re-verification failed at {rep.worst} "
                    f"(violation {rep.max_violation:.2e})")
    return ContinuousSolution(OPTIMAL, obj, x_full, primal_inf=viol,
                              iterations=iters, relgap=relgap,
                              solve_time=elapsed, message=msg)
