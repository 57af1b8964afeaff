"""Interior-point core: correctness against closed forms and cvxpy."""

import numpy as np
import pytest

from flexhub.conic import (
    ProgramBuilder, check_primal, expr, solve_relaxation,
)
from flexhub.conic.adapters import primal_violation, solver_interface


def _simple_lp():
    b = ProgramBuilder()
    x = b.add_var("x", lb=0.0, ub=10.0)
    y = b.add_var("y", lb=0.0, ub=10.0)
    b.add_obj(x, 1.0)
    b.add_obj(y, 2.0)
    b.add_row(expr([(x, 1.0), (y, 1.0)]), ">=", 4.0, tag="cover")
    return b.build()


def test_lp_exact_solution():
    res = solve_relaxation(_simple_lp())
    assert res.status == "optimal"
    # all weight goes to the cheaper variable
    assert res.objective == pytest.approx(4.0, abs=1e-6)


def test_idempotent_resolve():
    prog = _simple_lp()
    a = solve_relaxation(prog)
    c = solve_relaxation(prog)
    assert a.status == c.status == "optimal"
    assert a.objective == pytest.approx(c.objective, abs=1e-10)
    assert np.allclose(a.x, c.x, atol=1e-10)


def test_fixings_are_honored():
    prog = _simple_lp()
    res = solve_relaxation(prog, fixings={0: 1.0})
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(1.0, abs=1e-9)
    # remaining mass lands on y: 1 + 2*3
    assert res.objective == pytest.approx(7.0, abs=1e-6)


def test_infeasible_fixing_detected():
    b = ProgramBuilder()
    x = b.add_var("x", lb=0.0, ub=1.0)
    y = b.add_var("y", lb=0.0, ub=1.0)
    b.add_obj(y, 1.0)
    b.add_row(expr([(x, 1.0), (y, 1.0)]), ">=", 1.8, tag="need")
    res = solve_relaxation(b.build(), fixings={x: 0.0})
    assert res.status == "infeasible"


def test_soc_projection_distance():
    # minimize t subject to ||p - c||_2 <= t with p pinned by bounds
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = rng.uniform(-3.0, 3.0, 3)
        p = rng.uniform(-3.0, 3.0, 3)
        b = ProgramBuilder()
        t = b.add_var("t", lb=0.0)
        xs = [b.add_var(f"x{j}", lb=p[j], ub=p[j]) for j in range(3)]
        b.add_obj(t, 1.0)
        b.add_soc(expr([(t, 1.0)]),
                  [expr([(xs[j], 1.0)], const=-c[j]) for j in range(3)],
                  tag="ball")
        res = solve_relaxation(b.build())
        assert res.status == "optimal"
        assert res.objective == pytest.approx(np.linalg.norm(p - c), abs=1e-6)


def test_unbounded_detected():
    b = ProgramBuilder()
    x = b.add_var("x")
    b.add_obj(x, 1.0)
    res = solve_relaxation(b.build())
    assert res.status in ("unbounded", "numerical_limit")
    assert res.status == "unbounded"


def test_budget_trips_time_limit():
    prog = _simple_lp()
    res = solve_relaxation(prog, budget=0.0)
    assert res.status == "time_limit"


def test_adapter_registry_rejects_unknown():
    with pytest.raises(KeyError):
        solver_interface(name="no-such-backend")


def test_adapter_registration_round_trip():
    from flexhub.conic.adapters import _builtin_backend

    calls = []

    def fake_backend(sf, tol, budget):
        calls.append(sf)
        return _builtin_backend(sf, tol, budget)

    handle = solver_interface(fake_backend, name="recording")
    res = solve_relaxation(_simple_lp(), solver=handle)
    assert res.status == "optimal"
    assert len(calls) == 1


def test_cvxopt_backend_agrees():
    pytest.importorskip("cvxopt")
    prog = _simple_lp()
    mine = solve_relaxation(prog)
    other = solve_relaxation(prog, solver=solver_interface(name="cvxopt"))
    assert other.status == "optimal"
    assert other.objective == pytest.approx(mine.objective, abs=1e-6)


def test_check_primal_flags_violations():
    prog = _simple_lp()
    good = solve_relaxation(prog).x
    assert check_primal(prog, good).max_violation <= 1e-6
    bad = np.zeros_like(good)
    rep = check_primal(prog, bad)
    assert rep.max_violation > 1e-3
    assert primal_violation(prog, bad) == pytest.approx(rep.max_violation)


def _random_socp(rng):
    """Random bounded SOCP: a few box variables, SOC epigraphs, one budget row."""
    nv = int(rng.integers(2, 5))
    lo = rng.uniform(-2.0, 0.0, nv)
    hi = lo + rng.uniform(0.5, 3.0, nv)
    c = rng.uniform(-1.0, 1.0, nv)
    centers = [rng.uniform(-2.0, 2.0, nv) for _ in range(2)]
    cap = float(rng.uniform(1.0, 4.0))
    return nv, lo, hi, c, centers, cap


@pytest.mark.parametrize("seed", range(20))
def test_cross_check_against_cvxpy(seed):
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(100 + seed)
    nv, lo, hi, c, centers, cap = _random_socp(rng)

    b = ProgramBuilder()
    xs = [b.add_var(f"x{j}", lb=lo[j], ub=hi[j]) for j in range(nv)]
    ts = []
    for ci, cen in enumerate(centers):
        t = b.add_var(f"t{ci}", lb=0.0)
        ts.append(t)
        b.add_obj(t, 1.0)
        b.add_soc(expr([(t, 1.0)]),
                  [expr([(xs[j], 1.0)], const=-cen[j]) for j in range(nv)],
                  tag=f"ball{ci}")
    for j in range(nv):
        b.add_obj(xs[j], c[j])
    b.add_row(expr([(x, 1.0) for x in xs]), "<=", cap, tag="budget")
    mine = solve_relaxation(b.build())
    assert mine.status == "optimal"

    xv = cp.Variable(nv)
    cost = c @ xv + sum(cp.norm(xv - cen, 2) for cen in centers)
    prob = cp.Problem(cp.Minimize(cost),
                      [xv >= lo, xv <= hi, cp.sum(xv) <= cap])
    ref = prob.solve(solver=cp.CLARABEL)
    assert prob.status in ("optimal", "optimal_inaccurate")
    assert mine.objective == pytest.approx(ref, abs=1e-5, rel=1e-5)
