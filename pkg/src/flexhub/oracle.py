"""Exhaustive reference solver for tiny instances.

This module answers "what is the true optimum" without trusting the
mixed-binary machinery: every hub set and allocation is enumerated outright,
each priced by a small continuous model assembled here (not shared with the
formulations), then cross-polished with a derivative-free local search.
Everything is finally repriced by the referee in solution.py, so a bug in
either pricing route shows up as a disagreement rather than a silent error.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import optimize

from .conic import ProgramBuilder, INF, solve_relaxation
from .geometry import (
    NeighborhoodSpec, emit_distance_epigraph, emit_membership, norm_eval,
    power_cone_rep,
)
from .instance import Instance, LINEAR
from .solution import HubSolution, evaluate_solution

MAX_NODES = 7


def count_configs(n: int) -> int:
    return sum(math.comb(n, h) * h ** (n - h) for h in range(1, n + 1))


def enumerate_configs(n: int):
    """Yield every (hubs, assignment) with hubs self-assigned, in a fixed
    lexicographic order.  Guarded: the count explodes combinatorially."""
    if n > MAX_NODES:
        raise ValueError(
            f"{count_configs(n)} configurations for n={n}; the exhaustive "
            f"oracle is capped at n={MAX_NODES}")
    for hmask in range(1, 1 << n):
        hubs = tuple(k for k in range(n) if hmask >> k & 1)
        rest = [i for i in range(n) if i not in hubs]
        for pick in itertools.product(hubs, repeat=len(rest)):
            assign = list(range(n))
            for i, k in zip(rest, pick):
                assign[i] = k
            yield hubs, tuple(assign)


def _pair_weights(inst: Instance, assignment):
    W: dict = {}
    for i in range(inst.n):
        for j in range(inst.n):
            w = inst.flow[i, j]
            if i == j or w == 0.0:
                continue
            k, m = assignment[i], assignment[j]
            if k != m:
                lo, hi = (k, m) if k < m else (m, k)
                W[(lo, hi)] = W.get((lo, hi), 0.0) + float(w)
    return W


def _build_pricing(inst: Instance, assignment, hubs):
    b = ProgramBuilder()
    xm: dict = {}
    rm: dict = {}
    for k in hubs:
        Rk = float(inst.R[k])
        rm[k] = b.add_var(f"or[{k}]", lb=0.0, ub=Rk)
        xm[k] = [b.add_var(f"ox[{k},{j}]",
                           lb=inst.points[k, j] - Rk,
                           ub=inst.points[k, j] + Rk)
                 for j in range(inst.dim)]
        if Rk > 0.0:
            nb = NeighborhoodSpec(inst.points[k], inst.gauges[k], Rk)
            emit_membership(b, nb, xm[k], rm[k], tag=f"omem[{k}]")
        b.add_obj_const(float(inst.fixed_cost[k]))
        lam = float(inst.setup.Lambda[k])
        if Rk > 0.0 and lam > 0.0:
            if inst.setup.kind == LINEAR or inst.setup.degree == 1:
                b.add_obj(rm[k], lam)
            else:
                g = b.add_var(f"og[{k}]", lb=0.0, ub=Rk ** inst.setup.degree)
                power_cone_rep(b, inst.setup.degree, rm[k], g, tag=f"opow[{k}]")
                b.add_obj(g, lam)
    for i in range(inst.n):
        k = assignment[i]
        if inst.O[i] > 0.0:
            d = b.add_var(f"oc[{i}]", lb=0.0, ub=INF)
            emit_distance_epigraph(b, inst.norm_c, inst.points[i], xm[k], d,
                                   tag=f"oc[{i}]")
            b.add_obj(d, float(inst.O[i]))
        if inst.D[i] > 0.0:
            d = b.add_var(f"od[{i}]", lb=0.0, ub=INF)
            emit_distance_epigraph(b, inst.norm_d, inst.points[i], xm[k], d,
                                   tag=f"od[{i}]")
            b.add_obj(d, float(inst.D[i]))
    for (lo, hi), w in sorted(_pair_weights(inst, assignment).items()):
        d = b.add_var(f"oh[{lo},{hi}]", lb=0.0, ub=INF)
        emit_distance_epigraph(b, inst.norm_h, xm[lo], xm[hi], d,
                               tag=f"oh[{lo},{hi}]", scale=inst.alpha)
        b.add_obj(d, w)
    return b.build(), xm, rm


def _project_into_ball(inst: Instance, k: int, x: np.ndarray) -> np.ndarray:
    g = norm_eval(inst.gauges[k], x - inst.points[k])
    cap = float(inst.R[k])
    if g <= cap or g == 0.0:
        return x
    return inst.points[k] + (x - inst.points[k]) * (cap / g)


def _candidate(inst: Instance, assignment, hubs, xs) -> HubSolution:
    """Make a feasible solution from raw hub points and reprice it."""
    pts = {}
    rs = {}
    for k in hubs:
        x = _project_into_ball(inst, k, np.asarray(xs[k], dtype=float))
        pts[k] = x
        rs[k] = min(float(inst.R[k]),
                    norm_eval(inst.gauges[k], x - inst.points[k]))
    return evaluate_solution(inst, assignment, pts, rs)


def _nm_price(inst: Instance, assignment, hubs, free, vec) -> float:
    xs = {k: inst.points[k] for k in hubs}
    pen = 0.0
    for t, k in enumerate(free):
        x = vec[2 * t:2 * t + 2]
        xs[k] = x
        over = norm_eval(inst.gauges[k], x - inst.points[k]) - inst.R[k]
        if over > 0:
            pen += over
    sol = _candidate(inst, assignment, hubs,
                     {k: _project_into_ball(inst, k, np.asarray(xs[k]))
                      for k in hubs})
    return sol.objective + 1e4 * pen


def solve_fixed(inst: Instance, assignment, *, nm_starts: int = 3,
                seed: int = 0) -> HubSolution:
    """Optimal geometry for a frozen allocation, via two independent routes.

    The conic route is exact; the Nelder-Mead route explores from the conic
    answer, the undilated centers, and random interior points.  The cheapest
    referee-priced feasible candidate wins, so the routes audit each other.
    """
    assignment = tuple(int(a) for a in assignment)
    hubs = tuple(sorted(set(assignment)))
    for k in hubs:
        if assignment[k] != k:
            raise ValueError(f"hub {k} is not self-assigned")
    cands = [
        _candidate(inst, assignment, hubs, {k: inst.points[k] for k in hubs})]

    prog, xm, rm = _build_pricing(inst, assignment, hubs)
    res = solve_relaxation(prog)
    if res.status == "optimal":
        xs = {k: np.array([res.x[j] for j in xm[k]]) for k in hubs}
        cands.append(_candidate(inst, assignment, hubs, xs))

    free = [k for k in hubs if inst.R[k] > 0.0]
    if free and nm_starts > 0:
        rng = np.random.default_rng(seed)
        starts = [np.concatenate([np.asarray(cands[-1].hub_points[k])
                                  for k in free])]
        for _ in range(nm_starts):
            vec = []
            for k in free:
                u = rng.uniform(-1.0, 1.0, size=inst.dim)
                vec.append(inst.points[k] + u * inst.R[k] * 0.7)
            starts.append(np.concatenate(vec))
        for st in starts:
            out = optimize.minimize(
                lambda v: _nm_price(inst, assignment, hubs, free, v), st,
                method="Nelder-Mead",
                options={"maxiter": 400, "xatol": 1e-8, "fatol": 1e-10})
            xs = {k: inst.points[k] for k in hubs}
            for t, k in enumerate(free):
                xs[k] = out.x[2 * t:2 * t + 2]
            cands.append(_candidate(inst, assignment, hubs, xs))

    best = min(cands, key=lambda s: s.objective)
    best.meta.update({"routes": len(cands), "conic_status": res.status})
    return best


def brute_force(inst: Instance, *, nm_starts: int = 1, seed: int = 0,
                progress=None) -> HubSolution:
    """True optimum by enumeration; ties keep the first configuration found."""
    best = None
    for count, (hubs, assign) in enumerate(enumerate_configs(inst.n)):
        sol = solve_fixed(inst, assign, nm_starts=nm_starts, seed=seed)
        if best is None or \
                sol.objective < best.objective - 1e-7 * (1 + abs(best.objective)):
            best = sol
        if progress is not None:
            progress(count, sol)
    best.meta["oracle"] = "brute-force"
    return best
