"""Branch-and-cut over the conic relaxations.

One engine drives both formulations.  Nodes are explored best-bound first;
binary fixings are propagated logically before each solve; integral points
are separated (master only), then repriced exactly and offered as
incumbents.  The transfer cut pool is shared across the whole tree, so the
master program is rebuilt whenever the pool has grown and reused otherwise.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .conic import solve_relaxation
from .formulations import (
    CutRecord, VariableCatalog, build_f1, build_f2_master,
    build_fixed_assignment, fractional_entries, integral_assignment,
)
from .geometry import norm_eval
from .instance import Instance
from .solution import HubSolution, evaluate_solution

F1 = "f1"
F2 = "f2"
ALL = "all"
MOST_VIOLATED = "most-violated"

OPTIMAL = "optimal"
TIME_LIMIT = "time_limit"
NODE_LIMIT = "node_limit"


@dataclass
class BnCStats:
    nodes: int = 0
    relaxations: int = 0
    cut_rounds: int = 0
    cuts: int = 0
    rebuilds: int = 0
    heuristic_solutions: int = 0
    numerical_failures: int = 0
    best_bound: float = -np.inf
    incumbent_value: float = np.inf
    gap: float = np.inf
    wall_time: float = 0.0
    status: str = ""


@dataclass
class SolveReport:
    solution: HubSolution | None
    stats: BnCStats
    pool: list
    method: str
    history: list = field(default_factory=list)   # (time, bound, incumbent)


# -- separation ----------------------------------------------------------------

def _routed_pairs(inst: Instance, assignment):
    """Ordered hub pair -> sorted origin-destination pairs routed across it."""
    out: dict = {}
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j or inst.flow[i, j] <= 0.0:
                continue
            k, m = assignment[i], assignment[j]
            if k != m:
                out.setdefault((k, m), []).append((i, j))
    return {km: tuple(sorted(ps)) for km, ps in out.items()}


def violated_cuts(inst: Instance, assignment, hub_points, mu_values,
                  existing=frozenset(), tol: float = 1e-6):
    """All transfer cuts violated at an integral point, strongest first.

    mu_values maps ordered hub pairs to the master's current aggregate; the
    reference distance is recomputed from the placed hub points, never read
    back from a solver variable.
    """
    found = []
    for (k, m), pairs in _routed_pairs(inst, assignment).items():
        rec = CutRecord(k, m, pairs)
        if rec.key() in existing:
            continue
        w = rec.weight(inst.flow)
        dbar = inst.dist_h(hub_points[k], hub_points[m])
        mu = float(mu_values.get((k, m), 0.0))
        gap = w * dbar - mu
        if gap > tol * (1.0 + abs(mu)):
            found.append((gap, rec))
    found.sort(key=lambda t: (-t[0], t[1].key()))
    return found


def separate_all(inst, assignment, hub_points, mu_values,
                 existing=frozenset(), tol: float = 1e-6):
    return [rec for _, rec in
            violated_cuts(inst, assignment, hub_points, mu_values, existing, tol)]


def most_violated(inst, assignment, hub_points, mu_values,
                  existing=frozenset(), tol: float = 1e-6):
    found = violated_cuts(inst, assignment, hub_points, mu_values, existing, tol)
    return [found[0][1]] if found else []


# -- exact pricing of a frozen allocation ---------------------------------------

def price_assignment(inst: Instance, assignment, solver=None,
                     budget=None) -> HubSolution:
    """Optimal geometry for one allocation, repriced by the referee.

    Falls back to undilated centers if the continuous solve fails, so the
    result is always a feasible solution.
    """
    assignment = tuple(int(a) for a in assignment)
    prog, cat = build_fixed_assignment(inst, assignment)
    if budget is not None:
        budget = max(0.1, budget)
    res = solve_relaxation(prog, solver=solver, budget=budget)
    hubs = sorted(set(assignment))
    if res.status == "optimal":
        xs = {}
        rs = {}
        for k in hubs:
            x = np.array([res.x[j] for j in cat.x[k]])
            g = norm_eval(inst.gauges[k], x - inst.points[k])
            if g > inst.R[k] and g > 0.0:
                x = inst.points[k] + (x - inst.points[k]) * (inst.R[k] / g)
                g = inst.R[k]
            xs[k] = x
            rs[k] = min(float(inst.R[k]), g)
        return evaluate_solution(inst, assignment, xs, rs)
    return evaluate_solution(inst, assignment,
                             {k: inst.points[k] for k in hubs},
                             {k: 0.0 for k in hubs})


def rounded_assignment(n: int, cat, xvec) -> tuple:
    """Nearest allocation to a fractional point: argmax z per node, hubs repaired.

    Any node chosen as somebody's hub is re-pointed at itself, so the result
    always satisfies the self-allocation convention and can be priced exactly.
    """
    assignment = [max(range(n), key=lambda k: xvec[cat.z[(i, k)]])
                  for i in range(n)]
    for k in sorted(set(assignment)):
        assignment[k] = k
    return tuple(assignment)


# -- logical propagation of branching decisions ---------------------------------

def propagate_fixings(n: int, fixes: dict):
    """Close a set of z fixings under the allocation logic, or None on conflict.

    Keys are (i, k) pairs; (k, k) doubles as the hub indicator.  Rules:
    an assignment excludes every alternative, serving a node opens the hub,
    a closed hub serves nobody, and a node with one remaining option takes it.
    """
    fixes = dict(fixes)
    changed = True
    while changed:
        changed = False
        for (i, k), v in list(fixes.items()):
            if v == 1:
                for m in range(n):
                    if m == k:
                        continue
                    cur = fixes.get((i, m))
                    if cur == 1:
                        return None
                    if cur is None:
                        fixes[(i, m)] = 0
                        changed = True
                if i != k:
                    cur = fixes.get((k, k))
                    if cur == 0:
                        return None
                    if cur is None:
                        fixes[(k, k)] = 1
                        changed = True
            elif i == k:
                for j in range(n):
                    if j == k:
                        continue
                    cur = fixes.get((j, k))
                    if cur == 1:
                        return None
                    if cur is None:
                        fixes[(j, k)] = 0
                        changed = True
        for i in range(n):
            if any(fixes.get((i, k)) == 1 for k in range(n)):
                continue
            free = [k for k in range(n) if (i, k) not in fixes]
            if not free:
                return None
            if len(free) == 1:
                fixes[(i, free[0])] = 1
                changed = True
    return fixes


# -- the engine ------------------------------------------------------------------

def solve_bnc(inst: Instance, *, method: str = F2, policy: str = ALL,
              time_limit: float | None = None, gap_tol: float = 1e-6,
              node_limit: int | None = None, seed: int = 0,
              slack_factor: float = 1.0, solver=None, split_nu: bool = False,
              separation_tol: float = 1e-6, log=None) -> SolveReport:
    """Solve one instance to proven optimality (or until a limit trips)."""
    if method not in (F1, F2):
        raise ValueError(f"unknown method {method!r}")
    if policy not in (ALL, MOST_VIOLATED):
        raise ValueError(f"unknown separation policy {policy!r}")
    t0 = time.monotonic()
    stats = BnCStats()
    history = []
    pool: list[CutRecord] = []
    pool_keys: set = set()
    priced: dict = {}
    cheap_vals: dict = {}
    incumbent: HubSolution | None = None

    def remaining():
        if time_limit is None:
            return None
        return time_limit - (time.monotonic() - t0)

    def out_of_time():
        r = remaining()
        return r is not None and r <= 0.0

    def say(msg):
        if log is not None:
            log(msg)

    def offer(sol: HubSolution):
        nonlocal incumbent
        if sol.max_violation > 1e-6:
            return
        if incumbent is None or sol.objective < incumbent.objective:
            incumbent = sol
            stats.incumbent_value = sol.objective
            history.append((time.monotonic() - t0, stats.best_bound,
                            sol.objective))
            say(f"incumbent {sol.objective:.6f} hubs {sol.open_hubs}")

    def price_config(assignment):
        key = tuple(assignment)
        got = priced.get(key)
        if got is None:
            got = price_assignment(inst, key, solver=solver, budget=remaining())
            priced[key] = got
            stats.heuristic_solutions += 1
        return got

    def try_rounded(assignment):
        """Cheap center-placed evaluation; exact pricing only when competitive."""
        got = priced.get(assignment)
        if got is not None:
            offer(got)
            return
        cv = cheap_vals.get(assignment)
        if cv is None:
            hubs = sorted(set(assignment))
            cheap = evaluate_solution(
                inst, assignment,
                {k: inst.points[k] for k in hubs}, {k: 0.0 for k in hubs})
            cheap_vals[assignment] = cv = cheap.objective
            offer(cheap)
        if incumbent is None or cv <= 1.02 * incumbent.objective:
            offer(price_config(assignment))

    n = inst.n
    # root incumbents: every single-hub star
    for k in range(n):
        offer(price_config(tuple(k for _ in range(n))))
        if out_of_time():
            break

    def rebuild():
        stats.rebuilds += 1
        if method == F1:
            return build_f1(inst, slack_factor=slack_factor, split_nu=split_nu)
        return build_f2_master(inst, pool, slack_factor=slack_factor)

    prog, cat = rebuild()
    built_cuts = len(pool)

    def hub_geometry(xvec, hubs):
        return {k: np.array([xvec[j] for j in cat.x[k]]) for k in hubs}

    counter = 0
    heap = []   # (bound, counter, fixes dict, tree depth)
    heapq.heappush(heap, (-np.inf, counter, {}, 0))
    interrupted = False
    current_bound = None
    report_every = 15.0
    next_report = report_every

    while heap:
        if out_of_time():
            interrupted = True
            break
        if node_limit is not None and stats.nodes >= node_limit:
            interrupted = True
            break
        bound0, _, fixes0, depth = heapq.heappop(heap)
        current_bound = bound0
        if log is not None and time.monotonic() - t0 >= next_report:
            next_report += report_every
            say(f"t={time.monotonic() - t0:.0f}s nodes={stats.nodes} "
                f"open={len(heap) + 1} frontier={bound0:.4f} "
                f"depth={depth} cuts={len(pool)}")
        cutoff = (np.inf if incumbent is None else
                  incumbent.objective - gap_tol * (1.0 + abs(incumbent.objective)))
        if bound0 >= cutoff:
            current_bound = None
            continue   # pruned by a newer incumbent
        stats.nodes += 1
        fixes = propagate_fixings(n, fixes0)
        if fixes is None:
            current_bound = None
            continue

        node_bound = bound0
        branch_point = None
        # cuts from rounded points tighten the bound below integrality, but
        # chasing that pays off only near the top of the tree
        frac_rounds = 0
        frac_cap = 12 if depth == 0 else (1 if depth <= 4 else 0)
        pick = separate_all if policy == ALL else most_violated
        while True:
            if len(pool) != built_cuts:
                prog, cat = rebuild()
                built_cuts = len(pool)
            fix_idx = {cat.z[key]: float(v) for key, v in fixes.items()}
            res = solve_relaxation(prog, fixings=fix_idx, solver=solver,
                                   budget=remaining())
            stats.relaxations += 1
            if res.status == "infeasible":
                node_bound = None
                break
            if res.status != "optimal" or res.x is None:
                stats.numerical_failures += 1
                say(f"node relaxation ended with {res.status}; branching blind")
                branch_point = None
                break
            node_bound = max(node_bound, res.objective)
            if node_bound >= cutoff:
                node_bound = None
                break
            assignment = integral_assignment(inst, cat, res.x, tol=1e-6)
            if assignment is None:
                rounded = rounded_assignment(n, cat, res.x)
                try_rounded(rounded)
                cutoff = (np.inf if incumbent is None else incumbent.objective
                          - gap_tol * (1.0 + abs(incumbent.objective)))
                if node_bound >= cutoff:
                    node_bound = None
                    break
                if method == F2 and frac_rounds < frac_cap and not out_of_time():
                    # pool rows hold at every allocation, so records taken
                    # from the rounded neighbour are sound here too
                    mu_bar = {km: res.x[idx] for km, idx in cat.mu.items()}
                    geo = hub_geometry(res.x, sorted(set(rounded)))
                    new = pick(inst, rounded, geo, mu_bar, pool_keys,
                               separation_tol)[:10]
                    if new:
                        for rec in new:
                            pool.append(rec)
                            pool_keys.add(rec.key())
                        stats.cut_rounds += 1
                        frac_rounds += 1
                        continue
                branch_point = res.x
                break
            hubs = sorted(set(assignment))
            if method == F2:
                mu_bar = {km: res.x[idx] for km, idx in cat.mu.items()}
                geo = hub_geometry(res.x, hubs)
                new = pick(inst, assignment, geo, mu_bar, pool_keys,
                           separation_tol)
                if new:
                    for rec in new:
                        pool.append(rec)
                        pool_keys.add(rec.key())
                    stats.cut_rounds += 1
                    if out_of_time():
                        interrupted = True
                        break
                    continue
            offer(price_config(assignment))
            node_bound = None
            break
        if interrupted:
            break
        current_bound = None
        if node_bound is None:
            continue

        # branch
        if branch_point is not None:
            fracs = fractional_entries(inst, cat, branch_point, tol=1e-6)
            fracs = [(i, k, v) for i, k, v in fracs if (i, k) not in fixes]
            if not fracs:
                # integrality noise: round and fall back to pricing
                offer(price_config(rounded_assignment(n, cat, branch_point)))
                continue

            def gub_children(i):
                # split node i's remaining hub choices into two halves of
                # roughly equal LP mass; each child forbids one half
                row = sorted(((float(branch_point[cat.z[(i, k)]]), k)
                              for k in range(n) if (i, k) not in fixes),
                             reverse=True)
                if len(row) < 2:
                    k = row[0][1]
                    return {(i, k): 1}, {(i, k): 0}
                half = 0.5 * sum(v for v, _ in row)
                take, mass = [], 0.0
                for v, k in row:
                    if take and mass >= half:
                        break
                    take.append(k)
                    mass += v
                if len(take) == len(row):
                    take.pop()
                kept = set(take)
                return ({(i, k): 0 for _, k in row if k not in kept},
                        {(i, k): 0 for k in take})

            # hub indicators shape the subtree far more than single
            # allocations, so settle fractional y's first; after that,
            # dichotomize whole allocation rows instead of prescribing
            # one arc at a time, which keeps the tree shallow
            ys = [t for t in fracs if t[0] == t[1]]
            if ys:
                order = sorted(ys, key=lambda t: (
                    abs(t[2] - 0.5), -(inst.O[t[0]] + inst.D[t[0]]), t[0]))
                branches = [({(k, k): 1}, {(k, k): 0}) for _, k, _ in order]
            elif depth <= 3:
                rows = {}
                for i, k, v in fracs:
                    rows.setdefault(i, []).append(v)
                order = sorted(rows, key=lambda i: (
                    min(abs(v - 0.5) for v in rows[i]),
                    -(inst.O[i] + inst.D[i]), i))
                branches = [gub_children(i) for i in order]
            else:
                # deep down, forbidding single arcs moves the bound faster
                # than another balanced split would
                order = sorted(fracs, key=lambda t: (
                    abs(t[2] - 0.5), -(inst.O[t[0]] + inst.D[t[0]]),
                    t[0], t[1]))
                branches = [({(i, k): 1}, {(i, k): 0}) for i, k, _ in order]
            chosen = branches[0]
            # near the top of the tree it pays to probe a few candidate
            # branches with real child relaxations and take the one that
            # lifts the weaker side the most
            child_bounds = {}
            if (method == F2 and depth <= 2 and len(branches) > 1
                    and not out_of_time()):
                best_score = None
                for cand in branches[:3]:
                    sides = {}
                    for ci, extra in enumerate(cand):
                        trial = dict(fixes)
                        trial.update(extra)
                        filled = propagate_fixings(n, trial)
                        if filled is None:
                            sides[ci] = np.inf
                            continue
                        tr = solve_relaxation(
                            prog,
                            fixings={cat.z[key]: float(v)
                                     for key, v in filled.items()},
                            solver=solver, budget=remaining())
                        stats.relaxations += 1
                        sides[ci] = (tr.objective if tr.status == "optimal"
                                     else np.inf)
                        if out_of_time():
                            break
                    score = min(sides.values()) if sides else -np.inf
                    if best_score is None or score > best_score:
                        best_score = score
                        chosen = cand
                        child_bounds = sides
                    if out_of_time():
                        break
        else:
            unfixed = [(i, k) for i in range(n) for k in range(n)
                       if (i, k) not in fixes]
            if not unfixed:
                # a fully fixed leaf whose relaxation failed numerically:
                # its allocation is still a feasible candidate, price it
                assignment = [next(k for k in range(n) if fixes[(i, k)] == 1)
                              for i in range(n)]
                offer(price_config(tuple(assignment)))
                continue
            i, k = unfixed[0]
            chosen = ({(i, k): 1}, {(i, k): 0})
            child_bounds = {}
        for ci, extra in enumerate(chosen):
            child = dict(fixes)
            child.update(extra)
            counter += 1
            heapq.heappush(heap, (max(node_bound, child_bounds.get(ci, -np.inf)),
                                  counter, child, depth + 1))

    # wrap up
    open_bounds = [b for b, _, _, _ in heap]
    if current_bound is not None:
        open_bounds.append(current_bound)
    upper = np.inf if incumbent is None else incumbent.objective
    if interrupted and open_bounds:
        stats.best_bound = min(min(open_bounds), upper)
    elif interrupted:
        stats.best_bound = min(upper, np.inf)
    else:
        stats.best_bound = upper
    stats.cuts = len(pool)
    stats.wall_time = time.monotonic() - t0
    if incumbent is not None:
        denom = max(1.0, abs(incumbent.objective))
        stats.gap = max(0.0, (incumbent.objective - stats.best_bound) / denom)
    if interrupted:
        stats.status = (NODE_LIMIT if node_limit is not None
                        and stats.nodes >= node_limit and not out_of_time()
                        else TIME_LIMIT)
    else:
        stats.status = OPTIMAL
    history.append((stats.wall_time, stats.best_bound, stats.incumbent_value))
    if incumbent is not None:
        incumbent.meta.update({"method": method, "policy": policy,
                               "status": stats.status, "seed": seed})
    say(f"done: {stats.status} nodes={stats.nodes} cuts={stats.cuts} "
        f"bound={stats.best_bound:.6f}")
    return SolveReport(solution=incumbent, stats=stats, pool=pool,
                       method=method, history=history)


def solve_f1(inst: Instance, **kw) -> SolveReport:
    kw.setdefault("method", F1)
    return solve_bnc(inst, **kw)


def solve_f2(inst: Instance, **kw) -> SolveReport:
    kw.setdefault("method", F2)
    return solve_bnc(inst, **kw)
