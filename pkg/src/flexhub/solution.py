"""Hub-network solutions: evaluation from first principles, export, pretty print.

evaluate_solution recomputes every cost term directly from the instance data
and the proposed geometry.  It never looks at solver variables, so it can
referee any solution regardless of which formulation produced it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import norm_eval
from .instance import Instance


@dataclass
class HubSolution:
    objective: float
    open_hubs: tuple
    assignment: tuple              # assignment[i] = serving hub of node i
    hub_points: dict               # k -> np.ndarray placed location
    dilations: dict                # k -> r_k
    breakdown: dict = field(default_factory=dict)
    max_violation: float = 0.0
    violations: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.max_violation <= 1e-6

    def config_key(self):
        """Hashable (hubs, assignment) pair identifying the discrete part."""
        return (tuple(self.open_hubs), tuple(self.assignment))


def evaluate_solution(inst: Instance, assignment, hub_points, dilations,
                      open_hubs=None, meta=None) -> HubSolution:
    """Price a proposed solution and measure its feasibility violations.

    assignment maps each node to a hub index; hub_points / dilations give the
    geometry for (at least) every hub that appears.  Extra open hubs that
    serve nobody still pay their setup cost.  Violation magnitudes are
    relative where a natural scale exists.
    """
    assignment = tuple(int(a) for a in assignment)
    n = inst.n
    if len(assignment) != n:
        raise ValueError(f"assignment has {len(assignment)} entries, expected {n}")
    used = sorted(set(assignment))
    hubs = sorted(set(used) | set(int(k) for k in (open_hubs or [])))
    viol = []

    def record(tag, amount):
        if amount > 0:
            viol.append((tag, float(amount)))

    pts = {}
    radii = {}
    for k in hubs:
        if k < 0 or k >= n:
            raise ValueError(f"hub index {k} out of range")
        if k not in hub_points:
            raise ValueError(f"no placed point for hub {k}")
        x = np.asarray(hub_points[k], dtype=float)
        r = float(dilations.get(k, 0.0))
        pts[k] = x
        radii[k] = r
        cap = inst.R[k]
        record(f"hub {k}: dilation above cap", (r - cap) / (1.0 + cap))
        g = norm_eval(inst.gauges[k], x - inst.points[k])
        record(f"hub {k}: point outside neighborhood", (g - r) / (1.0 + r))

    fixed = float(sum(inst.fixed_cost[k] for k in hubs))
    dil = float(sum(inst.setup.eval(k, max(radii[k], 0.0)) for k in hubs))
    coll = 0.0
    dist = 0.0
    for i in range(n):
        k = assignment[i]
        if k not in pts:
            raise ValueError(f"node {i} assigned to hub {k} with no geometry")
        coll += inst.O[i] * inst.dist_c(inst.points[i], pts[k])
        dist += inst.D[i] * inst.dist_d(inst.points[i], pts[k])
    # aggregate flow between ordered hub pairs, then price each pair once
    W = {}
    for i in range(n):
        for j in range(n):
            if i == j or inst.flow[i, j] == 0.0:
                continue
            k, m = assignment[i], assignment[j]
            if k != m:
                W[(k, m)] = W.get((k, m), 0.0) + inst.flow[i, j]
    trans = sum(w * inst.dist_h(pts[k], pts[m]) for (k, m), w in W.items())

    breakdown = {"fixed": fixed, "dilation": dil, "collection": coll,
                 "distribution": float(dist), "transfer": float(trans)}
    total = sum(breakdown.values())
    return HubSolution(
        objective=total, open_hubs=tuple(hubs), assignment=assignment,
        hub_points=pts, dilations=radii, breakdown=breakdown,
        max_violation=max((a for _, a in viol), default=0.0),
        violations=viol, meta=dict(meta or {}))


_SOL_FORMAT = "flexhub-solution-v1"


def save_solution(inst: Instance, sol: HubSolution, path: str) -> None:
    """Write the solution with enough geometry to redraw the picture."""
    doc = {
        "format": _SOL_FORMAT,
        "objective": sol.objective,
        "breakdown": sol.breakdown,
        "assignment": list(sol.assignment),
        "hubs": [
            {"node": int(k),
             "center": inst.points[k].tolist(),
             "gauge": inst.gauges[k],
             "radius_cap": float(inst.R[k]),
             "dilation": float(sol.dilations[k]),
             "point": np.asarray(sol.hub_points[k]).tolist()}
            for k in sol.open_hubs
        ],
        "max_violation": sol.max_violation,
        "meta": sol.meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_solution(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != _SOL_FORMAT:
        raise ValueError(f"{path}: unknown solution format {doc.get('format')!r}")
    return doc


def format_solution(sol: HubSolution) -> str:
    lines = [f"objective {sol.objective:.6f}"]
    for name in ("fixed", "dilation", "collection", "distribution", "transfer"):
        lines.append(f"  {name:<13}{sol.breakdown.get(name, 0.0):14.6f}")
    lines.append("hubs: " + ", ".join(str(k) for k in sol.open_hubs))
    groups = {}
    for i, k in enumerate(sol.assignment):
        groups.setdefault(k, []).append(i)
    for k in sol.open_hubs:
        members = groups.get(k, [])
        x = np.asarray(sol.hub_points[k])
        pos = "(" + ", ".join(f"{c:.4f}" for c in x) + ")"
        lines.append(f"  hub {k} at {pos} r={sol.dilations[k]:.4f} "
                     f"serves {members}")
    if sol.violations:
        lines.append(f"max violation {sol.max_violation:.2e}")
        for tag, amt in sol.violations[:5]:
            lines.append(f"  ! {tag}: {amt:.2e}")
    return "\n".join(lines)
