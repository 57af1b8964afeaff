"""First contact: solve one scenario on the bundled ten-node dataset.

Loads ap10, instantiates a mid-grid scenario (tau=0.5, rho=0.1,
alpha=0.5, everything Euclidean), solves it with the cut-based method,
and prints where the hubs actually ended up relative to their nominal
sites.  Run from the repository root:

    python3 demos/quickstart.py
"""

import numpy as np

from flexhub import format_solution, load_raw, make_scenario, solve_f2
from flexhub.cli import resolve_dataset

name, path, fmt = resolve_dataset("ap10")
raw = load_raw(path, fmt=fmt)
inst = make_scenario(raw, tau=0.5, rho=0.1, alpha=0.5,
                     gauge="l2", norm_c="l2", norm_h="l2", dataset=name)

print(f"{name}: {inst.n} nodes, alpha={inst.alpha}")
print(f"radius caps R_k: {np.array2string(inst.R, precision=2)}")

report = solve_f2(inst, time_limit=300.0)
print(f"\nstatus {report.stats.status}, {report.stats.nodes} nodes, "
      f"{report.stats.cuts} cuts, {report.stats.wall_time:.1f}s")
print()
print(format_solution(report.solution))

print("\nhub drift from nominal site:")
for k in report.solution.open_hubs:
    a = inst.points[k]
    x = np.asarray(report.solution.hub_points[k])
    moved = float(np.linalg.norm(x - a))
    print(f"  hub {k}: |x - a| = {moved:.3f}  (r = "
          f"{report.solution.dilations[k]:.3f}, cap {inst.R[k]:.3f})")
