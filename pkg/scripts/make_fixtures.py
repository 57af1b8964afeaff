"""Regenerate the bundled datasets under src/flexhub/data/.

The files are checked in; this script exists so the numbers are
reproducible rather than mysterious.  Coordinates for ap10 are a fixed
reference layout: five twin towns, each twin pair a short hop apart and
the pairs well separated, three pairs in a western band and two in an
eastern one.  Everything else is drawn from seeded generators.  Flows
follow a gravity model: demand between two sites grows with the product
of their sizes and decays with distance.  Fixed costs scale with site
size, so busy sites are pricier to open, and the overall cost level is
tuned so that benchmark scenarios open more than one hub across the
whole (tau, rho, alpha) sweep.

Run from the repository root:

    python3 scripts/make_fixtures.py
"""

import pathlib

import numpy as np

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "flexhub" / "data"

AP10_POINTS = [
    (18.312478445, 16.104522381),
    (19.878203127, 17.240169442),
    (16.733150968, 34.351127076),
    (18.245009335, 33.042118606),
    (21.508274161, 50.272953814),
    (23.094087125, 49.106231388),
    (39.752311209, 21.662140518),
    (41.207694471, 22.980805933),
    (42.633456782, 43.864122997),
    (44.091237564, 42.517604253),
]


def gravity_flow(points, sizes, rng, *, scale, offset, jitter=0.15,
                 symmetric=False, decimals=0, decay=1.0, damping=None):
    """Gravity demand matrix: w_ij ~ s_i s_j / (offset + d_ij)^decay.

    damping, when given, multiplies entries where the community labels of
    the endpoints differ; that keeps most traffic local and the long-haul
    share modest, the usual shape of postal and passenger data.
    """
    pts = np.asarray(points, dtype=float)
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                 pts[:, None, 1] - pts[None, :, 1])
    w = scale * np.outer(sizes, sizes) / (offset + d) ** decay
    w *= 1.0 + jitter * rng.uniform(-1.0, 1.0, w.shape)
    if damping is not None:
        factor, labels = damping
        labels = np.asarray(labels)
        w = np.where(labels[:, None] != labels[None, :], factor * w, w)
    if symmetric:
        w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    return np.round(np.maximum(w, 0.0), decimals)


def write_dataset(name, points, flow, fixed_costs, comment):
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    lines = [f"# {line}" for line in comment.splitlines()]
    lines.append(str(n))
    for x, y in pts:
        lines.append(f"{x:.9f} {y:.9f}")
    for row in np.asarray(flow, dtype=float):
        lines.append(" ".join(f"{v:g}" for v in row))
    if fixed_costs is not None:
        for f in np.asarray(fixed_costs, dtype=float):
            lines.append(f"{f:g}")
    path = DATA_DIR / f"{name}.txt"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({n} nodes, cost section: {fixed_costs is not None})")


def make_ap10():
    rng = np.random.default_rng(20240)
    # nodes 0-5 form the western band, 6-9 the eastern one; nodes 2 and 8
    # are the regional centers of their bands
    bands = np.array([0, 0, 0, 0, 0, 0, 1, 1, 1, 1])
    sizes = rng.uniform(35.0, 70.0, 10)
    sizes[2] = 160.0
    sizes[8] = 150.0
    flow = gravity_flow(AP10_POINTS, sizes, rng, scale=1.2, offset=6.0,
                        decay=1.6, damping=(0.3, bands))
    fixed = np.round(23000.0 * (0.80 + 0.20 * sizes / sizes.mean()), 0)
    write_dataset("ap10", AP10_POINTS, flow, fixed,
                  "ap10: ten postal districts, five twin towns in two bands.\n"
                  "Gravity flows, size-dependent fixed costs.")


def make_ap20():
    rng = np.random.default_rng(20241)
    base = np.array([(dx, dy) for dy in range(5) for dx in range(4)], dtype=float)
    pts = np.column_stack([16.0 + base[:, 0] * 9.0, 12.0 + base[:, 1] * 10.5])
    pts += rng.uniform(-2.8, 2.8, pts.shape)
    sizes = rng.uniform(40.0, 105.0, 20)
    flow = gravity_flow(pts, sizes, rng, scale=0.55, offset=20.0)
    fixed = np.round(40000.0 + 24000.0 * (sizes / sizes.mean()) ** 1.5, 0)
    write_dataset("ap20", pts, flow, fixed,
                  "ap20: twenty postal districts on a jittered grid.\n"
                  "Gravity flows, size-dependent fixed costs.")


def make_cab10():
    rng = np.random.default_rng(20242)
    pts = np.column_stack([rng.uniform(0.0, 95.0, 10),
                           rng.uniform(0.0, 60.0, 10)])
    sizes = rng.uniform(30.0, 140.0, 10)
    flow = gravity_flow(pts, sizes, rng, scale=4.0, offset=35.0,
                        symmetric=True, decimals=0)
    # flows are normalized to total 1 at load time, so the interesting
    # fixed-cost scale sits near the total transport cost, tens not thousands
    fixed = np.round(9.0 + 7.0 * (sizes / sizes.mean()) ** 1.5, 2)
    write_dataset("cab10", pts, flow, fixed,
                  "cab10: ten cities, symmetric passenger flows.\n"
                  "Flows are normalized by their total at load time.")


def make_cab25():
    rng = np.random.default_rng(20243)
    pts = np.column_stack([rng.uniform(0.0, 100.0, 25),
                           rng.uniform(0.0, 65.0, 25)])
    sizes = rng.uniform(25.0, 150.0, 25)
    flow = gravity_flow(pts, sizes, rng, scale=3.0, offset=40.0,
                        symmetric=True, decimals=0)
    write_dataset("cab25", pts, flow, None,
                  "cab25: twenty-five cities, symmetric passenger flows.\n"
                  "No fixed-cost section; load with a uniform default.")


if __name__ == "__main__":
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    make_ap10()
    make_ap20()
    make_cab10()
    make_cab25()
