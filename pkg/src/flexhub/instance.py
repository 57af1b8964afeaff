"""Problem instances: raw datasets, scenario generation, serialization.

A raw dataset is (coordinates, flow matrix, fixed costs) in a small
self-describing text layout (see load_raw).  A scenario instance adds the
neighborhood radii, dilation-cost schedule, norm choices, and the economy
factor; the benchmark grid in full_grid materializes the standard sweep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    L1, L2, LINF, NORMS, chain_leq, equivalence_factor, norm_eval, _pairwise,
)

LINEAR = "linear"
POWER = "power"

# the six chain-ordered (norm_c, norm_h) pairs, and the strictly-below three
NORM_PAIRS = ((L1, L1), (L1, L2), (L1, LINF), (L2, L2), (L2, LINF), (LINF, LINF))
STRICT_PAIRS = ((L1, L2), (L1, LINF), (L2, LINF))

DEFAULT_TAUS = (0.25, 0.5, 1.0, 1.5)
DEFAULT_RHOS = (0.01, 0.1, 1.0, 2.0)
DEFAULT_ALPHAS = (0.2, 0.5, 0.8)
DEFAULT_GAUGES = (L1, L2, LINF)


@dataclass(frozen=True)
class VariableSetupCost:
    """Dilation cost g_k(r) = Lambda_k * r (linear) or Lambda_k * r^degree."""

    kind: str
    Lambda: np.ndarray
    degree: int = 1

    def eval(self, k: int, r: float) -> float:
        if self.kind == LINEAR:
            return float(self.Lambda[k] * r)
        return float(self.Lambda[k] * r ** self.degree)


@dataclass
class Instance:
    """One solvable scenario."""

    points: np.ndarray            # (n, dim) node sites a_i
    flow: np.ndarray              # (n, n) origin-destination weights w_ij >= 0
    fixed_cost: np.ndarray        # (n,) hub opening costs f_k
    R: np.ndarray                 # (n,) neighborhood radius caps
    setup: VariableSetupCost
    gauges: tuple                 # per-node gauge norms
    norm_c: str = L2
    norm_d: str = L2
    norm_h: str = L2
    alpha: float = 1.0
    meta: dict = field(default_factory=dict)
    O: np.ndarray = None          # outbound totals, derived
    D: np.ndarray = None          # inbound totals, derived

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.flow = np.asarray(self.flow, dtype=float)
        self.fixed_cost = np.asarray(self.fixed_cost, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.O = self.flow.sum(axis=1)
        self.D = self.flow.sum(axis=0)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def dist_c(self, u, v) -> float:
        return norm_eval(self.norm_c, np.asarray(u) - np.asarray(v))

    def dist_d(self, u, v) -> float:
        return norm_eval(self.norm_d, np.asarray(u) - np.asarray(v))

    def dist_h(self, u, v) -> float:
        """Discounted inter-hub distance alpha * ||u - v||_H."""
        return self.alpha * norm_eval(self.norm_h, np.asarray(u) - np.asarray(v))

    def pairwise_c(self) -> np.ndarray:
        d = self.points[:, None, :] - self.points[None, :, :]
        return _pairwise(self.norm_c, d)


@dataclass
class RawData:
    points: np.ndarray
    flow: np.ndarray
    fixed_cost: np.ndarray | None
    meta: dict


class DataError(ValueError):
    """Malformed dataset or instance file."""


def _tokens(path: str):
    toks = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            body = line.split("#", 1)[0]
            for t in body.split():
                toks.append((t, ln))
    return toks


def load_raw(path: str, fmt: str = "ap",
             default_fixed_cost: float | None = None) -> RawData:
    """Parse a raw dataset file.

    Layout: n, then n coordinate pairs, then the n*n flow matrix row by row,
    then optionally n fixed costs.  '#' starts a comment.  fmt "cab"
    normalizes the flow matrix by its total (the usual convention for that
    dataset family) and is flagged in meta.  A missing cost section is
    filled with default_fixed_cost when given, else rejected.
    """
    if fmt not in ("ap", "cab"):
        raise DataError(f"unknown dataset format {fmt!r}")
    toks = _tokens(path)
    pos = 0

    def take(what: str) -> tuple[str, int]:
        nonlocal pos
        if pos >= len(toks):
            raise DataError(f"{path}: unexpected end of file while reading {what}")
        t = toks[pos]
        pos += 1
        return t

    def number(what: str) -> float:
        t, ln = take(what)
        try:
            return float(t)
        except ValueError:
            raise DataError(f"{path}:{ln}: expected a number for {what}, got {t!r}")

    t, ln = take("node count")
    try:
        n = int(t)
    except ValueError:
        raise DataError(f"{path}:{ln}: node count must be an integer, got {t!r}")
    if n <= 0:
        raise DataError(f"{path}:{ln}: node count must be positive")

    pts = np.array([[number(f"coordinate of node {i}") for _ in range(2)]
                    for i in range(n)])
    flow = np.array([[number(f"flow[{i},{j}]") for j in range(n)]
                     for i in range(n)])
    neg = np.argwhere(flow < 0)
    if neg.size:
        i, j = neg[0]
        raise DataError(f"{path}: negative flow at ({i},{j})")

    remaining = len(toks) - pos
    meta = {"format": fmt, "path": str(path), "normalized": False,
            "cost_source": "file"}
    if remaining == 0:
        if default_fixed_cost is None:
            raise DataError(f"{path}: no fixed-cost section and no default given")
        fc = np.full(n, float(default_fixed_cost))
        meta["cost_source"] = "uniform-default"
    elif remaining == n:
        fc = np.array([number(f"fixed cost of node {k}") for k in range(n)])
    else:
        raise DataError(f"{path}: expected {n} fixed costs, found {remaining} tokens")

    if fmt == "cab":
        total = flow.sum()
        if total <= 0:
            raise DataError(f"{path}: cab flow matrix sums to zero")
        flow = flow / total
        meta["normalized"] = True
    return RawData(pts, flow, fc, meta)


def make_scenario(raw: RawData, *, tau: float, rho: float, alpha: float,
                  gauge: str, norm_c: str, norm_h: str, norm_d: str | None = None,
                  setup_kind: str = LINEAR, degree: int = 1,
                  dataset: str = "", extra_meta: dict | None = None) -> Instance:
    """Instantiate one scenario from a raw dataset.

    R_k = tau * min_{i != k} d^C(a_i, a_k); Lambda_k = rho * f_k.
    """
    if norm_d is None:
        norm_d = norm_c
    for nm in (gauge, norm_c, norm_h, norm_d):
        if nm not in NORMS:
            raise DataError(f"unknown norm {nm!r}")
    if not (0.0 < alpha <= 1.0):
        raise DataError(f"alpha must lie in (0, 1], got {alpha}")
    if tau < 0 or rho < 0:
        raise DataError("tau and rho must be nonnegative")
    if alpha == 1.0 and (norm_h == norm_c or not chain_leq(norm_h, norm_c)):
        raise DataError(
            f"alpha=1 requires the transfer norm strictly below the service norm "
            f"in the chain; got ({norm_c}, {norm_h})")

    pts = np.asarray(raw.points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = _pairwise(norm_c, diff)
    np.fill_diagonal(dist, np.inf)
    n = pts.shape[0]
    R = tau * dist.min(axis=1) if n > 1 else np.zeros(1)
    Lam = rho * np.asarray(raw.fixed_cost, dtype=float)
    meta = {"dataset": dataset or raw.meta.get("path", ""), "tau": tau,
            "rho": rho, **({} if extra_meta is None else extra_meta)}
    if raw.meta:
        meta.setdefault("source", dict(raw.meta))
    inst = Instance(
        points=pts, flow=raw.flow, fixed_cost=raw.fixed_cost, R=R,
        setup=VariableSetupCost(setup_kind, Lam, degree),
        gauges=tuple(gauge for _ in range(n)),
        norm_c=norm_c, norm_d=norm_d, norm_h=norm_h, alpha=alpha, meta=meta)
    problems = validate(inst)
    if problems:
        raise DataError("; ".join(problems))
    return inst


def full_grid(raw: RawData, dataset: str = "", *,
              taus=DEFAULT_TAUS, rhos=DEFAULT_RHOS, alphas=DEFAULT_ALPHAS,
              gauges=DEFAULT_GAUGES, pairs=NORM_PAIRS,
              include_unit_alpha: bool = False) -> list[Instance]:
    """Materialize the benchmark sweep for one dataset.

    The default grid is 6 norm pairs x 3 alphas x 3 gauges x 4 taus x
    4 rhos = 864 scenarios.  include_unit_alpha adds the alpha=1 slice,
    which only admits the three strictly-ordered norm pairs (+144).
    """
    out = []
    alpha_pairs = [(a, p) for a in alphas for p in pairs]
    if include_unit_alpha:
        alpha_pairs += [(1.0, p) for p in pairs if p in STRICT_PAIRS]
    for alpha, (nc, nh) in alpha_pairs:
        for gauge in gauges:
            for tau in taus:
                for rho in rhos:
                    out.append(make_scenario(
                        raw, tau=tau, rho=rho, alpha=alpha, gauge=gauge,
                        norm_c=nc, norm_h=nh, dataset=dataset,
                        extra_meta={"alpha": alpha, "gauge": gauge,
                                    "norm_c": nc, "norm_h": nh}))
    return out


def validate(inst: Instance) -> list[str]:
    """Structural and economic sanity checks; returns human-readable problems."""
    problems = []
    n = inst.n
    if inst.flow.shape != (n, n):
        problems.append(f"flow matrix shape {inst.flow.shape} != ({n}, {n})")
        return problems
    for arr, name in ((inst.fixed_cost, "fixed_cost"), (inst.R, "R"),
                      (inst.setup.Lambda, "Lambda")):
        if np.asarray(arr).shape != (n,):
            problems.append(f"{name} has shape {np.asarray(arr).shape}, expected ({n},)")
    neg = np.argwhere(inst.flow < 0)
    if neg.size:
        i, j = neg[0]
        problems.append(f"negative flow w[{i},{j}] = {inst.flow[i, j]}")
    if np.any(inst.R < 0):
        problems.append("negative neighborhood radius")
    if np.any(inst.fixed_cost < 0):
        problems.append("negative fixed cost")
    if np.any(inst.setup.Lambda < 0):
        problems.append("negative dilation cost rate")
    if inst.setup.kind not in (LINEAR, POWER):
        problems.append(f"unknown setup kind {inst.setup.kind!r}")
    if inst.setup.kind == POWER and inst.setup.degree < 1:
        problems.append("power setup degree must be >= 1")
    if not (0.0 < inst.alpha <= 1.0):
        problems.append(f"alpha {inst.alpha} outside (0, 1]")
    for nm in (inst.norm_c, inst.norm_d, inst.norm_h, *inst.gauges):
        if nm not in NORMS:
            problems.append(f"unknown norm {nm!r}")
            return problems
    # economy of scale: alpha*||v||_H <= ||v||_C and <= ||v||_D for all v
    dim = inst.dim
    for nm, label in ((inst.norm_c, "collection"), (inst.norm_d, "distribution")):
        ratio = inst.alpha * equivalence_factor(nm, inst.norm_h, dim)
        if ratio > 1.0 + 1e-9:
            problems.append(
                f"economy-of-scale violation: alpha*||v||_{inst.norm_h} can exceed "
                f"the {label} norm ||v||_{nm} (worst ratio {ratio:.3f})")
    if len(inst.O) == n and not np.allclose(inst.O, inst.flow.sum(axis=1)):
        problems.append("outbound totals O inconsistent with flow matrix")
    if len(inst.D) == n and not np.allclose(inst.D, inst.flow.sum(axis=0)):
        problems.append("inbound totals D inconsistent with flow matrix")
    return problems


# -- canonical instance files -------------------------------------------------

_FORMAT = "flexhub-instance-v1"


def save_instance(inst: Instance, path: str) -> None:
    """Write the canonical JSON form (deterministic for a given instance)."""
    doc = {
        "format": _FORMAT,
        "n": inst.n,
        "dim": inst.dim,
        "points": inst.points.tolist(),
        "flow": inst.flow.tolist(),
        "fixed_cost": inst.fixed_cost.tolist(),
        "R": inst.R.tolist(),
        "setup": {"kind": inst.setup.kind,
                  "Lambda": np.asarray(inst.setup.Lambda).tolist(),
                  "degree": inst.setup.degree},
        "gauges": list(inst.gauges),
        "norms": {"collection": inst.norm_c, "distribution": inst.norm_d,
                  "transfer": inst.norm_h},
        "alpha": inst.alpha,
        "meta": _plain(inst.meta),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_instance(path: str) -> Instance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: not valid JSON ({e})")
    if doc.get("format") != _FORMAT:
        raise DataError(f"{path}: unknown instance format {doc.get('format')!r}")
    try:
        setup = VariableSetupCost(doc["setup"]["kind"],
                                  np.array(doc["setup"]["Lambda"], dtype=float),
                                  int(doc["setup"].get("degree", 1)))
        inst = Instance(
            points=np.array(doc["points"], dtype=float),
            flow=np.array(doc["flow"], dtype=float),
            fixed_cost=np.array(doc["fixed_cost"], dtype=float),
            R=np.array(doc["R"], dtype=float),
            setup=setup,
            gauges=tuple(doc["gauges"]),
            norm_c=doc["norms"]["collection"],
            norm_d=doc["norms"]["distribution"],
            norm_h=doc["norms"]["transfer"],
            alpha=float(doc["alpha"]),
            meta=doc.get("meta", {}),
        )
    except (KeyError, TypeError) as e:
        raise DataError(f"{path}: missing or malformed field ({e})")
    problems = validate(inst)
    if problems:
        raise DataError(f"{path}: " + "; ".join(problems))
    return inst


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def grid_size(n_pairs: int, n_alphas: int, n_gauges: int, n_taus: int,
              n_rhos: int, strict_pairs_at_unit_alpha: int = 0) -> int:
    """Scenario count formula for a sweep (unit-alpha slice counted separately)."""
    return (n_pairs * n_alphas + strict_pairs_at_unit_alpha) \
        * n_gauges * n_taus * n_rhos
