"""Benchmark driver.

Four subcommands cover the benchmark workflow end to end::

    flexhub convert  RAW --format {ap|cab} --out FILE   # canonical dataset
    flexhub run      CONFIG                             # batch sweep -> CSV
    flexhub aggregate RESULTS --out DIR                 # pivot tables
    flexhub solve    DATASET [scenario flags]           # one run + artifacts

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.

``run`` reads a structured-text config (INI syntax, one ``[run]`` section)
naming datasets, grids, methods, a per-run time limit (default 7200 s) and
an output directory.  Every run becomes one CSV record; a crash inside a
run is recorded as status ERROR and the batch keeps going.  Records are
written in a deterministic order, so identical configs reproduce identical
objective and cut columns (time columns vary with the machine).

``aggregate`` pivots a results CSV into the benchmark's reporting layout:
a time table grouped by (n, dataset, alpha, norm pair) with per-gauge mean
times and unsolved percentages for each method, and a cut table with one
row per (alpha, strictly ordered norm pair) and one column per
(dataset, n, gauge) holding the mean cut count of the cut-based method.
A third file keeps per-cell means for every group, including the equal
norm pairs the headline tables leave out.
"""

import argparse
import configparser
import csv
import importlib.resources
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, fields

import numpy as np

from .bnc import solve_bnc
from .instance import (
    DEFAULT_ALPHAS,
    DEFAULT_GAUGES,
    DEFAULT_RHOS,
    DEFAULT_TAUS,
    DataError,
    NORM_PAIRS,
    STRICT_PAIRS,
    load_raw,
    make_scenario,
    save_instance,
)
from .solution import save_solution

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

SCHEMA_LINE = "# schema: flexhub-results-v1"
METHOD_LABELS = {"f1": "F1", "f2": "F2-BnC"}
_FAIL_STATUSES = ("error", "infeasible", "numerical_limit")


@dataclass
class RunRecord:
    """One row of the results CSV; column order is the field order."""
    dataset: str
    n: int
    alpha: float
    norm_C: str
    norm_H: str
    gauge: str
    tau: float
    rho: float
    method: str
    time_s: float
    status: str
    objective: float
    gap: float
    cuts: int
    nodes: int


RECORD_FIELDS = [f.name for f in fields(RunRecord)]


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; the contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- dataset resolution --------------------------------------------------------

def resolve_dataset(token: str, fmt: str | None = None):
    """Map a dataset token to (name, path, format).

    Accepts a bundled name (``ap10``), a file path, or ``path:fmt``.  The
    format, when not given, is taken from the name prefix: ``cab*`` files
    hold normalized symmetric flow data, everything else is read as-is.
    """
    path = token
    if ":" in token and not os.path.exists(token):
        path, _, suffix = token.rpartition(":")
        if suffix in ("ap", "cab"):
            fmt = fmt or suffix
        else:
            path = token
    if not os.path.exists(path):
        bundled = importlib.resources.files("flexhub") / "data" / f"{token}.txt"
        if bundled.is_file():
            path = str(bundled)
        else:
            raise DataError(f"dataset {token!r} is neither a file nor a bundled name")
    name = os.path.splitext(os.path.basename(path))[0]
    if fmt is None:
        fmt = "cab" if name.startswith("cab") else "ap"
    return name, path, fmt


def _load(token, fmt=None, default_fixed_cost=None):
    name, path, use_fmt = resolve_dataset(token, fmt)
    raw = load_raw(path, fmt=use_fmt, default_fixed_cost=default_fixed_cost)
    return name, raw


# -- convert -------------------------------------------------------------------

def cmd_convert(args) -> int:
    name, raw = _load(args.input, args.format, args.default_fixed_cost)
    n = raw.points.shape[0]
    out = args.out or f"{name}-canonical.txt"
    lines = [f"# canonical dataset {name} (format {raw.meta['format']},"
             f" normalized {str(raw.meta['normalized']).lower()},"
             f" costs {raw.meta['cost_source']})", str(n)]
    for x, y in raw.points:
        lines.append(f"{float(x)!r} {float(y)!r}")
    for row in raw.flow:
        lines.append(" ".join(repr(float(v)) for v in row))
    for f in raw.fixed_cost:
        lines.append(repr(float(f)))
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out} ({n} nodes)")
    return EXIT_OK


# -- scenario construction shared by run and solve ------------------------------

def _scenario(raw, spec, dataset):
    return make_scenario(
        raw, tau=spec["tau"], rho=spec["rho"], alpha=spec["alpha"],
        gauge=spec["gauge"], norm_c=spec["norm_C"], norm_h=spec["norm_H"],
        setup_kind=spec.get("setup", "linear"), degree=spec.get("degree", 1),
        dataset=dataset)


def _slug(dataset, spec, method):
    def num(v):
        return f"{v:g}".replace(".", "p")
    return (f"{dataset}-{spec['norm_C']}{spec['norm_H']}-{spec['gauge']}"
            f"-a{num(spec['alpha'])}-t{num(spec['tau'])}-r{num(spec['rho'])}"
            f"-{method}")


def _execute(task):
    """Run one (scenario, method) pair; returns the record.

    When sol_dir is set the solution file is written here, from the worker:
    every run has a distinct file name, so the writes never collide, and the
    shared results CSV stays with the parent process.
    """
    (token, fmt, default_fc, spec, method, policy, time_limit, seed,
     sol_dir) = task
    name, raw = _load(token, fmt, default_fc)
    record = RunRecord(
        dataset=name, n=raw.points.shape[0], alpha=spec["alpha"],
        norm_C=spec["norm_C"], norm_H=spec["norm_H"], gauge=spec["gauge"],
        tau=spec["tau"], rho=spec["rho"], method=METHOD_LABELS[method],
        time_s=0.0, status="ERROR", objective=float("nan"),
        gap=float("nan"), cuts=0, nodes=0)
    t0 = time.monotonic()
    try:
        inst = _scenario(raw, spec, name)
        rep = solve_bnc(inst, method=method, policy=policy,
                        time_limit=time_limit, seed=seed)
        record.time_s = round(time.monotonic() - t0, 3)
        record.status = rep.stats.status.upper()
        record.cuts = rep.stats.cuts
        record.nodes = rep.stats.nodes
        if rep.solution is not None:
            record.objective = rep.solution.objective
            record.gap = rep.stats.gap
            if sol_dir is not None:
                save_solution(inst, rep.solution, os.path.join(
                    sol_dir, _slug(name, spec, method) + ".sol"))
    except Exception:
        record.time_s = round(time.monotonic() - t0, 3)
        record.status = "ERROR"
        print(f"run {_slug(name, spec, method)} failed:\n{traceback.format_exc()}",
              file=sys.stderr)
    return record


def _record_sort_key(r: RunRecord):
    return (r.dataset, r.n, r.alpha, r.norm_C, r.norm_H, r.gauge,
            r.tau, r.rho, r.method)


def write_results(records, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in sorted(records, key=_record_sort_key):
            w.writerow([r.dataset, r.n, f"{r.alpha:g}", r.norm_C, r.norm_H,
                        r.gauge, f"{r.tau:g}", f"{r.rho:g}", r.method,
                        f"{r.time_s:.3f}", r.status,
                        "" if np.isnan(r.objective) else f"{r.objective:.10g}",
                        "" if np.isnan(r.gap) else f"{r.gap:.6g}",
                        r.cuts, r.nodes])


def read_results(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != SCHEMA_LINE:
            raise DataError(f"{path}: expected leading '{SCHEMA_LINE}' line")
        reader = csv.DictReader(fh)
        missing = set(RECORD_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            records.append(RunRecord(
                dataset=row["dataset"], n=int(row["n"]),
                alpha=float(row["alpha"]), norm_C=row["norm_C"],
                norm_H=row["norm_H"], gauge=row["gauge"],
                tau=float(row["tau"]), rho=float(row["rho"]),
                method=row["method"], time_s=float(row["time_s"]),
                status=row["status"],
                objective=float(row["objective"]) if row["objective"] else float("nan"),
                gap=float(row["gap"]) if row["gap"] else float("nan"),
                cuts=int(row["cuts"]), nodes=int(row["nodes"])))
    return records


# -- run -----------------------------------------------------------------------

def _parse_list(text, conv=float):
    return tuple(conv(tok.strip()) for tok in text.split(",") if tok.strip())


def _parse_pairs(text):
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split("-")
        if len(parts) != 2:
            raise DataError(f"bad norm pair {tok!r}; expected like 'l1-l2'")
        pairs.append((parts[0], parts[1]))
    return tuple(pairs)


def load_config(path):
    if not os.path.exists(path):
        raise DataError(f"config file {path!r} not found")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as e:
        raise DataError(f"{path}: {e}")
    if not parser.has_section("run"):
        raise DataError(f"{path}: missing [run] section")
    sec = parser["run"]
    if "datasets" not in sec:
        raise DataError(f"{path}: [run] must name at least one dataset")
    try:
        cfg = {
            "datasets": [t.strip() for t in sec["datasets"].split(",") if t.strip()],
            "methods": [t.strip().lower()
                        for t in sec.get("methods", "f1, f2").split(",") if t.strip()],
            "policy": sec.get("policy", "all"),
            "time_limit": sec.getfloat("time_limit", 7200.0),
            "workers": sec.getint("workers", 1),
            "seed": sec.getint("seed", 0),
            "out": sec.get("out", "results"),
            "default_fixed_cost": sec.getfloat("default_fixed_cost", fallback=None),
            "taus": _parse_list(sec.get("taus", "")) or DEFAULT_TAUS,
            "rhos": _parse_list(sec.get("rhos", "")) or DEFAULT_RHOS,
            "alphas": _parse_list(sec.get("alphas", "")) or DEFAULT_ALPHAS,
            "gauges": _parse_list(sec.get("gauges", ""), str) or DEFAULT_GAUGES,
            "pairs": (_parse_pairs(sec["pairs"]) if "pairs" in sec else NORM_PAIRS),
            "include_unit_alpha": sec.getboolean("include_unit_alpha", False),
            "save_solutions": sec.getboolean("save_solutions", True),
        }
    except ValueError as e:
        raise DataError(f"{path}: bad value in [run] ({e})")
    for m in cfg["methods"]:
        if m not in METHOD_LABELS:
            raise DataError(f"{path}: unknown method {m!r}")
    if cfg["policy"] not in ("all", "most-violated"):
        raise DataError(f"{path}: unknown policy {cfg['policy']!r}")
    return cfg


def _grid_specs(cfg):
    """Scenario dicts in deterministic sweep order."""
    alpha_pairs = [(a, p) for a in cfg["alphas"] for p in cfg["pairs"]]
    if cfg["include_unit_alpha"]:
        alpha_pairs += [(1.0, p) for p in cfg["pairs"] if p in STRICT_PAIRS]
    return [
        {"alpha": a, "norm_C": nc, "norm_H": nh, "gauge": g, "tau": t, "rho": r}
        for a, (nc, nh) in alpha_pairs
        for g in cfg["gauges"]
        for t in cfg["taus"]
        for r in cfg["rhos"]
    ]


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.time_limit is not None:
        cfg["time_limit"] = args.time_limit
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["out"] = args.out
    if args.policy is not None:
        cfg["policy"] = args.policy
    if args.method is not None:
        cfg["methods"] = [args.method]

    os.makedirs(cfg["out"], exist_ok=True)
    sol_dir = os.path.join(cfg["out"], "solutions")
    if cfg["save_solutions"]:
        os.makedirs(sol_dir, exist_ok=True)

    tasks = []
    for token in cfg["datasets"]:
        # fail early on unknown datasets rather than inside the pool
        resolve_dataset(token)
        for spec in _grid_specs(cfg):
            for method in cfg["methods"]:
                tasks.append((token, None, cfg["default_fixed_cost"], spec,
                              method, cfg["policy"], cfg["time_limit"],
                              cfg["seed"],
                              sol_dir if cfg["save_solutions"] else None))
    print(f"{len(tasks)} runs ({len(cfg['datasets'])} dataset(s), "
          f"{len(cfg['methods'])} method(s), time limit {cfg['time_limit']:g} s, "
          f"{cfg['workers']} worker(s))")

    records = []
    done = 0

    def absorb(record):
        nonlocal done
        records.append(record)
        done += 1
        print(f"[{done}/{len(tasks)}] {record.dataset} {record.method} "
              f"a={record.alpha:g} {record.norm_C}/{record.norm_H} "
              f"g={record.gauge} t={record.tau:g} r={record.rho:g}: "
              f"{record.status} obj={record.objective:.6g} "
              f"cuts={record.cuts} {record.time_s:.1f}s", flush=True)

    if cfg["workers"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            futures = [pool.submit(_execute, t) for t in tasks]
            for fut in as_completed(futures):
                absorb(fut.result())
    else:
        for t in tasks:
            absorb(_execute(t))

    out_csv = os.path.join(cfg["out"], "results.csv")
    write_results(records, out_csv)
    print(f"wrote {out_csv} ({len(records)} records)")
    return EXIT_OK


# -- aggregate -------------------------------------------------------------------

def _mean(vals):
    vals = list(vals)
    return sum(vals) / len(vals) if vals else float("nan")


def _fmt(v, nd=2):
    return "" if (isinstance(v, float) and np.isnan(v)) else f"{v:.{nd}f}"


def aggregate_tables(records):
    """Pivot records into (time_rows, cut_rows, cell_rows).

    time rows: one per (n, dataset, alpha, norm pair); per gauge and method
    the mean time over all runs and the percentage not solved to optimality.
    cut rows: one per (alpha, strict norm pair); per (dataset, n, gauge) the
    mean cut count of the cut-based method.  cell rows: the full per-group
    means behind both tables, equal norm pairs included.
    """
    by_time, by_cell = {}, {}
    for r in records:
        tk = (r.n, r.dataset, r.alpha, r.norm_C, r.norm_H)
        by_time.setdefault(tk, {}).setdefault((r.gauge, r.method), []).append(r)
        ck = (r.alpha, r.norm_C, r.norm_H, r.dataset, r.n, r.gauge, r.method)
        by_cell.setdefault(ck, []).append(r)

    gauges = sorted({r.gauge for r in records})
    methods = sorted({r.method for r in records})
    time_rows = [["n", "dataset", "alpha", "norm_C", "norm_H"]
                 + [f"{what}_{m}_{g}"
                    for g in gauges for m in methods
                    for what in ("time", "US")]]
    for tk in sorted(by_time):
        row = [tk[0], tk[1], f"{tk[2]:g}", tk[3], tk[4]]
        for g in gauges:
            for m in methods:
                runs = by_time[tk].get((g, m), [])
                us = (100.0 * sum(1 for r in runs if r.status != "OPTIMAL")
                      / len(runs)) if runs else float("nan")
                row += [_fmt(_mean([r.time_s for r in runs])), _fmt(us, 1)]
        time_rows.append(row)

    cut_method = "F2-BnC" if "F2-BnC" in methods else methods[-1]
    col_keys = sorted({(r.dataset, r.n, r.gauge) for r in records})
    cut_rows = [["alpha", "norm_C", "norm_H"]
                + [f"cuts_{d}_{n}_{g}" for d, n, g in col_keys]]
    row_keys = sorted({(r.alpha, r.norm_C, r.norm_H) for r in records
                       if (r.norm_C, r.norm_H) in STRICT_PAIRS})
    for a, nc, nh in row_keys:
        row = [f"{a:g}", nc, nh]
        for d, n, g in col_keys:
            runs = by_cell.get((a, nc, nh, d, n, g, cut_method), [])
            row.append(_fmt(_mean([r.cuts for r in runs]), 1))
        cut_rows.append(row)

    cell_rows = [["alpha", "norm_C", "norm_H", "dataset", "n", "gauge",
                  "method", "runs", "mean_time_s", "US_pct", "mean_cuts",
                  "mean_nodes"]]
    for ck in sorted(by_cell, key=lambda k: tuple(map(str, k))):
        runs = by_cell[ck]
        us = 100.0 * sum(1 for r in runs if r.status != "OPTIMAL") / len(runs)
        cell_rows.append([f"{ck[0]:g}", ck[1], ck[2], ck[3], ck[4], ck[5],
                          ck[6], len(runs),
                          _fmt(_mean([r.time_s for r in runs])),
                          _fmt(us, 1),
                          _fmt(_mean([r.cuts for r in runs]), 1),
                          _fmt(_mean([r.nodes for r in runs]), 1)])
    return time_rows, cut_rows, cell_rows


def cmd_aggregate(args) -> int:
    records = read_results(args.results)
    if not records:
        raise DataError(f"{args.results}: no records")
    out = args.out or os.path.dirname(os.path.abspath(args.results))
    os.makedirs(out, exist_ok=True)
    time_rows, cut_rows, cell_rows = aggregate_tables(records)
    for fname, rows in (("table_times.csv", time_rows),
                        ("table_cuts.csv", cut_rows),
                        ("table_cells.csv", cell_rows)):
        path = os.path.join(out, fname)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh).writerows(rows)
        print(f"wrote {path} ({len(rows) - 1} rows)")
    return EXIT_OK


# -- solve -----------------------------------------------------------------------

_GAUGE_SHAPES = {"l1": "diamond", "l2": "disk", "linf": "square"}


def geometry_dump(inst, sol):
    """Flat geometry rows describing one solution.

    One row per node, open hub, hub neighborhood (shape from the gauge,
    radius r_k), allocation segment, and inter-hub segment.
    """
    def fmt(v):
        return repr(float(v))

    rows = [["kind", "a", "b", "x1", "y1", "x2", "y2", "r", "shape"]]
    for i, (x, y) in enumerate(inst.points):
        rows.append(["node", i, "", fmt(x), fmt(y), "", "", "", ""])
    for k in sol.open_hubs:
        hx, hy = sol.hub_points[k]
        ax, ay = inst.points[k]
        rows.append(["hub", k, "", fmt(hx), fmt(hy), "", "", "", ""])
        rows.append(["neighborhood", k, "", fmt(ax), fmt(ay), "", "",
                     fmt(sol.dilations[k]), _GAUGE_SHAPES[inst.gauges[k]]])
    for i, k in enumerate(sol.assignment):
        if i == k:
            continue
        x1, y1 = inst.points[i]
        x2, y2 = sol.hub_points[k]
        rows.append(["allocation", i, k, fmt(x1), fmt(y1),
                     fmt(x2), fmt(y2), "", ""])
    hubs = sorted(sol.open_hubs)
    for a in range(len(hubs)):
        for b in range(a + 1, len(hubs)):
            k, m = hubs[a], hubs[b]
            x1, y1 = sol.hub_points[k]
            x2, y2 = sol.hub_points[m]
            rows.append(["hub-arc", k, m, fmt(x1), fmt(y1),
                         fmt(x2), fmt(y2), "", ""])
    return rows


def cmd_solve(args) -> int:
    name, raw = _load(args.instance, args.format, args.default_fixed_cost)
    spec = {"alpha": args.alpha, "norm_C": args.norm_c, "norm_H": args.norm_h,
            "gauge": args.gauge, "tau": args.tau, "rho": args.rho,
            "setup": args.setup, "degree": args.degree}
    inst = _scenario(raw, spec, name)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    if args.save_instance:
        save_instance(inst, os.path.join(out, _slug(name, spec, args.method)
                                         + ".instance.json"))

    rep = solve_bnc(inst, method=args.method, policy=args.policy,
                    time_limit=args.time_limit, seed=args.seed)
    status = rep.stats.status
    print(f"status {status.upper()}  nodes {rep.stats.nodes}  "
          f"cuts {rep.stats.cuts}  time {rep.stats.wall_time:.2f}s")
    if rep.solution is None or status in _FAIL_STATUSES:
        print(f"no usable solution (status {status.upper()})", file=sys.stderr)
        return EXIT_SOLVER
    sol = rep.solution
    print(f"objective {sol.objective:.6f}  gap {rep.stats.gap:.3g}  "
          f"hubs {sorted(sol.open_hubs)}")

    base = os.path.join(out, _slug(name, spec, args.method))
    save_solution(inst, sol, base + ".sol")
    print(f"wrote {base}.sol")
    if args.geometry:
        with open(base + ".geom.csv", "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh).writerows(geometry_dump(inst, sol))
        print(f"wrote {base}.geom.csv")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flexhub",
                description="Hub location with variable-size neighborhoods: "
                            "benchmark driver")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("convert", help="normalize a raw dataset file")
    c.add_argument("input", help="dataset path, path:fmt, or bundled name")
    c.add_argument("--format", choices=("ap", "cab"), default=None)
    c.add_argument("--default-fixed-cost", type=float, default=None,
                   help="fixed cost used when the file has no cost section")
    c.add_argument("--out", default=None, help="output path")
    c.set_defaults(func=cmd_convert)

    r = sub.add_parser("run", help="execute a benchmark sweep from a config")
    r.add_argument("config", help="INI config with a [run] section")
    r.add_argument("--method", choices=("f1", "f2"), default=None,
                   help="restrict the sweep to one method")
    r.add_argument("--policy", choices=("all", "most-violated"), default=None)
    r.add_argument("--time-limit", type=float, default=None, metavar="S")
    r.add_argument("--workers", type=int, default=None, metavar="K")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None, metavar="DIR")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("aggregate", help="pivot a results CSV into tables")
    a.add_argument("results", help="results.csv produced by 'run'")
    a.add_argument("--out", default=None, metavar="DIR")
    a.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("solve", help="solve one scenario")
    s.add_argument("instance", help="dataset path, path:fmt, or bundled name")
    s.add_argument("--format", choices=("ap", "cab"), default=None)
    s.add_argument("--default-fixed-cost", type=float, default=None)
    s.add_argument("--method", choices=("f1", "f2"), default="f2")
    s.add_argument("--policy", choices=("all", "most-violated"), default="all")
    s.add_argument("--time-limit", type=float, default=7200.0, metavar="S")
    s.add_argument("--workers", type=int, default=1, metavar="K",
                   help="accepted for interface symmetry; a single solve "
                        "runs on one worker")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None, metavar="DIR")
    s.add_argument("--tau", type=float, default=0.5)
    s.add_argument("--rho", type=float, default=0.1)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--gauge", choices=("l1", "l2", "linf"), default="l2")
    s.add_argument("--norm-c", choices=("l1", "l2", "linf"), default="l2")
    s.add_argument("--norm-h", choices=("l1", "l2", "linf"), default="l2")
    s.add_argument("--setup", choices=("linear", "power"), default="linear")
    s.add_argument("--degree", type=int, default=1)
    s.add_argument("--geometry", action="store_true",
                   help="also write a flat geometry dump CSV")
    s.add_argument("--save-instance", action="store_true",
                   help="also write the canonical instance JSON")
    s.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except DataError as e:
        print(f"flexhub: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        print("flexhub: interrupted", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(f"flexhub: solver failure: {e}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
