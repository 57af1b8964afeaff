"""Hub location with variable-size hub neighborhoods.

The package solves single-allocation hub location problems in which every
opened hub may drift away from its nominal site inside a gauge-shaped
neighborhood whose size is itself a priced decision.  Everything runs on the
built-in homogeneous self-dual conic interior-point solver; no external
optimizer is required.

Layers, bottom up:

``flexhub.conic``
    Program builder, presolve, the interior-point solver, independent
    feasibility checking, and the adapter registry.
``flexhub.geometry``
    Norms and gauges: distance epigraphs, neighborhood membership,
    power-cone towers for polynomial set-up costs, big-M bound recipes.
``flexhub.instance`` / ``flexhub.solution``
    Data model, dataset parsers, scenario grids, solution files, and the
    referee that re-prices every reported solution from scratch.
``flexhub.formulations``
    The compact model and the cut-based master, sharing one base block.
``flexhub.bnc``
    Branch-and-cut engine with pooled transfer cuts and exact repricing.
``flexhub.oracle``
    Exhaustive enumeration for tiny instances; the ground truth in tests.
``flexhub.cli``
    ``flexhub convert | run | aggregate | solve`` benchmark driver.
"""

from .instance import (
    DataError,
    Instance,
    LINEAR,
    POWER,
    RawData,
    VariableSetupCost,
    full_grid,
    grid_size,
    load_instance,
    load_raw,
    make_scenario,
    save_instance,
)
from .solution import (
    HubSolution,
    evaluate_solution,
    format_solution,
    load_solution,
    save_solution,
)
from .geometry import (
    NeighborhoodSpec,
    big_m_bounds,
    big_m_lower_bounds,
    emit_distance_epigraph,
    emit_membership,
    equivalence_factor,
    norm_eval,
    power_cone_rep,
)
from .formulations import (
    CutRecord,
    VariableCatalog,
    build_f1,
    build_f1_split_nu,
    build_f2_master,
    build_fixed_assignment,
)
from .bnc import (
    BnCStats,
    SolveReport,
    most_violated,
    price_assignment,
    separate_all,
    solve_bnc,
    solve_f1,
    solve_f2,
)
from .oracle import brute_force, enumerate_configs, solve_fixed
from .conic import solve_relaxation, solver_interface

__version__ = "0.1.0"

__all__ = [
    "BnCStats",
    "CutRecord",
    "DataError",
    "HubSolution",
    "Instance",
    "LINEAR",
    "NeighborhoodSpec",
    "POWER",
    "RawData",
    "SolveReport",
    "VariableCatalog",
    "VariableSetupCost",
    "big_m_bounds",
    "big_m_lower_bounds",
    "brute_force",
    "build_f1",
    "build_f1_split_nu",
    "build_f2_master",
    "build_fixed_assignment",
    "emit_distance_epigraph",
    "emit_membership",
    "enumerate_configs",
    "equivalence_factor",
    "evaluate_solution",
    "format_solution",
    "full_grid",
    "grid_size",
    "load_instance",
    "load_raw",
    "load_solution",
    "make_scenario",
    "most_violated",
    "norm_eval",
    "power_cone_rep",
    "price_assignment",
    "save_instance",
    "save_solution",
    "separate_all",
    "solve_bnc",
    "solve_f1",
    "solve_f2",
    "solve_fixed",
    "solve_relaxation",
    "solver_interface",
]
