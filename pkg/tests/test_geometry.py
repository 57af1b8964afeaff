"""Geometry layer: norms, gauge conversion factors, conic encodings."""

import math

import numpy as np
import pytest

from flexhub.conic import ProgramBuilder, solve_relaxation, expr
from flexhub.geometry import (
    NeighborhoodSpec, big_m_bounds, big_m_lower_bounds, emit_distance_epigraph,
    emit_membership, equivalence_factor, nominal_distance_data, norm_eval,
    power_cone_rep,
)

from conftest import tiny_instance

NORMS = ("l1", "l2", "linf")


def test_norm_eval_hand_values():
    v = np.array([3.0, -4.0])
    assert norm_eval("l1", v) == pytest.approx(7.0)
    assert norm_eval("l2", v) == pytest.approx(5.0)
    assert norm_eval("linf", v) == pytest.approx(4.0)
    assert norm_eval("l2", np.zeros(2)) == 0.0


def test_norm_eval_rejects_unknown():
    with pytest.raises((KeyError, ValueError)):
        norm_eval("l3", np.ones(2))


def test_equivalence_factor_known_table():
    # worst ratio of the target norm over the unit ball of the gauge
    assert equivalence_factor("l2", "l2") == pytest.approx(1.0)
    assert equivalence_factor("l1", "l2") == pytest.approx(1.0)
    assert equivalence_factor("l2", "l1") == pytest.approx(math.sqrt(2.0))
    assert equivalence_factor("linf", "l1") == pytest.approx(2.0)
    assert equivalence_factor("linf", "l2") == pytest.approx(math.sqrt(2.0))
    assert equivalence_factor("l1", "linf") == pytest.approx(1.0)


@pytest.mark.parametrize("gauge", NORMS)
@pytest.mark.parametrize("norm", NORMS)
def test_equivalence_factor_dominates_samples(gauge, norm):
    rng = np.random.default_rng(7)
    kap = equivalence_factor(gauge, norm)
    best = 0.0
    for _ in range(400):
        v = rng.uniform(-1.0, 1.0, 2)
        gv = norm_eval(gauge, v)
        if gv < 1e-12:
            continue
        v = v / gv   # on the gauge unit sphere
        ratio = norm_eval(norm, v)
        assert ratio <= kap + 1e-9
        best = max(best, ratio)
    # the factor is tight, not just an upper bound
    assert best >= kap - 0.05


@pytest.mark.parametrize("norm", NORMS)
def test_distance_epigraph_minimum_is_the_distance(norm):
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.uniform(-5.0, 5.0, 2)
        p = rng.uniform(-5.0, 5.0, 2)
        b = ProgramBuilder()
        t = b.add_var("t", lb=0.0)
        xs = [b.add_var(f"x{j}", lb=p[j], ub=p[j]) for j in range(2)]
        b.add_obj(t, 1.0)
        emit_distance_epigraph(b, norm, a, xs, t, tag="d")
        res = solve_relaxation(b.build())
        assert res.status == "optimal"
        assert res.objective == pytest.approx(norm_eval(norm, p - a), abs=1e-6)


@pytest.mark.parametrize("gauge", NORMS)
def test_membership_minimal_radius_is_gauge_distance(gauge):
    rng = np.random.default_rng(5)
    center = np.array([1.0, -2.0])
    for _ in range(4):
        p = center + rng.uniform(-1.0, 1.0, 2)
        b = ProgramBuilder()
        r = b.add_var("r", lb=0.0, ub=10.0)
        xs = [b.add_var(f"x{j}", lb=p[j], ub=p[j]) for j in range(2)]
        b.add_obj(r, 1.0)
        nb = NeighborhoodSpec(center=center, gauge=gauge, radius_cap=10.0)
        emit_membership(b, nb, xs, r, tag="m")
        res = solve_relaxation(b.build())
        assert res.status == "optimal"
        assert res.objective == pytest.approx(norm_eval(gauge, p - center), abs=1e-6)


def _min_gamma(d, r):
    b = ProgramBuilder()
    rv = b.add_var("r", lb=r, ub=r)
    gv = b.add_var("g", lb=0.0)
    b.add_obj(gv, 1.0)
    power_cone_rep(b, d, rv, gv, tag="p")
    res = solve_relaxation(b.build())
    assert res.status == "optimal"
    return res.objective


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 1.3, 2.0])
def test_power_cone_rep_recovers_power(d, r):
    assert _min_gamma(d, r) == pytest.approx(r ** d, abs=1e-6)


def test_power_cone_rep_structure_small_degrees():
    # degree 1 is a plain linear tie; degree 2 needs one rotated cone;
    # degree 3 chains two; degree 4 squares twice through three
    expected = {1: 0, 2: 1, 3: 2, 4: 3}
    for d, rotated in expected.items():
        b = ProgramBuilder()
        rv = b.add_var("r", lb=0.0, ub=2.0)
        gv = b.add_var("g", lb=0.0)
        atoms = power_cone_rep(b, d, rv, gv, tag="p")
        kinds = [a.kind for a in atoms]
        assert kinds.count("rotated_soc_block") == rotated, (d, kinds)
        if d == 1:
            assert kinds == ["linear_row"]


def test_big_m_bounds_dominate_sampled_geometry():
    inst = tiny_instance(4, 11, tau=1.0, rho=0.1)
    DC, DD, DH = big_m_bounds(inst, 1.0)
    LC, LD, LH = big_m_lower_bounds(inst)
    dC0, dD0, dH0, kC, kD, kH = nominal_distance_data(inst)
    rng = np.random.default_rng(2)
    n = inst.n
    for _ in range(200):
        pos = {}
        for k in range(n):
            # rejection-sample a point of the dilated neighborhood
            while True:
                off = rng.uniform(-inst.R[k], inst.R[k], 2) if inst.R[k] else np.zeros(2)
                if norm_eval(inst.gauges[k], off) <= inst.R[k]:
                    break
            pos[k] = inst.points[k] + off
        for i in range(n):
            for k in range(n):
                d = norm_eval(inst.norm_c, pos[k] - inst.points[i])
                assert d <= DC[i, k] + 1e-9
                assert d >= LC[i, k] - 1e-9
                rk = norm_eval(inst.gauges[k], pos[k] - inst.points[k])
                # dilation-coupled floor: nominal distance minus kappa*r
                assert d >= dC0[i, k] - kC[k] * rk - 1e-9
        for k in range(n):
            for m in range(k + 1, n):
                # DH and LH bracket the discounted inter-hub distance
                d = inst.alpha * norm_eval(inst.norm_h, pos[k] - pos[m])
                assert d <= DH[k, m] + 1e-9
                assert d >= LH[k, m] - 1e-9


def test_slack_factor_inflates_upper_bounds():
    inst = tiny_instance(4, 11)
    DC1, DD1, DH1 = big_m_bounds(inst, 1.0)
    DC2, DD2, DH2 = big_m_bounds(inst, 2.0)
    assert np.all(DC2 >= DC1 - 1e-12)
    assert np.all(DH2 >= DH1 - 1e-12)
    assert DC2.max() > DC1.max()
