"""Shared builders for the test suite.

Everything here is deterministic: tiny instances come from seeded
generators so failures reproduce exactly.
"""

import numpy as np
import pytest

from flexhub.instance import RawData, make_scenario


def tiny_raw(n, seed, *, span=10.0, flow_hi=2.0, fixed=18.0):
    """Random n-node raw dataset on a small square."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, span, (n, 2))
    w = rng.uniform(0.0, flow_hi, (n, n))
    np.fill_diagonal(w, 0.0)
    costs = np.full(n, float(fixed))
    return RawData(points=pts, flow=w, fixed_cost=costs, meta={"name": f"tiny{n}-{seed}"})


def tiny_instance(n=4, seed=42, *, tau=1.0, rho=0.1, alpha=0.5, gauge="l2",
                  norm_c="l2", norm_h="l2", **kw):
    raw = tiny_raw(n, seed)
    return make_scenario(raw, tau=tau, rho=rho, alpha=alpha, gauge=gauge,
                         norm_c=norm_c, norm_h=norm_h, dataset="tiny", **kw)


@pytest.fixture
def inst4():
    return tiny_instance(4, 42)


@pytest.fixture
def ap10_raw():
    from flexhub.cli import resolve_dataset
    path, fmt = resolve_dataset("ap10")
    from flexhub.instance import load_raw
    return load_raw(path, fmt=fmt)
