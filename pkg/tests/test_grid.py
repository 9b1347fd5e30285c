import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polybgk.errors import InvalidGrid
from polybgk.grid import GridConfig, build_grid, default_cutoffs, weighted_sup_norm


def test_two_point_velocity_rule():
    g = build_grid(GridConfig(v_count=2, v_max=1.0, i_count=4, i_max=8.0, i_kind="midpoint"), 2.0)
    assert np.array_equal(g.v_nodes, [-0.5, 0.5])
    assert np.array_equal(g.v_weights, [1.0, 1.0])
    assert np.array_equal(g.i_nodes, [1.0, 3.0, 5.0, 7.0])
    assert np.array_equal(g.i_weights, [2.0, 2.0, 2.0, 2.0])


def test_homogeneous_cell_weight():
    g = build_grid(GridConfig(x_count=1, x_length=3.0), 2.0)
    assert g.homogeneous and g.x_weights.tolist() == [1.0]


@pytest.mark.parametrize("kind", ["midpoint", "mapped"])
@pytest.mark.parametrize("delta", [1.0, 2.0, 3.0])
def test_grid_invariants(kind, delta):
    g = build_grid(GridConfig(v_count=9, v_max=4.0, i_count=7, i_max=10.0, i_kind=kind), delta)
    assert np.all(g.v_weights > 0) and np.all(g.i_weights > 0)
    assert abs(g.w_v3.sum() / 8.0 ** 3 - 1) < 1e-12
    assert np.array_equal(np.sort(-g.v_nodes), g.v_nodes)
    assert np.all(g.i_nodes > 0) and np.all(np.diff(g.i_nodes) > 0) and g.i_nodes[-1] <= 10.0


@pytest.mark.parametrize("cfg", [
    GridConfig(v_count=1), GridConfig(i_count=0), GridConfig(x_count=0),
    GridConfig(v_max=0.0), GridConfig(i_max=-1.0), GridConfig(i_kind="log"),
])
def test_invalid_grid(cfg):
    with pytest.raises(InvalidGrid):
        build_grid(cfg, 2.0)


def test_mapped_rule_is_spectral_where_midpoint_is_not():
    # int_0^inf exp(-I^(2/delta)) dI = Gamma(delta/2 + 1)
    delta = 3.0
    exact = math.gamma(2.5)
    errs = {}
    for kind in ("midpoint", "mapped"):
        g = build_grid(GridConfig(v_count=2, i_count=32, i_max=36.0 ** 1.5, i_kind=kind), delta)
        errs[kind] = abs(np.sum(g.i_weights * np.exp(-g.i_energy)) / exact - 1)
    assert errs["mapped"] < 1e-12
    assert errs["midpoint"] > 1e3 * errs["mapped"]


def test_velocity_rule_exact_for_linear_polynomials():
    g = build_grid(GridConfig(v_count=7, v_max=2.0), 2.0)
    v = g.v_nodes
    assert abs(np.sum(g.v_weights * (3 * v + 1)) - 4.0) < 1e-13


def test_norm_zero_and_point_mass():
    g = build_grid(GridConfig(v_count=3, v_max=1.5, i_count=5, i_max=5.0, i_kind="midpoint"), 2.0)
    f = g.zeros()
    assert weighted_sup_norm(f, g, 8.0) == 0.0
    f[0, 0, 1, 1, 1] = 1.0  # v = 0, smallest I node
    assert weighted_sup_norm(f, g, 8.0) == pytest.approx((1 + g.i_energy[0]) ** 4, rel=1e-15)


def test_norm_of_gaussian_matches_dense_scan():
    g = build_grid(GridConfig(v_count=61, v_max=6.0, i_count=200, i_max=12.0, i_kind="midpoint"), 2.0)
    r = g.v_sq[None] + g.i_energy[:, None, None, None]
    f = np.exp(-r)[None]
    scan = np.linspace(0, 20, 2_000_001)
    peak = np.max(np.exp(-scan) * (1 + scan) ** 4)
    assert peak == pytest.approx(math.exp(-3) * 4 ** 4, rel=1e-10)
    assert abs(weighted_sup_norm(f, g, 8.0) / peak - 1) < 2e-3


@settings(max_examples=25)
@given(c=st.floats(0, 1e3), seed=st.integers(0, 2 ** 31))
def test_norm_homogeneous_and_monotone(c, seed):
    g = build_grid(GridConfig(v_count=4, v_max=2.0, i_count=3, i_max=4.0), 1.0)
    r = np.random.default_rng(seed)
    f = r.random(g.shape)
    h = f + r.random(g.shape)
    assert weighted_sup_norm(c * f, g, 7.0) == pytest.approx(c * weighted_sup_norm(f, g, 7.0), rel=1e-14)
    assert weighted_sup_norm(f, g, 7.0) <= weighted_sup_norm(h, g, 7.0)


def test_default_cutoffs():
    v, i = default_cutoffs(0.5, 2.0, 2.0)
    assert v == pytest.approx(0.5 + 8 * math.sqrt(2))
    assert math.exp(-i / 2.0) == pytest.approx(1e-12, rel=1e-9)
