import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polybgk.errors import NonSPDTensor, VacuumCell
from polybgk.grid import GridConfig, build_grid
from polybgk.initial import InitSpec, init_distribution
from polybgk.moments import MacroFields, compute_moments, relaxation_fields, sym3_eigvalsh
from polybgk.params import RelaxationParams
from polybgk.randomfields import random_bump_field


@pytest.fixture(scope="module")
def fine():
    return build_grid(GridConfig(v_count=32, v_max=9.0, i_count=24, i_max=40.0), 2.0)


def hand_fields(Theta, T_int, delta, rho=1.0):
    Theta = np.asarray(Theta, dtype=float)[None]
    rho = np.array([rho])
    T_tr = np.trace(Theta, axis1=1, axis2=2) / 3
    E_tr, E_int = 1.5 * rho * T_tr, 0.5 * delta * rho * np.array([T_int])
    T_total = (3 * T_tr + delta * T_int) / (3 + delta)
    return MacroFields(rho, np.zeros((1, 3)), Theta, E_tr, E_int, T_tr, np.array([T_int]), T_total, delta)


def test_equilibrium_moments(fine):
    f = init_distribution(InitSpec("equilibrium", U=(0.3, 0.0, 0.0)), fine)
    m = compute_moments(f, fine)
    assert abs(m.rho[0] - 1) < 1e-6
    assert np.allclose(m.U[0], [0.3, 0, 0], atol=1e-6)
    assert np.allclose(m.Theta[0], np.eye(3), atol=1e-6)
    for T in (m.T_tr, m.T_int, m.T_total):
        assert abs(T[0] - 1) < 1e-6


def test_scaled_equilibrium(fine):
    m1 = compute_moments(init_distribution(InitSpec("equilibrium"), fine), fine)
    m3 = compute_moments(init_distribution(InitSpec("equilibrium", rho=3.0), fine), fine)
    assert m3.rho[0] == pytest.approx(3 * m1.rho[0], rel=1e-14)
    assert m3.T_total[0] == pytest.approx(m1.T_total[0], rel=1e-13)


def test_two_temperature_convex_split():
    g = build_grid(GridConfig(v_count=32, v_max=12.0, i_count=24, i_max=40.0), 2.0)
    m = compute_moments(init_distribution(InitSpec("two_temperature", T_tr=2.0, T_int=1.0), g), g)
    assert abs(m.T_total[0] - 1.6) < 1e-8
    assert m.T_total[0] == pytest.approx((3 * m.T_tr[0] + 2 * m.T_int[0]) / 5, rel=1e-12)


def test_vacuum_cell(fine):
    with pytest.raises(VacuumCell) as exc:
        compute_moments(fine.zeros(), fine)
    assert exc.value.cell == 0


def test_grid_aligned_shift(fine):
    f = init_distribution(InitSpec("two_temperature", T_tr=0.8, T_int=1.0), fine)
    shifted = np.roll(f, 3, axis=2)
    a, b = compute_moments(f, fine), compute_moments(shifted, fine)
    h = fine.v_nodes[1] - fine.v_nodes[0]
    assert b.rho[0] == pytest.approx(a.rho[0], rel=1e-13)
    assert b.U[0, 0] == pytest.approx(a.U[0, 0] + 3 * h, abs=1e-12)
    assert np.allclose(b.Theta, a.Theta, rtol=1e-10, atol=1e-12)
    assert b.T_int[0] == pytest.approx(a.T_int[0], rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 2 ** 31))
def test_scaling_property(c, seed):
    g = build_grid(GridConfig(v_count=12, v_max=7.0, i_count=10, i_max=30.0), 1.0)
    f = random_bump_field(g, np.random.default_rng(seed))
    a, b = compute_moments(f, g), compute_moments(c * f, g)
    assert b.rho[0] == pytest.approx(c * a.rho[0], rel=1e-12)
    assert np.allclose(b.U, a.U, rtol=1e-10, atol=1e-12)
    assert np.allclose(b.Theta, a.Theta, rtol=1e-10, atol=1e-12)
    assert b.T_int[0] == pytest.approx(a.T_int[0], rel=1e-12)


def test_moment_invariants(rng):
    g = build_grid(GridConfig(v_count=16, v_max=8.0, i_count=12, i_max=30.0), 3.0)
    for _ in range(10):
        m = compute_moments(random_bump_field(g, rng), g)
        assert np.trace(m.Theta[0]) == pytest.approx(3 * m.T_tr[0], rel=1e-10)
        assert m.T_total[0] == pytest.approx((3 * m.T_tr[0] + 3 * m.T_int[0]) / 6, rel=1e-12)
        assert np.all(np.linalg.eigvalsh(m.Theta[0]) >= 0)


def test_relaxation_fields_isotropic_limits():
    m = hand_fields(np.diag([2.0, 1.0, 1.0]), 1.0, 2.0)
    for nu in (0.0, 0.5, -0.3):
        gp = relaxation_fields(m, RelaxationParams(nu, 1.0, 2.0, 8.0))
        assert np.allclose(gp.tensor[0], m.T_total[0] * np.eye(3), rtol=0, atol=1e-15)
    gp = relaxation_fields(m, RelaxationParams(0.0, 1.0, 2.0, 8.0))
    assert gp.T_theta[0] == m.T_total[0]


def test_relaxation_fields_anisotropic_example():
    m = hand_fields(np.diag([2.0, 1.0, 1.0]), 1.0, 2.0)
    assert m.T_tr[0] == pytest.approx(4 / 3)
    assert m.T_total[0] == pytest.approx(1.2)
    gp = relaxation_fields(m, RelaxationParams(0.5, 0.5, 2.0, 8.0))
    assert gp.T_theta[0] == pytest.approx(1.1, rel=1e-15)
    expected = np.diag([0.6 + 0.5 * (2 / 3 + 1.0), 0.6 + 0.5 * (2 / 3 + 0.5), 0.6 + 0.5 * (2 / 3 + 0.5)])
    assert np.allclose(gp.tensor[0], expected, rtol=1e-15, atol=0)
    assert expected[0, 0] == pytest.approx(1.4333333333333333)
    assert expected[1, 1] == pytest.approx(1.1833333333333333)
    L = gp.chol[0]
    assert np.allclose(L @ L.T, gp.tensor[0], rtol=1e-15)
    assert gp.log_det[0] == pytest.approx(np.log(np.linalg.det(gp.tensor[0])), rel=1e-14)


def test_non_spd_tensor():
    # an indefinite stress tensor, as a badly resolved field can produce
    m = hand_fields(np.diag([-1.0, 2.0, 2.0]), 1.0, 2.0)
    with pytest.raises(NonSPDTensor) as exc:
        relaxation_fields(m, RelaxationParams(0.9, 0.0, 2.0, 8.0))
    assert exc.value.cell == 0


def test_sym3_eigvalsh_matches_lapack(rng):
    a = rng.normal(size=(500, 3, 3))
    a = a + np.swapaxes(a, 1, 2)
    ours = sym3_eigvalsh(a)
    ref = np.linalg.eigvalsh(a)
    assert np.allclose(ours, ref, rtol=0, atol=1e-12)
    assert np.allclose(sym3_eigvalsh(2.5 * np.eye(3)), [2.5, 2.5, 2.5])
