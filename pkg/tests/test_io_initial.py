import numpy as np
import pytest

from polybgk.errors import CutoffTooSmall, NegativeInput, ParseError, ValidationError
from polybgk.fieldio import read_field, write_field
from polybgk.grid import GridConfig, build_grid
from polybgk.initial import InitSpec, init_distribution
from polybgk.moments import compute_moments


@pytest.fixture(scope="module")
def grid():
    return build_grid(GridConfig(x_count=3, v_count=6, v_max=9.0, i_count=5, i_max=40.0), 2.0)


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_field_round_trip(tmp_path, grid, rng, fmt):
    f = rng.random(grid.shape)
    write_field(tmp_path / "f", f, grid, fmt)
    g, header = read_field(tmp_path / "f")
    assert np.array_equal(f, g)
    assert header["x_count"] == 3 and header["v_count"] == 6 and header["delta"] == 2.0


def test_file_preset(tmp_path, grid, rng):
    f = rng.random(grid.shape)
    write_field(tmp_path / "f", f, grid)
    assert np.array_equal(init_distribution(InitSpec("file", path=str(tmp_path / "f")), grid), f)
    f[0, 0, 0, 0, 0] = -1.0
    write_field(tmp_path / "neg", f, grid)
    with pytest.raises(NegativeInput):
        init_distribution(InitSpec("file", path=str(tmp_path / "neg")), grid)


def test_bad_header(tmp_path):
    (tmp_path / "f").write_text("NOPE 1 2 3\n1,2\n")
    with pytest.raises(ParseError):
        read_field(tmp_path / "f")


def test_presets():
    grid = build_grid(GridConfig(x_count=3, v_count=20, v_max=9.0, i_count=16, i_max=40.0), 2.0)
    f = init_distribution(InitSpec("spatial_wave", amplitude=0.3), grid)
    m = compute_moments(f, grid)
    expected = 1 + 0.3 * np.sin(2 * np.pi * grid.x_nodes / grid.x_length)
    assert np.allclose(m.rho, expected, rtol=1e-9)
    assert np.allclose(m.T_total, 1.0, rtol=1e-9)


def test_cutoff_too_small():
    g = build_grid(GridConfig(v_count=6, v_max=4.0, i_count=5, i_max=40.0), 2.0)
    with pytest.raises(CutoffTooSmall):
        init_distribution(InitSpec("equilibrium"), g)


@pytest.mark.parametrize("kw", [dict(preset="mist"), dict(rho=0.0), dict(T_int=-1.0),
                                dict(preset="spatial_wave", amplitude=1.0), dict(preset="file")])
def test_init_spec_validation(kw):
    with pytest.raises(ValidationError):
        InitSpec(**kw)
