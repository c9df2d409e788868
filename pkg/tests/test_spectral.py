"""Grid, transform, multiplier, norm, projector, and dump-format tests."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nrkg.errors import ConfigurationError, ContractViolation
from nrkg.spectral import (
    SpectralField,
    apply_multiplier,
    l2_norm,
    laplacian_symbol,
    lowpass_symbol,
    make_grid,
    project_high,
    project_low,
    read_field,
    smooth_cutoff,
    sobolev_norm,
    write_field,
)

from helpers import mode_xi, random_complex_field, random_real_field, single_mode

GRID_CASES = [(1, 64, 16.0), (1, 256, 8.0), (2, 64, 16.0), (2, 256, 12.0), (3, 16, 4.0)]


# ---------------------------------------------------------------------------
# grids


def test_make_grid_unit_spacing_wavenumbers():
    g = make_grid(1, 16, math.pi)
    ks = np.sort(g.wavenumbers[0])
    assert np.allclose(ks, np.arange(-8, 8), atol=1e-14)


def test_make_grid_2d_spacing():
    g = make_grid(2, 32, 16.0)
    assert len(g.wavenumbers) == 2
    for axis in g.wavenumbers:
        spacing = np.diff(np.sort(axis))
        assert np.allclose(spacing, math.pi / 16.0, atol=1e-14)


def test_make_grid_rejects_non_power_of_two():
    with pytest.raises(ConfigurationError):
        make_grid(1, 15, 1.0)


def test_make_grid_rejects_bad_dim_and_width():
    with pytest.raises(ConfigurationError):
        make_grid(4, 16, 1.0)
    with pytest.raises(ConfigurationError):
        make_grid(1, 16, -1.0)
    with pytest.raises(ConfigurationError):
        make_grid(1, 8, 1.0)  # below the minimum size


def test_wavenumber_antisymmetry_below_nyquist():
    g = make_grid(1, 64, 5.0)
    k = g.wavenumbers[0]
    n = g.points_per_axis
    for idx in range(1, n // 2):
        assert k[idx] == pytest.approx(-k[n - idx], abs=0.0)


# ---------------------------------------------------------------------------
# transforms: round trip and Parseval


@pytest.mark.parametrize("dim,n,half_width", GRID_CASES)
def test_round_trip_identity(dim, n, half_width, rng):
    g = make_grid(dim, n, half_width)
    f = random_complex_field(g, rng)
    back = SpectralField.from_hat(g, f.hat)
    assert l2_norm(back - f) <= 1e-13 * l2_norm(f)


@pytest.mark.parametrize("dim,n,half_width", GRID_CASES)
def test_parseval_identity(dim, n, half_width, rng):
    g = make_grid(dim, n, half_width)
    f = random_complex_field(g, rng)
    phys = math.sqrt(float(np.sum(np.abs(f.values) ** 2)) * g.cell_volume)
    spec = math.sqrt(
        float(np.sum(np.abs(f.hat) ** 2)) * g.cell_volume / g.total_points
    )
    assert phys == pytest.approx(spec, rel=1e-12)
    assert l2_norm(f) == pytest.approx(phys, rel=1e-12)


# ---------------------------------------------------------------------------
# multipliers


def test_laplacian_on_plane_wave_is_eigenvalue(rng):
    g = make_grid(2, 64, 16.0)
    k_index = (3, -5)
    f = single_mode(g, k_index, amplitude=1.3 - 0.4j)
    out = apply_multiplier(f, laplacian_symbol)
    lam = -float(np.sum(mode_xi(g, k_index) ** 2))
    assert l2_norm(out - lam * f) <= 1e-12 * l2_norm(f) * abs(lam)


def test_identity_multiplier_is_identity(rng):
    g = make_grid(1, 128, 16.0)
    f = random_complex_field(g, rng)
    out = apply_multiplier(f, lambda grid: np.ones(grid.shape))
    assert l2_norm(out - f) <= 1e-14 * l2_norm(f)


def test_real_symbol_preserves_real_fields():
    g = make_grid(1, 256, 16.0)
    x = g.coordinates[0]
    f = SpectralField(g, np.exp(-(x**2)))
    out = apply_multiplier(f, lambda grid: (1.0 + grid.xi_squared))
    assert out.imag_residue() <= 1e-12 * l2_norm(out)


def test_multiplier_grid_mismatch_rejected(rng):
    g1 = make_grid(1, 64, 16.0)
    f = random_complex_field(g1, rng)
    bad = np.ones((32,))
    with pytest.raises(ContractViolation):
        apply_multiplier(f, bad)


@given(st.integers(min_value=-20, max_value=20))
def test_real_multiplier_preserves_reality_property(k):
    g = make_grid(1, 64, 8.0)
    x = g.coordinates[0]
    f = SpectralField(g, np.cos((math.pi / g.half_width) * k * x) + 0.3)
    out = apply_multiplier(f, lambda grid: np.sqrt(1.0 + grid.xi_squared))
    assert out.is_real(tol=1e-12)


# ---------------------------------------------------------------------------
# Sobolev norms


def test_sobolev_norm_zero_field():
    g = make_grid(1, 64, 16.0)
    assert sobolev_norm(SpectralField.zeros(g), 3.0) == 0.0


@pytest.mark.parametrize("s", [0.0, 1.0, 2.5, -1.0])
def test_sobolev_norm_single_mode_closed_form(s):
    g = make_grid(2, 64, 16.0)
    k_index = (4, -7)
    amp = 0.7 + 0.2j
    f = single_mode(g, k_index, amplitude=amp)
    xi_sq = float(np.sum(mode_xi(g, k_index) ** 2))
    expected = abs(amp) * math.sqrt(g.volume) * (1.0 + xi_sq) ** (s / 2.0)
    assert sobolev_norm(f, s) == pytest.approx(expected, rel=1e-12)


def test_sobolev_zero_order_matches_physical_quadrature():
    g = make_grid(1, 256, 16.0)
    x = g.coordinates[0]
    f = SpectralField(g, np.exp(-(x**2)))
    quad = math.sqrt(float(np.sum(np.abs(f.values) ** 2)) * g.cell_volume)
    assert sobolev_norm(f, 0.0) == pytest.approx(quad, rel=1e-10)


# ---------------------------------------------------------------------------
# projector


def test_projector_passes_low_modes_unchanged():
    g = make_grid(1, 64, math.pi)  # integer wavenumbers
    f = single_mode(g, (5,), amplitude=2.0)
    out = project_low(f, 8.0)
    assert l2_norm(out - f) <= 1e-13 * l2_norm(f)


def test_projector_kills_far_modes():
    g = make_grid(1, 64, math.pi)
    f = single_mode(g, (12,))
    out = project_low(f, 8.0)  # 12 > 1.1 * 8
    assert l2_norm(out) <= 1e-14 * l2_norm(f)


def test_projector_transition_shell_partial_weight():
    g = make_grid(1, 64, math.pi)
    f = single_mode(g, (21,), amplitude=1.0)  # xi = 21 on the L=pi grid
    out = project_low(f, 20.0)  # 21/20 = 1.05 lies in the (1, 1.1) shell
    weight = float(smooth_cutoff(np.array([21.0 / 20.0]))[0])
    assert 0.0 < weight < 1.0
    assert l2_norm(out) == pytest.approx(weight * l2_norm(f), rel=1e-12)


def test_projector_split_reconstructs_bit_for_bit(rng):
    g = make_grid(2, 64, 16.0)
    f = random_complex_field(g, rng)
    low = project_low(f, 6.0)
    high = project_high(f, 6.0)
    assert np.array_equal(low.hat + high.hat, f.hat)


def test_projector_idempotent_only_below_cutoff(rng):
    g = make_grid(1, 64, math.pi)
    inside = single_mode(g, (7,))
    once = project_low(inside, 8.0)
    twice = project_low(once, 8.0)
    assert np.array_equal(once.hat, twice.hat)

    shell = single_mode(g, (21,))
    once = project_low(shell, 20.0)
    twice = project_low(once, 20.0)
    # weight in (0,1) applies twice, so a second application shrinks it again
    assert l2_norm(twice) < l2_norm(once) < l2_norm(shell)


def test_lowpass_symbol_plateau_and_support():
    g = make_grid(1, 256, math.pi)
    sym = lowpass_symbol(16.0)(g)
    xi = np.abs(g.wavenumbers[0])
    assert np.all(sym[xi <= 16.0] == 1.0)
    assert np.all(sym[xi >= 1.1 * 16.0] == 0.0)
    shell = (xi > 16.0) & (xi < 1.1 * 16.0)
    assert np.all((sym[shell] > 0.0) & (sym[shell] < 1.0))


# ---------------------------------------------------------------------------
# dump format


def test_field_dump_round_trip(tmp_path, rng):
    g = make_grid(2, 32, 6.0)
    f = random_complex_field(g, rng)
    write_field(f, tmp_path / "field", time=0.75, eps=0.25)
    back, meta = read_field(tmp_path / "field")
    assert np.array_equal(back.values, f.values)
    assert back.grid == g
    assert meta["time"] == 0.75
    assert meta["eps"] == 0.25


def test_field_dump_is_interleaved_little_endian(tmp_path):
    g = make_grid(1, 16, 1.0)
    vals = np.arange(16, dtype=np.float64) + 1j * np.arange(16, 32, dtype=np.float64)
    write_field(SpectralField(g, vals), tmp_path / "f")
    raw = np.fromfile(tmp_path / "f.bin", dtype="<f8")
    assert raw.shape == (32,)
    assert np.array_equal(raw[0::2], vals.real)
    assert np.array_equal(raw[1::2], vals.imag)
