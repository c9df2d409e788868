"""Shared numerical test utilities."""

from __future__ import annotations

import math

import numpy as np

from nrkg.spectral import Grid, SpectralField, l2_norm


def random_complex_field(grid: Grid, rng: np.random.Generator) -> SpectralField:
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return SpectralField(grid, vals)


def random_real_field(grid: Grid, rng: np.random.Generator) -> SpectralField:
    return SpectralField(grid, rng.standard_normal(grid.shape))


def single_mode(grid: Grid, k_index: tuple[int, ...], amplitude: complex = 1.0) -> SpectralField:
    """Plane wave amplitude * exp(i xi_k . x) built via its Fourier coefficient."""
    hat = np.zeros(grid.shape, dtype=np.complex128)
    hat[tuple(k % grid.points_per_axis for k in k_index)] = (
        amplitude * grid.total_points
    )
    return SpectralField.from_hat(grid, hat)


def mode_xi(grid: Grid, k_index: tuple[int, ...]) -> np.ndarray:
    """Continuous wavenumber vector (pi/L) * k for an integer mode index."""
    return np.array([(math.pi / grid.half_width) * k for k in k_index])


def rel_l2_diff(a: SpectralField, b: SpectralField) -> float:
    denom = l2_norm(b)
    if denom == 0.0:
        return l2_norm(a - b)
    return l2_norm(a - b) / denom


def observed_orders(errors: list[float]) -> list[float]:
    """log2 ratios of consecutive errors from a step-halving study."""
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
