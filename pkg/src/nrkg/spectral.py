"""Periodic pseudospectral core: grids, transforms, multipliers, norms, projectors.

Conventions (fixed once, used everywhere):

* The domain is the torus [-L, L)^dim with ``n`` points per axis, spacing
  ``dx = 2L/n``.  Wavenumbers per axis are ``xi = (pi/L) * k`` for
  ``k = 0, 1, ..., n/2-1, -n/2, ..., -1`` (numpy FFT layout).
* The forward transform is unscaled (``numpy.fft.fftn`` with default norm);
  the inverse carries the ``1/n^dim`` factor.  Parseval is carried by explicit
  cell-measure weights in the norms: for physical samples,
  ``||u||_L2^2 = sum |u|^2 * dx^dim``; for coefficients,
  ``||u||_L2^2 = sum |u_hat|^2 * dx^dim / n^dim``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np

from nrkg.errors import ConfigurationError, ContractViolation

#: A multiplier symbol: either a per-mode array on the grid, or a callable
#: evaluating one from a Grid.
Symbol = Union[np.ndarray, Callable[["Grid"], np.ndarray]]


@dataclass(frozen=True)
class Grid:
    """Periodic computational domain descriptor with wavenumber tables."""

    dim: int
    points_per_axis: int
    half_width: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.points_per_axis
        if n < 16 or (n & (n - 1)) != 0:
            raise ConfigurationError(
                f"points_per_axis must be a power of two >= 16, got {n}"
            )
        if not self.half_width > 0:
            raise ConfigurationError(f"half_width must be positive, got {self.half_width}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dim

    @property
    def total_points(self) -> int:
        return self.points_per_axis**self.dim

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis wavenumber tables xi = (pi/L) * k, FFT mode order."""
        n = self.points_per_axis
        k = np.fft.fftfreq(n) * n  # exact integers -n/2..n/2-1 in FFT order
        return (k * (np.pi / self.half_width),) * self.dim

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """|xi|^2 on the full mode lattice (shape == grid.shape)."""
        mesh = np.meshgrid(*self.wavenumbers, indexing="ij")
        return sum(x**2 for x in mesh)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Physical coordinate meshes, one array per axis."""
        axis = -self.half_width + self.dx * np.arange(self.points_per_axis)
        return tuple(np.meshgrid(*((axis,) * self.dim), indexing="ij"))

    @property
    def nyquist_mask(self) -> np.ndarray:
        """Boolean mask of modes having a Nyquist index on any axis."""
        n = self.points_per_axis
        mask = np.zeros(self.shape, dtype=bool)
        for ax in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[ax] = n // 2
            mask[tuple(idx)] = True
        return mask


def make_grid(dim: int, points_per_axis: int, half_width: float) -> Grid:
    """Construct a Grid, validating dimension, size and half-width."""
    return Grid(dim=dim, points_per_axis=points_per_axis, half_width=half_width)


@dataclass(frozen=True)
class SpectralField:
    """Complex samples of a function on a Grid, physical space, row-major.

    Values are treated as immutable; operations return new fields.  The
    Fourier representation is computed lazily and cached.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise ContractViolation(
                f"values shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "values", vals)

    @cached_property
    def hat(self) -> np.ndarray:
        """Unscaled forward-transform coefficients."""
        return np.fft.fftn(self.values)

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "SpectralField":
        field = cls(grid, np.fft.ifftn(hat))
        field.__dict__["hat"] = np.asarray(hat, dtype=np.complex128)
        return field

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def imag_residue(self) -> float:
        """L2 norm of the imaginary part (0 for a real field)."""
        return float(np.sqrt(np.sum(self.values.imag**2) * self.grid.cell_volume))

    def is_real(self, tol: float = 1e-11) -> bool:
        norm = l2_norm(self)
        if norm == 0.0:
            return self.imag_residue() == 0.0
        return self.imag_residue() <= tol * norm

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.grid, self.values * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ContractViolation("fields live on different grids")


# ---------------------------------------------------------------------------
# Multiplier symbols


def laplacian_symbol(grid: Grid) -> np.ndarray:
    """-|xi|^2, the Fourier symbol of the Laplacian."""
    return -grid.xi_squared


def sobolev_symbol(s: float) -> Callable[[Grid], np.ndarray]:
    """<xi>^s with <xi> = sqrt(1 + |xi|^2)."""

    def symbol(grid: Grid) -> np.ndarray:
        return (1.0 + grid.xi_squared) ** (s / 2.0)

    return symbol


def rough_spectrum_symbol(beta: float) -> Callable[[Grid], np.ndarray]:
    """<xi>_2^beta / ln <xi>_2 with <xi>_2 = sqrt(|xi|^2 + 2).

    The +2 shift keeps the logarithm bounded away from zero at xi = 0.
    """

    def symbol(grid: Grid) -> np.ndarray:
        bracket2 = np.sqrt(grid.xi_squared + 2.0)
        return bracket2**beta / np.log(bracket2)

    return symbol


def smooth_cutoff(r: np.ndarray) -> np.ndarray:
    """Radial C^inf step: 1 for r <= 1, 0 for r >= 1.1, monotone between.

    Transition profile psi(s) = q(1-s) / (q(s) + q(1-s)) with
    q(s) = exp(-1/s) for s > 0 and 0 otherwise.
    """
    r = np.asarray(r, dtype=np.float64)
    s = np.clip((r - 1.0) / 0.1, 0.0, 1.0)

    def q(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out

    qs, qc = q(s), q(1.0 - s)
    return qc / (qs + qc)


def lowpass_symbol(cutoff: float) -> Callable[[Grid], np.ndarray]:
    """The smooth low-frequency cutoff phi(|xi| / cutoff)."""
    if not cutoff > 0:
        raise ConfigurationError(f"cutoff must be positive, got {cutoff}")

    def symbol(grid: Grid) -> np.ndarray:
        return smooth_cutoff(np.sqrt(grid.xi_squared) / cutoff)

    return symbol


def _evaluate_symbol(grid: Grid, symbol: Symbol) -> np.ndarray:
    if callable(symbol):
        values = np.asarray(symbol(grid))
    else:
        values = np.asarray(symbol)
    if values.shape != grid.shape:
        raise ContractViolation(
            f"symbol shape {values.shape} does not match grid shape {grid.shape}"
        )
    return values


def apply_multiplier(field: SpectralField, symbol: Symbol) -> SpectralField:
    """Apply a Fourier-multiplier operator: F^-1(m(xi) * F(field))."""
    m = _evaluate_symbol(field.grid, symbol)
    return SpectralField.from_hat(field.grid, m * field.hat)


# ---------------------------------------------------------------------------
# Norms


def l2_norm(field: SpectralField) -> float:
    """Physical-space L2 norm with cell-measure weights."""
    return float(np.sqrt(np.sum(np.abs(field.values) ** 2) * field.grid.cell_volume))


def sobolev_norm(field: SpectralField, s: float) -> float:
    """Discrete H^s norm: (sum <xi>^{2s} |u_hat|^2 * dx^d / n^d)^{1/2}."""
    grid = field.grid
    weight = (1.0 + grid.xi_squared) ** s
    measure = grid.cell_volume / grid.total_points
    return float(np.sqrt(np.sum(weight * np.abs(field.hat) ** 2) * measure))


# ---------------------------------------------------------------------------
# Frequency projectors


def _exact_split(hat: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split hat into (w*hat, (1-w)*hat) with a bitwise-exact sum.

    The smaller-weight side is computed as a product; the other side as a
    subtraction that is exact by Sterbenz's lemma (the subtrahend lies within
    a factor of two of the minuend), so low + high == hat in every component.
    """
    big = weights >= 0.5
    low = np.where(big, weights * hat, 0.0)
    high = np.where(big, hat - low, (1.0 - weights) * hat)
    low = np.where(big, low, hat - high)
    return low, high


def project_low(field: SpectralField, cutoff: float) -> SpectralField:
    """Smooth low-pass projection: multiply coefficients by phi(|xi|/cutoff)."""
    weights = _evaluate_symbol(field.grid, lowpass_symbol(cutoff))
    low, _ = _exact_split(field.hat, weights)
    return SpectralField.from_hat(field.grid, low)


def project_high(field: SpectralField, cutoff: float) -> SpectralField:
    """Complement of project_low; low + high reproduces the coefficients exactly."""
    weights = _evaluate_symbol(field.grid, lowpass_symbol(cutoff))
    _, high = _exact_split(field.hat, weights)
    return SpectralField.from_hat(field.grid, high)


# ---------------------------------------------------------------------------
# Field dump format: flat little-endian interleaved (re, im) float64 pairs in
# row-major order, plus a JSON sidecar descriptor.


def write_field(
    field: SpectralField,
    basepath: Union[str, Path],
    time: float = 0.0,
    eps: float | None = None,
) -> tuple[Path, Path]:
    """Write <basepath>.bin (raw samples) and <basepath>.json (descriptor)."""
    base = Path(basepath)
    binpath = base.with_suffix(".bin")
    metapath = base.with_suffix(".json")
    interleaved = np.empty(field.values.size * 2, dtype="<f8")
    flat = np.ravel(field.values, order="C")
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    binpath.parent.mkdir(parents=True, exist_ok=True)
    binpath.write_bytes(interleaved.tobytes())
    meta = {
        "dim": field.grid.dim,
        "points_per_axis": field.grid.points_per_axis,
        "half_width": field.grid.half_width,
        "time": time,
        "eps": eps,
    }
    metapath.write_text(json.dumps(meta, indent=2) + "\n")
    return binpath, metapath


def read_field(basepath: Union[str, Path]) -> tuple[SpectralField, dict]:
    """Read a field dump written by write_field; returns (field, descriptor)."""
    base = Path(basepath)
    meta = json.loads(base.with_suffix(".json").read_text())
    grid = make_grid(meta["dim"], meta["points_per_axis"], meta["half_width"])
    raw = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype="<f8")
    expected = 2 * grid.points_per_axis**grid.dim
    if raw.size != expected:
        raise ConfigurationError(
            f"field dump has {raw.size} floats, expected {expected} for {grid.shape}"
        )
    values = (raw[0::2] + 1j * raw[1::2]).reshape(grid.shape)
    return SpectralField(grid, values), meta
