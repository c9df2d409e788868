"""Initial-data families for the convergence experiments.

Data are specified through the envelope profile: given a generated field g,
the envelope datum is v0 = delta0 * g and the Klein-Gordon data follow from
u0 = 2 Re(v0), u1 = -2 Im(v0), so the defining relation v0 = (u0 - i u1)/2
holds by construction.

Two analytic families are built in:

* ``gaussian``: g(x) = A0^(d/2) exp(-A0^2 |x|^2).  The normalization keeps
  the L2 mass independent of A0 while Sobolev norms grow like A0^gamma.
* ``rough``: g with Fourier coefficients <xi>_2^(-alpha - d/2) / ln <xi>_2,
  <xi>_2 = sqrt(|xi|^2 + 2), built directly on the discrete wavenumber set.
  The coefficients are radial and real, so g is real; by construction g has
  exactly alpha orders of L2-Sobolev regularity, with high-frequency tails
  ||P_>N g|| ~ N^(-alpha) / ln N.

A third ``file`` family reads a previously dumped envelope field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nrkg.errors import ConfigurationError, ContractViolation
from nrkg.spectral import (
    Grid,
    SpectralField,
    read_field,
    rough_spectrum_symbol,
)

FAMILIES = ("gaussian", "rough", "file")
U1_MODES = ("zero", "from_v0")
ALPHA_RANGE = (4.0, 8.0)


@dataclass(frozen=True)
class DataSpec:
    """Declarative description of one initial-data family instance."""

    family: str = "gaussian"
    a0: float = 2.0
    alpha: float | None = None
    delta0: float = 0.5
    u1_mode: str = "zero"
    path: str | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown data family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.u1_mode not in U1_MODES:
            raise ConfigurationError(
                f"unknown u1_mode {self.u1_mode!r}; expected one of {U1_MODES}"
            )
        if not self.delta0 >= 0:
            # zero is admitted as a degenerate amplitude for null tests
            raise ConfigurationError(f"delta0 must be nonnegative, got {self.delta0}")
        if self.family == "gaussian" and not self.a0 > 0:
            raise ConfigurationError(f"A0 must be positive, got {self.a0}")
        if self.family == "rough":
            if self.alpha is None or not (
                ALPHA_RANGE[0] <= self.alpha <= ALPHA_RANGE[1]
            ):
                raise ConfigurationError(
                    f"rough family needs alpha in {list(ALPHA_RANGE)}, got {self.alpha}"
                )
        if self.family == "file" and not self.path:
            raise ConfigurationError("file family needs a path")

    def label(self) -> str:
        if self.family == "gaussian":
            return f"gaussian(A0={self.a0:g}, delta0={self.delta0:g})"
        if self.family == "rough":
            return f"rough(alpha={self.alpha:g}, delta0={self.delta0:g})"
        return f"file({self.path})"


def gen_gaussian(grid: Grid, a0: float, delta0: float) -> SpectralField:
    """Centered Gaussian delta0 * A0^(d/2) exp(-A0^2 |x|^2).

    The profile must have decayed below 1e-12 of its peak at the torus
    boundary, otherwise periodization would distort the data.
    """
    if not a0 > 0:
        raise ConfigurationError(f"A0 must be positive, got {a0}")
    boundary_ratio = float(np.exp(-(a0**2) * grid.half_width**2))
    if boundary_ratio > 1e-12:
        raise ConfigurationError(
            f"gaussian with A0={a0} retains {boundary_ratio:.2e} of its peak at "
            f"the torus boundary (half_width={grid.half_width}); increase "
            "half_width or A0 so the profile fits the periodic box"
        )
    r_sq = np.zeros(grid.shape)
    for axis_coords in grid.coordinates:
        r_sq = r_sq + axis_coords**2
    vals = delta0 * a0 ** (grid.dim / 2.0) * np.exp(-(a0**2) * r_sq)
    return SpectralField(grid, vals.astype(np.complex128))


def gen_rough(grid: Grid, alpha: float, delta0: float) -> SpectralField:
    """Limited-regularity profile built from its Fourier coefficients.

    Coefficients follow the continuum convention (Fourier coefficient of the
    periodic function equals the symbol value), i.e. the unnormalized DFT
    coefficient is symbol / cell_volume.  The unpaired Nyquist modes are
    zeroed to keep the coefficient set conjugate-symmetric.
    """
    if not (ALPHA_RANGE[0] <= alpha <= ALPHA_RANGE[1]):
        raise ConfigurationError(
            f"alpha must lie in {list(ALPHA_RANGE)}, got {alpha}"
        )
    symbol = rough_spectrum_symbol(-alpha - grid.dim / 2.0)
    coeffs = symbol(grid) / grid.cell_volume
    coeffs[grid.nyquist_mask] = 0.0
    vals = np.fft.ifftn(coeffs)
    field = SpectralField(grid, delta0 * vals)
    if not field.is_real(tol=1e-12):
        raise ContractViolation("rough generator produced a non-real field")
    return SpectralField(grid, field.values.real.astype(np.complex128))


def envelope_datum(grid: Grid, spec: DataSpec) -> SpectralField:
    """The envelope initial field v0 = delta0 * g for the requested family."""
    if spec.family == "gaussian":
        return gen_gaussian(grid, spec.a0, spec.delta0)
    if spec.family == "rough":
        return gen_rough(grid, spec.alpha, spec.delta0)
    field, _ = read_field(spec.path)
    if field.grid != grid:
        raise ConfigurationError(
            f"field loaded from {spec.path} lives on grid {field.grid}, "
            f"expected {grid}"
        )
    return SpectralField(grid, spec.delta0 * field.values)


def initial_data(
    grid: Grid, spec: DataSpec
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """(u0, u1, v0) with u0 = 2 Re v0 and u1 = -2 Im v0.

    With u1_mode "zero" the imaginary part of the generated envelope is
    discarded so that u1 vanishes identically and the defining relation
    still holds exactly.
    """
    v0 = envelope_datum(grid, spec)
    if spec.u1_mode == "zero":
        v0 = SpectralField(grid, v0.values.real.astype(np.complex128))
    u0 = SpectralField(grid, (2.0 * v0.values.real).astype(np.complex128))
    u1 = SpectralField(grid, (-2.0 * v0.values.imag).astype(np.complex128))
    return u0, u1, v0
