"""Envelope-profile solvers for the slow modulation system.

Two slowly varying complex profiles drive the modulated expansion:

* ``v`` solves the cubic Schroedinger equation
  ``2i dv/dt - Lap v + 3|v|^2 v = 0``, integrated by Strang splitting between
  the exact linear flow (Fourier multiplier ``exp(i |xi|^2 t / 2)``) and the
  exact pointwise phase flow ``v -> exp(1.5i |v|^2 t) v``.
* ``w`` solves the forced, real-linear companion equation
  ``2i dw/dt - Lap w + dtt_v + 3 (|v|^4 v / 8 + v^2 conj(w) + 2 |v|^2 w) = 0``,
  integrated by Strang splitting between the same exact linear flow and a
  classical RK4 substep for the coupled (w, conj w) part, with ``v`` supplied
  by its own exact-substep integration at the RK4 quadrature times.

Both integrators land on the requested sample times exactly; the internal
step must divide every sample interval.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from nrkg.errors import ConfigurationError, ContractViolation
from nrkg.spectral import Grid, SpectralField, l2_norm, read_field, write_field

DEFAULT_PROFILE_DT = 1e-2


@dataclass
class ProfileTrajectory:
    """Time-sampled v (and optionally w) fields on a shared output grid."""

    grid: Grid
    sample_times: np.ndarray
    v_samples: list[SpectralField]
    w_samples: list[SpectralField] | None = None
    dt_v: float | None = None
    dt_w: float | None = None

    def mass_drift(self) -> float:
        """Max relative drift of ||v(t)||_L2 along the trajectory."""
        norms = np.array([l2_norm(v) for v in self.v_samples])
        if norms[0] == 0.0:
            return float(np.max(norms))
        return float(np.max(np.abs(norms - norms[0])) / norms[0])


# ---------------------------------------------------------------------------
# Initial data and analytic time derivatives


def v0_from_data(u0: SpectralField, u1: SpectralField) -> SpectralField:
    """Envelope initial datum (u0 - i u1) / 2 from real position/velocity data."""
    if u0.grid != u1.grid:
        raise ContractViolation("u0 and u1 live on different grids")
    for name, f in (("u0", u0), ("u1", u1)):
        if not f.is_real(tol=1e-11):
            raise ContractViolation(f"{name} is not a real field")
    return SpectralField(u0.grid, 0.5 * (u0.values - 1j * u1.values))


def _lap(grid: Grid, vals: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(-grid.xi_squared * np.fft.fftn(vals))


def w0_from_v0(v0: SpectralField) -> SpectralField:
    """Companion-profile initial datum, chosen so the order-eps^2 term of the
    expansion vanishes at t = 0 together with its first time derivative."""
    g = v0.grid
    z = v0.values
    zb = np.conj(z)
    vals = (
        0.25 * _lap(g, z - zb)
        - 0.25 * z**3
        + 0.125 * zb**3
        - 0.75 * np.abs(z) ** 2 * (z - zb)
    )
    return SpectralField(g, vals)


def _dt_v_vals(grid: Grid, z: np.ndarray) -> np.ndarray:
    # 2i v_t = Lap v - 3|v|^2 v
    return -0.5j * (_lap(grid, z) - 3.0 * np.abs(z) ** 2 * z)


def _dtt_v_vals(grid: Grid, z: np.ndarray) -> np.ndarray:
    zt = _dt_v_vals(grid, z)
    return -0.5j * (
        _lap(grid, zt) - 3.0 * (2.0 * np.abs(z) ** 2 * zt + z**2 * np.conj(zt))
    )


def dt_v(v: SpectralField) -> SpectralField:
    """First time derivative of the exact envelope flow at the given field."""
    return SpectralField(v.grid, _dt_v_vals(v.grid, v.values))


def dtt_v(v: SpectralField) -> SpectralField:
    """Second time derivative of the exact envelope flow at the given field.

    Obtained by differentiating the equation once more; pointwise terms use
    d/dt(|v|^2 v) = 2|v|^2 v_t + v^2 conj(v_t).
    """
    return SpectralField(v.grid, _dtt_v_vals(v.grid, v.values))


def _dt_w_vals(grid: Grid, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    coupling = 3.0 * (
        0.125 * np.abs(z) ** 4 * z + z**2 * np.conj(w) + 2.0 * np.abs(z) ** 2 * w
    )
    return -0.5j * (_lap(grid, w) - _dtt_v_vals(grid, z) - coupling)


def dt_w(v: SpectralField, w: SpectralField) -> SpectralField:
    """First time derivative of the companion profile at the given (v, w)."""
    _check_grids(v, w)
    return SpectralField(v.grid, _dt_w_vals(v.grid, v.values, w.values))


def _check_grids(*fields: SpectralField) -> None:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ContractViolation("fields live on different grids")


# ---------------------------------------------------------------------------
# Time grids


def _normalize_sample_times(sample_times: Sequence[float]) -> np.ndarray:
    times = np.asarray(sample_times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ConfigurationError("sample_times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0):
        raise ConfigurationError("sample_times must be strictly increasing")
    if times[0] < 0:
        raise ConfigurationError("sample_times must be nonnegative")
    if times[0] > 0:
        times = np.concatenate(([0.0], times))
    return times


def default_profile_dt(sample_times: Sequence[float]) -> float:
    """min(1e-2, smallest sample interval / 8); profiles are non-oscillatory."""
    times = _normalize_sample_times(sample_times)
    if times.size == 1:
        return DEFAULT_PROFILE_DT
    return min(DEFAULT_PROFILE_DT, float(np.min(np.diff(times))) / 8.0)


def _steps_per_interval(times: np.ndarray, dt: float) -> list[int]:
    """Number of steps per sample interval; dt must divide each interval."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    counts = []
    for delta in np.diff(times):
        n = max(1, int(round(delta / dt)))
        if abs(n * dt - delta) > 1e-9 * max(dt, delta):
            raise ConfigurationError(
                f"dt={dt} does not divide the sample interval {delta}"
            )
        counts.append(n)
    return counts


# ---------------------------------------------------------------------------
# v solver


def _v_strang_step(grid: Grid, z: np.ndarray, h: float, half_phase: np.ndarray) -> np.ndarray:
    z = np.fft.ifftn(half_phase * np.fft.fftn(z))
    z = z * np.exp(1.5j * h * np.abs(z) ** 2)
    return np.fft.ifftn(half_phase * np.fft.fftn(z))


def solve_v(
    v0: SpectralField, sample_times: Sequence[float], dt: float | None = None
) -> ProfileTrajectory:
    """Integrate the envelope equation, sampling at the requested times.

    Both Strang sub-flows are exact, so the L2 mass is conserved to round-off
    and single-Fourier-mode data are propagated exactly for any dt.
    """
    times = _normalize_sample_times(sample_times)
    if dt is None:
        dt = default_profile_dt(times)
    counts = _steps_per_interval(times, dt)

    grid = v0.grid
    samples = [v0]
    z = v0.values.copy()
    for delta, n in zip(np.diff(times), counts):
        h = float(delta) / n
        half_phase = np.exp(0.25j * grid.xi_squared * h)
        for _ in range(n):
            z = _v_strang_step(grid, z, h, half_phase)
        samples.append(SpectralField(grid, z.copy()))
    return ProfileTrajectory(grid=grid, sample_times=times, v_samples=samples, dt_v=dt)


# ---------------------------------------------------------------------------
# w solver


def _w_coupling_rhs(
    z: np.ndarray, w: np.ndarray, forcing: np.ndarray | None
) -> np.ndarray:
    # non-Laplacian part of 2i w_t = ... ; real-linear in (w, conj w)
    rhs = 3.0 * (z**2 * np.conj(w) + 2.0 * np.abs(z) ** 2 * w)
    if forcing is not None:
        rhs = rhs + forcing
    return 0.5j * rhs


def solve_w(
    v_traj: ProfileTrajectory,
    w0: SpectralField,
    sample_times: Sequence[float],
    dt: float | None = None,
    include_forcing: bool = True,
) -> ProfileTrajectory:
    """Integrate the companion equation along the envelope flow.

    The envelope is re-integrated internally with exact substeps of dt/2 so
    its values are available at the RK4 quadrature times.  With
    ``include_forcing=False`` only the real-linear coupling in (w, conj w) is
    kept, which makes the map w0 -> w(t) additive (used by linearity tests).
    """
    grid = v_traj.grid
    if w0.grid != grid:
        raise ContractViolation("w0 grid does not match the envelope trajectory grid")
    times = _normalize_sample_times(sample_times)
    if dt is None:
        dt = default_profile_dt(times)
    counts = _steps_per_interval(times, dt)

    v_samples = [v_traj.v_samples[0]]
    w_samples = [w0]
    z = v_traj.v_samples[0].values.copy()
    w = w0.values.copy()

    def forcing_at(zz: np.ndarray) -> np.ndarray | None:
        if not include_forcing:
            return None
        return _dtt_v_vals(grid, zz) + 0.375 * np.abs(zz) ** 4 * zz

    for delta, n in zip(np.diff(times), counts):
        h = float(delta) / n
        w_half_phase = np.exp(0.25j * grid.xi_squared * h)
        v_quarter_phase = np.exp(0.125j * grid.xi_squared * h)
        for _ in range(n):
            z_mid = _v_strang_step(grid, z, 0.5 * h, v_quarter_phase)
            z_next = _v_strang_step(grid, z_mid, 0.5 * h, v_quarter_phase)

            w = np.fft.ifftn(w_half_phase * np.fft.fftn(w))

            f0, fm, f1 = forcing_at(z), forcing_at(z_mid), forcing_at(z_next)
            k1 = _w_coupling_rhs(z, w, f0)
            k2 = _w_coupling_rhs(z_mid, w + 0.5 * h * k1, fm)
            k3 = _w_coupling_rhs(z_mid, w + 0.5 * h * k2, fm)
            k4 = _w_coupling_rhs(z_next, w + h * k3, f1)
            w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

            w = np.fft.ifftn(w_half_phase * np.fft.fftn(w))
            z = z_next
        v_samples.append(SpectralField(grid, z.copy()))
        w_samples.append(SpectralField(grid, w.copy()))

    return ProfileTrajectory(
        grid=grid,
        sample_times=times,
        v_samples=v_samples,
        w_samples=w_samples,
        dt_v=v_traj.dt_v,
        dt_w=dt,
    )


def solve_profiles(
    v0: SpectralField,
    sample_times: Sequence[float],
    dt_v: float | None = None,
    dt_w: float | None = None,
) -> ProfileTrajectory:
    """Convenience pipeline: w0 from v0, then both profiles on one time grid."""
    v_traj = solve_v(v0, sample_times, dt=dt_v)
    return solve_w(v_traj, w0_from_v0(v0), sample_times, dt=dt_w)


# ---------------------------------------------------------------------------
# Trajectory serialization: directory of field dumps plus a manifest


def save_trajectory(traj: ProfileTrajectory, directory: str | Path, eps: float | None = None) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, t in enumerate(traj.sample_times):
        entry = {"index": i, "time": float(t), "v": f"v_{i:05d}"}
        write_field(traj.v_samples[i], out / entry["v"], time=float(t), eps=eps)
        if traj.w_samples is not None:
            entry["w"] = f"w_{i:05d}"
            write_field(traj.w_samples[i], out / entry["w"], time=float(t), eps=eps)
        entries.append(entry)
    manifest = {
        "sample_times": [float(t) for t in traj.sample_times],
        "dt_v": traj.dt_v,
        "dt_w": traj.dt_w,
        "eps": eps,
        "fields": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out


def load_trajectory(directory: str | Path) -> ProfileTrajectory:
    src = Path(directory)
    manifest = json.loads((src / "manifest.json").read_text())
    v_samples = []
    w_samples = []
    for entry in manifest["fields"]:
        field, _ = read_field(src / entry["v"])
        v_samples.append(field)
        if "w" in entry:
            wfield, _ = read_field(src / entry["w"])
            w_samples.append(wfield)
    return ProfileTrajectory(
        grid=v_samples[0].grid,
        sample_times=np.asarray(manifest["sample_times"], dtype=np.float64),
        v_samples=v_samples,
        w_samples=w_samples or None,
        dt_v=manifest.get("dt_v"),
        dt_w=manifest.get("dt_w"),
    )
