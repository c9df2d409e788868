"""Direct integrator for the expansion-remainder equation.

Writing the Klein-Gordon solution as u = T1 + eps^2 T2 + r (T1, T2 the
modulated terms of :mod:`nrkg.expansion`), the remainder solves

    eps^2 r_tt - Lap r + r / eps^2 + F1 + F2 + F3 + Fr = 0,

with, writing p = exp(i t / eps^2) and c.c. for complex conjugates,

    F1 = eps^4 [ p^3 d2/dt2(v^3) / 8 + p d2/dt2(w) ] + c.c.
    F2 = eps^2 [ 3/8 p^5 v^5
                 + 1/8 p^3 ( 6i d/dt(v^3) - Lap(v^3)
                             + 3 (2 |v|^2 v^3 + 8 v^2 w) ) ] + c.c.
    F3 = 3 eps^4 T1 T2^2 + eps^6 T2^3
    Fr = 3 (T1 + eps^2 T2)^2 r + 3 (T1 + eps^2 T2) r^2 + r^3

and data r(0) = 0,
r_t(0) = -eps^2 [ d/dt(v^3 + conj(v)^3)(0) / 8 + d/dt(w + conj(w))(0) ].

The profile-only forcings are precomputed at the kick times of the same
kick-rotate-kick splitting used by the main solver; time derivatives of v
are taken analytically, while d2/dt2(w) comes from centered finite
differences of the stored w samples (second-order one-sided stencils at the
trajectory ends).  The self-coupling Fr is advanced inside the kicks with
the current r, so the equation is genuinely solved, not just forced.

Since r solves a forced equation structurally identical to the one handled
by :mod:`nrkg.klein_gordon`, integrating it directly and assembling
u - T1 - eps^2 T2 from independent solves give two routes to the same field,
which the test suite exploits as mutual oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nrkg.errors import ConfigurationError, ContractViolation
from nrkg.klein_gordon import (
    default_dt,
    linear_rotation_coefficients,
    max_stable_dt,
)
from nrkg.profiles import (
    ProfileTrajectory,
    _dt_v_vals,
    _dt_w_vals,
    _dtt_v_vals,
    _lap,
    solve_profiles,
)
from nrkg.spectral import Grid, SpectralField


@dataclass
class RemainderTrajectory:
    """Remainder field and its velocity at the requested sample times."""

    sample_times: np.ndarray
    r_samples: list[SpectralField]
    rt_samples: list[SpectralField]
    eps: float
    dt: float

    @property
    def fields(self) -> list[SpectralField]:
        return self.r_samples


def remainder_initial_velocity(
    v0: SpectralField, w0: SpectralField, eps: float
) -> SpectralField:
    """r_t(0) = -eps^2 * 2 Re( 3/8 v0^2 v0' + w0' ), derivatives analytic."""
    if v0.grid != w0.grid:
        raise ContractViolation("v0 and w0 live on different grids")
    g = v0.grid
    z, w = v0.values, w0.values
    dt_v3_over_8 = 0.375 * z**2 * _dt_v_vals(g, z)
    vals = -(eps**2) * 2.0 * np.real(dt_v3_over_8 + _dt_w_vals(g, z, w))
    return SpectralField(g, vals.astype(np.complex128))


def _dtt_w_stack(w_stack: np.ndarray, h: float) -> np.ndarray:
    """Second time derivative of w along axis 0 by finite differences.

    Centered 3-point stencil inside; second-order one-sided 4-point stencils
    at both ends.  Requires at least 4 time samples.
    """
    m = w_stack.shape[0]
    if m < 4:
        raise ConfigurationError(
            "finite-difference stencil for d2/dt2(w) needs at least 4 samples, "
            f"got {m}"
        )
    out = np.empty_like(w_stack)
    out[1:-1] = (w_stack[2:] - 2.0 * w_stack[1:-1] + w_stack[:-2]) / h**2
    out[0] = (2.0 * w_stack[0] - 5.0 * w_stack[1] + 4.0 * w_stack[2] - w_stack[3]) / h**2
    out[-1] = (
        2.0 * w_stack[-1] - 5.0 * w_stack[-2] + 4.0 * w_stack[-3] - w_stack[-4]
    ) / h**2
    return out


def _profile_forcing(
    grid: Grid,
    z: np.ndarray,
    w: np.ndarray,
    dtt_w: np.ndarray,
    t: float,
    eps: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Profile-only forcing F1+F2+F3 and the ansatz field T1 + eps^2 T2 at t."""
    p1 = np.exp(1j * (t / eps**2))
    p3 = p1**3
    p5 = p1**5

    zt = _dt_v_vals(grid, z)
    z2 = z**2
    z3 = z2 * z
    abs2 = np.abs(z) ** 2
    dt_v3 = 3.0 * z2 * zt
    dtt_v3 = 6.0 * z * zt**2 + 3.0 * z2 * _dtt_v_vals(grid, z)

    f1 = eps**4 * 2.0 * np.real(0.125 * p3 * dtt_v3 + p1 * dtt_w)
    inner = (
        6.0j * dt_v3
        - _lap(grid, z3)
        + 3.0 * (2.0 * abs2 * z3 + 8.0 * z2 * w)
    )
    f2 = eps**2 * 2.0 * np.real(0.375 * p5 * z3 * z2 + 0.125 * p3 * inner)

    t1 = 2.0 * np.real(p1 * z)
    t2 = 2.0 * np.real(0.125 * p3 * z3 + p1 * w)
    f3 = 3.0 * eps**4 * t1 * t2**2 + eps**6 * t2**3

    return (f1 + f2 + f3).real, (t1 + eps**2 * t2).real


def _kick(
    rt: np.ndarray, r: np.ndarray, forcing: np.ndarray, ansatz: np.ndarray,
    half_h: float, eps: float,
) -> np.ndarray:
    coupling = 3.0 * ansatz**2 * r + 3.0 * ansatz * r**2 + r**3
    return rt - (half_h / eps**2) * (forcing + coupling)


def _locate_times(available: np.ndarray, wanted: np.ndarray, what: str) -> np.ndarray:
    idx = np.searchsorted(available, wanted)
    idx = np.clip(idx, 0, available.size - 1)
    left = np.clip(idx - 1, 0, available.size - 1)
    pick = np.where(
        np.abs(available[left] - wanted) < np.abs(available[idx] - wanted), left, idx
    )
    if np.any(np.abs(available[pick] - wanted) > 1e-9 * np.maximum(1.0, np.abs(wanted))):
        raise ConfigurationError(
            f"profile trajectory does not contain all required {what} times"
        )
    return pick


def remainder_solve(
    v_traj: ProfileTrajectory,
    w_traj: ProfileTrajectory,
    eps: float,
    sample_times: Sequence[float],
    dt: float | None = None,
) -> RemainderTrajectory:
    """Integrate the remainder equation along precomputed profile trajectories.

    The trajectories must contain samples at every kick time (all step
    boundaries implied by ``dt`` and ``sample_times``); the w trajectory must
    be uniformly sampled so the finite-difference stencil for d2/dt2(w) is
    valid.  r(0) = 0 exactly; r_t(0) is evaluated analytically from
    (v(0), w(0)).
    """
    grid = v_traj.grid
    if w_traj.grid != grid:
        raise ContractViolation("v and w trajectories live on different grids")
    if w_traj.w_samples is None:
        raise ContractViolation("w trajectory carries no w samples")
    if not (0 < eps <= 1):
        raise ConfigurationError(f"eps must lie in (0, 1], got {eps}")
    if dt is None:
        dt = default_dt(eps)
    limit = max_stable_dt(eps)
    if dt > limit * (1 + 1e-12):
        raise ConfigurationError(
            f"dt={dt} exceeds the resolution bound {limit} for the remainder step"
        )

    times = np.asarray(sample_times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ConfigurationError("sample_times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ConfigurationError("sample_times must be strictly increasing and >= 0")
    if times[0] > 0:
        times = np.concatenate(([0.0], times))

    # kick-time grid: all step boundaries, sample times included
    kick_times: list[float] = [0.0]
    for t_prev, t_next in zip(times[:-1], times[1:]):
        delta = float(t_next - t_prev)
        n = max(1, int(round(delta / dt)))
        if abs(n * dt - delta) > 1e-9 * max(dt, delta):
            raise ConfigurationError(
                f"dt={dt} does not divide the sample interval {delta}"
            )
        h = delta / n
        kick_times.extend(float(t_prev) + h * (j + 1) for j in range(n))
    kick_arr = np.asarray(kick_times)

    # profile fields at kick times
    v_idx = _locate_times(v_traj.sample_times, kick_arr, "v sample")
    w_idx = _locate_times(w_traj.sample_times, kick_arr, "w sample")

    # d2/dt2(w) over the w trajectory's own uniform grid
    w_spacings = np.diff(w_traj.sample_times)
    if w_spacings.size == 0 or np.max(np.abs(w_spacings - w_spacings[0])) > 1e-9 * w_spacings[0]:
        raise ConfigurationError(
            "w trajectory must be uniformly sampled for the d2/dt2(w) stencil"
        )
    w_stack = np.stack([f.values for f in w_traj.w_samples])
    dtt_w_stack = _dtt_w_stack(w_stack, float(w_spacings[0]))

    forcings = []
    ansatzes = []
    for k, t in enumerate(kick_arr):
        z = v_traj.v_samples[int(v_idx[k])].values
        w = w_traj.w_samples[int(w_idx[k])].values
        f, phi = _profile_forcing(grid, z, w, dtt_w_stack[int(w_idx[k])], float(t), eps)
        forcings.append(f)
        ansatzes.append(phi)

    v0 = v_traj.v_samples[int(v_idx[0])]
    w0 = w_traj.w_samples[int(w_idx[0])]
    r = np.zeros(grid.shape, dtype=np.float64)
    rt = remainder_initial_velocity(v0, w0, eps).values.real.copy()

    r_samples = [SpectralField(grid, r.astype(np.complex128))]
    rt_samples = [SpectralField(grid, rt.astype(np.complex128))]

    k = 0
    for t_prev, t_next in zip(times[:-1], times[1:]):
        delta = float(t_next - t_prev)
        n = max(1, int(round(delta / dt)))
        h = delta / n
        cos_h, sinc_h, omega_sin_h = linear_rotation_coefficients(grid, eps, h)
        for _ in range(n):
            rt = _kick(rt, r, forcings[k], ansatzes[k], 0.5 * h, eps)
            r_hat = np.fft.fftn(r)
            rt_hat = np.fft.fftn(rt)
            r = np.fft.ifftn(cos_h * r_hat + sinc_h * rt_hat).real
            rt = np.fft.ifftn(-omega_sin_h * r_hat + cos_h * rt_hat).real
            k += 1
            rt = _kick(rt, r, forcings[k], ansatzes[k], 0.5 * h, eps)
        r_samples.append(SpectralField(grid, r.astype(np.complex128)))
        rt_samples.append(SpectralField(grid, rt.astype(np.complex128)))

    return RemainderTrajectory(
        sample_times=times,
        r_samples=r_samples,
        rt_samples=rt_samples,
        eps=eps,
        dt=dt,
    )


def remainder_direct(
    v0: SpectralField,
    eps: float,
    sample_times: Sequence[float],
    dt: float | None = None,
    profile_dt: float | None = None,
) -> tuple[RemainderTrajectory, ProfileTrajectory]:
    """Convenience driver: profiles at all kick times, then the direct solve."""
    if dt is None:
        dt = default_dt(eps)
    times = np.asarray(sample_times, dtype=np.float64)
    if times.size == 0:
        raise ConfigurationError("sample_times must be non-empty")
    if times[0] > 0:
        times = np.concatenate(([0.0], times))
    kick_times: list[float] = [0.0]
    for t_prev, t_next in zip(times[:-1], times[1:]):
        delta = float(t_next - t_prev)
        n = max(1, int(round(delta / dt)))
        h = delta / n
        kick_times.extend(float(t_prev) + h * (j + 1) for j in range(n))
    traj = solve_profiles(v0, kick_times, dt_v=profile_dt, dt_w=profile_dt)
    rem = remainder_solve(traj, traj, eps, times, dt=dt)
    return rem, traj
