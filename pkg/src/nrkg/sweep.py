"""Experiment orchestration: case runner, sweep driver, and order fitting.

A *case* is one (data spec, eps) pair integrated over a list of sample
times; it yields one flat record per sample time carrying the expansion
error norms together with enough metadata (data family, grid, steps) to
reproduce the run.  A *sweep* is a batch of cases over an eps list,
optionally dispatched to a process pool; aggregation is order-independent
because records are sorted by (eps, t) before they are returned.

Convergence rates are extracted with least-squares fits of log(response)
against log(abscissa), where the abscissa is eps, the combined variable
eps^2*t, or t.  Records flagged invalid (conservation breach or a failed
component) never enter fits.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .data import DataSpec, initial_data
from .errors import ConfigurationError, ContractViolation, FitError
from .expansion import expansion_sample
from .klein_gordon import FOURTH_ORDER, PHYSICAL, KGOptions, kg_solve
from .profiles import solve_profiles
from .spectral import Grid, sobolev_norm

ABSCISSA_KINDS = ("eps", "eps2_t", "t")
RESPONSE_FIELDS = ("first_order_error_l2", "second_order_error_l2")


@dataclass(frozen=True)
class SolverOptions:
    """Numerical controls shared by every case of a sweep.

    ``None`` steps select the solver defaults (eps^2/8 for the oscillatory
    flow, a gap-resolving step for the envelope profiles).  ``energy_tol``
    is the relative conservation drift above which a record is flagged
    invalid; it does not abort the case.
    """

    dt_kg: float | None = None
    dt_v: float | None = None
    dt_w: float | None = None
    formulation: str = PHYSICAL
    composition: str = FOURTH_ORDER
    energy_tol: float = 1e-6

    def __post_init__(self) -> None:
        self.kg_options()  # validates formulation/composition/dt eagerly
        for name in ("dt_v", "dt_w"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if not self.energy_tol > 0:
            raise ConfigurationError(
                f"energy_tol must be positive, got {self.energy_tol}"
            )

    def kg_options(self) -> KGOptions:
        # the drift guard is applied per record, not as a hard abort
        return KGOptions(
            dt=self.dt_kg,
            formulation=self.formulation,
            composition=self.composition,
            energy_tol=None,
        )


@dataclass(frozen=True)
class SweepRecord:
    """One (case, sample time) result row.

    Error fields are absolute L2 norms and must be finite and nonnegative.
    ``dt_kg`` is the step actually used, in the integration formulation's
    own time variable.  ``valid`` is False when the case failed or the
    conservation drift exceeded the configured tolerance; ``note`` then
    carries the diagnostic.  ``wall_time_s`` is the whole case's wall time
    (repeated on each of its records) and is excluded from equality so
    that repeated runs of the same config compare equal.
    """

    family: str
    a0: float
    alpha: float | None
    delta0: float
    u1_mode: str
    path: str | None
    dim: int
    points_per_axis: int
    half_width: float
    eps: float
    t: float
    dt_kg: float
    dt_v: float
    dt_w: float
    first_order_error_l2: float
    second_order_error_l2: float
    u_norm_l2: float
    energy_drift: float
    valid: bool
    note: str = ""
    wall_time_s: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        for name in ("first_order_error_l2", "second_order_error_l2", "u_norm_l2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ContractViolation(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class FitResult:
    """Least-squares line through (log abscissa, log response).

    ``intercept`` is in natural-log units: the model is
    response = exp(intercept) * abscissa**slope.
    """

    slope: float
    intercept: float
    r_squared: float
    abscissa: str
    response: str
    n_used: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_squared <= 1.0:
            raise ContractViolation(f"r_squared out of [0, 1]: {self.r_squared}")

    def describe(self) -> str:
        return (
            f"log({self.response}) vs log({self.abscissa}): "
            f"slope={self.slope:.4f} intercept={self.intercept:.4f} "
            f"r2={self.r_squared:.6f} n={self.n_used}"
        )


def _case_records(
    data_spec: DataSpec,
    eps: float,
    sample_times: Sequence[float],
    grid: Grid,
    options: SolverOptions,
) -> list[SweepRecord]:
    u0, u1, v0 = initial_data(grid, data_spec)
    kg = kg_solve(u0, u1, eps, sample_times, options.kg_options())
    profiles = solve_profiles(v0, sample_times, dt_v=options.dt_v, dt_w=options.dt_w)
    # profile trajectories always include t=0; map requested times into them
    prof_index = {float(t): i for i, t in enumerate(profiles.sample_times)}

    e0 = kg.energies[0]
    # the solvers prepend t=0 for their own baselines; report only what was asked
    requested = {float(t) for t in sample_times}
    # the second profile has no conserved mass and may grow in time; runs where
    # its H^2 size explodes past the initial one are flagged (not failed)
    w0_h2 = sobolev_norm(profiles.w_samples[0], 2.0)
    records = []
    running_drift = 0.0
    for i, t in enumerate(kg.sample_times):
        t = float(t)
        step = abs(kg.energies[i] - e0) / abs(e0) if e0 != 0.0 else abs(kg.energies[i])
        running_drift = max(running_drift, float(step))
        if t not in requested:
            continue
        sample = expansion_sample(
            kg.states[i],
            profiles.v_samples[prof_index[t]],
            profiles.w_samples[prof_index[t]],
            t,
        )
        within_budget = bool(running_drift <= options.energy_tol)
        notes = [] if within_budget else ["energy drift above tolerance"]
        w_h2 = sobolev_norm(profiles.w_samples[prof_index[t]], 2.0)
        if w0_h2 > 0.0 and w_h2 > 1e3 * w0_h2:
            notes.append(f"second profile H2 norm grew {w_h2 / w0_h2:.1e}x")
        records.append(
            SweepRecord(
                family=data_spec.family,
                a0=data_spec.a0,
                alpha=data_spec.alpha,
                delta0=data_spec.delta0,
                u1_mode=data_spec.u1_mode,
                path=data_spec.path,
                dim=grid.dim,
                points_per_axis=grid.points_per_axis,
                half_width=grid.half_width,
                eps=eps,
                t=t,
                dt_kg=kg.dt,
                dt_v=profiles.dt_v,
                dt_w=profiles.dt_w,
                first_order_error_l2=sample.first_order_error_l2,
                second_order_error_l2=sample.second_order_error_l2,
                u_norm_l2=sample.u_norm_l2,
                energy_drift=running_drift,
                valid=within_budget,
                note="; ".join(notes),
            )
        )
    return records


def run_case(
    data_spec: DataSpec,
    eps: float,
    sample_times: Sequence[float],
    grid: Grid,
    options: SolverOptions | None = None,
) -> list[SweepRecord]:
    """Integrate one case and report one record per requested sample time.

    Any component failure aborts the case and yields a single diagnostic
    record (zero error columns, valid=False, note naming the exception)
    so a sweep can continue past a bad configuration.
    """
    options = options or SolverOptions()
    times = [float(t) for t in sample_times]
    start = time.perf_counter()
    try:
        records = _case_records(data_spec, eps, times, grid, options)
    except Exception as exc:  # noqa: BLE001 - diagnostic record by contract
        return [
            SweepRecord(
                family=data_spec.family,
                a0=data_spec.a0,
                alpha=data_spec.alpha,
                delta0=data_spec.delta0,
                u1_mode=data_spec.u1_mode,
                path=data_spec.path,
                dim=grid.dim,
                points_per_axis=grid.points_per_axis,
                half_width=grid.half_width,
                eps=eps,
                t=times[0] if times else 0.0,
                dt_kg=0.0,
                dt_v=0.0,
                dt_w=0.0,
                first_order_error_l2=0.0,
                second_order_error_l2=0.0,
                u_norm_l2=0.0,
                energy_drift=0.0,
                valid=False,
                note=f"{type(exc).__name__}: {exc}",
                wall_time_s=time.perf_counter() - start,
            )
        ]
    elapsed = time.perf_counter() - start
    return [replace(r, wall_time_s=elapsed) for r in records]


def _case_worker(args: tuple) -> list[SweepRecord]:
    return run_case(*args)


def run_sweep(
    data_spec: DataSpec,
    eps_values: Sequence[float],
    sample_times: Sequence[float],
    grid: Grid,
    options: SolverOptions | None = None,
    workers: int = 1,
    progress: Callable[[str], None] | None = None,
) -> list[SweepRecord]:
    """Run one case per eps value, serially or on a process pool.

    The returned list is sorted by (eps, t) regardless of completion
    order, so identical configs produce identical artifacts.
    """
    if not eps_values:
        raise ConfigurationError("sweep needs at least one eps value")
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    options = options or SolverOptions()
    jobs = [(data_spec, float(e), list(sample_times), grid, options) for e in eps_values]

    results: list[list[SweepRecord]]
    if workers == 1:
        results = []
        for job in jobs:
            results.append(_case_worker(job))
            if progress is not None:
                progress(_progress_line(results[-1]))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_case_worker, job) for job in jobs]
            results = []
            for fut in futures:  # input order; completion order is irrelevant
                results.append(fut.result())
                if progress is not None:
                    progress(_progress_line(results[-1]))

    records = [record for case in results for record in case]
    records.sort(key=lambda r: (r.eps, r.t))
    return records


def _progress_line(case_records: list[SweepRecord]) -> str:
    first = case_records[0]
    bad = sum(1 for r in case_records if not r.valid)
    status = "ok" if bad == 0 else f"{bad} invalid"
    return (
        f"case eps={first.eps:g} [{first.family}]: {len(case_records)} records, "
        f"{status}, {first.wall_time_s:.1f}s"
    )


def _abscissa_value(record: SweepRecord, kind: str) -> float:
    if kind == "eps":
        return record.eps
    if kind == "eps2_t":
        return record.eps**2 * record.t
    return record.t


def fit_order(
    records: Sequence[SweepRecord],
    abscissa: str,
    response: str = "second_order_error_l2",
) -> FitResult:
    """Fit log(response) = slope*log(abscissa) + intercept over the records.

    Invalid records are excluded; records with nonpositive response or
    abscissa are dropped with a warning.  Fewer than three surviving
    points is an error: a two-point "fit" would always have r^2 = 1.
    """
    if abscissa not in ABSCISSA_KINDS:
        raise ConfigurationError(
            f"unknown abscissa {abscissa!r}; expected one of {ABSCISSA_KINDS}"
        )
    if response not in RESPONSE_FIELDS:
        raise ConfigurationError(
            f"unknown response {response!r}; expected one of {RESPONSE_FIELDS}"
        )
    usable = [r for r in records if r.valid]
    xs, ys = [], []
    dropped = 0
    for r in usable:
        x = _abscissa_value(r, abscissa)
        y = getattr(r, response)
        if x > 0.0 and y > 0.0:
            xs.append(math.log(x))
            ys.append(math.log(y))
        else:
            dropped += 1
    if dropped:
        warnings.warn(
            f"fit_order dropped {dropped} record(s) with nonpositive "
            f"{abscissa} or {response}",
            stacklevel=2,
        )
    if len(xs) < 3:
        raise FitError(
            f"fit needs at least 3 usable records, got {len(xs)} "
            f"(of {len(records)} supplied)"
        )
    x = np.asarray(xs)
    y = np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        abscissa=abscissa,
        response=response,
        n_used=len(xs),
    )
