"""Case runner, sweep driver, and rate-fitting tests."""

import math

import numpy as np
import pytest

from nrkg.data import DataSpec
from nrkg.errors import ConfigurationError, ContractViolation, FitError
from nrkg.spectral import make_grid
from nrkg.sweep import (
    FitResult,
    SolverOptions,
    SweepRecord,
    fit_order,
    run_case,
    run_sweep,
)

FAST_OPTIONS = SolverOptions(dt_v=2e-3, dt_w=2e-3)


def synthetic_record(eps, t, err1, err2, valid=True):
    return SweepRecord(
        family="gaussian",
        a0=1.0,
        alpha=None,
        delta0=0.5,
        u1_mode="zero",
        path=None,
        dim=1,
        points_per_axis=64,
        half_width=16.0,
        eps=eps,
        t=t,
        dt_kg=1e-3,
        dt_v=1e-2,
        dt_w=1e-2,
        first_order_error_l2=err1,
        second_order_error_l2=err2,
        u_norm_l2=1.0,
        energy_drift=1e-9,
        valid=valid,
    )


# ---------------------------------------------------------------------------
# fit_order on synthetic data


def test_fit_exact_quartic():
    records = [synthetic_record(x, 1.0, x**2, x**4) for x in (0.5, 0.25, 0.125, 0.0625)]
    fit = fit_order(records, "eps", "second_order_error_l2")
    assert fit.slope == pytest.approx(4.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_used == 4


def test_fit_recovers_prefactor_in_intercept():
    records = [synthetic_record(x, 1.0, 1.0, 3.0 * x**2) for x in (0.5, 0.25, 0.125)]
    fit = fit_order(records, "eps", "second_order_error_l2")
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)


def test_fit_tolerates_small_multiplicative_noise():
    xs = [2.0**-k for k in range(2, 7)]
    records = [
        synthetic_record(x, 1.0, 1.0, x**4 * (1.0 + 0.05 * math.sin(1.0 / x)))
        for x in xs
    ]
    fit = fit_order(records, "eps", "second_order_error_l2")
    assert abs(fit.slope - 4.0) <= 0.1


def test_fit_pooled_combined_abscissa():
    records = [
        synthetic_record(eps, t, 1.0, (eps**2 * t) ** 1.5)
        for eps in (0.25, 0.125)
        for t in (1.0, 2.0, 4.0)
    ]
    fit = fit_order(records, "eps2_t", "second_order_error_l2")
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.abscissa == "eps2_t"


def test_fit_time_abscissa():
    records = [synthetic_record(0.125, t, 1.0, 0.7 * t**2) for t in (2.0, 4.0, 8.0)]
    fit = fit_order(records, "t", "second_order_error_l2")
    assert fit.slope == pytest.approx(2.0, abs=1e-12)


def test_fit_drops_nonpositive_with_warning():
    records = [synthetic_record(x, 1.0, 1.0, x**4) for x in (0.5, 0.25, 0.125)]
    records.append(synthetic_record(0.0625, 1.0, 1.0, 0.0))
    with pytest.warns(UserWarning, match="dropped"):
        fit = fit_order(records, "eps", "second_order_error_l2")
    assert fit.n_used == 3
    assert fit.slope == pytest.approx(4.0, abs=1e-12)


def test_fit_excludes_invalid_records():
    good = [synthetic_record(x, 1.0, 1.0, x**4) for x in (0.5, 0.25, 0.125)]
    poisoned = good + [synthetic_record(0.0625, 1.0, 1.0, 5.0, valid=False)]
    fit = fit_order(poisoned, "eps", "second_order_error_l2")
    assert fit.n_used == 3
    assert fit.slope == pytest.approx(4.0, abs=1e-12)


def test_fit_needs_three_points():
    records = [synthetic_record(x, 1.0, 1.0, x**4) for x in (0.5, 0.25)]
    with pytest.raises(FitError):
        fit_order(records, "eps", "second_order_error_l2")


def test_fit_rejects_unknown_axes():
    records = [synthetic_record(x, 1.0, 1.0, x**4) for x in (0.5, 0.25, 0.125)]
    with pytest.raises(ConfigurationError):
        fit_order(records, "delta0", "second_order_error_l2")
    with pytest.raises(ConfigurationError):
        fit_order(records, "eps", "u_norm_l2")


def test_fit_result_validates_r_squared():
    with pytest.raises(ContractViolation):
        FitResult(
            slope=1.0,
            intercept=0.0,
            r_squared=1.5,
            abscissa="eps",
            response="second_order_error_l2",
            n_used=3,
        )


def test_record_requires_finite_errors():
    with pytest.raises(ContractViolation):
        synthetic_record(0.25, 1.0, float("nan"), 1.0)
    with pytest.raises(ContractViolation):
        synthetic_record(0.25, 1.0, 1.0, -2.0)


# ---------------------------------------------------------------------------
# run_case / run_sweep on the real stack


def test_run_case_zero_amplitude_yields_zero_errors():
    g = make_grid(1, 64, 16.0)
    records = run_case(DataSpec(a0=1.0, delta0=0.0), 0.25, [0.5, 1.0], g, FAST_OPTIONS)
    assert len(records) == 2
    for r in records:
        assert r.first_order_error_l2 == 0.0
        assert r.second_order_error_l2 == 0.0
        assert r.valid


def test_run_case_standard_instance_orders_errors():
    g = make_grid(1, 256, 16.0)
    records = run_case(
        DataSpec(a0=1.0, delta0=0.25),
        0.25,
        [0.25, 0.5, 1.0],
        g,
        SolverOptions(dt_v=1e-3, dt_w=1e-3),
    )
    assert len(records) == 3
    for r in records:
        assert r.valid
        assert r.second_order_error_l2 < r.first_order_error_l2


def test_run_case_is_deterministic():
    g = make_grid(1, 64, 16.0)
    spec = DataSpec(a0=1.0, delta0=0.25)
    first = run_case(spec, 0.25, [0.5], g, FAST_OPTIONS)
    second = run_case(spec, 0.25, [0.5], g, FAST_OPTIONS)
    assert first == second  # wall time is excluded from comparison


def test_run_case_failure_yields_diagnostic_record():
    g = make_grid(1, 64, 16.0)
    records = run_case(DataSpec(a0=0.05, delta0=0.5), 0.25, [1.0], g, FAST_OPTIONS)
    assert len(records) == 1
    assert not records[0].valid
    assert "ConfigurationError" in records[0].note
    assert records[0].first_order_error_l2 == 0.0


def test_run_sweep_sorts_and_matches_serial_and_parallel():
    g = make_grid(1, 64, 16.0)
    spec = DataSpec(a0=1.0, delta0=0.25)
    eps_values = [0.25, 0.125]
    serial = run_sweep(spec, eps_values, [0.5, 1.0], g, FAST_OPTIONS, workers=1)
    parallel = run_sweep(spec, eps_values, [0.5, 1.0], g, FAST_OPTIONS, workers=2)
    assert serial == parallel
    keys = [(r.eps, r.t) for r in serial]
    assert keys == sorted(keys)


def test_run_sweep_reports_progress():
    g = make_grid(1, 64, 16.0)
    lines = []
    run_sweep(
        DataSpec(a0=1.0, delta0=0.25),
        [0.25, 0.125],
        [0.5],
        g,
        FAST_OPTIONS,
        progress=lines.append,
    )
    assert len(lines) == 2
    assert all("records" in line for line in lines)


def test_run_sweep_validates_arguments():
    g = make_grid(1, 64, 16.0)
    spec = DataSpec()
    with pytest.raises(ConfigurationError):
        run_sweep(spec, [], [1.0], g)
    with pytest.raises(ConfigurationError):
        run_sweep(spec, [0.25], [1.0], g, workers=0)


def test_solver_options_validation():
    with pytest.raises(ConfigurationError):
        SolverOptions(dt_v=-1.0)
    with pytest.raises(ConfigurationError):
        SolverOptions(energy_tol=0.0)
    with pytest.raises(ConfigurationError):
        SolverOptions(formulation="imaginary")


def test_flagged_record_on_energy_breach():
    g = make_grid(1, 64, 16.0)
    strict = SolverOptions(dt_v=2e-3, dt_w=2e-3, energy_tol=1e-30)
    records = run_case(DataSpec(a0=1.0, delta0=0.25), 0.25, [0.5], g, strict)
    assert len(records) == 1
    assert not records[0].valid
    assert "drift" in records[0].note


def test_energy_drift_column_monotone_in_time():
    g = make_grid(1, 64, 16.0)
    records = run_case(
        DataSpec(a0=1.0, delta0=0.25), 0.25, [0.25, 0.5, 1.0], g, FAST_OPTIONS
    )
    drifts = [r.energy_drift for r in records]
    assert drifts == sorted(drifts)  # running maximum by construction
    assert np.all(np.asarray(drifts) >= 0.0)
