"""Artifact emission: CSV persistence, text summaries, log-log SVG plots.

The CSV schema is fixed and documented by COLUMN_ORDER below.  Floats are
written with repr so ingesting a file reproduces the original records
exactly, and identical record lists always produce identical bytes.  Case
wall time is deliberately not persisted: it varies run to run and would
break the byte-determinism contract (records compare equal without it).

SVG plots are emitted through the Agg backend with one polyline per eps
value (gid "series-eps-<eps>") and one line per fitted power law (gid
"fit-<k>-<abscissa>-<response>"), so reports can be checked structurally.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be pinned first
import numpy as np  # noqa: E402

from .errors import ConfigurationError
from .sweep import FitResult, SweepRecord

COLUMN_ORDER = (
    "family",
    "a0",
    "alpha",
    "delta0",
    "u1_mode",
    "path",
    "dim",
    "points_per_axis",
    "half_width",
    "eps",
    "t",
    "dt_kg",
    "dt_v",
    "dt_w",
    "first_order_error_l2",
    "second_order_error_l2",
    "u_norm_l2",
    "energy_drift",
    "valid",
    "note",
)

_FLOAT_COLUMNS = frozenset(
    {
        "a0",
        "delta0",
        "half_width",
        "eps",
        "t",
        "dt_kg",
        "dt_v",
        "dt_w",
        "first_order_error_l2",
        "second_order_error_l2",
        "u_norm_l2",
        "energy_drift",
    }
)
_INT_COLUMNS = frozenset({"dim", "points_per_axis"})
_OPTIONAL_COLUMNS = frozenset({"alpha", "path"})


def _cell(record: SweepRecord, column: str) -> str:
    value = getattr(record, column)
    if value is None:
        return ""
    if column == "valid":
        return "true" if value else "false"
    if column in _FLOAT_COLUMNS or column == "alpha":
        return repr(float(value))
    return str(value)


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    """Serialize records to CSV text with the documented column order."""
    if not records:
        raise ConfigurationError("cannot emit an empty record list")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMN_ORDER)
    for record in records:
        writer.writerow([_cell(record, c) for c in COLUMN_ORDER])
    return buf.getvalue()


def write_records_csv(records: Sequence[SweepRecord], path: str | Path) -> Path:
    out = Path(path)
    out.write_text(records_to_csv(records))
    return out


def _parse_cell(column: str, text: str, where: str) -> object:
    try:
        if column in _OPTIONAL_COLUMNS and text == "":
            return None
        if column == "alpha" or column in _FLOAT_COLUMNS:
            return float(text)
        if column in _INT_COLUMNS:
            return int(text)
        if column == "valid":
            if text not in ("true", "false"):
                raise ValueError(f"expected true/false, got {text!r}")
            return text == "true"
        return text
    except ValueError as exc:
        raise ConfigurationError(f"{where}: bad {column} value: {exc}") from exc


def read_records_csv(path: str | Path) -> list[SweepRecord]:
    """Ingest a CSV produced by records_to_csv back into records.

    Wall time is not persisted, so re-read records carry wall_time_s=0.0;
    the field is excluded from record equality for exactly this reason.
    """
    src = Path(path)
    with src.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{src}: empty CSV") from None
        if tuple(header) != COLUMN_ORDER:
            raise ConfigurationError(
                f"{src}: unexpected CSV header {header!r}; "
                f"expected {list(COLUMN_ORDER)}"
            )
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(COLUMN_ORDER):
                raise ConfigurationError(
                    f"{src}:{lineno}: expected {len(COLUMN_ORDER)} cells, "
                    f"got {len(row)}"
                )
            where = f"{src}:{lineno}"
            kwargs = {
                column: _parse_cell(column, cell, where)
                for column, cell in zip(COLUMN_ORDER, row)
            }
            records.append(SweepRecord(**kwargs))
    if not records:
        raise ConfigurationError(f"{src}: CSV contains no records")
    return records


def summarize(records: Sequence[SweepRecord], fits: Sequence[FitResult] = ()) -> str:
    """Human-readable digest of a record set and any fitted rates."""
    if not records:
        raise ConfigurationError("cannot summarize an empty record list")
    lines = []
    n_valid = sum(1 for r in records if r.valid)
    first = records[0]
    lines.append(
        f"records: {len(records)} ({n_valid} valid, {len(records) - n_valid} flagged)"
    )
    lines.append(
        f"grid: dim={first.dim} points_per_axis={first.points_per_axis} "
        f"half_width={first.half_width:g}"
    )
    for eps in sorted({r.eps for r in records}):
        group = [r for r in records if r.eps == eps]
        ts = sorted(r.t for r in group)
        err2 = [r.second_order_error_l2 for r in group if r.valid]
        drift = max(r.energy_drift for r in group)
        err_part = (
            f"second-order err [{min(err2):.3e}, {max(err2):.3e}]"
            if err2
            else "no valid records"
        )
        lines.append(
            f"  eps={eps:g}: {len(group)} records, t in [{ts[0]:g}, {ts[-1]:g}], "
            f"{err_part}, max drift {drift:.2e}"
        )
    if fits:
        lines.append("fits:")
        for fit in fits:
            lines.append(f"  {fit.describe()}")
    return "\n".join(lines) + "\n"


def write_summary(
    records: Sequence[SweepRecord],
    fits: Sequence[FitResult],
    path: str | Path,
) -> Path:
    out = Path(path)
    out.write_text(summarize(records, fits))
    return out


def write_loglog_svg(
    records: Sequence[SweepRecord],
    fits: Sequence[FitResult],
    path: str | Path,
    abscissa: str = "eps",
    response: str = "second_order_error_l2",
) -> Path:
    """Emit a log-log scatter of response vs abscissa with fitted lines.

    One marker series per eps value present in the valid records; one
    straight line per fit, drawn across the plotted x range.  Group ids
    are attached so the document structure is testable.
    """
    usable = [r for r in records if r.valid and getattr(r, response) > 0.0]
    if not usable:
        raise ConfigurationError("no valid positive records to plot")

    def x_of(r: SweepRecord) -> float:
        if abscissa == "eps":
            return r.eps
        if abscissa == "eps2_t":
            return r.eps**2 * r.t
        if abscissa == "t":
            return r.t
        raise ConfigurationError(f"unknown abscissa {abscissa!r}")

    plt.rcParams["svg.hashsalt"] = "nrkg"
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    all_x = []
    for eps in sorted({r.eps for r in usable}):
        group = sorted((r for r in usable if r.eps == eps), key=x_of)
        xs = [x_of(r) for r in group]
        ys = [getattr(r, response) for r in group]
        all_x.extend(xs)
        (line,) = ax.loglog(xs, ys, marker="o", linestyle="-", label=f"eps={eps:g}")
        line.set_gid(f"series-eps-{eps:g}")
    lo, hi = min(all_x), max(all_x)
    if lo == hi:
        lo, hi = 0.5 * lo, 2.0 * hi
    for k, fit in enumerate(fits):
        xs = np.geomspace(lo, hi, 32)
        ys = np.exp(fit.intercept) * xs**fit.slope
        (line,) = ax.loglog(
            xs, ys, linestyle="--", label=f"fit slope {fit.slope:.2f}"
        )
        line.set_gid(f"fit-{k}-{fit.abscissa}-{fit.response}")
    ax.set_xlabel(abscissa)
    ax.set_ylabel(response)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    out = Path(path)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
