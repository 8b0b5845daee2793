"""Text formats: profile CSV, check-report TSV and plot-data series.

All numbers are written with 17 significant digits and a ``.`` decimal
separator regardless of locale, so files round-trip exactly.
"""

from __future__ import annotations

import io
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .inequality_checks import CheckReport
from .profiles import ProfileMeta, SampledProfile


class FormatError(ValueError):
    """Malformed input file; the message carries a ``line:column`` location."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_profile_csv(p: SampledProfile, out: TextIO) -> None:
    out.write("v,I\n")
    for v, I in zip(p.volumes, p.values):
        out.write(f"{fmt(v)},{fmt(I)}\n")


def profile_csv_text(p: SampledProfile) -> str:
    buf = io.StringIO()
    write_profile_csv(p, buf)
    return buf.getvalue()


def parse_profile_csv(text: str, source: str = "<input>", meta: Optional[ProfileMeta] = None) -> SampledProfile:
    """Parse the ``v,I`` CSV contract; errors name the offending line and column."""
    lines = text.splitlines()
    if not lines or lines[0].strip().replace(" ", "") != "v,I":
        raise FormatError(f"{source}:1:1: expected header 'v,I'")
    vols: list[float] = []
    vals: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise FormatError(f"{source}:{lineno}: expected 2 columns, got {len(cells)}")
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                x = float(cell)
            except ValueError:
                raise FormatError(f"{source}:{lineno}:{col}: not a number: {cell.strip()!r}") from None
            if not np.isfinite(x):
                raise FormatError(f"{source}:{lineno}:{col}: non-finite value {cell.strip()!r}")
            row.append(x)
        v, I = row
        if v <= 0:
            raise FormatError(f"{source}:{lineno}:1: volume must be positive")
        if I <= 0:
            raise FormatError(f"{source}:{lineno}:2: profile value must be positive")
        if vols and v <= vols[-1]:
            raise FormatError(f"{source}:{lineno}:1: volumes must be strictly increasing")
        vols.append(v)
        vals.append(I)
    if len(vols) < 3:
        raise FormatError(f"{source}: need at least 3 data rows, got {len(vols)}")
    try:
        return SampledProfile(np.array(vols), np.array(vals), meta or ProfileMeta())
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from None


def read_profile_csv(path: str, meta: Optional[ProfileMeta] = None) -> SampledProfile:
    with open(path, encoding="utf-8") as fh:
        return parse_profile_csv(fh.read(), path, meta)


def _summary_line(report: CheckReport) -> str:
    s = report.summary()
    parts = [
        f"method={s['method']}",
        f"tolerance={fmt(s['tolerance'])}",
        f"min_residual={fmt(s['min_residual'])}",
        f"argmin_v={fmt(s['argmin_v'])}",
        f"passed={s['passed']}",
        f"failed={s['failed']}",
        f"resampled={str(s['resampled']).lower()}",
    ]
    return "# summary: " + " ".join(parts)


def report_tsv(report: CheckReport) -> str:
    rows = ["v\tresidual\tpass"]
    for v, r, ok in zip(report.volumes, report.residuals, report.passed):
        rows.append(f"{fmt(v)}\t{fmt(r)}\t{int(bool(ok))}")
    rows.append(_summary_line(report))
    return "\n".join(rows) + "\n"


def plot_data(series: Iterable[tuple[str, Sequence[float], Sequence[float]]]) -> str:
    """Blocks of two-column TSV, each preceded by ``# series: <name>`` and separated by a blank line."""
    blocks = []
    for name, xs, ys in series:
        lines = [f"# series: {name}"]
        lines.extend(f"{fmt(x)}\t{fmt(y)}" for x, y in zip(xs, ys))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def report_plot_data(report: CheckReport) -> str:
    return plot_data([("residual", report.volumes, report.residuals)]) + _summary_line(report) + "\n"


def tsv_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    def cell(x) -> str:
        if isinstance(x, (bool, np.bool_)):
            return str(bool(x)).lower()
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, (float, np.floating)):
            return fmt(x)
        return str(x)

    out = ["\t".join(header)]
    out.extend("\t".join(cell(x) for x in row) for row in rows)
    return "\n".join(out) + "\n"


def key_values(pairs: Iterable[tuple[str, object]]) -> str:
    lines = []
    for key, val in pairs:
        if isinstance(val, bool):
            text = str(val).lower()
        elif isinstance(val, (float, np.floating)):
            text = fmt(val)
        elif val is None:
            text = "none"
        else:
            text = str(val)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"
