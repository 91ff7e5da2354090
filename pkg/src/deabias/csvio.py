"""CSV reading and writing.

All files have a one-line header, comma separators and a decimal point.
Lines starting with ``#`` are comments.  Numbers are written with six
significant digits, so output is deterministic and round trips to that
precision.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np

from .dynamics import TransientResult, VoltageSchedule
from .errors import ValidationError
from .magnetics import ForceCurve

FORCE_HEADER = ("gap_mm", "force_N")
TRANSIENT_HEADER = ("t_s", "u_V", "V_V", "d_mm", "v_mm_s", "F_ve_N")
SCHEDULE_HEADER = ("t_s", "level_V")
SWEEP_HEADER = ("V_V", "d_mm", "bias_N", "snapped")


def fmt(x):
    """Six significant digits; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    text = f"{x:.6g}"
    return "0" if text == "-0" else text


def format_rows(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_text(path_or_stream, text):
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_rows(path_or_stream, header):
    """Numeric rows of a CSV with the given header (columns as floats)."""
    if hasattr(path_or_stream, "read"):
        text = path_or_stream.read()
        name = getattr(path_or_stream, "name", "<stream>")
    else:
        with open(path_or_stream, encoding="utf-8") as fh:
            text = fh.read()
        name = str(path_or_stream)
    lines = [(n, line) for n, line in enumerate(text.splitlines(), 1)
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise ValidationError(f"{name}: empty file, expected header {','.join(header)}")
    n0, first = lines[0]
    found = tuple(cell.strip() for cell in next(csv.reader([first])))
    if found != tuple(header):
        raise ValidationError(
            f"{name}:{n0}: expected header {','.join(header)}, got {','.join(found)}")
    rows = []
    for n, line in lines[1:]:
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) != len(header):
            raise ValidationError(f"{name}:{n}: expected {len(header)} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ValidationError(f"{name}:{n}: non-numeric value in {line!r}") from None
    return np.array(rows, dtype=float).reshape(-1, len(header))


def force_curve_csv(curve: ForceCurve):
    return format_rows(FORCE_HEADER, zip(curve.gap_array * 1e3, curve.force_array))


def write_force_curve(curve: ForceCurve, path_or_stream):
    write_text(path_or_stream, force_curve_csv(curve))


def read_force_curve(path_or_stream, source="measurement") -> ForceCurve:
    data = read_rows(path_or_stream, FORCE_HEADER)
    return ForceCurve.from_unsorted(data[:, 0] * 1e-3, data[:, 1], source)


def transient_csv(result: TransientResult):
    cols = zip(result.time, result.supply, result.voltage, result.deflection * 1e3,
               result.velocity * 1e3, result.relaxation_force)
    return format_rows(TRANSIENT_HEADER, cols)


def write_transient(result: TransientResult, path_or_stream):
    write_text(path_or_stream, transient_csv(result))


def read_transient(path_or_stream) -> TransientResult:
    data = read_rows(path_or_stream, TRANSIENT_HEADER)
    if data.shape[0] < 1:
        raise ValidationError("transient file has no rows")
    t = data[:, 0]
    dt = float(t[1] - t[0]) if t.size > 1 else 0.0
    return TransientResult(t, data[:, 1], data[:, 2], data[:, 3] * 1e-3, data[:, 4] * 1e-3,
                           data[:, 5], dt)


def write_schedule(schedule: VoltageSchedule, path_or_stream):
    write_text(path_or_stream,
               format_rows(SCHEDULE_HEADER, zip(schedule.times, schedule.levels)))


def read_schedule(path_or_stream, duration) -> VoltageSchedule:
    data = read_rows(path_or_stream, SCHEDULE_HEADER)
    return VoltageSchedule(tuple(data[:, 0]), tuple(data[:, 1]), float(duration))


def sweep_csv(points):
    return format_rows(SWEEP_HEADER, ((p.voltage, p.deflection * 1e3, p.bias_force,
                                       bool(p.snapped)) for p in points))


def working_range_table(reports, v_on_unit="kV"):
    """Fixed-width table: bias, V_on, d_off, d_on, range (mm), class."""
    header = ("Bias", f"V_on ({v_on_unit})", "d_off (mm)", "d_on (mm)", "Range (mm)",
              "Class")
    rows = [(r.label, f"{r.v_on / 1e3:.3g}", f"{r.d_off * 1e3:.4f}", f"{r.d_on * 1e3:.4f}",
             f"{r.w_m * 1e3:.4f}", str(r.bias_class)) for r in reports]
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    lines = []
    for k, row in enumerate([header] + rows):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def working_range_csv(reports):
    return format_rows(("bias", "V_on_V", "d_off_mm", "d_on_mm", "w_m_mm", "class"),
                       ((r.label, r.v_on, r.d_off * 1e3, r.d_on * 1e3, r.w_m * 1e3,
                         str(r.bias_class)) for r in reports))
