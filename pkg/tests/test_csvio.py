import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deabias import csvio
from deabias.dynamics import TransientResult, VoltageSchedule
from deabias.equilibrium import SweepPoint, WorkingRangeReport
from deabias.bias import BiasClass
from deabias.errors import ValidationError
from deabias.magnetics import ForceCurve


def six_digits(x):
    return float(f"{x:.6g}")


# gaps must stay distinct after six-digit formatting
@given(st.lists(st.floats(1e-4, 1.0), min_size=2, max_size=30,
                unique_by=lambda g: six_digits(g * 1e3)),
       st.lists(st.floats(0.0, 100.0), min_size=30, max_size=30))
def test_force_curve_round_trip(gaps, forces):
    gaps = sorted(gaps)
    curve = ForceCurve(tuple(gaps), tuple(forces[:len(gaps)]))
    buf = io.StringIO(csvio.force_curve_csv(curve))
    back = csvio.read_force_curve(buf)
    np.testing.assert_allclose(back.gap_array, [six_digits(g * 1e3) * 1e-3 for g in gaps],
                               rtol=1e-12)
    np.testing.assert_allclose(back.force_array, [six_digits(f) for f in forces[:len(gaps)]])
    np.testing.assert_allclose(back.gap_array, curve.gap_array, rtol=5e-6)


def test_gaps_colliding_at_six_digits_rejected():
    curve = ForceCurve((0.9999999e-3, 1e-3), (0.1, 0.2))
    with pytest.raises(ValidationError, match="strictly increasing"):
        csvio.read_force_curve(io.StringIO(csvio.force_curve_csv(curve)))


def test_transient_round_trip():
    t = np.linspace(0, 1, 11)
    res = TransientResult(t, np.full(11, 3e3), 3e3 * (1 - np.exp(-t)), 1e-3 + 1e-5 * t,
                          1e-5 * np.ones(11), 1e-3 * t, 0.1)
    back = csvio.read_transient(io.StringIO(csvio.transient_csv(res)))
    for name in ("time", "supply", "voltage", "deflection", "velocity", "relaxation_force"):
        np.testing.assert_allclose(getattr(back, name), getattr(res, name), rtol=5e-6)
    assert back.dt == pytest.approx(0.1)


def test_schedule_round_trip():
    s = VoltageSchedule((0.0, 1.5, 3.0), (0.0, 2500.0, 0.0), 4.0)
    buf = io.StringIO()
    csvio.write_schedule(s, buf)
    assert csvio.read_schedule(io.StringIO(buf.getvalue()), 4.0) == s


def test_comments_sorting_and_errors():
    text = "# reconstructed\ngap_mm,force_N\n10,0.1\n5,0.6\n\n# end\n"
    c = csvio.read_force_curve(io.StringIO(text))
    assert c.gaps == (5e-3, 10e-3)
    with pytest.raises(ValidationError, match="expected header"):
        csvio.read_force_curve(io.StringIO("gap,force\n1,2\n"))
    with pytest.raises(ValidationError, match="non-numeric"):
        csvio.read_force_curve(io.StringIO("gap_mm,force_N\n1,abc\n"))
    with pytest.raises(ValidationError, match="columns"):
        csvio.read_force_curve(io.StringIO("gap_mm,force_N\n1,2,3\n"))
    with pytest.raises(ValidationError, match="empty"):
        csvio.read_force_curve(io.StringIO("# nothing\n"))


def test_number_format():
    assert csvio.fmt(0.1 + 0.2) == "0.3"
    assert csvio.fmt(-0.0) == "0"
    assert csvio.fmt(True) == "1" and csvio.fmt(7) == "7"
    assert csvio.fmt(float("nan")) == "nan"


def test_sweep_and_table():
    pts = [SweepPoint(0.0, 1e-3, 0.2), SweepPoint(5e3, 1.5e-3, 0.25, True)]
    assert csvio.sweep_csv(pts) == "V_V,d_mm,bias_N,snapped\n0,1,0.2,0\n5000,1.5,0.25,1\n"
    rep = WorkingRangeReport(5.0313e-3, 5.5226e-3, 0.4913e-3, 5e3, BiasClass.CONSTANT, "Mass 27.1g")
    table = csvio.working_range_table([rep])
    assert "Range (mm)" in table.splitlines()[0]
    assert table.splitlines()[2].split()[-2] == "0.4913"
