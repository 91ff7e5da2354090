import math
from dataclasses import replace

import numpy as np
import pytest

from deabias import equilibrium as eq
from deabias.bias import BiasClass, LinearSpring, Mass, NonlinearSpring, PmMre
from deabias.config import (PAPER_MEMBRANE, calibrated_membrane, default_paper_scenario,
                            paper_bias, with_bias)
from deabias.errors import (NoFeasibleOffsetError, PullInError, SnapThroughError,
                            ValidationError)
from deabias.membrane import membrane_force_array


def grid_scan_roots(membrane, bias, V, step=1e-6):
    """Oracle: sign changes of the residual on a plain grid (no refinement)."""
    d = np.arange(0.0, bias.max_deflection, step)
    f, status = membrane_force_array(membrane, d, V)
    ok = status == 0
    if not ok.all():
        d, f = d[:np.argmin(ok)], f[:np.argmin(ok)]
    r = np.asarray(bias._force(d), dtype=float) - f
    idx = np.flatnonzero(np.sign(r[:-1]) != np.sign(r[1:]))
    return d[idx] + 0.5 * step


def test_zero_load_root_at_flat_state(membrane):
    report = eq.equilibria(membrane, LinearSpring(0.0, 0.0), 0.0)
    assert [r.deflection for r in report.roots] == [0.0] and report.roots[0].stable
    tiny = eq.equilibria(membrane, Mass(1e-9), 0.0)
    assert len(tiny.roots) == 1 and tiny.roots[0].deflection < 1e-6


def test_mass_single_stable_root(membrane):
    report = eq.equilibria(membrane, Mass(27.1e-3), 0.0)
    assert len(report.roots) == 1 and report.roots[0].stable
    oracle = grid_scan_roots(membrane, Mass(27.1e-3), 0.0)
    assert len(oracle) == 1 and abs(oracle[0] - report.roots[0].deflection) < 1e-6


def test_root_satisfies_balance(membrane):
    report = eq.equilibria(membrane, Mass(20e-3), 3e3)
    d = report.roots[0].deflection
    assert abs(eq.residual(membrane, Mass(20e-3), d, 3e3)) < 1e-6


def test_pull_in_when_offset_too_small(membrane):
    report = eq.equilibria(membrane, paper_bias("MRE40", 8e-3), 0.0)
    assert report.pull_in and not report.roots
    with pytest.raises(PullInError):
        eq.working_range_of(membrane, paper_bias("MRE40", 8e-3), 5e3)


def test_bistable_increasing_bias_reports_all_roots(membrane):
    report = eq.equilibria(membrane, paper_bias("MRE15", 12.2e-3), 0.0)
    assert [r.stable for r in report.roots] == [True, False, True]
    oracle = grid_scan_roots(membrane, paper_bias("MRE15", 12.2e-3), 0.0)
    assert np.allclose(oracle, [r.deflection for r in report.roots], atol=1e-6)


def test_stability_flags_match_residual_slope(membrane):
    bias = paper_bias("MRE30", 14e-3)
    for V in (0.0, 2e3, 4e3):
        for root in eq.equilibria(membrane, bias, V).roots:
            h = 1e-7
            slope = (eq.residual(membrane, bias, root.deflection + h, V)
                     - eq.residual(membrane, bias, root.deflection - h, V)) / (2 * h)
            assert root.stable == (slope < 0)


def test_working_range_zero_voltage(mass_scenario):
    assert eq.working_range(mass_scenario, 0.0).w_m == 0.0


def test_mass_working_range_near_table_value(mass_scenario):
    rep = eq.working_range(mass_scenario, 5e3)
    assert rep.w_m == pytest.approx(0.564e-3, rel=0.2)
    assert rep.bias_class is BiasClass.CONSTANT
    assert rep.d_on > rep.d_off


def test_heavier_mass_larger_range(membrane):
    w = [eq.working_range_of(membrane, Mass(m * 1e-3), 5e3).w_m for m in (13.6, 18.1, 22.6, 27.1)]
    assert all(a < b for a, b in zip(w, w[1:]))


def test_snap_through_reports_last_stable_voltage(membrane):
    with pytest.raises(SnapThroughError) as info:
        eq.working_range_of(membrane, paper_bias("MRE40", 13.5e-3), 5e3)
    assert 0 < info.value.last_stable_voltage < 5e3


def test_steady_state_monotone_and_matches_static(mre15_scenario):
    volts = np.linspace(0.0, 5e3, 26)
    points = eq.steady_state_sweep(mre15_scenario, volts)
    d = [p.deflection for p in points]
    assert not any(p.snapped for p in points)
    assert all(b >= a for a, b in zip(d, d[1:]))
    for p in points[::5]:
        stable = eq.find_equilibria(mre15_scenario, p.voltage).stable_roots
        assert min(abs(s - p.deflection) for s in stable) < 0.1e-6
        assert p.bias_force == pytest.approx(mre15_scenario.bias.force(p.deflection))


def test_steady_state_grid_validation(mass_scenario):
    assert len(eq.steady_state_sweep(mass_scenario, [0.0])) == 1
    with pytest.raises(ValidationError):
        eq.steady_state_sweep(mass_scenario, [1e3, 2e3])
    with pytest.raises(ValidationError):
        eq.steady_state_sweep(mass_scenario, [0.0, 2e3, 1e3])


def test_large_offset_inactive(membrane):
    rep = eq.working_range_of(membrane, paper_bias("MRE15", 20e-3), 5e3)
    assert rep.w_m < 0.1e-3


def test_span_shrinks_with_offset(membrane):
    spans = [eq.working_range_of(membrane, paper_bias("MRE15", x), 5e3).w_m
             for x in (12.5e-3, 13.5e-3, 15e-3, 17e-3, 20e-3, 25e-3)]
    assert all(a >= b for a, b in zip(spans, spans[1:]))


@pytest.mark.parametrize("offset", [12.5e-3, 14e-3, 16e-3, 20e-3])
def test_increasing_bias_beats_matched_constant(membrane, offset):
    pm = paper_bias("MRE15", offset)
    rep = eq.working_range_of(membrane, pm, 5e3)
    matched = Mass(float(pm.force(rep.d_off)) / 9.80665)
    assert rep.w_m >= eq.working_range_of(membrane, matched, 5e3).w_m


def test_golden_section_on_parabola():
    probes = eq.golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-6)
    best = max(probes, key=lambda p: p[1])[0]
    assert best == pytest.approx(0.3, abs=1e-6)


def test_optimize_offset_postconditions(mre15_scenario):
    opt = eq.optimize_offset(mre15_scenario, 5e3, (10e-3, 20e-3), coarse=11)
    assert all(opt.report.w_m >= w for _, w in opt.probes)
    # the optimum sits on the snap-through edge: 1 um closer is infeasible
    closer = replace(mre15_scenario.bias, offset=opt.offset - 1e-6)
    with pytest.raises(SnapThroughError):
        eq.working_range_of(mre15_scenario.membrane, closer, 5e3)


def test_optimize_offset_rejects_bad_input(mass_scenario, mre15_scenario):
    with pytest.raises(ValidationError):
        eq.optimize_offset(mass_scenario, 5e3, (10e-3, 20e-3))
    with pytest.raises(NoFeasibleOffsetError):
        eq.optimize_offset(mre15_scenario, 5e3, (2e-3, 4e-3), coarse=5)


def test_calibration_lands_on_box_corner():
    m = calibrated_membrane()
    assert m.relative_permittivity == 5.5
    assert m.inner_radius == pytest.approx(0.8 * PAPER_MEMBRANE.inner_radius)


def test_calibration_hits_reachable_target():
    target = 0.45e-3
    m = eq.calibrate_membrane(PAPER_MEMBRANE, Mass(27.1e-3), target, 5e3)
    assert eq.working_range_of(m, Mass(27.1e-3), 5e3).w_m == pytest.approx(target, abs=2e-6)


def test_net_stiffness_positive_at_stable_root(mass_scenario):
    k = eq.small_signal_stiffness(mass_scenario.membrane, mass_scenario.bias)
    assert k > 0
