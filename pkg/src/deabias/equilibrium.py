"""Static equilibria of bias against membrane, working range and offset
optimization.

Roots of r(d) = bias(d) - membrane(d, V) are bracketed on a 1 um grid over
the admissible interval and refined by bisection.  A root is stable when r
falls through zero (net force pushes back towards it).

The operating branch is the lowest stable root at V = 0 (reached by
loading the flat film) continued in voltage.  The branch is lost, i.e. the
actuator snaps through, when the continued root leaves the basin bounded by
the neighbouring unstable roots of the previous step.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .bias import BiasClass, BiasSpec, classify_bias
from .errors import (ContactError, ModelError, NoFeasibleOffsetError, PullInError,
                     SnapThroughError, ValidationError)
from .membrane import STATUS_NAMES, membrane_force, membrane_force_array, membrane_stiffness
from .specs import MembraneSpec, Scenario

SCAN_STEP = 1e-6
ROOT_TOL = 1e-8
CONTINUATION_STEPS = 50


@dataclass(frozen=True)
class Root:
    deflection: float
    stable: bool


@dataclass(frozen=True)
class EquilibriumReport:
    voltage: float
    roots: tuple
    pull_in: bool
    interval: tuple
    truncated_by: str | None = None

    @property
    def stable_roots(self):
        return [r.deflection for r in self.roots if r.stable]

    @property
    def unstable_roots(self):
        return [r.deflection for r in self.roots if not r.stable]


@dataclass(frozen=True)
class WorkingRangeReport:
    d_off: float
    d_on: float
    w_m: float
    v_on: float
    bias_class: BiasClass
    label: str = ""


@dataclass(frozen=True)
class SweepPoint:
    voltage: float
    deflection: float
    bias_force: float
    snapped: bool = False


class OffsetOptimum(NamedTuple):
    offset: float
    report: WorkingRangeReport
    probes: tuple


def residual(membrane: MembraneSpec, bias: BiasSpec, d, V):
    """Net out-of-plane force bias - membrane at a single deflection."""
    return bias._force(d) - membrane_force(membrane, d, V)


def residual_grid(membrane, bias, V, step=SCAN_STEP):
    """Residual on the uniform scan grid.

    Returns ``(grid, r, truncated_by)``; the grid stops before the first
    point where the membrane model fails.
    """
    d_max = bias.max_deflection
    if d_max <= 0:
        return np.zeros(0), np.zeros(0), "contact"
    n = int(math.floor(d_max / step + 1e-9)) + 1
    grid = np.arange(n) * step
    f_mem, status = membrane_force_array(membrane, grid, V)
    truncated_by = None
    bad = np.flatnonzero(status)
    if bad.size:
        truncated_by = STATUS_NAMES[int(status[bad[0]])]
        grid = grid[:bad[0]]
        f_mem = f_mem[:bad[0]]
    r = np.asarray(bias._force(grid), dtype=float) - f_mem
    return grid, r, truncated_by


def _bisect(fn, lo, hi, f_lo, tol=ROOT_TOL):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def equilibria(membrane: MembraneSpec, bias: BiasSpec, V) -> EquilibriumReport:
    grid, r, truncated_by = residual_grid(membrane, bias, V)
    interval = (0.0, float(grid[-1]) if grid.size else 0.0)
    if grid.size == 0:
        return EquilibriumReport(V, (), True, interval, truncated_by)

    def fn(d):
        return residual(membrane, bias, d, V)

    roots = []
    for i in np.flatnonzero(r == 0):
        left = r[i - 1] if i > 0 else r[i]
        right = r[i + 1] if i + 1 < r.size else r[i]
        roots.append(Root(float(grid[i]), bool(right - left < 0)))
    for i in np.flatnonzero(r[:-1] * r[1:] < 0):
        d = _bisect(fn, grid[i], grid[i + 1], r[i])
        roots.append(Root(float(d), bool(r[i] > 0)))
    roots.sort(key=lambda root: root.deflection)
    pull_in = not roots and bool(np.all(r > 0))
    return EquilibriumReport(V, tuple(roots), pull_in, interval, truncated_by)


def find_equilibria(scenario: Scenario, V) -> EquilibriumReport:
    return equilibria(scenario.membrane, scenario.bias, V)


def _basin(report, d):
    lower = max((u for u in report.unstable_roots if u < d), default=-math.inf)
    upper = min((u for u in report.unstable_roots if u > d), default=math.inf)
    return lower, upper


def track_branch(membrane, bias, voltages):
    """Continue the operating branch over ``voltages``.

    Yields ``(V, d, snapped)``; ``d`` is NaN once the disc is in contact.
    """
    current = math.nan
    basin = (-math.inf, math.inf)
    for k, V in enumerate(voltages):
        if k > 0 and math.isnan(current):
            yield V, math.nan, True
            continue
        report = equilibria(membrane, bias, V)
        stable = report.stable_roots
        snapped = False
        if k == 0:
            current = stable[0] if stable else math.nan
            snapped = not stable
        else:
            inside = [d for d in stable if basin[0] < d < basin[1]]
            if inside:
                current = min(inside, key=lambda d: abs(d - current))
            else:
                snapped = True
                above = [d for d in stable if d > current]
                current = above[0] if above else math.nan
        if not math.isnan(current):
            basin = _basin(report, current)
        yield V, current, snapped


def voltage_steps(v_on, steps=CONTINUATION_STEPS):
    return np.linspace(0.0, v_on, steps + 1)


def working_range(scenario: Scenario, v_on, steps=CONTINUATION_STEPS) -> WorkingRangeReport:
    return working_range_of(scenario.membrane, scenario.bias, v_on, steps)


def working_range_of(membrane, bias, v_on, steps=CONTINUATION_STEPS):
    last_stable = None
    d_off = d_on = math.nan
    for V, d, snapped in track_branch(membrane, bias, voltage_steps(v_on, steps)):
        if snapped or math.isnan(d):
            if last_stable is None:
                raise PullInError(f"{bias.label}: no stable equilibrium at V = 0")
            raise SnapThroughError(
                f"{bias.label}: snap-through after {last_stable:.6g} V", last_stable)
        if last_stable is None:
            d_off = d
        d_on = d
        last_stable = V
    return WorkingRangeReport(d_off, d_on, d_on - d_off, float(v_on),
                              classify_bias(bias), bias.label)


def steady_state_sweep(scenario: Scenario, voltages):
    voltages = np.asarray(voltages, dtype=float)
    if voltages.size == 0 or voltages[0] != 0 or np.any(np.diff(voltages) <= 0):
        raise ValidationError("voltage grid must start at 0 and be strictly ascending")
    bias = scenario.bias
    points = []
    for V, d, snapped in track_branch(scenario.membrane, bias, voltages):
        force = math.nan if math.isnan(d) else float(bias._force(d))
        points.append(SweepPoint(float(V), d, force, snapped))
    return points


def bias_slope(bias, d, h=1e-7):
    lo = max(d - h, 0.0)
    hi = min(d + h, bias.max_deflection)
    return (bias._force(hi) - bias._force(lo)) / (hi - lo)


def net_stiffness(membrane, bias, d, V=0.0):
    """Restoring stiffness d(membrane - bias)/dd at ``d`` (N/m)."""
    return membrane_stiffness(membrane, d, V) - bias_slope(bias, d)


def small_signal_stiffness(membrane, bias, V=0.0):
    """Net stiffness at the operating equilibrium, or the bare membrane
    stiffness at d = 0 when no stable equilibrium exists."""
    stable = equilibria(membrane, bias, V).stable_roots
    if stable:
        return net_stiffness(membrane, bias, stable[0], V)
    return membrane_stiffness(membrane, 0.0, V)


def _score(membrane, bias, v_on, steps):
    try:
        return working_range_of(membrane, bias, v_on, steps)
    except (SnapThroughError, ContactError):
        return None


def golden_section_max(fn, lo, hi, tol):
    """Maximize ``fn`` on [lo, hi]; returns every probe as (x, value)."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    probes = []
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = fn(c), fn(d)
    probes += [(c, fc), (d, fd)]
    while hi - lo > tol:
        # ties move towards larger x: infeasible (zero) scores sit at small offsets
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = fn(c)
            probes.append((c, fc))
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = fn(d)
            probes.append((d, fd))
    return probes


def _score_at(job):
    membrane, bias, offset, v_on, steps = job
    try:
        trial = replace(bias, offset=offset)
    except ModelError:
        return None
    return _score(membrane, trial, v_on, steps)


def optimize_offset(scenario: Scenario, v_on, bounds, tol=10e-6, coarse=25,
                    boundary_tol=1e-9, steps=CONTINUATION_STEPS, jobs=1) -> OffsetOptimum:
    """Offset maximizing the working range of a magnetic bias.

    A coarse scan brackets the best offset, golden-section search narrows it
    to ``tol``.  The optimum of an increasing bias sits on the snap-through
    boundary (smaller offsets are infeasible and score 0), so when the best
    probe borders an infeasible one the boundary is located by bisection to
    ``boundary_tol``.  ``jobs > 1`` runs the coarse scan in worker
    processes; the result does not depend on it.
    """
    bias = scenario.bias
    membrane = scenario.membrane
    lo, hi = bounds
    if not (hasattr(bias, "offset") and 0 < lo < hi):
        raise ValidationError("optimize_offset needs a magnetic bias and 0 < lo < hi")
    reports = {}

    def w(offset):
        offset = float(offset)
        if offset not in reports:
            reports[offset] = _score_at((membrane, bias, offset, v_on, steps))
        rep = reports[offset]
        return 0.0 if rep is None else rep.w_m

    xs = [float(x) for x in np.linspace(lo, hi, coarse)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            jobs_in = [(membrane, bias, x, v_on, steps) for x in xs]
            reports.update(zip(xs, pool.map(_score_at, jobs_in)))
    scores = [w(x) for x in xs]
    if max(scores) <= 0:
        raise NoFeasibleOffsetError(
            f"{bias.label}: no offset in [{lo:.6g}, {hi:.6g}] m gives a working range")
    k = int(np.argmax(scores))
    golden_section_max(w, xs[max(k - 1, 0)], xs[min(k + 1, coarse - 1)], tol)

    best = max((x for x in reports if reports[x] is not None), key=lambda x: (w(x), -x))
    for side in (-1, 1):
        neighbours = [x for x in reports if (x - best) * side > 0]
        if not neighbours:
            continue
        near = min(neighbours, key=lambda x: abs(x - best))
        if reports[near] is not None:
            continue
        good, bad = best, near
        while abs(good - bad) > boundary_tol:
            mid = 0.5 * (good + bad)
            if w(mid) > 0:
                good = mid
            else:
                bad = mid
        if w(good) > w(best):
            best = good
    probes = tuple(sorted((float(x), w(x)) for x in reports))
    return OffsetOptimum(float(best), reports[best], probes)


def calibrate_membrane(membrane: MembraneSpec, bias: BiasSpec, target, v_on,
                       permittivity_bounds=(4.0, 5.5), radius_bounds=None):
    """Fit relative permittivity and inner radius so that ``bias`` yields the
    ``target`` working range at ``v_on``.

    The working range grows with permittivity and shrinks with inner radius,
    so the search first moves permittivity at the nominal radius, then the
    radius at the bound permittivity.  If the target lies outside the
    reachable set the closest corner of the box is returned.
    """
    if radius_bounds is None:
        radius_bounds = (0.8 * membrane.inner_radius, 1.2 * membrane.inner_radius)

    def wm(eps_r, radius):
        trial = replace(membrane, relative_permittivity=eps_r, inner_radius=radius)
        return working_range_of(trial, bias, v_on).w_m

    eps_lo, eps_hi = permittivity_bounds
    rad_lo, rad_hi = radius_bounds
    radius = min(max(membrane.inner_radius, rad_lo), rad_hi)
    w_lo, w_hi = wm(eps_lo, radius), wm(eps_hi, radius)
    if w_lo <= target <= w_hi:
        eps = brentq(lambda e: wm(e, radius) - target, eps_lo, eps_hi, xtol=1e-9)
        return replace(membrane, relative_permittivity=eps, inner_radius=radius)
    eps = eps_hi if target > w_hi else eps_lo
    # smaller radius -> softer film -> larger working range
    far = rad_lo if target > w_hi else rad_hi
    w_far = wm(eps, far)
    if (target - w_far) * (target - wm(eps, radius)) <= 0:
        radius = brentq(lambda a: wm(eps, a) - target, min(far, radius), max(far, radius),
                        xtol=1e-12)
    else:
        radius = far
    return replace(membrane, relative_permittivity=eps, inner_radius=radius)
