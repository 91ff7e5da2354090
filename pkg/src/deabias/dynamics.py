"""Transient response to stepped supply voltages.

State: film voltage V, deflection d, velocity v and the force F_ve of a
Maxwell viscoelastic branch (spring k_ve in series with a dashpot of time
constant tau_ve).

    dV/dt    = (u(t) - V) / (R C)
    m d''    = bias(d) - membrane(d, V) - c d' - F_ve
    dF_ve/dt = k_ve d' - F_ve / tau_ve

Integrated with the classical fixed-step fourth-order Runge-Kutta scheme.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from . import magnetics
from .bias import PmMre
from .equilibrium import net_stiffness, track_branch
from .errors import PullInError, StabilityGuardError, ValidationError
from .membrane import make_force_function
from .specs import Scenario

MAX_LEVEL = 5e3


@dataclass(frozen=True)
class VoltageSchedule:
    """Piecewise-constant supply voltage: ``levels[i]`` holds from
    ``times[i]`` until the next time (or ``duration``)."""

    times: tuple
    levels: tuple
    duration: float
    max_level: float = MAX_LEVEL

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        levels = tuple(float(u) for u in self.levels)
        problems = []
        if not times or len(times) != len(levels):
            problems.append("times and levels non-empty and equally long")
        else:
            if times[0] != 0.0:
                problems.append("first time is 0")
            if any(b <= a for a, b in zip(times, times[1:])):
                problems.append("times strictly increasing")
            if any(not 0.0 <= u <= self.max_level for u in levels):
                problems.append(f"levels within [0, {self.max_level:g}] V")
            if not self.duration > times[-1]:
                problems.append("duration beyond the last time")
        if problems:
            raise ValidationError("VoltageSchedule: invariant violated: " + "; ".join(problems))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def step(cls, level, at=0.0, duration=10.0, initial=0.0):
        if at <= 0:
            return cls((0.0,), (level,), duration)
        return cls((0.0, at), (initial, level), duration)

    @classmethod
    def constant(cls, level, duration):
        return cls((0.0,), (level,), duration)

    def level_at(self, t):
        return self.levels[bisect.bisect_right(self.times, t) - 1]

    @property
    def level_changes(self):
        return sum(1 for a, b in zip(self.levels, self.levels[1:]) if a != b)


def paper_schedule(duration=300.0, changes=14, peak=5e3):
    """Symmetric staircase: ``changes/2`` equal steps up to ``peak`` and back
    to 0, one change every ``duration/(changes + 1)`` seconds.

    The reference excitation is known only by its length and step count, so
    the individual levels here are a stand-in.
    """
    half = changes // 2
    if changes % 2 or half == 0:
        raise ValidationError("changes must be a positive even number")
    up = [peak * k / half for k in range(half + 1)]
    levels = up + up[-2::-1]
    interval = duration / (changes + 1)
    times = [k * interval for k in range(changes + 1)]
    return VoltageSchedule(tuple(times), tuple(levels), duration)


@dataclass(frozen=True, eq=False)
class TransientResult:
    time: np.ndarray
    supply: np.ndarray
    voltage: np.ndarray
    deflection: np.ndarray
    velocity: np.ndarray
    relaxation_force: np.ndarray
    dt: float
    pull_in: bool = False
    notes: tuple = field(default=())

    def __len__(self):
        return self.time.size


def _bias_function(bias):
    """Scalar bias force with per-call overhead stripped where it matters."""
    if not isinstance(bias, PmMre):
        return bias._force
    magnet, disc = bias.magnet, bias.disc
    outer, inner, length, remanence = (magnet.outer_radius, magnet.inner_radius,
                                       magnet.thickness, magnet.remanence)
    pref = (bias.scale * magnetics.disc_susceptibility(disc) * disc.volume
            / magnetics.MU0)
    base = bias.offset + 0.5 * disc.thickness
    r_o2, r_i2 = outer * outer, inner * inner

    def force(d):
        z = base - d
        zl = z + length
        q1, q2 = zl * zl + r_o2, z * z + r_o2
        q3, q4 = zl * zl + r_i2, z * z + r_i2
        s1, s2, s3, s4 = q1**0.5, q2**0.5, q3**0.5, q4**0.5
        b = zl / s1 - z / s2 - zl / s3 + z / s4
        db = r_o2 / (q1 * s1) - r_o2 / (q2 * s2) - r_i2 / (q3 * s3) + r_i2 / (q4 * s4)
        return -pref * 0.25 * remanence * remanence * b * db

    return force


def initial_equilibrium(scenario: Scenario, level):
    """Operating-branch deflection at supply ``level`` (continued from 0 V)."""
    d = math.nan
    for _, d, snapped in track_branch(scenario.membrane, scenario.bias,
                                      np.linspace(0.0, level, 51) if level > 0 else [0.0]):
        if snapped:
            raise PullInError(f"{scenario.bias.label}: no stable equilibrium up to {level:g} V")
    return d


def max_stable_step(scenario: Scenario, d, V):
    """Largest step allowed by the stability guard at the state (d, V)."""
    stiffness = net_stiffness(scenario.membrane, scenario.bias, d, V)
    stiffness = max(stiffness, 0.0) + scenario.relaxation_stiffness
    rc = scenario.electrical.time_constant
    if stiffness <= 0:
        return rc / 5.0
    f_n = math.sqrt(stiffness / scenario.moving_mass) / (2.0 * math.pi)
    return min(rc / 5.0, 1.0 / (20.0 * f_n))


def simulate(scenario: Scenario, schedule: VoltageSchedule, dt, duration=None,
             record_every=1, initial_state=None) -> TransientResult:
    """Fixed-step RK4 transient.

    Starts at the stable equilibrium for ``u(0)`` unless ``initial_state``
    ``(d, v)`` is given (film voltage still starts at ``u(0)``, relaxation
    force at 0).  Stops early with ``pull_in=True`` if the disc reaches the
    contact limit.
    """
    duration = schedule.duration if duration is None else duration
    if dt <= 0 or duration <= 0 or record_every < 1:
        raise ValidationError("dt, duration and record_every must be positive")
    u0 = schedule.level_at(0.0)
    if initial_state is None:
        d, v = initial_equilibrium(scenario, u0), 0.0
    else:
        d, v = (float(x) for x in initial_state)
    limit = max_stable_step(scenario, max(d, 0.0), u0)
    if dt > limit * (1 + 1e-12):
        raise StabilityGuardError(
            f"dt = {dt:.3g} s exceeds the stability limit {limit:.3g} s "
            "(min of RC/5 and 1/(20 f_n))")

    f_mem = make_force_function(scenario.membrane)
    f_bias = _bias_function(scenario.bias)
    d_max = scenario.bias.max_deflection
    m = scenario.moving_mass
    c = scenario.damping
    k_ve, tau = scenario.relaxation_branch
    inv_rc = 1.0 / scenario.electrical.time_constant
    times, levels = schedule.times, schedule.levels

    n_steps = int(round(duration / dt))
    n_rec = n_steps // record_every + 1
    out = np.full((6, n_rec), np.nan)
    V, F = u0, 0.0
    out[:, 0] = (0.0, u0, V, d, v, F)
    pull_in = False
    rec = 1
    seg = 0
    n_seg = len(times)

    def deriv(u, V, d, v, F):
        acc = (f_bias(d) - f_mem(d, V) - c * v - F) / m
        return (u - V) * inv_rc, v, acc, k_ve * v - F / tau

    h = dt
    for step in range(1, n_steps + 1):
        t = (step - 1) * h
        while seg + 1 < n_seg and times[seg + 1] <= t:
            seg += 1
        u1 = levels[seg]
        u2 = u1 if seg + 1 >= n_seg or times[seg + 1] > t + 0.5 * h else levels[seg + 1]
        u3 = u1 if seg + 1 >= n_seg or times[seg + 1] > t + h else levels[seg + 1]

        a1, b1, c1, e1 = deriv(u1, V, d, v, F)
        a2, b2, c2, e2 = deriv(u2, V + 0.5 * h * a1, d + 0.5 * h * b1,
                               v + 0.5 * h * c1, F + 0.5 * h * e1)
        a3, b3, c3, e3 = deriv(u2, V + 0.5 * h * a2, d + 0.5 * h * b2,
                               v + 0.5 * h * c2, F + 0.5 * h * e2)
        a4, b4, c4, e4 = deriv(u3, V + h * a3, d + h * b3, v + h * c3, F + h * e3)
        V += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        d += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        v += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        F += h / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4)

        if d > d_max:
            pull_in = True
            out[:, rec] = (step * h, u3, V, d, v, F)
            rec += 1
            break
        if step % record_every == 0:
            out[:, rec] = (step * h, u3, V, d, v, F)
            rec += 1

    out = out[:, :rec]
    notes = ("pull-in: contact reached",) if pull_in else ()
    return TransientResult(out[0], out[1], out[2], out[3], out[4], out[5], dt * record_every,
                           pull_in, notes)


def overshoots(result: TransientResult, target):
    """Number of local extrema of the deflection that lie beyond ``target``
    on the far side from the starting value."""
    d = result.deflection
    direction = math.copysign(1.0, target - d[0])
    excess = (d - target) * direction
    slope = np.diff(d)
    turning = np.flatnonzero(slope[:-1] * slope[1:] < 0) + 1
    return int(np.sum(excess[turning] > 0))
