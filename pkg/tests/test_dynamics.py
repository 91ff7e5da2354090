import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from deabias import dynamics as dy
from deabias.config import default_paper_scenario, paper_bias, with_bias
from deabias.equilibrium import find_equilibria
from deabias.errors import PullInError, StabilityGuardError, ValidationError
from deabias.membrane import membrane_force


def test_schedule_validation():
    with pytest.raises(ValidationError, match="first time"):
        dy.VoltageSchedule((1.0,), (0.0,), 5.0)
    with pytest.raises(ValidationError, match="strictly increasing"):
        dy.VoltageSchedule((0.0, 2.0, 1.0), (0.0, 1.0, 2.0), 5.0)
    with pytest.raises(ValidationError, match="levels within"):
        dy.VoltageSchedule((0.0,), (6e3,), 5.0)
    with pytest.raises(ValidationError, match="duration"):
        dy.VoltageSchedule((0.0, 5.0), (0.0, 1.0), 5.0)


def test_schedule_lookup():
    s = dy.VoltageSchedule.step(3e3, at=1.0, duration=5.0)
    assert s.level_at(0.0) == 0.0 and s.level_at(0.999) == 0.0
    assert s.level_at(1.0) == 3e3 and s.level_at(4.0) == 3e3
    assert s.level_changes == 1
    assert dy.VoltageSchedule.constant(1e3, 2.0).level_changes == 0


def test_paper_schedule():
    s = dy.paper_schedule()
    assert s.duration == 300.0
    assert s.level_changes == 14
    assert all(0.0 <= u <= 5e3 for u in s.levels)
    assert max(s.levels) == 5e3 and s.levels[0] == s.levels[-1] == 0.0
    with pytest.raises(ValidationError):
        dy.paper_schedule(changes=13)


@pytest.fixture(scope="module")
def scenario():
    return default_paper_scenario("MRE15", offset=16e-3, calibrated=True)


def test_default_moving_mass(scenario):
    m = scenario.bias.disc.mass + scenario.membrane.mass / 3.0
    assert scenario.moving_mass == pytest.approx(m)
    assert scenario.relaxation_time == 10.0 and scenario.relaxation_stiffness > 0


def test_equilibrium_is_fixed_point(scenario):
    d0 = dy.initial_equilibrium(scenario, 0.0)
    res = dy.simulate(scenario, dy.VoltageSchedule.constant(0.0, 10.0), 2.5e-4, record_every=20)
    assert np.max(np.abs(res.deflection - d0)) < 0.1e-6
    assert not res.pull_in


def test_stability_guard(scenario):
    limit = dy.max_stable_step(scenario, dy.initial_equilibrium(scenario, 0.0), 0.0)
    assert limit <= scenario.electrical.time_constant / 5
    with pytest.raises(StabilityGuardError, match="stability limit"):
        dy.simulate(scenario, dy.VoltageSchedule.constant(0.0, 1.0), 1.5 * limit)
    with pytest.raises(ValidationError):
        dy.simulate(scenario, dy.VoltageSchedule.constant(0.0, 1.0), -1e-4)


def test_energy_audit_without_losses(scenario):
    lossless = replace(scenario, damping=0.0, relaxation_stiffness=0.0)
    V = 2e3
    d_eq = find_equilibria(lossless, V).stable_roots[0]
    d0 = d_eq + 20e-6
    dt = 1e-4
    res = dy.simulate(lossless, dy.VoltageSchedule.constant(V, 1.0), dt, duration=1e4 * dt,
                      initial_state=(d0, 0.0))
    bias = lossless.bias

    def potential(d):
        net = lambda x: membrane_force(lossless.membrane, x, V) - bias.force(x)
        return quad(net, d_eq, d, epsabs=0, epsrel=1e-12)[0]

    energy = [0.5 * lossless.moving_mass * v * v + potential(d)
              for d, v in zip(res.deflection[::500], res.velocity[::500])]
    assert len(energy) == 21
    assert np.max(np.abs(np.array(energy) - energy[0])) < 1e-3 * energy[0]


def test_dt_halving_converges(scenario):
    sched = dy.VoltageSchedule.step(3e3, at=0.1, duration=2.0)
    coarse = dy.simulate(scenario, sched, 2e-4)
    fine = dy.simulate(scenario, sched, 1e-4)
    assert abs(coarse.deflection[-1] - fine.deflection[-1]) < 0.01e-6


def test_step_response_overshoots_then_settles(scenario):
    sched = dy.VoltageSchedule.step(3e3, at=0.5, duration=10.5)
    res = dy.simulate(scenario, sched, 2.5e-4, record_every=4)
    target = find_equilibria(scenario, 3e3).stable_roots[0]
    assert dy.overshoots(res, target) >= 1
    assert res.deflection[-1] > res.deflection[0]


def test_pull_in_detected():
    base = default_paper_scenario("MRE40", offset=16e-3, calibrated=True)
    close = replace(base, bias=paper_bias("MRE40", 10e-3))
    with pytest.raises(PullInError):
        dy.initial_equilibrium(close, 0.0)
    res = dy.simulate(close, dy.VoltageSchedule.constant(0.0, 2.0), 1e-4, initial_state=(0.0, 0.0))
    assert res.pull_in and res.deflection[-1] > close.bias.max_deflection
    assert res.time[-1] < 2.0 and "pull-in" in res.notes[0]


def test_weaker_bias_smaller_span(scenario):
    sched = dy.VoltageSchedule.step(3e3, at=0.1, duration=3.0)
    spans = []
    for offset in (14e-3, 16e-3, 20e-3):
        sc = with_bias(scenario, paper_bias("MRE15", offset))
        res = dy.simulate(sc, sched, 2e-4, record_every=10)
        spans.append(res.deflection.max() - res.deflection.min())
    assert spans[0] >= spans[1] >= spans[2]
