"""Lumped conical model of the pre-stretched annular film.

The flank between the disc edge (radius a) and the frame (radius b) stays a
straight cone.  Out-of-plane deflection d stretches it meridionally,
lambda_1 = lambda_pre * L(d) / (b - a) with L(d) = sqrt((b - a)^2 + d^2),
while the hoop stretch is frozen at lambda_pre.  The film is incompressible
Gent material; the electrodes add a Maxwell pressure that relieves tension.
The axial force transmitted at the inner edge is

    f(d, V) = 2 pi a t (sigma_1 - p_el) sin(theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BreakdownError, DomainError, LockupError, SlackError
from .specs import MembraneSpec

EPS0 = 8.8541878128e-12

OK, LOCKUP, BREAKDOWN, SLACK = 0, 1, 2, 3
STATUS_NAMES = {LOCKUP: "lockup", BREAKDOWN: "breakdown", SLACK: "slack"}


@dataclass(frozen=True)
class MembraneState:
    deflection: float
    voltage: float
    meridional_stretch: float
    current_thickness: float
    axial_force: float


def stretch_state(spec: MembraneSpec, d):
    """Return ``(lambda_1, thickness, sin_theta)`` at deflection ``d``."""
    if np.any(np.asarray(d) < 0):
        raise DomainError(f"deflection must be >= 0, got {d!r}")
    return _kinematics(spec, d)


def _kinematics(spec, d):
    c = spec.outer_radius - spec.inner_radius
    flank = (c * c + d * d) ** 0.5
    lam1 = spec.pre_stretch * flank / c
    thickness = spec.initial_thickness / (lam1 * spec.pre_stretch)
    return lam1, thickness, d / flank


def maxwell_pressure(spec: MembraneSpec, V, t):
    return EPS0 * spec.relative_permittivity * (V / t) ** 2


def _gent_denominator(spec, lam1, lam2):
    inv = lam1 * lam1 + lam2 * lam2 + 1.0 / (lam1 * lam1 * lam2 * lam2)
    return spec.gent_limit - inv + 3.0


def meridional_stress(spec: MembraneSpec, lam1, lam2=None):
    """Gent Cauchy stress along the meridian (Pa), plane stress through the
    thickness.  Raises :class:`LockupError` at the chain-extension limit."""
    lam2 = spec.pre_stretch if lam2 is None else lam2
    denom = _gent_denominator(spec, lam1, lam2)
    if np.any(np.asarray(denom) <= 0):
        raise LockupError(f"Gent lockup at meridional stretch {lam1!r}")
    return (spec.shear_modulus * (lam1 * lam1 - 1.0 / (lam1 * lam1 * lam2 * lam2))
            * spec.gent_limit / denom)


def membrane_force(spec: MembraneSpec, d, V):
    """Restoring axial force (N) at deflection ``d`` (m) and voltage ``V``."""
    if d < 0 or V < 0:
        raise DomainError(f"need d >= 0 and V >= 0, got d={d}, V={V}")
    lam1, t, sin_theta = _kinematics(spec, d)
    sigma = meridional_stress(spec, lam1)
    if V / t > spec.breakdown_field:
        raise BreakdownError(
            f"field {V / t:.4g} V/m exceeds breakdown {spec.breakdown_field:.4g} V/m")
    p_el = maxwell_pressure(spec, V, t)
    if sigma - p_el < 0:
        raise SlackError(f"film goes slack at d={d:.6g} m, V={V:.6g} V")
    return 2.0 * math.pi * spec.inner_radius * t * (sigma - p_el) * sin_theta


def membrane_force_array(spec: MembraneSpec, d, V):
    """Vectorized force over a deflection grid.

    Returns ``(force, status)``; where ``status`` is non-zero the force is NaN
    and the code names the failure (LOCKUP, BREAKDOWN or SLACK).
    """
    d = np.asarray(d, dtype=float)
    lam1, t, sin_theta = _kinematics(spec, d)
    lam2 = spec.pre_stretch
    denom = _gent_denominator(spec, lam1, lam2)
    status = np.zeros(d.shape, dtype=np.int8)
    status[denom <= 0] = LOCKUP
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = (spec.shear_modulus * (lam1 * lam1 - 1.0 / (lam1 * lam1 * lam2 * lam2))
                 * spec.gent_limit / denom)
        p_el = maxwell_pressure(spec, V, t)
        status[(status == OK) & (V / t > spec.breakdown_field)] = BREAKDOWN
        status[(status == OK) & (sigma - p_el < 0)] = SLACK
        force = 2.0 * math.pi * spec.inner_radius * t * (sigma - p_el) * sin_theta
    force = np.where(status == OK, force, np.nan)
    return force, status


def membrane_stiffness(spec: MembraneSpec, d, V):
    """Analytic derivative df/dd (N/m) of :func:`membrane_force`."""
    c = spec.outer_radius - spec.inner_radius
    lam_p = spec.pre_stretch
    t0 = spec.initial_thickness
    eps = EPS0 * spec.relative_permittivity
    flank = math.hypot(c, d)
    s = d / flank
    lam1 = lam_p * flank / c
    lam2 = lam_p
    denom = _gent_denominator(spec, lam1, lam2)
    if denom <= 0:
        raise LockupError(f"Gent lockup at meridional stretch {lam1!r}")
    gent = spec.gent_limit / denom
    strain_term = lam1 * lam1 - 1.0 / (lam1 * lam1 * lam2 * lam2)
    dinv = 2.0 * lam1 - 2.0 / (lam1**3 * lam2 * lam2)
    sigma = spec.shear_modulus * strain_term * gent
    dsigma = spec.shear_modulus * (
        (2.0 * lam1 + 2.0 / (lam1**3 * lam2 * lam2)) * gent
        + strain_term * spec.gent_limit / denom**2 * dinv
    )
    # g = t * (sigma - p_el) written in lambda_1 alone
    g = t0 / lam_p * sigma / lam1 - eps * V * V * lam_p * lam1 / t0
    dg = t0 / lam_p * (dsigma / lam1 - sigma / lam1**2) - eps * V * V * lam_p / t0
    dlam1 = lam_p * s / c
    ds = c * c / flank**3
    return 2.0 * math.pi * spec.inner_radius * (dg * dlam1 * s + g * ds)


def membrane_state(spec: MembraneSpec, d, V):
    lam1, t, _ = stretch_state(spec, d)
    return MembraneState(d, V, lam1, t, membrane_force(spec, d, V))


def small_strain_stiffness(spec: MembraneSpec, V=0.0):
    """Slope of f(d) at d = 0 (N/m)."""
    return membrane_stiffness(spec, 0.0, V)


def make_force_function(spec: MembraneSpec):
    """Fast scalar f(d, V) for time stepping.

    Same law as :func:`membrane_force` with constants hoisted; accepts small
    negative deflections (the cone is symmetric) and raises the same errors.
    """
    c = spec.outer_radius - spec.inner_radius
    lam_p = spec.pre_stretch
    lam_p2 = lam_p * lam_p
    t0 = spec.initial_thickness
    mu = spec.shear_modulus
    jm = spec.gent_limit
    eps = EPS0 * spec.relative_permittivity
    e_bd = spec.breakdown_field
    two_pi_a = 2.0 * math.pi * spec.inner_radius

    def force(d, V):
        flank = (c * c + d * d) ** 0.5
        lam1 = lam_p * flank / c
        l1sq = lam1 * lam1
        inv = 1.0 / (l1sq * lam_p2)
        denom = jm - (l1sq + lam_p2 + inv) + 3.0
        if denom <= 0:
            raise LockupError(f"Gent lockup at meridional stretch {lam1!r}")
        t = t0 / (lam1 * lam_p)
        field = V / t
        if field > e_bd:
            raise BreakdownError(f"field {field:.4g} V/m exceeds breakdown {e_bd:.4g} V/m")
        tension = mu * (l1sq - inv) * jm / denom - eps * field * field
        if tension < 0:
            raise SlackError(f"film goes slack at d={d:.6g} m, V={V:.6g} V")
        return two_pi_a * t * tension * d / flank

    return force
