"""On-axis magnetostatics of the bias: ring magnet field and the pull it
exerts on a soft-magnetic elastomer disc (or on a second magnet).

The ring field uses the surface-charge result for a uniformly, axially
magnetized cylinder; the ring is the outer cylinder minus the inner one.
The disc is treated as a linearly magnetizable body sitting in the axial
field gradient, with its shape entering through a demagnetizing factor.

Functions accept floats or numpy arrays for lengths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ValidationError
from .specs import MreDiscSpec, RingMagnetSpec

MU0 = 4e-7 * math.pi

# Gauss-Legendre nodes/weights on [-1, 1]
_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _require_positive(value, what):
    if np.any(np.asarray(value) <= 0):
        raise DomainError(f"{what} must be > 0, got {value!r}")


def _cylinder_term(u, radius):
    return u / (u * u + radius * radius) ** 0.5


def _cylinder_term_slope(u, radius):
    q = u * u + radius * radius
    return radius * radius / (q * q**0.5)


def _field(outer, inner, length, remanence, z):
    return 0.5 * remanence * (
        _cylinder_term(z + length, outer) - _cylinder_term(z, outer)
        - _cylinder_term(z + length, inner) + _cylinder_term(z, inner)
    )


def _field_slope(outer, inner, length, remanence, z):
    return 0.5 * remanence * (
        _cylinder_term_slope(z + length, outer) - _cylinder_term_slope(z, outer)
        - _cylinder_term_slope(z + length, inner) + _cylinder_term_slope(z, inner)
    )


def axial_b_field(magnet: RingMagnetSpec, z):
    """Axial flux density (T) on the symmetry axis, ``z`` measured from the
    near face of the magnet.

    Inside the bore of a ring the on-axis field reverses sign close to the
    face, so B(z) rises to a maximum a few millimetres out before decaying.
    """
    _require_positive(z, "axial distance z")
    return _field(magnet.outer_radius, magnet.inner_radius, magnet.thickness,
                  magnet.remanence, z)


def axial_b_gradient(magnet: RingMagnetSpec, z):
    """dB/dz on the axis (T/m), differentiated analytically."""
    _require_positive(z, "axial distance z")
    return _field_slope(magnet.outer_radius, magnet.inner_radius, magnet.thickness,
                        magnet.remanence, z)


def demag_factor(disc: MreDiscSpec):
    """Axial magnetometric demagnetizing factor, N = 1/(1 + (4/pi) L/D)."""
    aspect = disc.thickness / (2.0 * disc.radius)
    return 1.0 / (1.0 + 4.0 / math.pi * aspect)


def effective_susceptibility(mu_r, demag):
    if mu_r < 1:
        raise DomainError(f"relative permeability must be >= 1, got {mu_r}")
    if not 0.0 <= demag < 1.0:
        raise DomainError(f"demagnetizing factor must lie in [0, 1), got {demag}")
    chi = mu_r - 1.0
    return chi / (1.0 + demag * chi)


def disc_susceptibility(disc: MreDiscSpec):
    return effective_susceptibility(disc.relative_permeability, demag_factor(disc))


def _gradient_force_density(magnet, z):
    # mu0 * H * dH/dz with H = B / mu0; negative where |H| falls with z
    b = _field(magnet.outer_radius, magnet.inner_radius, magnet.thickness,
               magnet.remanence, z)
    db = _field_slope(magnet.outer_radius, magnet.inner_radius, magnet.thickness,
                      magnet.remanence, z)
    return b * db / MU0


def pm_mre_force(magnet: RingMagnetSpec, disc: MreDiscSpec, gap, scale=1.0,
                 quadrature_points=1):
    """Attractive force (N) between the ring magnet and a coaxial MRE disc.

    ``gap`` is the clearance between the magnet face and the near face of the
    disc.  With ``quadrature_points=1`` the field is sampled at the disc
    mid-plane; ``quadrature_points=5`` averages over the thickness with
    Gauss-Legendre nodes, which is useful as an error estimate of the
    mid-plane lumping.

    The result is attractive (positive) and decreasing in gap above
    :func:`force_peak_gap`.  Closer than that the on-axis field of a ring
    weakens again and the lumped model turns repulsive; callers are expected
    to treat that region as contact.
    """
    _require_positive(gap, "gap")
    prefactor = scale * disc_susceptibility(disc) * disc.volume
    if quadrature_points == 1:
        z = gap + 0.5 * disc.thickness
        return -prefactor * _gradient_force_density(magnet, z)
    if quadrature_points != 5:
        raise ValueError("quadrature_points must be 1 or 5")
    half = 0.5 * disc.thickness
    total = 0.0
    for node, weight in zip(_GL5_NODES, _GL5_WEIGHTS):
        total = total + 0.5 * weight * _gradient_force_density(magnet, gap + half * (1.0 + node))
    return -prefactor * total


@lru_cache(maxsize=256)
def force_peak_gap(magnet: RingMagnetSpec, disc: MreDiscSpec):
    """Gap at which :func:`pm_mre_force` is largest.

    Depends on geometry only (scale and susceptibility factor out).
    """
    half = 0.5 * disc.thickness
    span = max(magnet.outer_radius, magnet.thickness) * 4.0
    grid = np.linspace(span * 1e-4, span, 4001)
    values = -_gradient_force_density(magnet, grid + half)
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda g: _gradient_force_density(magnet, g + half),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def calibrate_scale(magnet: RingMagnetSpec, disc: MreDiscSpec, gap=5e-3, force=0.6):
    """Scale factor making ``pm_mre_force(magnet, disc, gap)`` equal ``force``."""
    raw = pm_mre_force(magnet, disc, gap)
    if not raw > 0:
        raise DomainError(f"model force at gap {gap} m is not attractive; cannot calibrate")
    return force / raw


def dipole_moment(magnet: RingMagnetSpec):
    return magnet.remanence * magnet.volume / MU0


def pm_pm_force(magnet_a: RingMagnetSpec, magnet_b: RingMagnetSpec, gap):
    """Coaxial dipole-dipole attraction between two magnets (N).

    Far-field quality only: both magnets are collapsed to point dipoles at
    their centres, ``gap`` being the face-to-face clearance.
    """
    _require_positive(gap, "gap")
    centre_distance = gap + 0.5 * (magnet_a.thickness + magnet_b.thickness)
    return (3.0 * MU0 * dipole_moment(magnet_a) * dipole_moment(magnet_b)
            / (2.0 * math.pi * centre_distance**4))


@dataclass(frozen=True)
class ForceCurve:
    gaps: tuple
    forces: tuple
    source: str = "model"

    def __post_init__(self):
        gaps = np.asarray(self.gaps, dtype=float)
        forces = np.asarray(self.forces, dtype=float)
        problems = []
        if gaps.ndim != 1 or gaps.shape != forces.shape:
            problems.append("gaps and forces must be 1-D and equally long")
        elif gaps.size < 2:
            problems.append("at least 2 points")
        else:
            if not np.all(np.diff(gaps) > 0):
                problems.append("gaps strictly increasing")
            if not (np.all(np.isfinite(forces)) and np.all(np.isfinite(gaps))):
                problems.append("values finite")
            elif np.any(forces < 0):
                problems.append("forces >= 0")
        if self.source not in ("model", "measurement", "fit"):
            problems.append("source in {model, measurement, fit}")
        if problems:
            raise ValidationError("ForceCurve: invariant violated: " + "; ".join(problems))
        object.__setattr__(self, "gaps", tuple(float(g) for g in gaps))
        object.__setattr__(self, "forces", tuple(float(f) for f in forces))

    @classmethod
    def from_unsorted(cls, gaps, forces, source="measurement"):
        order = np.argsort(np.asarray(gaps, dtype=float), kind="stable")
        return cls(tuple(np.asarray(gaps, float)[order]),
                   tuple(np.asarray(forces, float)[order]), source)

    @property
    def gap_array(self):
        return np.asarray(self.gaps)

    @property
    def force_array(self):
        return np.asarray(self.forces)

    def __len__(self):
        return len(self.gaps)


def default_gap_grid(n=22, lo=5e-3, hi=50e-3):
    return np.linspace(lo, hi, n)


def force_sweep(model, gaps=None, **params):
    """Sample a force model on a gap grid.

    ``model="pm_mre"`` takes ``magnet``, ``disc`` and optional ``scale``;
    ``model="pm_pm"`` takes ``magnet_a`` and ``magnet_b``.
    """
    gaps = default_gap_grid() if gaps is None else np.asarray(gaps, dtype=float)
    if gaps.ndim != 1 or gaps.size < 2 or not np.all(np.diff(gaps) > 0):
        raise ValidationError("gap grid must be strictly increasing with >= 2 points")
    if model == "pm_mre":
        forces = pm_mre_force(params["magnet"], params["disc"], gaps,
                              scale=params.get("scale", 1.0),
                              quadrature_points=params.get("quadrature_points", 1))
    elif model == "pm_pm":
        forces = pm_pm_force(params["magnet_a"], params["magnet_b"], gaps)
    else:
        raise ValueError(f"unknown force model {model!r}")
    return ForceCurve(tuple(gaps), tuple(np.asarray(forces, dtype=float)), "model")
