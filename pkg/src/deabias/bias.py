"""Bias mechanisms and their force-displacement characteristics.

Sign convention: a positive bias force pulls the disc out of the membrane
plane (towards the magnet for magnetic biases); the membrane force restores.
``d`` is the out-of-plane deflection, so for magnetic biases the gap is
``offset - d``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import magnetics
from .errors import ContactError, DomainError, ValidationError
from .specs import MreDiscSpec, RingMagnetSpec

GRAVITY = 9.80665
MIN_GAP = 1e-3
# travel cap for non-magnetic biases, keeps the cone model in its range
DEFAULT_TRAVEL = 25e-3


class ExtrapolationWarning(UserWarning):
    pass


class BiasClass(enum.Enum):
    DECREASING = "decreasing"
    CONSTANT = "constant"
    INCREASING = "increasing"
    MIXED = "mixed"

    def __str__(self):
        return self.value


def _validate(name, conditions):
    failed = [text for text, ok in conditions if not ok]
    if failed:
        raise ValidationError(f"{name}: invariant violated: " + "; ".join(failed))


def _check_deflection(bias, d):
    arr = np.asarray(d)
    if np.any(arr < 0):
        raise DomainError(f"deflection must be >= 0, got {d!r}")
    if np.any(arr > bias.max_deflection):
        raise ContactError(
            f"{bias.label}: deflection {np.max(arr):.6g} m passes the contact limit "
            f"{bias.max_deflection:.6g} m")


@dataclass(frozen=True)
class Mass:
    mass: float

    kind = "mass"

    def __post_init__(self):
        _validate("Mass", [("mass > 0", self.mass > 0 and math.isfinite(self.mass))])

    @property
    def label(self):
        return f"Mass {self.mass * 1e3:.3g}g"

    @property
    def max_deflection(self):
        return DEFAULT_TRAVEL

    def _force(self, d):
        return self.mass * GRAVITY + 0.0 * d

    def force(self, d):
        _check_deflection(self, d)
        return self._force(d)


@dataclass(frozen=True)
class LinearSpring:
    """Preloaded spring that unloads as the disc moves out of plane."""

    stiffness: float
    preload: float

    kind = "linear_spring"

    def __post_init__(self):
        _validate("LinearSpring", [("stiffness >= 0", self.stiffness >= 0),
                                   ("preload finite", math.isfinite(self.preload))])

    @property
    def label(self):
        return f"Linear spring {self.stiffness:.3g} N/m"

    @property
    def max_deflection(self):
        return DEFAULT_TRAVEL

    def _force(self, d):
        return np.maximum(self.preload - self.stiffness * d, 0.0) if isinstance(
            d, np.ndarray) else max(self.preload - self.stiffness * d, 0.0)

    def force(self, d):
        _check_deflection(self, d)
        return self._force(d)


@dataclass(frozen=True)
class NonlinearSpring:
    """Cubic spring, F = preload - c1 d + c3 d^3."""

    c1: float
    c3: float
    preload: float

    kind = "nonlinear_spring"

    def __post_init__(self):
        _validate("NonlinearSpring", [
            ("c1 >= 0", self.c1 >= 0),
            ("c3 >= 0", self.c3 >= 0),
            ("preload finite", math.isfinite(self.preload)),
        ])

    @property
    def label(self):
        return "Nonlinear spring"

    @property
    def max_deflection(self):
        return DEFAULT_TRAVEL

    def _force(self, d):
        return self.preload - self.c1 * d + self.c3 * d**3

    def force(self, d):
        _check_deflection(self, d)
        return self._force(d)


@dataclass(frozen=True)
class PmMre:
    magnet: RingMagnetSpec
    disc: MreDiscSpec
    offset: float
    scale: float = 1.0
    name: str = ""

    kind = "pm_mre"

    def __post_init__(self):
        _validate("PmMre", [
            ("offset > 1 mm", self.offset > MIN_GAP),
            ("scale > 0", self.scale > 0 and math.isfinite(self.scale)),
        ])

    @property
    def label(self):
        return f"PM-{self.name}" if self.name else "PM-MRE"

    @property
    def gap_floor(self):
        """Closest admissible gap: 1 mm, or the force maximum if farther out."""
        return max(MIN_GAP, magnetics.force_peak_gap(self.magnet, self.disc))

    @property
    def max_deflection(self):
        return self.offset - self.gap_floor

    def _force(self, d):
        return magnetics.pm_mre_force(self.magnet, self.disc, self.offset - d, self.scale)

    def force(self, d):
        _check_deflection(self, d)
        return self._force(d)


@dataclass(frozen=True)
class PmPm:
    magnet_a: RingMagnetSpec
    magnet_b: RingMagnetSpec
    offset: float

    kind = "pm_pm"

    def __post_init__(self):
        _validate("PmPm", [("offset > 1 mm", self.offset > MIN_GAP)])

    @property
    def label(self):
        return "PM-PM"

    @property
    def max_deflection(self):
        return self.offset - MIN_GAP

    def _force(self, d):
        return magnetics.pm_pm_force(self.magnet_a, self.magnet_b, self.offset - d)

    def force(self, d):
        _check_deflection(self, d)
        return self._force(d)


@dataclass(frozen=True)
class ExponentialBias:
    """Magnetic bias from a fitted force-gap curve a exp(-b gap) + c."""

    amplitude: float
    decay_rate: float
    floor: float
    offset: float
    gap_range: tuple = (0.0, math.inf)
    name: str = ""

    kind = "exponential"

    def __post_init__(self):
        _validate("ExponentialBias", [
            ("decay_rate >= 0", self.decay_rate >= 0),
            ("offset > 1 mm", self.offset > MIN_GAP),
        ])

    @property
    def label(self):
        return f"PM-{self.name}" if self.name else "PM-fit"

    @property
    def max_deflection(self):
        return self.offset - MIN_GAP

    def extrapolates(self, d):
        gap = self.offset - np.asarray(d)
        lo, hi = self.gap_range
        return bool(np.any((gap < lo * (1 - 1e-9)) | (gap > hi * (1 + 1e-9))))

    def _force(self, d):
        gap = self.offset - d
        if isinstance(gap, np.ndarray):
            return self.amplitude * np.exp(-self.decay_rate * gap) + self.floor
        return self.amplitude * math.exp(-self.decay_rate * gap) + self.floor

    def force(self, d):
        _check_deflection(self, d)
        if self.extrapolates(d):
            warnings.warn(f"{self.label}: gap outside the fitted range {self.gap_range}",
                          ExtrapolationWarning, stacklevel=2)
        return self._force(d)


BiasSpec = Union[Mass, LinearSpring, NonlinearSpring, PmMre, PmPm, ExponentialBias]


def bias_force(bias: BiasSpec, d):
    """Bias force (N, positive pulls out of plane) at deflection ``d``."""
    return bias.force(d)


def admissible_interval(bias: BiasSpec):
    return 0.0, bias.max_deflection


def classify_bias(bias: BiasSpec, interval=None, tolerance=1e-3, samples=101):
    """Classify the force-displacement slope on ``interval``.

    Forward differences on a uniform grid count as rising or falling when
    they exceed ``tolerance * max|F| / (samples - 1)``.  Only rises gives
    INCREASING, only falls DECREASING, neither CONSTANT, both MIXED.
    """
    lo, hi = admissible_interval(bias) if interval is None else interval
    if not lo < hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    grid = np.linspace(lo, hi, samples)
    forces = np.asarray(bias.force(grid), dtype=float)
    peak = float(np.max(np.abs(forces)))
    steps = np.diff(forces)
    threshold = tolerance * peak / (samples - 1)
    rising = bool(np.any(steps > threshold))
    falling = bool(np.any(steps < -threshold))
    if rising and falling:
        return BiasClass.MIXED
    if rising:
        return BiasClass.INCREASING
    if falling:
        return BiasClass.DECREASING
    return BiasClass.CONSTANT
