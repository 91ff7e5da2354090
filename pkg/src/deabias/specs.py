"""Material and geometry records.

All fields are strict SI (m, kg, Pa, T, V, F, ohm).  Records are frozen and
validate their invariants on construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING

from .errors import ValidationError

if TYPE_CHECKING:
    from .bias import BiasSpec

MATRIX_DENSITY = 1100.0  # silicone RTV-2, kg/m^3
POWDER_DENSITY = 6900.0  # FeSiAl flakes, kg/m^3
MEMBRANE_DENSITY = 960.0  # acrylic VHB film, kg/m^3


def _check(name, conditions):
    failed = [text for text, ok in conditions if not ok]
    if failed:
        raise ValidationError(f"{name}: invariant violated: " + "; ".join(failed))


def _finite(obj):
    return all(
        math.isfinite(getattr(obj, f.name))
        for f in fields(obj)
        if isinstance(getattr(obj, f.name), float)
    )


def mixture_density(powder_mass_fraction, matrix_density=MATRIX_DENSITY,
                    powder_density=POWDER_DENSITY):
    """Inverse rule of mixtures for a powder-filled elastomer."""
    w = powder_mass_fraction
    return 1.0 / (w / powder_density + (1.0 - w) / matrix_density)


@dataclass(frozen=True)
class RingMagnetSpec:
    """Axially magnetized ring magnet.  Only the geometry and remanence enter
    the force model; the remaining fields are catalogue data."""

    outer_radius: float
    inner_radius: float
    thickness: float
    remanence: float
    coercivity: float
    mass: float
    density: float = 7500.0
    vickers_hardness: float = 600.0
    resistivity: float = 144e-8

    def __post_init__(self):
        _check("RingMagnetSpec", [
            ("all values finite", _finite(self)),
            ("0 < inner_radius < outer_radius",
             0.0 < self.inner_radius < self.outer_radius),
            ("thickness > 0", self.thickness > 0),
            ("remanence > 0", self.remanence > 0),
            ("mass > 0", self.mass > 0),
        ])

    @property
    def volume(self):
        return math.pi * (self.outer_radius**2 - self.inner_radius**2) * self.thickness


@dataclass(frozen=True)
class MreDiscSpec:
    radius: float
    thickness: float
    relative_permeability: float
    powder_mass_fraction: float
    density: float
    youngs_modulus: float = 0.0

    def __post_init__(self):
        _check("MreDiscSpec", [
            ("all values finite", _finite(self)),
            ("radius > 0", self.radius > 0),
            ("thickness > 0", self.thickness > 0),
            ("relative_permeability >= 1", self.relative_permeability >= 1.0),
            ("0 <= powder_mass_fraction < 1", 0.0 <= self.powder_mass_fraction < 1.0),
            ("density > 0", self.density > 0),
            ("youngs_modulus >= 0", self.youngs_modulus >= 0),
        ])

    @property
    def volume(self):
        return math.pi * self.radius**2 * self.thickness

    @property
    def mass(self):
        return self.density * self.volume


def gent_first_invariant(stretch_1, stretch_2):
    return stretch_1**2 + stretch_2**2 + 1.0 / (stretch_1**2 * stretch_2**2)


@dataclass(frozen=True)
class MembraneSpec:
    """Annular pre-stretched film between the disc edge and the frame.

    ``stress_100``, ``stress_break`` and ``strain_break`` are measured tensile
    data kept as operating-envelope bounds; the constitutive law uses only
    ``youngs_modulus`` and ``gent_limit``.
    """

    inner_radius: float
    outer_radius: float
    initial_thickness: float
    pre_stretch: float
    youngs_modulus: float
    gent_limit: float = 100.0
    relative_permittivity: float = 4.7
    breakdown_field: float = 100e6
    stress_100: float = 0.095e6
    stress_break: float = 0.233e6
    strain_break: float = 8.75
    density: float = MEMBRANE_DENSITY

    def __post_init__(self):
        ok_stretch = self.pre_stretch >= 1.0
        headroom = (gent_first_invariant(self.pre_stretch, self.pre_stretch) - 3.0
                    if ok_stretch else 0.0)
        _check("MembraneSpec", [
            ("all values finite", _finite(self)),
            ("0 < inner_radius < outer_radius",
             0.0 < self.inner_radius < self.outer_radius),
            ("initial_thickness > 0", self.initial_thickness > 0),
            ("pre_stretch >= 1", ok_stretch),
            ("youngs_modulus > 0", self.youngs_modulus > 0),
            ("gent_limit > I1 - 3 at pre-stretch", self.gent_limit > headroom),
            ("relative_permittivity >= 1", self.relative_permittivity >= 1.0),
            ("breakdown_field > 0", self.breakdown_field > 0),
            ("density > 0", self.density > 0),
        ])

    @property
    def shear_modulus(self):
        return self.youngs_modulus / 3.0

    @property
    def flank_length(self):
        return self.outer_radius - self.inner_radius

    @property
    def mass(self):
        # stretched area times stretched thickness equals the unstretched volume
        area = math.pi * (self.outer_radius**2 - self.inner_radius**2)
        return self.density * area * self.initial_thickness / self.pre_stretch**2


@dataclass(frozen=True)
class ElectricalSpec:
    series_resistance: float
    capacitance: float

    def __post_init__(self):
        _check("ElectricalSpec", [
            ("all values finite", _finite(self)),
            ("series_resistance > 0", self.series_resistance > 0),
            ("capacitance > 0", self.capacitance > 0),
        ])

    @property
    def time_constant(self):
        return self.series_resistance * self.capacitance


@dataclass(frozen=True)
class Scenario:
    membrane: MembraneSpec
    bias: BiasSpec
    electrical: ElectricalSpec
    moving_mass: float
    damping: float
    relaxation_stiffness: float = 0.0
    relaxation_time: float = 10.0
    name: str = ""

    def __post_init__(self):
        _check("Scenario", [
            ("moving_mass > 0", self.moving_mass > 0 and math.isfinite(self.moving_mass)),
            ("damping >= 0", self.damping >= 0 and math.isfinite(self.damping)),
            ("relaxation_stiffness >= 0", self.relaxation_stiffness >= 0),
            ("relaxation_time > 0", self.relaxation_time > 0),
        ])

    @property
    def relaxation_branch(self):
        return self.relaxation_stiffness, self.relaxation_time
