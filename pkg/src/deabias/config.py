"""Scenario configuration: text format, unit handling and the reference
default scenarios.

Format
------
Plain text, one ``key = value [unit]`` per line, grouped under ``[section]``
headers.  ``#`` starts a comment (whole line or trailing).  Keys are
case-sensitive; values are numbers (with a unit where the key has a
dimension) or bare words for ``type``/``name``.  Recognised sections:

``[scenario]``   name
``[membrane]``   inner_radius, outer_radius, initial_thickness, pre_stretch,
                 youngs_modulus, gent_limit, relative_permittivity,
                 breakdown_field, stress_100, stress_break, strain_break,
                 density
``[electrical]`` series_resistance, capacitance
``[bias]``       type = mass | linear_spring | nonlinear_spring | pm_mre |
                 pm_pm | exponential, plus the parameters of that type
``[magnet]``     ring magnet facing the disc (pm_mre) or the fixed magnet
                 (pm_pm)
``[magnet_b]``   moving magnet (pm_pm only)
``[disc]``       MRE disc (pm_mre only)
``[dynamics]``   moving_mass, damping, damping_ratio, relaxation_stiffness,
                 relaxation_ratio, relaxation_time

Optional dynamics keys default to: moving mass = carried body + 1/3 of the
membrane mass, damping ratio 0.1 and relaxation stiffness 0.2 of the
small-signal stiffness at the V = 0 equilibrium, relaxation time 10 s.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

from . import bias as bias_mod
from .errors import MissingKeyError, ValidationError
from .magnetics import calibrate_scale
from .specs import (MATRIX_DENSITY, POWDER_DENSITY, ElectricalSpec, MembraneSpec,
                    MreDiscSpec, RingMagnetSpec, Scenario, mixture_density)

UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6},
    "voltage": {"V": 1.0, "kV": 1e3},
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6},
    "flux_density": {"T": 1.0, "mT": 1e-3},
    "field_strength": {"A/m": 1.0, "kA/m": 1e3},
    "pressure": {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6},
    "force": {"N": 1.0, "mN": 1e-3},
    "stiffness": {"N/m": 1.0, "N/mm": 1e3},
    "cubic_stiffness": {"N/m3": 1.0, "N/mm3": 1e9},
    "density": {"kg/m3": 1.0, "g/cm3": 1e3},
    "time": {"s": 1.0, "ms": 1e-3},
    "capacitance": {"F": 1.0, "uF": 1e-6, "nF": 1e-9, "pF": 1e-12},
    "resistance": {"ohm": 1.0, "kohm": 1e3, "Mohm": 1e6},
    "electric_field": {"V/m": 1.0, "MV/m": 1e6, "V/um": 1e6},
    "damping": {"N*s/m": 1.0, "N.s/m": 1.0},
    "resistivity": {"ohm*m": 1.0, "uohm*cm": 1e-8},
    "inverse_length": {"1/m": 1.0, "1/mm": 1e3},
    "dimensionless": {"": 1.0},
}
SI_UNIT = {dim: next(u for u, f in table.items() if f == 1.0) for dim, table in UNITS.items()}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*(\S*)\s*$")


def parse_quantity(text, dimension):
    """Parse ``"5kV"``/``"12.5 mm"`` into SI for the given dimension."""
    match = _QUANTITY.match(text)
    if not match:
        raise ValidationError(f"cannot parse quantity {text!r}")
    number, unit = match.groups()
    table = UNITS[dimension]
    if unit not in table:
        allowed = ", ".join(repr(u) for u in table)
        raise ValidationError(f"unit {unit!r} not valid for {dimension} (use {allowed})")
    return float(number) * table[unit]


@dataclass(frozen=True)
class Key:
    name: str
    dimension: str
    default: object = None  # None = mandatory


MAGNET_KEYS = [
    Key("outer_radius", "length"), Key("inner_radius", "length"),
    Key("thickness", "length"), Key("remanence", "flux_density"),
    Key("coercivity", "field_strength"), Key("mass", "mass"),
    Key("density", "density", 7500.0), Key("vickers_hardness", "dimensionless", 600.0),
    Key("resistivity", "resistivity", 144e-8),
]
DISC_KEYS = [
    Key("radius", "length"), Key("thickness", "length"),
    Key("relative_permeability", "dimensionless"),
    Key("powder_mass_fraction", "dimensionless"),
    Key("matrix_density", "density", MATRIX_DENSITY),
    Key("powder_density", "density", POWDER_DENSITY),
    Key("density", "density", math.nan),
    Key("youngs_modulus", "pressure", 0.0),
]
MEMBRANE_KEYS = [
    Key("inner_radius", "length"), Key("outer_radius", "length"),
    Key("initial_thickness", "length"), Key("pre_stretch", "dimensionless"),
    Key("youngs_modulus", "pressure"), Key("gent_limit", "dimensionless", 100.0),
    Key("relative_permittivity", "dimensionless", 4.7),
    Key("breakdown_field", "electric_field", 100e6),
    Key("stress_100", "pressure", 0.095e6), Key("stress_break", "pressure", 0.233e6),
    Key("strain_break", "dimensionless", 8.75), Key("density", "density", 960.0),
]
ELECTRICAL_KEYS = [Key("series_resistance", "resistance"), Key("capacitance", "capacitance")]
BIAS_KEYS = {
    "mass": [Key("mass", "mass")],
    "linear_spring": [Key("stiffness", "stiffness"), Key("preload", "force")],
    "nonlinear_spring": [Key("c1", "stiffness"), Key("c3", "cubic_stiffness"),
                         Key("preload", "force")],
    "pm_mre": [Key("offset", "length"), Key("scale", "dimensionless", 1.0)],
    "pm_pm": [Key("offset", "length")],
    "exponential": [Key("amplitude", "force"), Key("decay_rate", "inverse_length"),
                    Key("floor", "force"), Key("offset", "length"),
                    Key("gap_min", "length", 0.0), Key("gap_max", "length", math.inf)],
}
DYNAMICS_KEYS = [
    Key("moving_mass", "mass", math.nan), Key("damping", "damping", math.nan),
    Key("damping_ratio", "dimensionless", 0.1),
    Key("relaxation_stiffness", "stiffness", math.nan),
    Key("relaxation_ratio", "dimensionless", 0.2),
    Key("relaxation_time", "time", 10.0),
]
DEFAULT_DAMPING_RATIO = 0.1
DEFAULT_RELAXATION_RATIO = 0.2


def parse_sections(text):
    """Split config text into ``{section: {key: raw value}}``."""
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise ValidationError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if current is None:
            raise ValidationError(f"line {lineno}: key outside of a section")
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value [unit]'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in sections[current]:
            raise ValidationError(f"line {lineno}: duplicate key '{key}'")
        sections[current][key] = value
    return sections


def _read(sections, section, keys):
    if section not in sections:
        raise MissingKeyError(section, keys[0].name)
    raw = sections[section]
    values = {}
    for key in keys:
        if key.name in raw:
            try:
                values[key.name] = parse_quantity(raw[key.name], key.dimension)
            except ValidationError as exc:
                raise ValidationError(f"[{section}] {key.name}: {exc}") from None
        elif key.default is None:
            raise MissingKeyError(section, key.name)
        else:
            values[key.name] = key.default
    return values


def _magnet(sections, section):
    return RingMagnetSpec(**_read(sections, section, MAGNET_KEYS))


def _disc(sections):
    values = _read(sections, "disc", DISC_KEYS)
    density = values.pop("density")
    matrix, powder = values.pop("matrix_density"), values.pop("powder_density")
    if math.isnan(density):
        density = mixture_density(values["powder_mass_fraction"], matrix, powder)
    return MreDiscSpec(density=density, **values)


def _bias(sections):
    raw = sections.get("bias")
    if raw is None or "type" not in raw:
        raise MissingKeyError("bias", "type")
    kind = raw["type"]
    if kind not in BIAS_KEYS:
        raise ValidationError(f"[bias] type: unknown bias type {kind!r}")
    values = _read(sections, "bias", BIAS_KEYS[kind])
    name = raw.get("name", "")
    if kind == "mass":
        return bias_mod.Mass(values["mass"])
    if kind == "linear_spring":
        return bias_mod.LinearSpring(values["stiffness"], values["preload"])
    if kind == "nonlinear_spring":
        return bias_mod.NonlinearSpring(values["c1"], values["c3"], values["preload"])
    if kind == "pm_mre":
        return bias_mod.PmMre(_magnet(sections, "magnet"), _disc(sections),
                              values["offset"], values["scale"], name)
    if kind == "pm_pm":
        return bias_mod.PmPm(_magnet(sections, "magnet"), _magnet(sections, "magnet_b"),
                             values["offset"])
    return bias_mod.ExponentialBias(values["amplitude"], values["decay_rate"],
                                    values["floor"], values["offset"],
                                    (values["gap_min"], values["gap_max"]), name)


def carried_mass(bias):
    if isinstance(bias, bias_mod.PmMre):
        return bias.disc.mass
    if isinstance(bias, bias_mod.Mass):
        return bias.mass
    if isinstance(bias, bias_mod.PmPm):
        return bias.magnet_b.mass
    return 0.0


def assemble_scenario(membrane, bias, electrical, name="", moving_mass=math.nan,
                      damping=math.nan, relaxation_stiffness=math.nan,
                      relaxation_time=10.0, damping_ratio=DEFAULT_DAMPING_RATIO,
                      relaxation_ratio=DEFAULT_RELAXATION_RATIO):
    """Build a Scenario, deriving any dynamics value given as NaN."""
    from .equilibrium import small_signal_stiffness

    if math.isnan(moving_mass):
        moving_mass = carried_mass(bias) + membrane.mass / 3.0
    if math.isnan(damping) or math.isnan(relaxation_stiffness):
        stiffness = max(small_signal_stiffness(membrane, bias, 0.0), 0.0)
        if math.isnan(damping):
            damping = 2.0 * damping_ratio * math.sqrt(moving_mass * stiffness)
        if math.isnan(relaxation_stiffness):
            relaxation_stiffness = relaxation_ratio * stiffness
    return Scenario(membrane, bias, electrical, moving_mass, damping,
                    relaxation_stiffness, relaxation_time, name)


def build_scenario(text) -> Scenario:
    """Parse a configuration document into a validated :class:`Scenario`."""
    sections = parse_sections(text)
    known = {"scenario", "membrane", "electrical", "bias", "magnet", "magnet_b", "disc",
             "dynamics"}
    unknown = sorted(set(sections) - known)
    if unknown:
        raise ValidationError(f"unknown section(s): {', '.join(unknown)}")
    membrane = MembraneSpec(**_read(sections, "membrane", MEMBRANE_KEYS))
    electrical = ElectricalSpec(**_read(sections, "electrical", ELECTRICAL_KEYS))
    bias = _bias(sections)
    dyn = _read({"dynamics": sections.get("dynamics", {})}, "dynamics", DYNAMICS_KEYS)
    name = sections.get("scenario", {}).get("name", "")
    return assemble_scenario(membrane, bias, electrical, name, **dyn)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return build_scenario(fh.read())


def _fmt(value, dimension):
    unit = SI_UNIT[dimension]
    text = repr(float(value))
    return f"{text} {unit}" if unit else text


def _section(title, obj, keys):
    lines = [f"[{title}]"]
    for key in keys:
        if hasattr(obj, key.name):
            lines.append(f"{key.name} = {_fmt(getattr(obj, key.name), key.dimension)}")
    return lines


def serialize_scenario(scenario: Scenario) -> str:
    """Inverse of :func:`build_scenario`; all values are written in SI with
    full float precision so a round trip reproduces the scenario exactly."""
    lines = []
    if scenario.name:
        lines += ["[scenario]", f"name = {scenario.name}", ""]
    lines += _section("membrane", scenario.membrane, MEMBRANE_KEYS) + [""]
    lines += _section("electrical", scenario.electrical, ELECTRICAL_KEYS) + [""]
    bias = scenario.bias
    lines += ["[bias]", f"type = {bias.kind}"]
    if getattr(bias, "name", ""):
        lines.append(f"name = {bias.name}")
    for key in BIAS_KEYS[bias.kind]:
        if key.name in ("gap_min", "gap_max"):
            value = bias.gap_range[0 if key.name == "gap_min" else 1]
        else:
            value = getattr(bias, key.name)
        lines.append(f"{key.name} = {_fmt(value, key.dimension)}")
    lines.append("")
    if isinstance(bias, bias_mod.PmMre):
        lines += _section("magnet", bias.magnet, MAGNET_KEYS) + [""]
        disc_keys = [k for k in DISC_KEYS if k.name not in ("matrix_density", "powder_density")]
        lines += _section("disc", bias.disc, disc_keys) + [""]
    elif isinstance(bias, bias_mod.PmPm):
        lines += _section("magnet", bias.magnet_a, MAGNET_KEYS) + [""]
        lines += _section("magnet_b", bias.magnet_b, MAGNET_KEYS) + [""]
    lines += [
        "[dynamics]",
        f"moving_mass = {_fmt(scenario.moving_mass, 'mass')}",
        f"damping = {_fmt(scenario.damping, 'damping')}",
        f"relaxation_stiffness = {_fmt(scenario.relaxation_stiffness, 'stiffness')}",
        f"relaxation_time = {_fmt(scenario.relaxation_time, 'time')}",
        "",
    ]
    return "\n".join(lines)


# --- reference prototype constants -------------------------------------

PAPER_MAGNET = RingMagnetSpec(
    outer_radius=10.0e-3, inner_radius=2.1e-3, thickness=5.0e-3, remanence=1.23,
    coercivity=1.45e5, mass=11.26e-3, density=7500.0, vickers_hardness=600.0,
    resistivity=144.0e-8,
)
DISC_RADIUS = 10e-3
DISC_THICKNESS = 4e-3
# relative permeability (coil A), powder mass fraction, Young's modulus
PAPER_DISCS = {
    "MRE15": (2.24, 0.15, 0.85e6),
    "MRE30": (4.21, 0.30, 1.50e6),
    "MRE40": (5.50, 0.40, 2.20e6),
}
PAPER_ELECTRICAL = ElectricalSpec(series_resistance=0.698e6, capacitance=2.2e-9)
PAPER_MEMBRANE = MembraneSpec(
    inner_radius=DISC_RADIUS, outer_radius=60e-3, initial_thickness=1e-3,
    pre_stretch=2.0, youngs_modulus=0.158e6,
)
PAPER_MASSES_G = (27.1, 22.6, 18.1, 13.6)
# measured working ranges at 5 kV, two tries per bias (mm)
PAPER_WORKING_RANGES_MM = {
    "PM-MRE15": (2.154, 2.272),
    "PM-MRE30": (1.819, 1.979),
    "PM-MRE40": (1.308, 1.321),
    "Mass 27.1g": (0.564, 0.572),
    "Mass 22.6g": (0.471, 0.471),
    "Mass 18.1g": (0.382, 0.385),
    "Mass 13.6g": (0.242, 0.251),
}
ANCHOR_GAP = 5e-3
ANCHOR_FORCE_MRE40 = 0.6
ANCHOR_FORCE_MRE15 = 0.2
PAPER_V_ON = 5e3
DEFAULT_OFFSET = 15e-3


@dataclass(frozen=True)
class MassGrams:
    grams: float


def paper_disc(name) -> MreDiscSpec:
    mu_r, fraction, modulus = PAPER_DISCS[name]
    return MreDiscSpec(DISC_RADIUS, DISC_THICKNESS, mu_r, fraction,
                       mixture_density(fraction), modulus)


def paper_scale():
    """Calibration factor fixing MRE40 at 0.6 N for a 5 mm gap."""
    return calibrate_scale(PAPER_MAGNET, paper_disc("MRE40"), ANCHOR_GAP, ANCHOR_FORCE_MRE40)


def parse_variant(variant):
    """Accept ``"MRE15"``, ``MassGrams(27.1)`` or ``"mass:27.1"``."""
    if isinstance(variant, MassGrams) or variant in PAPER_DISCS:
        return variant
    if isinstance(variant, str) and variant.lower().startswith("mass:"):
        return MassGrams(float(variant.split(":", 1)[1]))
    raise ValidationError(f"unknown reference variant {variant!r}")


def paper_bias(variant, offset=DEFAULT_OFFSET):
    variant = parse_variant(variant)
    if isinstance(variant, MassGrams):
        return bias_mod.Mass(variant.grams * 1e-3)
    return bias_mod.PmMre(PAPER_MAGNET, paper_disc(variant), offset, paper_scale(), variant)


@lru_cache(maxsize=None)
def calibrated_membrane() -> MembraneSpec:
    """Membrane with permittivity and effective inner radius fitted to the
    27.1 g mass-bias working range (0.564 mm at 5 kV)."""
    from .equilibrium import calibrate_membrane

    return calibrate_membrane(PAPER_MEMBRANE, bias_mod.Mass(27.1e-3), 0.564e-3, PAPER_V_ON)


def default_paper_scenario(variant, offset=DEFAULT_OFFSET, calibrated=False) -> Scenario:
    """Scenario built from the reference prototype materials and geometry.

    ``calibrated=True`` swaps in :func:`calibrated_membrane`.
    """
    variant = parse_variant(variant)
    membrane = calibrated_membrane() if calibrated else PAPER_MEMBRANE
    bias = paper_bias(variant, offset)
    name = variant if isinstance(variant, str) else f"mass{variant.grams:g}g"
    return assemble_scenario(membrane, bias, PAPER_ELECTRICAL, name)


def with_bias(scenario: Scenario, bias) -> Scenario:
    """Same membrane/electrics with a new bias; dynamics defaults re-derived."""
    return assemble_scenario(scenario.membrane, bias, scenario.electrical, scenario.name,
                             relaxation_time=scenario.relaxation_time)


def with_membrane(scenario: Scenario, membrane) -> Scenario:
    return assemble_scenario(membrane, scenario.bias, scenario.electrical, scenario.name,
                             relaxation_time=scenario.relaxation_time)
