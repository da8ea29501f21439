"""
Scenario files.

Scenarios are INI-style documents read with :mod:`configparser`::

    [geo.0]
    semi_major_axis = 42378.1 km
    inclination = 23.44          # degrees unless suffixed "rad"

Values may carry a unit suffix (``40 kW``, ``-100 dBm``, ``27.3 d``);
bare numbers use the key's default unit. Unknown sections or keys are
rejected.
"""
from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import fields
from importlib import resources
from pathlib import Path

from .linkbudget import LinkBudgetParams, db_to_linear, dbm_to_watt
from .linkselect import RisSpec, Scenario
from .orbital import CentralBody, LunarEphemerisModel, OrbitalElements

DEFAULT_SCENARIO = "paper.cfg"


class ScenarioError(ValueError):
    """Base class for scenario file problems."""


class ScenarioParseError(ScenarioError):
    """Malformed document, unknown key/section or unreadable value."""


class ScenarioValidationError(ScenarioError):
    """A value parsed fine but breaks an invariant."""


# unit -> (kind, factor to SI/internal unit) ; dB-style units handled apart
_UNITS = {
    "length": {"km": 1.0, "m": 1e-3},
    "wavelength": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "time": {"s": 1.0, "min": 60.0, "h": 3600.0, "d": 86400.0},
    "power": {"W": 1.0, "kW": 1e3, "MW": 1e6, "mW": 1e-3},
    "area": {"m2": 1.0},
    "mu": {"km3/s2": 1.0},
    "ratio": {},
    "angle": {"deg": None, "rad": None},
    "count": {},
    "text": {},
}
_DEFAULT_UNIT = {"length": "km", "wavelength": "m", "time": "s", "power": "W",
                 "area": "m2", "mu": "km3/s2", "angle": "deg"}

_ELEMENT_KEYS = {
    "semi_major_axis": "length", "eccentricity": "ratio", "inclination": "angle",
    "raan": "angle", "arg_perigee": "angle", "true_anomaly": "angle", "epoch": "time",
}
_SCHEMA = {
    "bodies": {"earth_mu": "mu", "earth_radius": "length",
               "moon_mu": "mu", "moon_radius": "length"},
    "moon": {"orbit_radius": "length", "sidereal_period": "time",
             "inclination": "angle", "phase_at_epoch": "angle"},
    "budget": {"transmit_power": "power", "max_transmit_power": "power",
               "gain_tx": "ratio", "gain_rx": "ratio", "wavelength": "wavelength",
               "noise_power": "power", "ris_insertion_loss": "ratio",
               "snr_threshold": "ratio"},
    "ris": {"num_elements": "count", "area_mode": "text",
            "directivity_constant": "ratio", "max_area": "area", "element_area": "area"},
    "run": {"duration": "time", "sampling_interval": "time",
            "ground_station": "text", "output": "text"},
}
_REQUIRED_ELEMENT_KEYS = set(_ELEMENT_KEYS) - {"epoch"}
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*([A-Za-z0-9/]*)\s*$")


def _quantity(section, key, raw, kind):
    if kind == "text":
        return raw.strip()
    m = _QUANTITY.match(raw)
    if not m:
        raise ScenarioParseError(f"[{section}] {key} = {raw!r}: not a number with optional unit")
    value, unit = float(m.group(1)), m.group(2)
    if kind == "count":
        if unit or value != int(value):
            raise ScenarioParseError(f"[{section}] {key} = {raw!r}: expected an integer")
        return int(value)
    if kind in ("ratio",):
        if unit in ("", "x"):
            return value
        if unit in ("dB", "dBi"):
            return db_to_linear(value)
        raise ScenarioParseError(f"[{section}] {key} = {raw!r}: unknown ratio unit {unit!r}")
    if kind == "angle":
        if unit in ("", "deg"):
            return math.radians(value)
        if unit == "rad":
            return value
        raise ScenarioParseError(f"[{section}] {key} = {raw!r}: unknown angle unit {unit!r}")
    if kind == "power":
        if unit == "dBm":
            return dbm_to_watt(value)
        if unit == "dBW":
            return db_to_linear(value)
    unit = unit or _DEFAULT_UNIT[kind]
    try:
        factor = _UNITS[kind][unit]
    except KeyError:
        raise ScenarioParseError(
            f"[{section}] {key} = {raw!r}: unknown {kind} unit {unit!r}"
        ) from None
    return value * factor


def _read_section(cp, section, schema, required=()):
    items = {}
    for key, raw in cp.items(section, raw=True):
        if key not in schema:
            raise ScenarioParseError(f"[{section}] unknown key {key!r}")
        items[key] = _quantity(section, key, raw, schema[key])
    missing = [k for k in required if k not in items]
    if missing:
        raise ScenarioParseError(f"[{section}] missing required key(s): {', '.join(missing)}")
    return items


def _build(section, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        detail = ", ".join(f"{k} = {v!r}" for k, v in kwargs.items() if k in str(exc))
        where = f" ({detail})" if detail else ""
        raise ScenarioValidationError(f"[{section}]{where}: {exc}") from exc


def _section_index(name, prefix):
    tail = name[len(prefix) + 1:]
    if not tail.isdigit():
        raise ScenarioParseError(f"section [{name}] must be named [{prefix}.<integer>]")
    return int(tail)


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   default_section="\0defaults")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioParseError(f"{source}: {exc}") from exc

    geo, llo = {}, {}
    for name in cp.sections():
        if name.startswith("geo."):
            geo[_section_index(name, "geo")] = name
        elif name.startswith("llo."):
            llo[_section_index(name, "llo")] = name
        elif name not in _SCHEMA:
            raise ScenarioParseError(f"{source}: unknown section [{name}]")

    sec = {name: (_read_section(cp, name, schema) if cp.has_section(name) else {})
           for name, schema in _SCHEMA.items()}

    b = sec["bodies"]
    earth = _build("bodies", CentralBody, name="Earth",
                   gravitational_parameter=b.get("earth_mu", 398600.4418),
                   radius=b.get("earth_radius", 6378.1))
    moon = _build("bodies", CentralBody, name="Moon",
                  gravitational_parameter=b.get("moon_mu", 4902.800),
                  radius=b.get("moon_radius", 1737.4))

    def elements(names):
        out = []
        for idx in sorted(names):
            name = names[idx]
            items = _read_section(cp, name, _ELEMENT_KEYS, sorted(_REQUIRED_ELEMENT_KEYS))
            out.append(_build(name, OrbitalElements, **items))
        return out

    geo_elements = elements(geo)
    llo_elements = elements(llo)
    moon_model = _build("moon", LunarEphemerisModel, **sec["moon"])
    budget = _build("budget", LinkBudgetParams, **sec["budget"])
    ris = _build("ris", RisSpec, **sec["ris"])

    run = dict(sec["run"])
    if "ground_station" in run:
        raw = run["ground_station"]
        try:
            run["ground_station"] = tuple(float(x) for x in raw.split(","))
        except ValueError:
            raise ScenarioParseError(f"[run] ground_station = {raw!r}: expected x, y, z in km") from None
    if "output" in run and not run["output"]:
        run["output"] = None
    return _build("run", Scenario, geo_elements=geo_elements, llo_elements=llo_elements,
                  moon_model=moon_model, budget=budget, ris=ris, earth=earth,
                  moon=moon, **run)


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises ScenarioParseError / ScenarioValidationError for bad content and
    OSError if the file cannot be read.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return loads_scenario(text, source=str(path))


def default_scenario_text() -> str:
    return resources.files("cislunar_ris").joinpath("scenarios", DEFAULT_SCENARIO).read_text(
        encoding="utf-8")


def load_default_scenario() -> Scenario:
    return loads_scenario(default_scenario_text(), source=DEFAULT_SCENARIO)


# --- canonical dump ---------------------------------------------------------

def _angle(value):
    # degrees when that survives the round trip, otherwise radians
    deg = math.degrees(value)
    return repr(deg) if math.radians(deg) == value else f"{value!r} rad"


def _plain(value, unit=""):
    return f"{value!r} {unit}".rstrip()


def dumps_scenario(scenario: Scenario) -> str:
    """Canonical text that :func:`loads_scenario` maps back to an equal Scenario."""
    cp = configparser.ConfigParser(interpolation=None, default_section="\0defaults")
    cp.optionxform = str
    cp["bodies"] = {
        "earth_mu": _plain(scenario.earth.gravitational_parameter),
        "earth_radius": _plain(scenario.earth.radius, "km"),
        "moon_mu": _plain(scenario.moon.gravitational_parameter),
        "moon_radius": _plain(scenario.moon.radius, "km"),
    }
    for prefix, group in (("geo", scenario.geo_elements), ("llo", scenario.llo_elements)):
        for i, el in enumerate(group):
            cp[f"{prefix}.{i}"] = {
                "semi_major_axis": _plain(el.semi_major_axis, "km"),
                "eccentricity": _plain(el.eccentricity),
                "inclination": _angle(el.inclination),
                "raan": _angle(el.raan),
                "arg_perigee": _angle(el.arg_perigee),
                "true_anomaly": _angle(el.true_anomaly),
                "epoch": _plain(el.epoch, "s"),
            }
    mm = scenario.moon_model
    cp["moon"] = {
        "orbit_radius": _plain(mm.orbit_radius, "km"),
        "sidereal_period": _plain(mm.sidereal_period, "s"),
        "inclination": _angle(mm.inclination),
        "phase_at_epoch": _angle(mm.phase_at_epoch),
    }
    units = {"transmit_power": "W", "max_transmit_power": "W", "noise_power": "W",
             "wavelength": "m"}
    cp["budget"] = {f.name: _plain(getattr(scenario.budget, f.name), units.get(f.name, ""))
                    for f in fields(scenario.budget)}
    ris = scenario.ris
    cp["ris"] = {
        "num_elements": str(ris.num_elements),
        "area_mode": ris.area_mode,
        "directivity_constant": _plain(ris.directivity_constant),
        "max_area": _plain(ris.max_area, "m2"),
        "element_area": _plain(ris.element_area, "m2"),
    }
    run = {
        "duration": _plain(scenario.duration, "s"),
        "sampling_interval": _plain(scenario.sampling_interval, "s"),
        "ground_station": ", ".join(repr(x) for x in scenario.ground_station),
    }
    if scenario.output:
        run["output"] = scenario.output
    cp["run"] = run
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
