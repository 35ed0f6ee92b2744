"""INI scenario/vehicle configuration.

A scenario file has a ``[scenario]`` section with ``kind`` and optionally
``vehicle = <path>``; the vehicle file is read first so the scenario can
override any of its keys.  Relative paths resolve against the file that
names them.  Angles are written in degrees (keys ending in ``_deg`` or
``_deg_s``) and converted here, so nothing downstream sees degrees except
blade pitch, which the propulsion model takes in degrees by design.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .aero import AirframeAero
from .body import BodyParams
from .control import AxisCoefficients, CollectiveLinkage, RateModel, IDENTIFIED_FP, IDENTIFIED_FQ
from .energy import LIION_6S6P, LIPO_6S6P, BatteryModel
from .errors import ConfigError, RotorlabError
from .propulsion import BladeGeometry
from .rotor import RotorParams

KINDS = ("doublet", "closed_loop", "flap_only", "bem_sweep", "power_curve",
         "mission_energy", "fit_rates", "fit_planar", "fit_drag")

# keys each kind needs in [experiment]
REQUIRED = {
    "doublet": ("axis", "amplitude_deg", "duration"),
    "closed_loop": ("axis", "amplitude_deg_s", "duration"),
    "flap_only": ("duration",),
    "bem_sweep": ("rpm", "pitch_deg", "airspeed"),
    "power_curve": ("mass", "v_min", "v_max", "v_step"),
    "mission_energy": ("batteries",),
    "fit_rates": (),
    "fit_planar": ("samples",),
    "fit_drag": ("samples",),
}

BUILTIN_BATTERIES = {"lipo": LIPO_6S6P, "liion": LIION_6S6P}


@dataclass
class Scenario:
    kind: str
    name: str
    sections: dict
    base_dir: Path
    seed: int = 0
    output: str = ""
    source: Path | None = None
    extra: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    @property
    def experiment(self) -> dict:
        return self.section("experiment")

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path


def _read(path: Path, seen: tuple = ()) -> configparser.ConfigParser:
    if path in seen:
        raise ConfigError(f"{path}: include cycle")
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cp


def _merge(into: dict, cp: configparser.ConfigParser) -> None:
    for sec in cp.sections():
        into.setdefault(sec, {}).update(dict(cp.items(sec)))


def load_scenario(path) -> Scenario:
    path = Path(path).resolve()
    cp = _read(path)
    if not cp.has_section("scenario"):
        raise ConfigError(f"{path}: missing [scenario] section")
    sections: dict = {}
    vehicle = cp.get("scenario", "vehicle", fallback=None)
    if vehicle:
        vpath = (path.parent / vehicle).resolve()
        vcp = _read(vpath, (path,))
        _merge(sections, vcp)
        # relative paths inside the vehicle file resolve against it
        for sec in sections.values():
            for k, v in list(sec.items()):
                if k.endswith("_file"):
                    sec[k] = str((vpath.parent / v).resolve())
    _merge(sections, cp)
    sc = sections["scenario"]
    kind = sc.get("kind", "").strip()
    if kind not in KINDS:
        raise ConfigError(f"{path}: kind must be one of {', '.join(KINDS)}, got {kind!r}")
    name = sc.get("name", path.stem).strip()
    s = Scenario(kind=kind, name=name, sections=sections, base_dir=path.parent,
                 seed=get_int(sc, "seed", 0), output=sc.get("output", name).strip(),
                 source=path)
    validate(s)
    return s


def validate(s: Scenario) -> None:
    exp = s.experiment
    missing = [k for k in REQUIRED[s.kind] if k not in exp]
    if s.kind == "fit_rates" and "log" not in exp and not get_bool(exp, "synthetic", False):
        missing.append("log (or synthetic = true)")
    if missing:
        raise ConfigError(f"scenario kind {s.kind!r} needs [experiment] keys: {', '.join(missing)}")
    if "axis" in exp and exp["axis"] not in ("pitch", "roll"):
        raise ConfigError(f"axis must be pitch or roll, got {exp['axis']!r}")
    # build every object the kind touches now, so bad values fail before any work
    try:
        if s.kind in ("doublet", "flap_only"):
            rotor_params(s)
        if s.kind == "doublet":
            body_params(s)
        if s.kind == "closed_loop":
            rate_model(s)
        if s.kind == "bem_sweep":
            blade_geometry(s)
        if s.kind == "power_curve":
            airframe(s)
        if s.kind == "mission_energy":
            batteries(s)
    except ConfigError:
        raise
    except (RotorlabError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid {s.kind} configuration: {exc}") from None


# --- typed getters ---------------------------------------------------------

def get_float(sec: dict, key: str, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return float(default)
    try:
        v = float(sec[key])
    except ValueError:
        raise ConfigError(f"{key} = {sec[key]!r} is not a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    return v


def get_int(sec: dict, key: str, default=None) -> int:
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return int(default)
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(f"{key} = {sec[key]!r} is not an integer") from None


def get_bool(sec: dict, key: str, default: bool = False) -> bool:
    if key not in sec:
        return default
    v = sec[key].strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} = {sec[key]!r} is not a boolean")


def get_list(sec: dict, key: str, default=None) -> list[float]:
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return list(default)
    try:
        return [float(x) for x in sec[key].replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key} = {sec[key]!r} is not a list of numbers") from None


def get_angle(sec: dict, key: str, default_deg=None) -> float:
    """Read `<key>_deg` and return radians."""
    return math.radians(get_float(sec, key + "_deg", default_deg))


def get_rate(sec: dict, key: str, default_deg_s=None) -> float:
    """Read `<key>_deg_s` and return rad/s."""
    return math.radians(get_float(sec, key + "_deg_s", default_deg_s))


def get_range(sec: dict, key: str) -> list[float]:
    """Either an explicit list or `start:stop:step` (stop inclusive)."""
    raw = sec.get(key, "")
    if raw.count(":") == 2:
        try:
            a, b, h = (float(x) for x in raw.split(":"))
        except ValueError:
            raise ConfigError(f"{key} = {raw!r} is not start:stop:step") from None
        if not h > 0 or b < a:
            raise ConfigError(f"{key}: need step > 0 and stop >= start")
        n = int(math.floor((b - a) / h + 1e-9))
        return [a + i * h for i in range(n + 1)]
    return get_list(sec, key)


# --- domain objects --------------------------------------------------------

def rotor_params(s: Scenario) -> RotorParams:
    sec = s.section("rotor")
    d = RotorParams()
    kw = dict(radius=get_float(sec, "radius", d.radius),
              blade_mass=get_float(sec, "blade_mass", d.blade_mass),
              hinge_spring=get_float(sec, "hinge_spring", d.hinge_spring),
              lift_slope=get_float(sec, "lift_slope", d.lift_slope),
              mean_chord=get_float(sec, "mean_chord", d.mean_chord),
              air_density=get_float(sec, "air_density", d.air_density),
              rpm_nominal=get_float(sec, "rpm", d.rpm_nominal),
              n_blades=get_int(sec, "n_blades", d.n_blades))
    if "flap_inertia" in sec:
        return RotorParams(flap_inertia=get_float(sec, "flap_inertia"), **kw)
    return RotorParams(flap_inertia=kw["blade_mass"] * kw["radius"] ** 2 / 3.0, **kw)


def body_params(s: Scenario) -> BodyParams:
    sec = s.section("body")
    d = BodyParams()
    return BodyParams(Ixx=get_float(sec, "Ixx", d.Ixx), Iyy=get_float(sec, "Iyy", d.Iyy),
                      Izz=get_float(sec, "Izz", d.Izz),
                      mass_total=get_float(sec, "mass", d.mass_total),
                      rotor_offset_z=get_float(sec, "rotor_offset_z", d.rotor_offset_z))


def rate_model(s: Scenario) -> RateModel:
    rm = s.section("rate_model")
    ctl = s.section("controller")
    fp = get_list(rm, "fp", IDENTIFIED_FP)
    fq = get_list(rm, "fq", IDENTIFIED_FQ)
    if len(fp) != 5 or len(fq) != 5:
        raise ConfigError("rate_model fp/fq need 5 values: offset, dx, dy, p, q")
    return RateModel(AxisCoefficients(*fp), AxisCoefficients(*fq),
                     K_c=get_float(ctl, "K_c", 0.5), K_p=get_float(ctl, "K_p", 10.0),
                     K_q=get_float(ctl, "K_q", 10.0))


def collective_linkage(s: Scenario) -> CollectiveLinkage:
    sec = s.section("linkage")
    if "table" in sec:
        vals = get_list(sec, "table")
        if len(vals) % 2:
            raise ConfigError("linkage table needs command,pitch pairs")
        return CollectiveLinkage(table=list(zip(vals[0::2], vals[1::2])))
    if "poly" in sec:
        return CollectiveLinkage(poly=get_list(sec, "poly"))
    return CollectiveLinkage()


def blade_geometry(s: Scenario) -> BladeGeometry:
    sec = s.section("propeller")
    n = get_int(sec, "n_blades", 2)
    if "stations" in sec:
        vals = get_list(sec, "stations")
        if len(vals) % 3:
            raise ConfigError("propeller stations need x,chord,pitch triples")
        return BladeGeometry(tuple(zip(vals[0::3], vals[1::3], vals[2::3])), n)
    return BladeGeometry(n_blades=n)


def airframe(s: Scenario) -> AirframeAero:
    sec = s.section("airframe")
    d = AirframeAero()
    area = get_float(sec, "wing_area", d.wing_area_S)
    ar = (get_float(sec, "span") ** 2 / area) if "span" in sec else get_float(
        sec, "aspect_ratio", d.aspect_ratio)
    return AirframeAero(wing_area_S=area, aspect_ratio=ar,
                        oswald_e=get_float(sec, "oswald_e", d.oswald_e),
                        cd0_clean=get_float(sec, "cd0_clean", d.cd0_clean),
                        cd0_protrusions=get_float(sec, "cd0_protrusions", d.cd0_protrusions),
                        cl_max=get_float(sec, "cl_max", d.cl_max))


def battery(s: Scenario, name: str) -> BatteryModel:
    sec = s.section(f"battery.{name}")
    base = BUILTIN_BATTERIES.get(sec.get("preset", name))
    if base is None and not sec:
        raise ConfigError(f"unknown battery {name!r}: add a [battery.{name}] section")
    if base is None:
        base = LIPO_6S6P
        needed = [k for k in ("cells_series", "capacity", "ocv", "internal_resistance")
                  if k not in sec]
        if needed:
            raise ConfigError(f"[battery.{name}] needs {', '.join(needed)}")
    ocv = get_list(sec, "ocv", base.ocv_volts)
    soc = get_list(sec, "ocv_soc", [i / (len(ocv) - 1) for i in range(len(ocv))]
                   if "ocv" in sec else base.ocv_soc)
    return BatteryModel(cells_series=get_int(sec, "cells_series", base.cells_series),
                        capacity=get_float(sec, "capacity", base.capacity),
                        ocv_soc=tuple(soc), ocv_volts=tuple(ocv),
                        internal_resistance=get_float(sec, "internal_resistance",
                                                      base.internal_resistance),
                        cutoff_voltage=get_float(sec, "cutoff_voltage", base.cutoff_voltage),
                        name=name)


def batteries(s: Scenario) -> list[BatteryModel]:
    names = s.experiment["batteries"].replace(",", " ").split()
    if not names:
        raise ConfigError("batteries list is empty")
    return [battery(s, n) for n in names]
