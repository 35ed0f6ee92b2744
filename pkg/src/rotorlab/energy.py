"""Mission load profile and zeroth-order Thevenin battery discharge."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .csvutil import write_csv
from .errors import InvalidParams


@dataclass(frozen=True)
class Segment:
    label: str
    duration: float  # s
    current: float  # A


@dataclass(frozen=True)
class MissionProfile:
    segments: tuple

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        if not segs:
            raise InvalidParams("profile needs at least one segment")
        for s in segs:
            if not (math.isfinite(s.duration) and s.duration > 0):
                raise InvalidParams(f"segment {s.label!r}: duration must be > 0")
            if not (math.isfinite(s.current) and s.current >= 0):
                raise InvalidParams(f"segment {s.label!r}: current must be >= 0")
        object.__setattr__(self, "segments", segs)

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @property
    def charge_ah(self) -> float:
        return sum(s.duration * s.current for s in self.segments) / 3600.0

    @property
    def boundaries(self) -> np.ndarray:
        return np.cumsum([0.0] + [s.duration for s in self.segments])

    def segment_index(self, t: float) -> int:
        """Index of the segment active at t (segments are closed on the left)."""
        idx = int(np.searchsorted(self.boundaries, t, side="right")) - 1
        return min(max(idx, 0), len(self.segments) - 1)

    def current_at(self, t: float) -> float:
        return self.segments[self.segment_index(t)].current


def build_mission_profile(hover_current: float = 23.0, cruise_current: float = 12.0,
                          wait_current: float = 1.0) -> MissionProfile:
    """Out-and-back mission: hover take-off, cruise, hover landing, wait, and the same return."""
    for name, v in (("hover", hover_current), ("cruise", cruise_current), ("wait", wait_current)):
        if not v >= 0:
            raise InvalidParams(f"{name} current must be >= 0")
    m = 60.0
    return MissionProfile((
        Segment("takeoff", 1 * m, hover_current),
        Segment("cruise_out", 29 * m, cruise_current),
        Segment("landing", 1 * m, hover_current),
        Segment("wait", 3 * m, wait_current),
        Segment("takeoff_return", 1 * m, hover_current),
        Segment("cruise_return", 29 * m, cruise_current),
        Segment("final_landing", 1 * m, hover_current),
    ))


@dataclass(frozen=True)
class BatteryModel:
    """Series string of identical cell groups.

    `ocv_soc`/`ocv_volts` map SoC (ascending, 0..1) to open-circuit volts per cell.
    `internal_resistance` is the series resistance of one cell group seen
    by the pack current, so pack volts = cells_series * (OCV - I * R).
    """
    cells_series: int
    capacity: float  # Ah
    ocv_soc: tuple
    ocv_volts: tuple
    internal_resistance: float
    cutoff_voltage: float = 3.0
    name: str = "pack"

    def __post_init__(self):
        if self.cells_series < 1:
            raise InvalidParams("cells_series must be >= 1")
        if not (math.isfinite(self.capacity) and self.capacity > 0):
            raise InvalidParams("capacity must be > 0")
        if not (math.isfinite(self.internal_resistance) and self.internal_resistance >= 0):
            raise InvalidParams("internal_resistance must be >= 0")
        soc = tuple(float(x) for x in self.ocv_soc)
        volts = tuple(float(x) for x in self.ocv_volts)
        if len(soc) != len(volts) or len(soc) < 2:
            raise InvalidParams("ocv curve needs >= 2 matching (soc, volts) points")
        if any(b <= a for a, b in zip(soc, soc[1:])):
            raise InvalidParams("ocv SoC points must be strictly increasing")
        # strictly decreasing in depth of discharge == strictly increasing in SoC
        if any(b <= a for a, b in zip(volts, volts[1:])):
            raise InvalidParams("ocv must strictly decrease with depth of discharge")
        object.__setattr__(self, "ocv_soc", soc)
        object.__setattr__(self, "ocv_volts", volts)

    def ocv(self, soc: float) -> float:
        """Open-circuit volts per cell; clamped to the table ends."""
        return float(np.interp(soc, self.ocv_soc, self.ocv_volts))

    def terminal_voltage(self, soc: float, current: float) -> float:
        return self.cells_series * (self.ocv(soc) - current * self.internal_resistance)

    def with_(self, **kw) -> "BatteryModel":
        args = {f: getattr(self, f) for f in self.__dataclass_fields__}
        args.update(kw)
        return BatteryModel(**args)


_SOC10 = tuple(float(x) for x in np.linspace(0.0, 1.0, 10))

# Placeholder curves calibrated so the two packs reproduce the qualitative
# mission outcome; they are not measured cell data.
LIPO_6S6P = BatteryModel(
    cells_series=6, capacity=16.2, ocv_soc=_SOC10,
    ocv_volts=(3.27, 3.61, 3.69, 3.74, 3.77, 3.80, 3.84, 3.92, 4.03, 4.20),
    internal_resistance=0.008, name="lipo")

LIION_6S6P = BatteryModel(
    cells_series=6, capacity=19.8, ocv_soc=_SOC10,
    ocv_volts=(3.00, 3.30, 3.44, 3.53, 3.60, 3.67, 3.74, 3.84, 3.97, 4.15),
    internal_resistance=0.0275, name="liion")


@dataclass
class DischargeTrace:
    t: np.ndarray
    soc: np.ndarray
    volts: np.ndarray
    amps: np.ndarray
    watts: np.ndarray
    completed: bool
    failure_time: float | None = None
    failure_segment: str | None = None
    meta: dict = field(default_factory=dict)

    def energy_balance(self, battery: BatteryModel) -> tuple[float, float, float]:
        """Trapezoidal (terminal energy, ohmic loss, OCV energy) in J."""
        ocv_pack = battery.cells_series * np.interp(self.soc, battery.ocv_soc, battery.ocv_volts)
        loss = self.amps**2 * battery.internal_resistance * battery.cells_series
        return (float(trapezoid(self.watts, self.t)), float(trapezoid(loss, self.t)),
                float(trapezoid(ocv_pack * self.amps, self.t)))

    def write_csv(self, path) -> None:
        write_csv(path, ["t", "soc", "volts", "amps", "watts"],
                  zip(self.t, self.soc, self.volts, self.amps, self.watts))


def simulate_discharge(battery: BatteryModel, profile: MissionProfile,
                       dt: float = 1.0) -> DischargeTrace:
    """Step the pack through the profile; an under-voltage marks the mission failed.

    The trace always covers the full profile. The first sample whose terminal
    voltage falls below cutoff (or whose SoC is exhausted) sets completed to
    False and records where it happened.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidParams("dt must be > 0")
    total = profile.total_duration
    n = int(math.ceil(total / dt - 1e-9))
    t = np.minimum(np.arange(n + 1) * dt, total)
    amps = np.array([profile.current_at(x) for x in t])
    amps[-1] = profile.segments[-1].current
    soc = np.empty(n + 1)
    soc[0] = 1.0
    scale = 1.0 / (3600.0 * battery.capacity)
    for k in range(n):
        soc[k + 1] = soc[k] - amps[k] * (t[k + 1] - t[k]) * scale
    ocv = np.interp(soc, battery.ocv_soc, battery.ocv_volts)
    volts = battery.cells_series * (ocv - amps * battery.internal_resistance)
    watts = volts * amps
    bad = (volts < battery.cutoff_voltage * battery.cells_series) | (soc < 0)
    completed = not bool(bad.any())
    ft = fs = None
    if not completed:
        k = int(np.argmax(bad))
        ft = float(t[k])
        fs = profile.segments[profile.segment_index(ft)].label
    return DischargeTrace(t, soc, volts, amps, watts, completed, ft, fs,
                          meta={"battery": battery.name, "dt": dt})
