"""Parabolic drag polar and required-power curve for the wing-borne phase.

The biplane is treated as one equivalent wing of the total area S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .csvutil import write_csv
from .errors import BelowStallSpeed, BeyondStallClamp, InvalidParams

GRAVITY = 9.81
WING_AREA = 0.496
WING_SPAN = 1.54


@dataclass(frozen=True)
class AirframeAero:
    wing_area_S: float = WING_AREA
    aspect_ratio: float = WING_SPAN**2 / WING_AREA
    oswald_e: float = 0.8
    # clean wing + ideal fuselage; a placeholder estimate, exposed in config
    cd0_clean: float = 0.02
    cd0_protrusions: float = 0.012
    cl_max: float = 1.2

    def __post_init__(self):
        for name in ("wing_area_S", "aspect_ratio", "oswald_e", "cd0_clean",
                     "cd0_protrusions", "cl_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be > 0, got {v!r}")

    @property
    def cd0(self) -> float:
        return self.cd0_clean + self.cd0_protrusions

    @property
    def induced_factor(self) -> float:
        return 1.0 / (math.pi * self.aspect_ratio * self.oswald_e)


def drag_polar(cl: float, aero: AirframeAero = AirframeAero()) -> float:
    if abs(cl) > aero.cl_max:
        raise BeyondStallClamp(f"|cl| = {abs(cl):.4g} exceeds clamp {aero.cl_max}")
    return aero.cd0 + aero.induced_factor * cl * cl


def stall_speed(mass: float, rho: float, aero: AirframeAero = AirframeAero()) -> float:
    return math.sqrt(2.0 * mass * GRAVITY / (rho * aero.wing_area_S * aero.cl_max))


def lift_coefficient(V: float, mass: float, rho: float, aero: AirframeAero = AirframeAero()) -> float:
    return mass * GRAVITY / (0.5 * rho * V * V * aero.wing_area_S)


def required_power(V: float, mass: float, rho: float = 1.225,
                   aero: AirframeAero = AirframeAero()) -> float:
    """Aerodynamic power (W) for level flight at V: 0.5 rho V^3 S cd(cl)."""
    if not (mass > 0 and rho > 0):
        raise InvalidParams("mass and rho must be > 0")
    vs = stall_speed(mass, rho, aero)
    if not V > vs:
        raise BelowStallSpeed(f"V = {V} m/s is not above the stall speed {vs:.3f} m/s")
    cl = lift_coefficient(V, mass, rho, aero)
    return 0.5 * rho * V**3 * aero.wing_area_S * drag_polar(cl, aero)


def min_power_speed(mass: float, rho: float = 1.225, aero: AirframeAero = AirframeAero(),
                    v_max: float = 60.0, xtol: float = 1e-3) -> float:
    """Airspeed of minimum required power by golden-section search."""
    lo = stall_speed(mass, rho, aero) * (1.0 + 1e-9)
    if not v_max > lo:
        raise InvalidParams("v_max must exceed the stall speed")
    f = lambda v: required_power(v, mass, rho, aero)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, v_max
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def min_power_speed_analytic(mass: float, rho: float = 1.225,
                             aero: AirframeAero = AirframeAero()) -> float:
    """Unconstrained optimum, where the induced term is three times cd0."""
    w = mass * GRAVITY
    return (4.0 * aero.induced_factor * w * w
            / (3.0 * aero.cd0 * rho * rho * aero.wing_area_S**2)) ** 0.25


def power_curve(speeds, mass: float, rho: float = 1.225,
                aero: AirframeAero = AirframeAero()) -> list[tuple]:
    """Rows (V, cl, cd, P)."""
    rows = []
    for V in np.asarray(speeds, dtype=float):
        cl = lift_coefficient(V, mass, rho, aero)
        rows.append((float(V), cl, drag_polar(cl, aero), required_power(V, mass, rho, aero)))
    return rows


def write_power_curve_csv(path, rows) -> None:
    write_csv(path, ["V", "cl", "cd", "P"], rows)
