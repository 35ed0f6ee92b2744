"""Blade-element/momentum model of the 2-blade, 1 m twisted rotor in axial flow.

Each annulus carries an axial induced velocity v and a swirl velocity w,
found by relaxed fixed-point iteration between blade-element loads and
annular momentum (with Prandtl tip loss):

    dT = 4 pi r rho F (V + v) v dr,    dQ = 4 pi r^2 rho F (V + v) w dr.

Coefficients use revolutions per second n and diameter D:
C_T = T / (rho n^2 D^4), C_P = P / (rho n^3 D^5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .csvutil import write_csv
from .errors import InvalidParams, IterationDivergence, OutOfSpan

# x [cm], chord [cm], built-in pitch [deg]
BLADE_STATIONS = (
    (11.0, 4.0, 25.0),
    (14.0, 5.7, 23.2),
    (20.0, 5.7, 18.7),
    (30.0, 5.5, 11.8),
    (40.0, 4.6, 5.5),
    (45.0, 3.9, 2.6),
    (50.0, 2.8, 0.2),
    (50.7, 1.0, 0.0),
)


@dataclass(frozen=True)
class BladeGeometry:
    stations: tuple = BLADE_STATIONS
    n_blades: int = 2

    def __post_init__(self):
        st = tuple(tuple(float(v) for v in s) for s in self.stations)
        if len(st) < 2 or any(len(s) != 3 for s in st):
            raise InvalidParams("geometry needs at least two (x, chord, pitch) stations")
        xs = [s[0] for s in st]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidParams("radial stations must be strictly increasing")
        if any(s[1] < 0 for s in st) or xs[0] < 0:
            raise InvalidParams("chords and radial positions must be >= 0")
        if self.n_blades < 1:
            raise InvalidParams("n_blades must be >= 1")
        object.__setattr__(self, "stations", st)

    @property
    def root(self) -> float:
        return self.stations[0][0]

    @property
    def tip(self) -> float:
        return self.stations[-1][0]

    @property
    def radius_m(self) -> float:
        return self.tip / 100.0

    @property
    def diameter_m(self) -> float:
        return 2.0 * self.radius_m


@dataclass(frozen=True)
class OperatingPoint:
    rpm: float
    tip_pitch_offset: float = 0.0  # deg, added to the built-in twist
    airspeed: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rpm) and self.rpm >= 0):
            raise InvalidParams(f"rpm must be >= 0, got {self.rpm!r}")
        if not (math.isfinite(self.airspeed) and self.airspeed >= 0):
            raise InvalidParams("airspeed must be >= 0 (axial inflow only)")


@dataclass(frozen=True)
class Airfoil:
    """Linear lift with a sigmoid blend to a flat plate beyond the stall angle."""
    lift_slope: float = 5.7
    alpha_zero_lift: float = math.radians(-3.0)
    stall_angle: float = math.radians(12.0)
    cd0: float = 0.012
    cd_k: float = 0.02
    blend_sharpness: float = 50.0

    def coefficients(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        cl_lin = self.lift_slope * (alpha - self.alpha_zero_lift)
        cd_lin = self.cd0 + self.cd_k * cl_lin**2
        m, a_s = self.blend_sharpness, self.stall_angle
        e1 = np.exp(np.clip(-m * (alpha - a_s), -700, 700))
        e2 = np.exp(np.clip(m * (alpha + a_s), -700, 700))
        sigma = (1 + e1 + e2) / ((1 + e1) * (1 + e2))
        s, c = np.sin(alpha), np.cos(alpha)
        cl = (1 - sigma) * cl_lin + sigma * 2.0 * s * c
        cd = (1 - sigma) * cd_lin + sigma * (self.cd0 + 2.0 * s * s)
        return cl, cd


@dataclass(frozen=True)
class BemResult:
    thrust: float
    power: float
    torque: float
    efficiency: float
    iterations: int
    peak_alpha: float = 0.0  # largest |section angle of attack|, rad

    def attached(self, airfoil: "Airfoil" = None) -> bool:
        """True when every section is inside the airfoil's linear range."""
        return self.peak_alpha <= (airfoil or Airfoil()).stall_angle


def blade_geometry_at(x: float, geom: BladeGeometry = BladeGeometry()) -> tuple[float, float]:
    """(chord cm, twist deg) at radial station x (cm) by linear interpolation."""
    if not geom.root <= x <= geom.tip:
        raise OutOfSpan(f"x = {x} cm outside blade span [{geom.root}, {geom.tip}]")
    st = np.array(geom.stations)
    return float(np.interp(x, st[:, 0], st[:, 1])), float(np.interp(x, st[:, 0], st[:, 2]))


def _prandtl(n_blades: int, r, radius, phi):
    s = np.maximum(np.abs(np.sin(phi)), 1e-6)
    f = n_blades * (radius - r) / (2.0 * r * s)
    return np.maximum(2.0 / math.pi * np.arccos(np.clip(np.exp(-f), 0.0, 1.0)), 1e-4)


class _Stalled(Exception):
    pass


def _fixed_point(loads, swirl, V, zeros, relaxation, tol, max_iter):
    v = zeros.copy()
    w = zeros.copy()
    for it in range(1, max_iter + 1):
        dT, dQ, k, _ = loads(v, w)
        # momentum balance solved for v; the windmill branch is clamped
        v_new = 0.5 * (-V + np.sqrt(np.maximum(V * V + dT / k, 0.0)))
        dv = v_new - v
        dw = swirl(v_new, dQ, k) - w
        v = v + relaxation * dv
        w = w + relaxation * dw
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            bad = int(np.argmax(~(np.isfinite(v) & np.isfinite(w))))
            raise IterationDivergence(bad, "induced velocity became non-finite")
        if max(np.max(np.abs(dv)), np.max(np.abs(dw))) < tol:
            return v, w, it
    raise _Stalled


def _bracketed(loads, swirl, V, tip_speed, zeros, relaxation, tol, max_iter):
    """Slower path for annuli whose load is near zero.

    There dv/dT is unbounded and the relaxed loop cycles. Here v is found
    by bisection on the signed balance dT = 4 k |V + v| v for the current
    swirl, and only the swirl is relaxed.
    """
    def residual(v, w):
        dT, _, k, _ = loads(v, w)
        return dT - 4.0 * k * np.abs(V + v) * v

    bound = 2.0 * (tip_speed + V) + 1.0
    v = np.zeros_like(zeros)
    w = np.zeros_like(zeros)
    for it in range(1, max_iter + 1):
        lo, hi = np.full_like(v, -bound), np.full_like(v, bound)
        ok = (residual(lo, w) > 0) & (residual(hi, w) < 0)
        if not ok.all():
            raise IterationDivergence(int(np.argmin(ok)), "no bracket for induced velocity")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            up = residual(mid, w) > 0
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        v_new = 0.5 * (lo + hi)
        _, dQ, k, _ = loads(v_new, w)
        dv = v_new - v
        dw = swirl(v_new, dQ, k) - w
        v = v_new
        w = w + relaxation * dw
        if max(np.max(np.abs(dv)), np.max(np.abs(dw))) < tol:
            return v, w, it
    bad = int(np.argmax(np.maximum(np.abs(dv), np.abs(dw))))
    raise IterationDivergence(bad, f"no convergence after {max_iter} iterations")


def bem_performance(geom: BladeGeometry, op: OperatingPoint, rho: float = 1.225,
                    airfoil: Airfoil = Airfoil(), annuli: int = 40, relaxation: float = 0.3,
                    tol: float = 1e-6, max_iter: int = 2000,
                    tip_loss: bool = True) -> BemResult:
    """Thrust (N), shaft power (W) and efficiency at one operating point.

    Efficiency is the figure of merit T^1.5 / sqrt(2 rho A) / P at zero
    airspeed and T V / P otherwise; it is 0 when thrust is not positive.
    """
    if not rho > 0:
        raise InvalidParams("rho must be > 0")
    if op.rpm == 0:
        return BemResult(0.0, 0.0, 0.0, 0.0, 0)
    omega = op.rpm * 2.0 * math.pi / 60.0
    R = geom.radius_m
    edges = np.linspace(geom.root, geom.tip, annuli + 1) / 100.0
    r = 0.5 * (edges[1:] + edges[:-1])
    dr = np.diff(edges)
    st = np.array(geom.stations)
    chord = np.interp(r * 100.0, st[:, 0], st[:, 1]) / 100.0
    theta = np.radians(np.interp(r * 100.0, st[:, 0], st[:, 2]) + op.tip_pitch_offset)
    B = geom.n_blades
    V = op.airspeed

    def loads(v, w):
        va = V + v
        vt = omega * r - w
        phi = np.arctan2(va, vt)
        alpha = theta - phi
        cl, cd = airfoil.coefficients(alpha)
        q = 0.5 * rho * (va * va + vt * vt) * chord * B
        dT = q * (cl * np.cos(phi) - cd * np.sin(phi))
        dQ = q * (cl * np.sin(phi) + cd * np.cos(phi)) * r
        F = _prandtl(B, r, R, phi) if tip_loss else np.ones_like(r)
        return dT, dQ, math.pi * r * rho * F, alpha

    def swirl(v, dQ, k):
        va = np.maximum(np.abs(V + v), 1e-9)
        return np.minimum(dQ / (4.0 * k * r * va), 0.5 * omega * r)

    try:
        v, w, it = _fixed_point(loads, swirl, V, np.zeros_like(r), relaxation, tol, max_iter)
    except _Stalled:
        v, w, it = _bracketed(loads, swirl, V, omega * R, r, relaxation, tol, max_iter)
    dT, dQ, _, alpha = loads(v, w)

    thrust = float(np.sum(dT * dr))
    torque = float(np.sum(dQ * dr))
    power = torque * omega
    if thrust <= 0 or power <= 0:
        eta = 0.0
    elif V == 0:
        eta = thrust**1.5 / math.sqrt(2.0 * rho * math.pi * R * R) / power
    else:
        eta = thrust * V / power
    return BemResult(thrust, power, torque, eta, it, float(np.max(np.abs(alpha))))


def thrust_power_coefficients(geom: BladeGeometry, op: OperatingPoint, rho: float = 1.225,
                              **kw) -> tuple[float, float]:
    """(C_T, C_P) with C_T = T/(rho n^2 D^4), C_P = P/(rho n^3 D^5), n in rev/s."""
    if not op.rpm > 0:
        raise InvalidParams("coefficients need rpm > 0")
    res = bem_performance(geom, op, rho, **kw)
    n = op.rpm / 60.0
    D = geom.diameter_m
    return res.thrust / (rho * n**2 * D**4), res.power / (rho * n**3 * D**5)


def bem_sweep(geom: BladeGeometry, rpms: Sequence[float], pitches: Sequence[float],
              airspeeds: Sequence[float], rho: float = 1.225, **kw) -> list[tuple]:
    """Rows (rpm, pitch, V, T, P, eta, CT, CP) over the full grid, rpm-major."""
    rows = []
    D = geom.diameter_m
    for rpm in rpms:
        for pitch in pitches:
            for V in airspeeds:
                res = bem_performance(geom, OperatingPoint(rpm, pitch, V), rho, **kw)
                n = rpm / 60.0
                ct = res.thrust / (rho * n**2 * D**4) if n > 0 else 0.0
                cp = res.power / (rho * n**3 * D**5) if n > 0 else 0.0
                rows.append((float(rpm), float(pitch), float(V), res.thrust, res.power,
                             res.efficiency, ct, cp))
    return rows


SWEEP_HEADER = ["rpm", "pitch", "V", "T", "P", "eta", "CT", "CP"]


def write_sweep_csv(path, rows: Iterable[tuple]) -> None:
    write_csv(path, SWEEP_HEADER, rows)
