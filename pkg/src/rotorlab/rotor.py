"""Rigid flapping rotor: Lock number, swash-plate feathering and the blade
flap equation

    beta'' + (gamma/8) w beta' + (w^2 + K/I) beta = (gamma/8) w^2 theta

integrated with fixed-step classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .csvutil import write_csv
from .errors import InvalidParams, InvalidState, OutOfRange, StepTooLarge

TWO_PI = 2.0 * math.pi
COLLECTIVE_LIMIT = math.radians(40.0)
# per-step azimuth advance guard (rad)
MAX_AZIMUTH_STEP = 0.2


def rpm_to_rad_s(rpm: float) -> float:
    return rpm * TWO_PI / 60.0


@dataclass(frozen=True)
class RotorParams:
    radius: float = 0.5
    blade_mass: float = 0.06
    flap_inertia: float = 0.06 * 0.5**2 / 3.0
    hinge_spring: float = 20.0
    lift_slope: float = 5.7
    mean_chord: float = 0.05
    air_density: float = 1.225
    rpm_nominal: float = 1500.0
    n_blades: int = 2

    def __post_init__(self):
        for name in ("radius", "flap_inertia", "air_density"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be > 0, got {v!r}")
        for name in ("hinge_spring", "blade_mass", "lift_slope", "mean_chord", "rpm_nominal"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidParams(f"{name} must be >= 0, got {v!r}")
        if self.n_blades < 1:
            raise InvalidParams("n_blades must be >= 1")

    @classmethod
    def uniform_blade(cls, blade_mass: float, radius: float, **kw) -> "RotorParams":
        """Rotor whose flap inertia is that of a uniform rod hinged at the hub, m R^2 / 3."""
        return cls(radius=radius, blade_mass=blade_mass,
                   flap_inertia=blade_mass * radius**2 / 3.0, **kw)

    @property
    def omega_nominal(self) -> float:
        return rpm_to_rad_s(self.rpm_nominal)


@dataclass(frozen=True)
class FlapState:
    beta: float = 0.0
    beta_dot: float = 0.0
    psi: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.omega < 0:
            raise InvalidState(f"omega must be >= 0, got {self.omega!r}")
        object.__setattr__(self, "psi", wrap_azimuth(self.psi))


@dataclass(frozen=True)
class CyclicCommand:
    delta_p: float = 0.0
    delta_q: float = 0.0
    collective_theta0: float = 0.0
    limit: float = 1.0

    def __post_init__(self):
        if abs(self.delta_p) > self.limit or abs(self.delta_q) > self.limit:
            raise OutOfRange(
                f"cyclic command ({self.delta_p}, {self.delta_q}) exceeds limit {self.limit}")
        clamped = min(max(self.collective_theta0, -COLLECTIVE_LIMIT), COLLECTIVE_LIMIT)
        object.__setattr__(self, "collective_theta0", clamped)


def wrap_azimuth(psi: float) -> float:
    w = math.fmod(psi, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    # fmod of a tiny negative number can land exactly on 2*pi after the add
    return 0.0 if w >= TWO_PI else w


def lock_number(params: RotorParams) -> float:
    """gamma = rho * cl_alpha * c * R^4 / I."""
    if not isinstance(params, RotorParams):
        raise InvalidParams("expected RotorParams")
    return (params.air_density * params.lift_slope * params.mean_chord
            * params.radius**4 / params.flap_inertia)


def feathering_angle(cmd: CyclicCommand, psi: float) -> float:
    return cmd.collective_theta0 + cmd.delta_p * math.sin(psi) + cmd.delta_q * math.cos(psi)


def flap_coefficients(params: RotorParams, omega: float) -> tuple[float, float, float]:
    """(damping, stiffness, forcing gain) of the flap equation at rotor speed omega."""
    g8 = lock_number(params) / 8.0
    return g8 * omega, omega * omega + params.hinge_spring / params.flap_inertia, g8 * omega * omega


def natural_frequency(params: RotorParams, omega: float) -> float:
    """Undamped flap frequency sqrt(w^2 + K/I); equals omega only for a hinge without spring."""
    return math.sqrt(omega * omega + params.hinge_spring / params.flap_inertia)


def steady_flap(params: RotorParams, omega: float, theta: float) -> float:
    """Equilibrium flap angle for a constant feathering angle."""
    _, stiff, force = flap_coefficients(params, omega)
    return force * theta / stiff


def flap_acceleration(state: FlapState, params: RotorParams, theta: float) -> float:
    if not state.omega > 0:
        raise InvalidState("flap dynamics need omega > 0")
    damp, stiff, force = flap_coefficients(params, state.omega)
    return force * theta - damp * state.beta_dot - stiff * state.beta


def check_resolution(dt: float, omega: float) -> None:
    if not dt > 0:
        raise StepTooLarge(f"dt must be > 0, got {dt!r}")
    if dt * omega >= MAX_AZIMUTH_STEP:
        raise StepTooLarge(
            f"dt*omega = {dt * omega:.4g} rad per step; must stay below {MAX_AZIMUTH_STEP}")


def integrate_flap(state: FlapState, params: RotorParams, cmd: CyclicCommand,
                   dt: float, steps: int) -> list[FlapState]:
    """RK4-integrate one blade for `steps` steps at constant rotor speed.

    Azimuth is carried unwrapped inside the integrator and wrapped on output,
    so the feathering input stays smooth across the 2*pi seam.
    """
    omega = state.omega
    if not omega > 0:
        raise InvalidState("flap dynamics need omega > 0")
    check_resolution(dt, omega)
    damp, stiff, force = flap_coefficients(params, omega)
    th0, dp, dq = cmd.collective_theta0, cmd.delta_p, cmd.delta_q

    def f(beta, rate, psi):
        theta = th0 + dp * math.sin(psi) + dq * math.cos(psi)
        return rate, force * theta - damp * rate - stiff * beta

    b, bd, psi0 = state.beta, state.beta_dot, state.psi
    out = [state]
    h2 = 0.5 * dt
    for k in range(steps):
        psi = psi0 + omega * k * dt
        k1b, k1r = f(b, bd, psi)
        k2b, k2r = f(b + h2 * k1b, bd + h2 * k1r, psi + omega * h2)
        k3b, k3r = f(b + h2 * k2b, bd + h2 * k2r, psi + omega * h2)
        k4b, k4r = f(b + dt * k3b, bd + dt * k3r, psi + omega * dt)
        b += dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b)
        bd += dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
        out.append(FlapState(b, bd, psi0 + omega * (k + 1) * dt, omega))
    return out


def flap_energy(state: FlapState, params: RotorParams) -> float:
    """0.5 beta'^2 + 0.5 (w^2 + K/I) beta^2, a Lyapunov function of the unforced flap."""
    _, stiff, _ = flap_coefficients(params, state.omega)
    return 0.5 * state.beta_dot**2 + 0.5 * stiff * state.beta**2


def blade_azimuths(psi: float, n_blades: int) -> list[float]:
    return [wrap_azimuth(psi + TWO_PI * k / n_blades) for k in range(n_blades)]


def tip_path_plane(psi: Sequence[float], beta: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares first-harmonic fit beta ~ b0 + b1c cos(psi) + b1s sin(psi).

    Pass one blade's samples over the most recent revolution. Returns
    (coning, longitudinal tilt b1c, lateral tilt b1s) in rad.
    """
    psi = np.asarray(psi, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if psi.size < 3:
        raise InvalidState("need at least three samples for a first-harmonic fit")
    X = np.column_stack([np.ones_like(psi), np.cos(psi), np.sin(psi)])
    coef, *_ = np.linalg.lstsq(X, beta, rcond=None)
    return float(coef[0]), float(coef[1]), float(coef[2])


def write_flap_csv(path, trajectory: Iterable[FlapState], cmd: CyclicCommand, dt: float) -> None:
    write_csv(path, ["t", "psi", "beta", "beta_dot", "theta"],
              ([k * dt, s.psi, s.beta, s.beta_dot, feathering_angle(cmd, s.psi)]
               for k, s in enumerate(trajectory)))


__all__ = [
    "RotorParams", "FlapState", "CyclicCommand", "lock_number", "feathering_angle",
    "flap_acceleration", "integrate_flap", "steady_flap", "natural_frequency",
    "flap_energy", "tip_path_plane", "blade_azimuths", "write_flap_csv",
]
