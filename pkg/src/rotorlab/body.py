"""Rotor flapping coupled to a rigid fuselage.

Axes are body-fixed: x forward, y right, z down; the shaft points along -z.
Blade k sits at azimuth psi_k = psi + 2*pi*k/N with unit span vector
(sin psi_k, cos psi_k, 0), so positive delta_q tilts the disc nose-up and
positive delta_p rolls right.

Each blade obeys the flap equation written relative to the shaft, with the
extra forcing a rotating hub produces (gyroscopic 2*w*(p sin + q cos),
hub angular acceleration, and the aerodynamic damping seen by a blade whose
inertial flap rate is beta' + (q sin psi - p cos psi)).  Because the cyclic
is set relative to the body, the disc follows the fuselage through the
swash-plate even with K = 0.

The fuselage receives, per blade, (K + T*h/N) * beta_k about the blade's flap
axis (-cos psi_k, sin psi_k, 0): the hinge spring plus the tilted thrust
acting at hub height h above the c.g.  Averaged over a revolution this is the
tip-path-plane tilt times (N/2)(K + T h / N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .csvutil import write_csv
from .errors import InvalidParams, InvalidState, NonFiniteState
from .rotor import (CyclicCommand, FlapState, RotorParams, check_resolution, lock_number,
                    wrap_azimuth, MAX_AZIMUTH_STEP)

GRAVITY = 9.81


@dataclass(frozen=True)
class BodyParams:
    Ixx: float = 0.10
    Iyy: float = 0.45
    Izz: float = 0.50
    mass_total: float = 4.5
    rotor_offset_z: float = 0.10

    def __post_init__(self):
        for name in ("Ixx", "Iyy", "Izz", "mass_total"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be > 0, got {v!r}")
        if not math.isfinite(self.rotor_offset_z):
            raise InvalidParams("rotor_offset_z must be finite")

    @property
    def hover_thrust(self) -> float:
        return self.mass_total * GRAVITY


@dataclass(frozen=True)
class CoupledState:
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0
    quat: tuple = (1.0, 0.0, 0.0, 0.0)
    blades: tuple = ()
    omega: float = 0.0
    t: float = 0.0
    actuator: tuple = (0.0, 0.0)

    def __post_init__(self):
        n = math.sqrt(sum(c * c for c in self.quat))
        if not n > 0:
            raise InvalidState("attitude quaternion has zero norm")
        object.__setattr__(self, "quat", tuple(float(c) / n for c in self.quat))
        if self.omega < 0:
            raise InvalidState("omega must be >= 0")

    @classmethod
    def at_rest(cls, rotor: RotorParams, omega: float | None = None, psi: float = 0.0):
        omega = rotor.omega_nominal if omega is None else omega
        n = rotor.n_blades
        blades = tuple(FlapState(0.0, 0.0, psi + 2 * math.pi * k / n, omega) for k in range(n))
        return cls(blades=blades, omega=omega)

    @property
    def psi(self) -> float:
        return self.blades[0].psi if self.blades else 0.0

    def rotational_energy(self, body: BodyParams) -> float:
        return 0.5 * (body.Ixx * self.p**2 + body.Iyy * self.q**2 + body.Izz * self.r**2)


# state vector layout: p q r | qw qx qy qz | (beta, beta_dot) * N | psi | act_p act_q
_NQ = 7


class CoupledModel:
    """Right-hand side and RK4 stepping of the rotor/fuselage system.

    `hub_coupling=False` disconnects the rotor from the body (torque-free
    fuselage); `actuator_lag` > 0 puts a first-order lag (s) between the
    commanded and applied cyclic.
    """

    def __init__(self, body: BodyParams, rotor: RotorParams, omega: float | None = None,
                 actuator_lag: float = 0.0, hub_coupling: bool = True):
        self.body = body
        self.rotor = rotor
        self.omega = rotor.omega_nominal if omega is None else float(omega)
        if not self.omega > 0:
            raise InvalidState("coupled model needs omega > 0")
        if actuator_lag < 0:
            raise InvalidParams("actuator_lag must be >= 0")
        self.actuator_lag = float(actuator_lag)
        self.n = rotor.n_blades
        g8 = lock_number(rotor) / 8.0
        w = self.omega
        self._damp = g8 * w
        self._force = g8 * w * w
        self._stiff = w * w + rotor.hinge_spring / rotor.flap_inertia
        k_hub = rotor.hinge_spring + body.hover_thrust * body.rotor_offset_z / self.n
        self._k_hub = k_hub if hub_coupling else 0.0
        self._offsets = [2 * math.pi * k / self.n for k in range(self.n)]
        self.size = _NQ + 2 * self.n + 3

    def pack(self, s: CoupledState) -> np.ndarray:
        if len(s.blades) != self.n:
            raise InvalidState(f"state has {len(s.blades)} blades, rotor has {self.n}")
        y = np.empty(self.size)
        y[0:3] = (s.p, s.q, s.r)
        y[3:7] = s.quat
        for k, b in enumerate(s.blades):
            y[_NQ + 2 * k] = b.beta
            y[_NQ + 2 * k + 1] = b.beta_dot
        y[_NQ + 2 * self.n] = s.blades[0].psi
        y[-2:] = s.actuator
        return y

    def unpack(self, y: np.ndarray, t: float) -> CoupledState:
        psi = y[_NQ + 2 * self.n]
        blades = tuple(FlapState(float(y[_NQ + 2 * k]), float(y[_NQ + 2 * k + 1]),
                                 psi + self._offsets[k], self.omega) for k in range(self.n))
        return CoupledState(float(y[0]), float(y[1]), float(y[2]), tuple(float(c) for c in y[3:7]),
                            blades, self.omega, t, (float(y[-2]), float(y[-1])))

    def derivative(self, y, dp_cmd: float, dq_cmd: float, theta0: float) -> np.ndarray:
        b = self.body
        p, q, r = y[0], y[1], y[2]
        qw, qx, qy, qz = y[3], y[4], y[5], y[6]
        n = self.n
        psi = y[_NQ + 2 * n]
        if self.actuator_lag > 0:
            dp, dq = y[-2], y[-1]
        else:
            dp, dq = dp_cmd, dq_cmd

        # hub moment from blade flap
        mx = my = 0.0
        sins = []
        coss = []
        for k in range(n):
            pk = psi + self._offsets[k]
            s, c = math.sin(pk), math.cos(pk)
            sins.append(s)
            coss.append(c)
            beta = y[_NQ + 2 * k]
            mx -= self._k_hub * beta * c
            my += self._k_hub * beta * s
        pdot = (mx - (b.Izz - b.Iyy) * q * r) / b.Ixx
        qdot = (my - (b.Ixx - b.Izz) * p * r) / b.Iyy
        rdot = -(b.Iyy - b.Ixx) * p * q / b.Izz

        dy = np.empty(self.size)
        dy[0], dy[1], dy[2] = pdot, qdot, rdot
        dy[3] = 0.5 * (-qx * p - qy * q - qz * r)
        dy[4] = 0.5 * (qw * p + qy * r - qz * q)
        dy[5] = 0.5 * (qw * q - qx * r + qz * p)
        dy[6] = 0.5 * (qw * r + qx * q - qy * p)

        w = self.omega
        for k in range(n):
            s, c = sins[k], coss[k]
            beta = y[_NQ + 2 * k]
            beta_dot = y[_NQ + 2 * k + 1]
            theta = theta0 + dp * s + dq * c
            inflow_rate = beta_dot - p * c + q * s
            dy[_NQ + 2 * k] = beta_dot
            dy[_NQ + 2 * k + 1] = (self._force * theta - self._damp * inflow_rate
                                   - self._stiff * beta - 2.0 * w * (p * s + q * c)
                                   + pdot * c - qdot * s)
        dy[_NQ + 2 * n] = w
        if self.actuator_lag > 0:
            dy[-2] = (dp_cmd - y[-2]) / self.actuator_lag
            dy[-1] = (dq_cmd - y[-1]) / self.actuator_lag
        else:
            dy[-2] = dy[-1] = 0.0
        return dy

    def rk4(self, y: np.ndarray, cmd: CyclicCommand, dt: float) -> np.ndarray:
        a = (cmd.delta_p, cmd.delta_q, cmd.collective_theta0)
        f = self.derivative
        # overflow is reported below as NonFiniteState, not as warnings
        with np.errstate(all="ignore"):
            k1 = f(y, *a)
            k2 = f(y + 0.5 * dt * k1, *a)
            k3 = f(y + 0.5 * dt * k2, *a)
            k4 = f(y + dt * k3, *a)
            out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(out)):
            raise NonFiniteState("coupled state became non-finite; the configuration is unstable")
        out[3:7] /= np.linalg.norm(out[3:7])
        if self.actuator_lag <= 0:
            out[-2], out[-1] = cmd.delta_p, cmd.delta_q
        return out


def step_coupled(state: CoupledState, body: BodyParams, rotor: RotorParams,
                 cmd: CyclicCommand, dt: float, actuator_lag: float = 0.0) -> CoupledState:
    """Advance the coupled rotor/fuselage state by one RK4 step of length dt."""
    check_resolution(dt, state.omega)
    model = CoupledModel(body, rotor, state.omega, actuator_lag)
    y = model.rk4(model.pack(state), cmd, dt)
    return model.unpack(y, state.t + dt)


def default_step(omega: float, span: float, max_advance: float = 0.15) -> float:
    """Largest dt that divides `span` evenly and keeps omega*dt <= max_advance."""
    if not span > 0:
        raise InvalidParams("span must be > 0")
    n = max(1, math.ceil(span * omega / max_advance))
    return span / n


@dataclass
class RateTrace:
    t: np.ndarray
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    delta_p: np.ndarray
    delta_q: np.ndarray
    meta: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        write_csv(path, ["t", "p", "q", "r", "delta_p", "delta_q"],
                  zip(self.t, self.p, self.q, self.r, self.delta_p, self.delta_q))

    def cross_axis(self, axis: str) -> np.ndarray:
        return self.p if axis == "pitch" else self.q

    def on_axis(self, axis: str) -> np.ndarray:
        return self.q if axis == "pitch" else self.p


def doublet_command(t: float, amplitude: float, duration: float) -> float:
    if t < 0.5 * duration:
        return amplitude
    if t < duration:
        return -amplitude
    return 0.0


def doublet_response(body: BodyParams, rotor: RotorParams, axis: str, amplitude: float,
                     duration: float, dt: float | None = None, tail: float = 0.0,
                     actuator_lag: float = 0.0, psi0: float = 0.0,
                     omega: float | None = None) -> RateTrace:
    """Free-body response to a cyclic doublet on one axis.

    The cyclic is +amplitude for duration/2 then -amplitude for duration/2,
    followed by `tail` seconds of zero input.  Gravity is not modeled.
    """
    if axis not in ("pitch", "roll"):
        raise InvalidParams(f"axis must be 'pitch' or 'roll', got {axis!r}")
    if not duration > 0:
        raise InvalidParams("duration must be > 0")
    omega = rotor.omega_nominal if omega is None else omega
    if dt is None:
        dt = default_step(omega, 0.5 * duration)
    check_resolution(dt, omega)
    model = CoupledModel(body, rotor, omega, actuator_lag)
    y = model.pack(CoupledState.at_rest(rotor, omega, psi0))
    steps = int(round((duration + tail) / dt))
    half = int(round(0.5 * duration / dt))
    rows = np.empty((steps + 1, 6))
    rows[0] = (0.0, y[0], y[1], y[2], 0.0, 0.0)
    for k in range(steps):
        if k < half:
            u = amplitude
        elif k < 2 * half:
            u = -amplitude
        else:
            u = 0.0
        cmd = CyclicCommand(delta_p=u, delta_q=0.0) if axis == "roll" else CyclicCommand(delta_q=u)
        y = model.rk4(y, cmd, dt)
        rows[k + 1] = ((k + 1) * dt, y[0], y[1], y[2], cmd.delta_p, cmd.delta_q)
    # the command column reports what was held over the step ending at t
    return RateTrace(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4], rows[:, 5],
                     meta={"dt": dt, "axis": axis, "amplitude": amplitude,
                           "duration": duration, "omega": omega})


__all__ = ["BodyParams", "CoupledState", "CoupledModel", "step_coupled", "doublet_response",
           "RateTrace", "default_step", "GRAVITY", "MAX_AZIMUTH_STEP", "wrap_azimuth"]
