"""Closed-loop rate-command simulation on the identified linear rate model.

The plant is p_dot = f_p(delta_x, delta_y, p, q), q_dot = f_q(...) without
the trim offset, optionally behind a first-order actuator lag.  The
controller samples filtered rates at a fixed loop rate and holds its
cyclic output until the next sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .control import RateModel, rate_control
from .csvutil import write_csv
from .errors import InvalidParams, NonFiniteState
from .sysid import SecondOrderLowPass

FULL_SCALE = 9600.0


@dataclass
class ClosedLoopTrace:
    t: np.ndarray
    p: np.ndarray
    q: np.ndarray
    p_ref: np.ndarray
    q_ref: np.ndarray
    delta_x: np.ndarray
    delta_y: np.ndarray
    meta: dict = field(default_factory=dict)

    def rms(self, name: str) -> float:
        x = getattr(self, name)
        return float(math.sqrt(np.mean(x * x)))

    def cross_axis_rms(self) -> float:
        return self.rms("p" if self.meta.get("axis", "pitch") == "pitch" else "q")

    def write_csv(self, path) -> None:
        write_csv(path, ["t", "p", "q", "p_ref", "q_ref", "delta_x", "delta_y"],
                  zip(self.t, self.p, self.q, self.p_ref, self.q_ref, self.delta_x, self.delta_y))


def _plant(model: RateModel, lag: float):
    fp, fq = model.fp, model.fq

    def f(x, ux, uy):
        p, q, ax, ay = x
        if lag > 0:
            dx, dy = ax, ay
            dax, day = (ux - ax) / lag, (uy - ay) / lag
        else:
            dx, dy = ux, uy
            dax = day = 0.0
        return np.array([fp.dx * dx + fp.dy * dy + fp.p * p + fp.q * q,
                         fq.dx * dx + fq.dy * dy + fq.p * p + fq.q * q,
                         dax, day])
    return f


def rate_doublet(model: RateModel, axis: str = "pitch", amplitude: float = 0.5,
                 duration: float = 2.0, tail: float = 2.0, loop_hz: float = 512.0,
                 substeps: int = 4, filter_cutoff: float | None = 25.0,
                 actuator_lag: float = 0.0, limit: float = FULL_SCALE,
                 sensor_noise: float = 0.0, seed: int = 0) -> ClosedLoopTrace:
    """Fly a rate-command doublet (rad/s) on one axis and record the response.

    The reference is +amplitude for duration/2, -amplitude for duration/2,
    then zero for `tail` seconds.  Cyclic outputs saturate at +-limit.
    `sensor_noise` (rad/s, 1 sigma) is added to the measured rates from a
    generator seeded with `seed`.
    """
    if axis not in ("pitch", "roll"):
        raise InvalidParams(f"axis must be 'pitch' or 'roll', got {axis!r}")
    if not (loop_hz > 0 and duration > 0 and tail >= 0 and substeps >= 1):
        raise InvalidParams("loop_hz, duration must be > 0; tail >= 0; substeps >= 1")
    if actuator_lag < 0:
        raise InvalidParams("actuator_lag must be >= 0")
    dt = 1.0 / loop_hz
    h = dt / substeps
    n = int(round((duration + tail) * loop_hz))
    half = int(round(0.5 * duration * loop_hz))
    f = _plant(model, actuator_lag)
    filt_p = filt_q = None
    if filter_cutoff is not None:
        filt_p = SecondOrderLowPass(filter_cutoff, dt)
        filt_q = SecondOrderLowPass(filter_cutoff, dt)

    rng = np.random.default_rng(seed) if sensor_noise > 0 else None
    x = np.zeros(4)
    out = np.zeros((n + 1, 7))
    for k in range(n):
        ref = amplitude if k < half else (-amplitude if k < 2 * half else 0.0)
        p_ref, q_ref = (0.0, ref) if axis == "pitch" else (ref, 0.0)
        pm, qm = x[0], x[1]
        if rng is not None:
            e = sensor_noise * rng.standard_normal(2)
            pm, qm = pm + e[0], qm + e[1]
        if filt_p is not None:
            pm, qm = filt_p(pm), filt_q(qm)
        ux, uy = rate_control(p_ref - pm, q_ref - qm, pm, qm, model)
        ux = min(max(ux, -limit), limit)
        uy = min(max(uy, -limit), limit)
        out[k, 3:] = (p_ref, q_ref, ux, uy)
        for _ in range(substeps):
            k1 = f(x, ux, uy)
            k2 = f(x + 0.5 * h * k1, ux, uy)
            k3 = f(x + 0.5 * h * k2, ux, uy)
            k4 = f(x + h * k3, ux, uy)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState("closed-loop state became non-finite")
        out[k + 1, 0:3] = ((k + 1) * dt, x[0], x[1])
    out[n, 3:] = out[n - 1, 3:] if n else 0.0
    return ClosedLoopTrace(out[:, 0], out[:, 1], out[:, 2], out[:, 3], out[:, 4],
                           out[:, 5], out[:, 6],
                           meta={"axis": axis, "K_c": model.K_c, "loop_hz": loop_hz,
                                 "amplitude": amplitude})


def decoupling_ratio(model: RateModel, K_c: float = 0.5, **kw) -> tuple[float, float, float]:
    """(rms at K_c, rms at K_c=0, ratio) of the cross-axis rate during a pitch doublet."""
    on = rate_doublet(model.with_gains(K_c=K_c), **kw).cross_axis_rms()
    off = rate_doublet(model.with_gains(K_c=0.0), **kw).cross_axis_rms()
    return on, off, on / off if off > 0 else math.inf
