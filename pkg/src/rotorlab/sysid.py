"""Identification pipeline: rate filtering and differentiation, the linear
rate-model fit, the planar power fit and the pole drag fit."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.signal import lfilter, lfilter_zi

from .control import AxisCoefficients, RateModel
from .errors import (DegenerateSamples, NoValidSamples, RankDeficientLog, TooFewFrames,
                     UnstableConfig)

# condition number above which the normal equations are abandoned
COND_LIMIT = 1e8


@dataclass(frozen=True)
class LogFrame:
    t: float
    p: float
    q: float
    delta_x: float
    delta_y: float
    rpm: float = float("nan")
    collective_cmd: float = float("nan")
    throttle: float = float("nan")
    current: float = float("nan")
    voltage: float = float("nan")
    airspeed: float = float("nan")


LOG_FIELDS = tuple(f.name for f in fields(LogFrame))


class FlightLog:
    """Columnar view of a LogFrame series; attribute per field plus optional
    measured accelerations `p_dot`, `q_dot`."""

    def __init__(self, columns: dict, p_dot=None, q_dot=None):
        n = None
        for name in LOG_FIELDS:
            col = np.asarray(columns.get(name, np.full(n or 0, np.nan)), dtype=float)
            if n is None:
                n = col.size
            elif col.size != n:
                raise ValueError(f"column {name} has {col.size} rows, expected {n}")
            setattr(self, name, col)
        self.p_dot = None if p_dot is None else np.asarray(p_dot, dtype=float)
        self.q_dot = None if q_dot is None else np.asarray(q_dot, dtype=float)

    @classmethod
    def from_frames(cls, frames: Iterable[LogFrame], p_dot=None, q_dot=None) -> "FlightLog":
        frames = list(frames)
        cols = {name: [getattr(f, name) for f in frames] for name in LOG_FIELDS}
        return cls(cols, p_dot, q_dot)

    def __len__(self):
        return self.t.size

    def frames(self) -> list[LogFrame]:
        return [LogFrame(*(float(getattr(self, n)[i]) for n in LOG_FIELDS)) for i in range(len(self))]

    @property
    def dt(self) -> float:
        return float(np.median(np.diff(self.t)))


def as_log(log) -> FlightLog:
    return log if isinstance(log, FlightLog) else FlightLog.from_frames(log)


# --- filtering -------------------------------------------------------------

def lowpass_coefficients(cutoff: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Biquad for the critically damped low-pass w^2/(s+w)^2, Tustin with
    pre-warping at the cutoff.  Both poles sit at z = (k-w)/(k+w)."""
    if not (dt > 0 and cutoff > 0):
        raise UnstableConfig("cutoff and dt must be positive")
    if cutoff * dt >= 1.0:
        raise UnstableConfig(f"cutoff*dt = {cutoff * dt:.3g} must be < 1")
    k = 2.0 / dt
    w = k * math.tan(0.5 * cutoff * dt)
    pole = (k - w) / (k + w)
    g = (w / (k + w)) ** 2
    b = np.array([g, 2.0 * g, g])
    a = np.array([1.0, -2.0 * pole, pole * pole])
    return b, a


def lowpass_gain(cutoff: float, dt: float, freq: float) -> float:
    """|H(e^{j freq dt})| of the discrete filter (freq in rad/s)."""
    b, a = lowpass_coefficients(cutoff, dt)
    z = np.exp(-1j * freq * dt * np.arange(3))
    return float(abs(np.dot(b, z) / np.dot(a, z)))


class SecondOrderLowPass:
    """Sample-by-sample version of filter_second_order."""

    def __init__(self, cutoff: float, dt: float):
        self.b, self.a = lowpass_coefficients(cutoff, dt)
        self._x1 = self._x2 = self._y1 = self._y2 = None

    def reset(self, value: float = 0.0):
        self._x1 = self._x2 = self._y1 = self._y2 = float(value)

    def __call__(self, x: float) -> float:
        if self._x1 is None:
            self.reset(x)
        b, a = self.b, self.a
        y = b[0] * x + b[1] * self._x1 + b[2] * self._x2 - a[1] * self._y1 - a[2] * self._y2
        self._x2, self._x1 = self._x1, x
        self._y2, self._y1 = self._y1, y
        return y


def filter_second_order(signal, cutoff: float, dt: float) -> np.ndarray:
    """Causal critically damped second-order low-pass with unit DC gain.

    The filter starts in steady state at the first sample, so a log that
    begins at rest shows no start-up transient.
    """
    x = np.asarray(signal, dtype=float)
    b, a = lowpass_coefficients(cutoff, dt)
    if x.size == 0:
        return x.copy()
    # steady-state initial conditions for input x[0]
    zi = lfilter_zi(b, a) * x[0]
    y, _ = lfilter(b, a, x, zi=zi)
    return y


def derive_rates(log, cutoff: float = 15.0) -> tuple[np.ndarray, np.ndarray]:
    """Filtered angular accelerations (p_dot, q_dot) by central differences."""
    log = as_log(log)
    if len(log) < 3:
        raise TooFewFrames("need at least 3 frames to differentiate")
    dt = log.dt
    p = filter_second_order(log.p, cutoff, dt)
    q = filter_second_order(log.q, cutoff, dt)
    return np.gradient(p, log.t), np.gradient(q, log.t)


# --- least squares ---------------------------------------------------------

def ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least squares via column-scaled normal equations; pivoted QR when the
    scaled Gram matrix has condition number above COND_LIMIT."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = X.shape
    if n < m:
        raise RankDeficientLog(f"{n} samples cannot determine {m} coefficients")
    scale = np.linalg.norm(X, axis=0)
    if np.any(scale == 0):
        raise RankDeficientLog("regressor column is identically zero")
    Xs = X / scale
    gram = Xs.T @ Xs
    if np.linalg.cond(gram) <= COND_LIMIT:
        coef = np.linalg.solve(gram, Xs.T @ y)
    else:
        Q, R, piv = scipy.linalg.qr(Xs, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        rank = int(np.sum(diag > diag[0] * n * np.finfo(float).eps * 1e3))
        if rank < m:
            raise RankDeficientLog(f"regressor matrix has numerical rank {rank} < {m}")
        sol = scipy.linalg.solve_triangular(R, Q.T @ y)
        coef = np.empty(m)
        coef[piv] = sol
    return coef / scale


@dataclass(frozen=True)
class RateFit:
    fp: AxisCoefficients
    fq: AxisCoefficients
    residual_rms: tuple
    samples: int

    def model(self, **gains) -> RateModel:
        return RateModel(self.fp, self.fq, **gains)


def rate_regressors(log: FlightLog) -> np.ndarray:
    return np.column_stack([np.ones(len(log)), log.delta_x, log.delta_y, log.p, log.q])


def fit_rate_model(log, accel=None, cutoff: float | None = 15.0) -> RateFit:
    """Fit p_dot = f_p(1, dx, dy, p, q) and q_dot = f_q(...) by OLS.

    Accelerations come from `accel`, else from the log's p_dot/q_dot columns,
    else from derive_rates.  When accelerations are derived, every regressor
    is passed through the same filter so the linear relation is preserved,
    and the first 5/cutoff seconds (filter warm-up) are left out.
    """
    log = as_log(log)
    if len(log) < 5:
        raise TooFewFrames("need at least 5 frames to fit 5 coefficients per axis")
    if accel is None and log.p_dot is not None and log.q_dot is not None:
        accel = (log.p_dot, log.q_dot)
    if accel is None:
        pd, qd = derive_rates(log, cutoff)
        dt = log.dt
        X = rate_regressors(log)
        X[:, 1:] = np.column_stack([filter_second_order(X[:, j], cutoff, dt) for j in range(1, 5)])
        # drop the filter warm-up, where differentiated and filtered series disagree
        skip = int(math.ceil(5.0 / (cutoff * dt)))
        if len(log) - skip >= 10:
            pd, qd, X = pd[skip:], qd[skip:], X[skip:]
    else:
        pd, qd = (np.asarray(a, dtype=float) for a in accel)
        X = rate_regressors(log)
    cp = ols(X, pd)
    cq = ols(X, qd)
    rp = pd - X @ cp
    rq = qd - X @ cq
    return RateFit(AxisCoefficients(*map(float, cp)), AxisCoefficients(*map(float, cq)),
                   (float(np.sqrt(np.mean(rp**2))), float(np.sqrt(np.mean(rq**2)))), len(pd))


def synthetic_rate_log(model: RateModel, duration: float = 60.0, rate_hz: float = 100.0,
                       seed: int = 0, noise: float = 0.0, amplitude: float = 2000.0,
                       substeps: int = 4) -> FlightLog:
    """Open-loop log generated by the linear rate model itself.

    Cyclic inputs are seeded multisines; p, q are RK4-integrated between
    samples and the exact model accelerations are stored as p_dot/q_dot.
    `noise` adds white noise with that fraction of each axis's RMS
    acceleration.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate_hz))
    dt = 1.0 / rate_hz
    freqs = rng.uniform(0.2, 3.0, size=(2, 8)) * 2 * np.pi
    phases = rng.uniform(0.0, 2 * np.pi, size=(2, 8))
    weights = rng.uniform(0.5, 1.0, size=(2, 8))
    weights *= amplitude / weights.sum(axis=1, keepdims=True) * 2.0

    def inputs(t):
        return (weights * np.sin(freqs * t + phases)).sum(axis=1)

    fp, fq = model.fp, model.fq

    def accel(p, q, dx, dy):
        return (fp.offset + fp.dx * dx + fp.dy * dy + fp.p * p + fp.q * q,
                fq.offset + fq.dx * dx + fq.dy * dy + fq.p * p + fq.q * q)

    t = np.arange(n) * dt
    P = np.empty(n)
    Q = np.empty(n)
    U = np.empty((n, 2))
    p = q = 0.0
    h = dt / substeps
    for k in range(n):
        P[k], Q[k] = p, q
        U[k] = inputs(t[k])
        for j in range(substeps):
            ts = t[k] + j * h
            u1, u2, u3 = inputs(ts), inputs(ts + 0.5 * h), inputs(ts + h)
            a1 = accel(p, q, *u1)
            a2 = accel(p + 0.5 * h * a1[0], q + 0.5 * h * a1[1], *u2)
            a3 = accel(p + 0.5 * h * a2[0], q + 0.5 * h * a2[1], *u2)
            a4 = accel(p + h * a3[0], q + h * a3[1], *u3)
            p += h / 6.0 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0])
            q += h / 6.0 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1])
    pd, qd = accel(P, Q, U[:, 0], U[:, 1])
    if noise > 0:
        pd = pd + rng.normal(0.0, noise * np.sqrt(np.mean(pd**2)), n)
        qd = qd + rng.normal(0.0, noise * np.sqrt(np.mean(qd**2)), n)
    cols = {"t": t, "p": P, "q": Q, "delta_x": U[:, 0], "delta_y": U[:, 1]}
    return FlightLog(cols, pd, qd)


# --- windtunnel fits -------------------------------------------------------

@dataclass(frozen=True)
class PlanarFit:
    a0: float
    a_pitch: float
    a_throttle: float
    residual_rms: float

    def predict(self, pitch, throttle):
        return self.a0 + self.a_pitch * np.asarray(pitch) + self.a_throttle * np.asarray(throttle)

    def throttle_for(self, power, pitch):
        """Throttle on the iso-power line through (pitch, power)."""
        if self.a_throttle == 0:
            raise DegenerateSamples("plane has no throttle dependence")
        return (np.asarray(power) - self.a0 - self.a_pitch * np.asarray(pitch)) / self.a_throttle


def fit_planar_power(samples: Sequence[tuple]) -> PlanarFit:
    """Least-squares plane P = a0 + a_pitch*pitch + a_throttle*throttle."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 3:
        raise DegenerateSamples("need at least three (pitch, throttle, power) samples")
    X = np.column_stack([np.ones(len(arr)), arr[:, 0], arr[:, 1]])
    if np.linalg.matrix_rank(X) < 3:
        raise DegenerateSamples("samples are collinear in (pitch, throttle)")
    coef = ols(X, arr[:, 2])
    res = arr[:, 2] - X @ coef
    return PlanarFit(float(coef[0]), float(coef[1]), float(coef[2]),
                     float(np.sqrt(np.mean(res**2))))


def fit_pole_drag(samples: Sequence[tuple], rho: float = 1.225) -> float:
    """k in D = (rho/2) V^2 k, least squares over samples with V > 0."""
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    arr = arr[arr[:, 0] > 0]
    if arr.size == 0:
        raise NoValidSamples("no sample with positive airspeed")
    x = 0.5 * rho * arr[:, 0] ** 2
    return float(np.dot(x, arr[:, 1]) / np.dot(x, x))


def pole_drag(V, k: float = 0.195, rho: float = 1.225):
    return 0.5 * rho * np.asarray(V, dtype=float) ** 2 * k
