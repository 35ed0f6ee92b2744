"""Swash-plate servo mixing, collective linkage map and the decoupling rate
controller.

Cyclic commands (delta_p, delta_q) in the mixing equations are the same
quantities as (delta_x, delta_y) in the identified rate model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidParams, OutOfRange, SingularG

SQRT2_2 = math.sqrt(2.0) / 2.0
DET_GUARD = 1e-12


class AxisCoefficients(NamedTuple):
    """One axis of the rate model: acc = offset + dx*delta_x + dy*delta_y + p*p + q*q."""
    offset: float
    dx: float
    dy: float
    p: float
    q: float


# Identified on the real vehicle at 1650 rpm; commands in autopilot units.
IDENTIFIED_FP = AxisCoefficients(-2.4661, 0.0032, 0.0011, -0.5703, -3.4308)
IDENTIFIED_FQ = AxisCoefficients(-2.8847, -0.0044, 0.0073, 7.4479, -3.4487)


@dataclass(frozen=True)
class RateModel:
    fp: AxisCoefficients = IDENTIFIED_FP
    fq: AxisCoefficients = IDENTIFIED_FQ
    K_c: float = 0.5
    K_p: float = 10.0
    K_q: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "fp", AxisCoefficients(*map(float, self.fp)))
        object.__setattr__(self, "fq", AxisCoefficients(*map(float, self.fq)))
        if not 0.0 <= self.K_c <= 1.0:
            raise InvalidParams(f"K_c must lie in [0, 1], got {self.K_c}")
        if abs(self.det_G) <= DET_GUARD:
            raise SingularG(f"|det G| = {abs(self.det_G):.3g} <= {DET_GUARD}")

    @classmethod
    def identified(cls, **kw) -> "RateModel":
        return cls(IDENTIFIED_FP, IDENTIFIED_FQ, **kw)

    @property
    def G(self) -> np.ndarray:
        return np.array([[self.fp.dx, self.fp.dy], [self.fq.dx, self.fq.dy]])

    @property
    def det_G(self) -> float:
        return self.fp.dx * self.fq.dy - self.fp.dy * self.fq.dx

    @property
    def coupling_q_to_pdot(self) -> float:
        return self.fp.q

    @property
    def coupling_p_to_qdot(self) -> float:
        return self.fq.p

    def with_gains(self, **kw) -> "RateModel":
        args = dict(fp=self.fp, fq=self.fq, K_c=self.K_c, K_p=self.K_p, K_q=self.K_q)
        args.update(kw)
        return RateModel(**args)

    def accelerations(self, p, q, dx, dy, offset: bool = True):
        fp, fq = self.fp, self.fq
        o = 1.0 if offset else 0.0
        return (o * fp.offset + fp.dx * dx + fp.dy * dy + fp.p * p + fp.q * q,
                o * fq.offset + fq.dx * dx + fq.dy * dy + fq.p * p + fq.q * q)


def solve_G(model: RateModel, v1: float, v2: float) -> tuple[float, float]:
    """G^-1 [v1, v2] by the closed-form 2x2 inverse."""
    det = model.det_G
    if abs(det) <= DET_GUARD:
        raise SingularG(f"|det G| = {abs(det):.3g} <= {DET_GUARD}")
    fp, fq = model.fp, model.fq
    return (fq.dy * v1 - fp.dy * v2) / det, (-fq.dx * v1 + fp.dx * v2) / det


def rate_control(p_err: float, q_err: float, p: float, q: float,
                 model: RateModel) -> tuple[float, float]:
    """Decoupling rate controller.

    Proportional rate-error feedback plus a K_c-weighted cancellation of the
    identified rate cross-coupling (q into p_dot, p into q_dot), mapped to
    cyclic commands through G^-1.  K_c = 0 is a plain proportional controller
    G^-1 diag(K_p, K_q) err; K_c = 1 removes the modelled coupling entirely.
    """
    v1 = model.K_p * p_err - model.K_c * model.coupling_q_to_pdot * q
    v2 = model.K_q * q_err - model.K_c * model.coupling_p_to_qdot * p
    return solve_G(model, v1, v2)


# --- swash-plate -----------------------------------------------------------

def mix_servos(delta_p: float, delta_q: float) -> tuple[float, float, float]:
    return (SQRT2_2 * delta_p - 0.5 * delta_q,
            -SQRT2_2 * delta_p - 0.5 * delta_q,
            delta_q)




class Unmixed(NamedTuple):
    delta_p: float
    delta_q: float
    residual: float

    @property
    def consistent(self) -> bool:
        return self.residual <= 1e-9


def unmix_servos(s1: float, s2: float, s3: float) -> Unmixed:
    """Least-squares inverse of mix_servos.

    The mixing columns are orthogonal, so the normal equations are diagonal:
    delta_p = (s1 - s2)/sqrt(2), delta_q = (2*s3 - s1 - s2)/3.  The residual
    is the Euclidean distance from (s1, s2, s3) to the mixing image; it is
    zero exactly when s1 + s2 + s3 = 0 and s1 + s2 = -s3.
    """
    dp = (s1 - s2) / math.sqrt(2.0)
    dq = (2.0 * s3 - s1 - s2) / 3.0
    m = mix_servos(dp, dq)
    res = math.sqrt((s1 - m[0]) ** 2 + (s2 - m[1]) ** 2 + (s3 - m[2]) ** 2)
    return Unmixed(dp, dq, res)


class CollectiveLinkage:
    """Servo command (normalized, default range [0, 1]) to collective pitch in degrees.

    Either a polynomial in the command (coefficients lowest order first) or
    a monotone lookup table of (command, pitch) points.  The default maps
    the range linearly onto [-40, 40] deg and is a placeholder, not a
    measured linkage curve.
    """

    def __init__(self, poly: Sequence[float] | None = None,
                 table: Sequence[tuple[float, float]] | None = None,
                 cmd_range: tuple[float, float] = (0.0, 1.0)):
        if poly is not None and table is not None:
            raise InvalidParams("give either poly or table, not both")
        lo, hi = cmd_range
        if not hi > lo:
            raise InvalidParams("cmd_range must be increasing")
        self.cmd_range = (float(lo), float(hi))
        self.table = None
        self.poly = None
        if table is not None:
            pts = np.asarray(table, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
                raise InvalidParams("table needs at least two (command, pitch) points")
            if np.any(np.diff(pts[:, 0]) <= 0) or np.any(np.diff(pts[:, 1]) <= 0):
                raise InvalidParams("linkage table must be strictly increasing in both columns")
            self.table = pts
            self.cmd_range = (float(pts[0, 0]), float(pts[-1, 0]))
        else:
            if poly is None:
                poly = (-40.0 - 80.0 * lo / (hi - lo), 80.0 / (hi - lo))
            self.poly = np.asarray(poly, dtype=float)
            grid = np.linspace(lo, hi, 257)
            if np.any(np.diff(np.polynomial.polynomial.polyval(grid, self.poly)) <= 0):
                raise InvalidParams("linkage polynomial is not increasing over the command range")

    def __call__(self, servo_cmd: float) -> float:
        lo, hi = self.cmd_range
        if not lo <= servo_cmd <= hi:
            raise OutOfRange(f"servo command {servo_cmd} outside [{lo}, {hi}]")
        if self.table is not None:
            return float(np.interp(servo_cmd, self.table[:, 0], self.table[:, 1]))
        return float(np.polynomial.polynomial.polyval(servo_cmd, self.poly))


def collective_linkage(servo_cmd: float, linkage: CollectiveLinkage | None = None) -> float:
    return (linkage or CollectiveLinkage())(servo_cmd)
