import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotorlab.aero import (AirframeAero, drag_polar, min_power_speed, min_power_speed_analytic,
                           power_curve, required_power, stall_speed, write_power_curve_csv)
from rotorlab.errors import BelowStallSpeed, BeyondStallClamp, InvalidParams

AERO = AirframeAero()


def test_defaults():
    assert AERO.cd0_protrusions == 0.012
    assert AERO.aspect_ratio == pytest.approx(4.78, abs=5e-3)
    with pytest.raises(InvalidParams):
        AirframeAero(oswald_e=0)


def test_zero_lift_drag():
    assert drag_polar(0.0) == pytest.approx(AERO.cd0_clean + 0.012)


def test_induced_drag_hand_value():
    # 0.25 / (pi * 4.78 * 0.8)
    induced = drag_polar(0.5) - drag_polar(0.0)
    assert induced == pytest.approx(0.25 / (math.pi * 4.78 * 0.8), rel=2e-3)
    assert induced == pytest.approx(0.0208, abs=1e-4)


@given(st.floats(-0.6, 0.6))
def test_doubling_cl_quadruples_induced(cl):
    i1 = drag_polar(cl) - AERO.cd0
    i2 = drag_polar(2 * cl) - AERO.cd0
    assert i2 == pytest.approx(4 * i1, rel=1e-9, abs=1e-15)


def test_stall_clamp():
    with pytest.raises(BeyondStallClamp):
        drag_polar(1.25)


def test_below_stall_speed():
    with pytest.raises(BelowStallSpeed):
        required_power(stall_speed(4.5, 1.225) * 0.99, 4.5)


def test_required_power_formula():
    V, m, rho = 21.5, 4.5, 1.225
    cl = m * 9.81 / (0.5 * rho * V * V * 0.496)
    cd = AERO.cd0 + cl * cl / (math.pi * AERO.aspect_ratio * 0.8)
    assert required_power(V, m, rho) == pytest.approx(0.5 * rho * V**3 * 0.496 * cd)


def test_cruise_power_within_factor_two_of_electrical_estimate():
    # 280 W electrical in cruise with an assumed drivetrain efficiency of 0.55
    shaft = 280.0 * 0.55
    p = required_power(21.5, 4.5)
    assert shaft / 2 <= p <= shaft * 2


def test_high_speed_asymptote():
    V = 200.0
    parasite = 0.5 * 1.225 * V**3 * 0.496 * AERO.cd0
    assert required_power(V, 4.5) == pytest.approx(parasite, rel=1e-3)


@given(st.floats(0, 1), st.floats(0, 1))
def test_monotone_past_minimum(a, b):
    vmp = min_power_speed(4.5)
    v1, v2 = sorted((vmp + 0.5 + 30 * a, vmp + 0.5 + 30 * b))
    if v2 - v1 > 1e-6:
        assert required_power(v1, 4.5) < required_power(v2, 4.5)


def test_golden_section_minimum():
    aero = AirframeAero(cl_max=2.0)  # keep the optimum off the stall boundary
    v = min_power_speed(4.5, aero=aero)
    assert v == pytest.approx(min_power_speed_analytic(4.5, aero=aero), abs=0.1)
    grid = np.linspace(stall_speed(4.5, 1.225, aero) * 1.001, 40, 4000)
    p = [required_power(x, 4.5, aero=aero) for x in grid]
    assert v == pytest.approx(grid[int(np.argmin(p))], abs=0.1)


@given(st.floats(0.5, 4.0))
def test_min_power_speed_scales_with_sqrt_mass(s):
    aero = AirframeAero(cl_max=3.0)
    a = min_power_speed_analytic(4.5, aero=aero)
    b = min_power_speed_analytic(4.5 * s, aero=aero)
    assert b == pytest.approx(a * math.sqrt(s), rel=1e-12)
    assert min_power_speed(4.5 * s, aero=aero, xtol=1e-4) == pytest.approx(
        min_power_speed(4.5, aero=aero, xtol=1e-4) * math.sqrt(s), abs=2e-3)


def test_power_curve_csv(tmp_path):
    rows = power_curve([15, 20, 25], 4.5)
    write_power_curve_csv(tmp_path / "pc.csv", rows)
    lines = (tmp_path / "pc.csv").read_text().splitlines()
    assert lines[0] == "V,cl,cd,P" and len(lines) == 4
