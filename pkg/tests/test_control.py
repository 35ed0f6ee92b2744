import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotorlab.closedloop import decoupling_ratio, rate_doublet
from rotorlab.control import (IDENTIFIED_FP, IDENTIFIED_FQ, AxisCoefficients, CollectiveLinkage,
                              RateModel, collective_linkage, mix_servos, rate_control,
                              unmix_servos)
from rotorlab.errors import InvalidParams, OutOfRange, SingularG

cmd = st.floats(-1e3, 1e3)
R2 = math.sqrt(2) / 2


def test_mix_examples():
    assert mix_servos(0, 0) == (0, 0, 0)
    assert mix_servos(1, 0) == pytest.approx((0.70711, -0.70711, 0), abs=1e-5)
    assert mix_servos(0, 1) == pytest.approx((-0.5, -0.5, 1))


@given(cmd, cmd)
def test_mix_null_sum(dp, dq):
    s = mix_servos(dp, dq)
    assert abs(sum(s)) <= 1e-12 * max(1.0, abs(dp), abs(dq))


@given(cmd, cmd, cmd, cmd, st.floats(-5, 5), st.floats(-5, 5))
def test_mix_linear(p1, q1, p2, q2, a, b):
    lhs = mix_servos(a * p1 + b * p2, a * q1 + b * q2)
    m1, m2 = mix_servos(p1, q1), mix_servos(p2, q2)
    rhs = [a * x + b * y for x, y in zip(m1, m2)]
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + max(map(abs, rhs))))


@given(cmd, cmd)
def test_unmix_round_trip(dp, dq):
    u = unmix_servos(*mix_servos(dp, dq))
    assert u.delta_p == pytest.approx(dp, abs=1e-12 * max(1, abs(dp)))
    assert u.delta_q == pytest.approx(dq, abs=1e-12 * max(1, abs(dq)))
    assert u.residual <= 1e-12 * max(1, abs(dp), abs(dq))
    assert u.consistent


def _image_distance(s):
    # the mixing image is the plane s1 + s2 + s3 = 0 (two independent columns
    # spanning it), so the least-squares residual is the distance to that plane
    return abs(sum(s)) / math.sqrt(3)


@pytest.mark.parametrize("s", [(1, 1, 0), (0, 0, 1), (0.3, -0.1, 0.9)])
def test_unmix_reports_inconsistency(s):
    u = unmix_servos(*s)
    assert u.residual == pytest.approx(_image_distance(s), rel=1e-12)
    assert u.residual > 0 and not u.consistent


def test_unmix_point_in_image():
    assert unmix_servos(-0.5, -0.5, 1).residual == pytest.approx(0, abs=1e-15)


def test_linkage_default_maps_to_plus_minus_40():
    lk = CollectiveLinkage()
    assert lk(0.0) == pytest.approx(-40.0)
    assert lk(1.0) == pytest.approx(40.0)
    assert lk(0.5) == pytest.approx(0.0)
    assert collective_linkage(0.25) == pytest.approx(-20.0)


def test_linkage_custom_range_and_table():
    assert CollectiveLinkage(cmd_range=(-1, 1))(0.0) == pytest.approx(0.0)
    lk = CollectiveLinkage(table=[(0, -40), (0.3, -10), (0.7, 15), (1, 40)])
    assert lk(0.5) == pytest.approx(2.5)
    with pytest.raises(OutOfRange):
        lk(1.01)
    with pytest.raises(OutOfRange):
        CollectiveLinkage()(-0.1)


@given(st.floats(0, 1), st.floats(0, 1))
def test_linkage_monotone(a, b):
    lk = CollectiveLinkage(poly=(-40, 30, 20, 30))
    if a < b:
        assert lk(a) < lk(b)


def test_linkage_rejects_non_monotone():
    with pytest.raises(InvalidParams):
        CollectiveLinkage(poly=(0, 1, -3))
    with pytest.raises(InvalidParams):
        CollectiveLinkage(table=[(0, 0), (0.5, 10), (1, 5)])


def test_rate_model_validation():
    with pytest.raises(InvalidParams):
        RateModel.identified(K_c=1.5)
    with pytest.raises(SingularG):
        RateModel(AxisCoefficients(0, 1, 2, 0, 0), AxisCoefficients(0, 2, 4, 0, 0))


def test_g_matrix_from_table():
    G = RateModel.identified().G
    assert G.tolist() == [[0.0032, 0.0011], [-0.0044, 0.0073]]
    assert IDENTIFIED_FP.offset == -2.4661 and IDENTIFIED_FQ.p == 7.4479


def test_rate_control_zero():
    assert rate_control(0, 0, 0, 0, RateModel.identified()) == (0, 0)


def test_rate_control_identity_plant():
    m = RateModel(AxisCoefficients(0, 1, 0, 0, 0), AxisCoefficients(0, 0, 1, 0, 0),
                  K_c=0, K_p=1, K_q=1)
    assert rate_control(0.3, -0.7, 5, 5, m) == pytest.approx((0.3, -0.7))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(0.1, 50), st.floats(0.1, 50))
def test_rate_control_without_compensation_is_proportional(pe, qe, p, q, kp, kq):
    m = RateModel.identified(K_c=0.0, K_p=kp, K_q=kq)
    want = np.linalg.solve(m.G, [kp * pe, kq * qe])
    assert rate_control(pe, qe, p, q, m) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_rate_control_roll_rate_compensation_identified():
    m = RateModel.identified(K_c=0.5)
    dx, dy = rate_control(0, 0, 1.0, 0, m)
    want = np.linalg.solve(m.G, [0.0, -0.5 * 7.4479])
    assert (dx, dy) == pytest.approx(want, rel=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1))
def test_compensation_cancels_fraction_of_coupling(p, q, kc):
    # plugged into the identified plant with zero rate error, the commanded
    # cyclic removes a K_c share of the rate cross-coupling
    m = RateModel.identified(K_c=kc)
    dx, dy = rate_control(0, 0, p, q, m)
    pdot, qdot = m.accelerations(p, q, dx, dy, offset=False)
    assert pdot == pytest.approx(m.fp.p * p + (1 - kc) * m.fp.q * q, abs=1e-9)
    assert qdot == pytest.approx(m.fq.q * q + (1 - kc) * m.fq.p * p, abs=1e-9)


def test_closed_loop_settles_to_proportional_steady_state():
    m = RateModel.identified()
    tr = rate_doublet(m, amplitude=0.5, duration=2.0, tail=1.0)
    # the filter has unit DC gain, so the hold level solves A x + K ref = 0
    kc = 1 - m.K_c
    A = np.array([[m.fp.p - m.K_p, kc * m.fp.q], [kc * m.fq.p, m.fq.q - m.K_q]])
    p_ss, q_ss = np.linalg.solve(A, [0.0, -m.K_q * 0.5])
    k = np.searchsorted(tr.t, 0.95)
    assert tr.q[k] == pytest.approx(q_ss, rel=0.01)
    assert tr.p[k] == pytest.approx(p_ss, rel=0.01)
    assert np.abs(tr.q[-1]) < 0.01


def test_closed_loop_compensation_reduces_cross_axis_rms():
    on, off, ratio = decoupling_ratio(RateModel.identified())
    assert on < off
    assert ratio == pytest.approx(on / off)


def test_closed_loop_noise_is_seeded():
    a = rate_doublet(RateModel.identified(), sensor_noise=0.01, seed=3, duration=0.5, tail=0.0)
    b = rate_doublet(RateModel.identified(), sensor_noise=0.01, seed=3, duration=0.5, tail=0.0)
    c = rate_doublet(RateModel.identified(), sensor_noise=0.01, seed=4, duration=0.5, tail=0.0)
    assert np.array_equal(a.p, b.p)
    assert not np.array_equal(a.p, c.p)


def test_closed_loop_rejects_bad_axis():
    with pytest.raises(InvalidParams):
        rate_doublet(RateModel.identified(), axis="yaw")
