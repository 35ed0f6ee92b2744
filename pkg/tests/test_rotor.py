import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotorlab.errors import InvalidParams, InvalidState, OutOfRange, StepTooLarge
from rotorlab.rotor import (COLLECTIVE_LIMIT, CyclicCommand, FlapState, RotorParams,
                            blade_azimuths, feathering_angle, flap_acceleration, flap_energy,
                            integrate_flap, lock_number, natural_frequency, steady_flap,
                            tip_path_plane, wrap_azimuth, write_flap_csv)

pos = st.floats(0.01, 10.0)


def test_lock_number_reference_rotor():
    # 1.225 * 5.7 * 0.05 * 0.5**4 / 0.005 by hand
    p = RotorParams(radius=0.5, flap_inertia=0.005, lift_slope=5.7, mean_chord=0.05,
                    air_density=1.225)
    assert lock_number(p) == pytest.approx(4.3640625, rel=1e-12)


def test_default_inertia_is_uniform_blade():
    p = RotorParams.uniform_blade(0.06, 0.5)
    assert p.flap_inertia == pytest.approx(0.005)
    assert lock_number(p) == pytest.approx(4.364, abs=5e-4)


def test_lock_number_zero_chord():
    assert lock_number(RotorParams(mean_chord=0.0)) == 0.0


@given(pos, pos)
def test_lock_number_inverse_in_inertia(inertia, scale):
    a = RotorParams(flap_inertia=inertia)
    b = RotorParams(flap_inertia=inertia * scale)
    assert lock_number(b) == pytest.approx(lock_number(a) / scale, rel=1e-12)


@given(st.floats(0.05, 3.0), st.floats(0.1, 4.0))
def test_lock_number_scales_with_radius_to_the_fourth(radius, s):
    a = RotorParams(radius=radius)
    b = RotorParams(radius=radius * s)
    assert lock_number(b) == pytest.approx(lock_number(a) * s**4, rel=1e-12)


@pytest.mark.parametrize("kw", [dict(radius=0.0), dict(flap_inertia=-1.0), dict(air_density=0.0),
                                dict(hinge_spring=-0.1), dict(radius=float("nan")),
                                dict(n_blades=0)])
def test_invalid_params(kw):
    with pytest.raises(InvalidParams):
        RotorParams(**kw)


def test_lock_number_rejects_non_params():
    with pytest.raises(InvalidParams):
        lock_number(None)


def test_feathering_pure_collective():
    cmd = CyclicCommand(collective_theta0=0.1)
    for psi in np.linspace(0, 2 * math.pi, 13):
        assert feathering_angle(cmd, psi) == pytest.approx(0.1)


def test_feathering_sine_peak():
    assert feathering_angle(CyclicCommand(delta_p=1.0), math.pi / 2) == pytest.approx(1.0)


def test_feathering_phasor_peak():
    cmd = CyclicCommand(delta_p=0.3, delta_q=0.4)
    psi = np.linspace(0, 2 * math.pi, 200001)
    theta = np.array([feathering_angle(cmd, x) for x in psi])
    k = int(np.argmax(theta))
    assert theta[k] == pytest.approx(0.5, abs=1e-9)
    assert psi[k] == pytest.approx(math.atan2(0.3, 0.4), abs=1e-4)


def test_cyclic_limit_and_collective_clamp():
    with pytest.raises(OutOfRange):
        CyclicCommand(delta_p=1.01)
    with pytest.raises(OutOfRange):
        CyclicCommand(delta_q=-2.0, limit=1.5)
    assert CyclicCommand(collective_theta0=1.5).collective_theta0 == pytest.approx(COLLECTIVE_LIMIT)
    assert CyclicCommand(collective_theta0=-1.5).collective_theta0 == pytest.approx(-math.radians(40))


@given(st.floats(-100, 100))
def test_azimuth_wrapped(psi):
    w = wrap_azimuth(psi)
    assert 0.0 <= w < 2 * math.pi
    assert FlapState(psi=psi, omega=1.0).psi == w


def test_blade_azimuths_two_blades():
    a = blade_azimuths(0.25, 2)
    assert a[1] - a[0] == pytest.approx(math.pi)


def test_negative_omega_rejected():
    with pytest.raises(InvalidState):
        FlapState(omega=-1.0)


def test_flap_acceleration_equilibrium_and_guard():
    p = RotorParams()
    assert flap_acceleration(FlapState(omega=150.0), p, 0.0) == 0.0
    with pytest.raises(InvalidState):
        flap_acceleration(FlapState(omega=0.0), p, 0.1)


def test_flap_acceleration_formula():
    p = RotorParams()
    w, beta, rate, theta = 157.0, 0.02, -0.5, 0.1
    g8 = lock_number(p) / 8
    want = g8 * w * w * theta - g8 * w * rate - (w * w + p.hinge_spring / p.flap_inertia) * beta
    got = flap_acceleration(FlapState(beta, rate, 0.0, w), p, theta)
    assert got == pytest.approx(want, rel=1e-12)


def _settle(params, omega, theta, revs=40):
    dt = 0.1 / omega
    steps = int(revs * 2 * math.pi / (omega * dt))
    traj = integrate_flap(FlapState(omega=omega), params, CyclicCommand(collective_theta0=theta),
                          dt, steps)
    return traj[-1].beta


def test_steady_state_without_spring_is_gamma_theta_over_8():
    p = RotorParams(hinge_spring=0.0)
    theta = 0.08
    assert _settle(p, 157.0, theta) == pytest.approx(lock_number(p) * theta / 8, abs=1e-6)


def test_steady_state_with_spring():
    p = RotorParams(hinge_spring=35.0)
    w, theta = 140.0, 0.05
    want = (lock_number(p) / 8) * w * w * theta / (w * w + 35.0 / p.flap_inertia)
    assert steady_flap(p, w, theta) == pytest.approx(want, rel=1e-12)
    assert _settle(p, w, theta) == pytest.approx(want, abs=1e-6)


def test_natural_frequency():
    w = 150.0
    assert natural_frequency(RotorParams(hinge_spring=0.0), w) == w
    assert natural_frequency(RotorParams(hinge_spring=1.0), w) > w


def test_zero_input_gives_zero_trajectory():
    traj = integrate_flap(FlapState(omega=157.0), RotorParams(), CyclicCommand(), 1e-3, 200)
    assert len(traj) == 201
    assert all(s.beta == 0.0 and s.beta_dot == 0.0 for s in traj)


def test_step_guard():
    with pytest.raises(StepTooLarge):
        integrate_flap(FlapState(omega=157.0), RotorParams(), CyclicCommand(), 0.2 / 157.0, 5)
    with pytest.raises(StepTooLarge):
        integrate_flap(FlapState(omega=157.0), RotorParams(), CyclicCommand(), 0.0, 5)


@given(beta0=st.floats(-0.3, 0.3), rate0=st.floats(-5, 5), spring=st.floats(0, 60),
       omega=st.floats(50, 250))
def test_free_flap_energy_non_increasing(beta0, rate0, spring, omega):
    p = RotorParams(hinge_spring=spring)
    dt = 0.1 / omega
    traj = integrate_flap(FlapState(beta0, rate0, 0.0, omega), p, CyclicCommand(), dt, 300)
    e = np.array([flap_energy(s, p) for s in traj])
    assert np.all(np.diff(e) <= 1e-9)


def test_free_flap_envelope_decays():
    p = RotorParams()
    w = 157.0
    dt = 0.1 / w
    traj = integrate_flap(FlapState(0.1, 0.0, 0.0, w), p, CyclicCommand(), dt, 3000)
    beta = np.abs([s.beta for s in traj])
    chunks = beta[: 3000 // 300 * 300].reshape(-1, 300).max(axis=1)
    assert np.all(np.diff(chunks) < 0)


def test_integration_order():
    p = RotorParams()
    w = 157.0
    cmd = CyclicCommand(0.05, -0.03, 0.08)
    T = 0.2

    def final(n):
        return integrate_flap(FlapState(0.01, 0.0, 0.3, w), p, cmd, T / n, n)[-1].beta

    b1, b2, b4 = final(250), final(500), final(1000)
    order = math.log2(abs(b1 - b2) / abs(b2 - b4))
    assert order >= 3.5


def test_integration_is_deterministic():
    args = (FlapState(0.01, 0.2, 1.0, 150.0), RotorParams(), CyclicCommand(0.1, 0.2, 0.05),
            5e-4, 400)
    assert integrate_flap(*args) == integrate_flap(*args)


def test_tip_path_plane_recovers_harmonics():
    psi = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    beta = 0.04 + 0.01 * np.cos(psi) - 0.02 * np.sin(psi)
    assert tip_path_plane(psi, beta) == pytest.approx((0.04, 0.01, -0.02), abs=1e-12)


def test_flap_cyclic_tilts_disc_with_lag():
    # pure longitudinal cyclic on a spring-free rotor: the disc tilts 90 deg later, so
    # the response shows up in the sine harmonic with the cosine one near zero
    p = RotorParams(hinge_spring=0.0)
    w = 157.0
    dt = 0.05 / w
    n_rev = int(round(2 * math.pi / (w * dt)))
    traj = integrate_flap(FlapState(omega=w), p, CyclicCommand(delta_q=0.05), dt, 60 * n_rev)
    last = traj[-n_rev:]
    b0, b1c, b1s = tip_path_plane([s.psi for s in last], [s.beta for s in last])
    assert abs(b0) < 1e-6
    assert abs(b1c) < 1e-6
    assert b1s == pytest.approx(0.05, rel=1e-4)


def test_flap_csv(tmp_path):
    cmd = CyclicCommand(collective_theta0=0.05)
    traj = integrate_flap(FlapState(omega=150.0), RotorParams(), cmd, 1e-3, 3)
    path = tmp_path / "flap.csv"
    write_flap_csv(path, traj, cmd, 1e-3)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,psi,beta,beta_dot,theta"
    assert len(lines) == 5
