"""Scenario execution: one runner per kind, each returning CSV tables and
summary scalars.  Nothing touches the output directory until every
computation for the scenario has succeeded.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as cfg
from .aero import min_power_speed, power_curve, stall_speed
from .body import default_step, doublet_response
from .closedloop import rate_doublet
from .control import RateModel
from .csvutil import fmt, write_csv
from .energy import build_mission_profile, simulate_discharge
from .errors import ConfigError, SchemaMismatch
from .logs import ingest_log, write_log
from .propulsion import SWEEP_HEADER, bem_sweep
from .rotor import (CyclicCommand, FlapState, feathering_angle, integrate_flap, lock_number,
                    natural_frequency, steady_flap, tip_path_plane)
from .sysid import fit_pole_drag, fit_planar_power, fit_rate_model, synthetic_rate_log

OUTPUT_ROOT_ENV = "ROTORLAB_OUTPUT_ROOT"


@dataclass
class Outputs:
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    summary: list = field(default_factory=list)  # (key, value)

    def table(self, name, header, rows):
        self.tables[name] = (list(header), [list(r) for r in rows])

    def put(self, key, value):
        self.summary.append((key, value))


@dataclass
class RunResult:
    scenario: cfg.Scenario
    directory: Path
    outputs: Outputs

    @property
    def summary(self) -> dict:
        return dict(self.outputs.summary)


def output_root(explicit=None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "rotorlab_out"))


def read_table(path: Path, columns: tuple[str, ...]) -> np.ndarray:
    """Numeric CSV with exactly the given header columns."""
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(columns):
            raise SchemaMismatch(f"{path}: header must be {','.join(columns)}")
        rows = []
        for row in reader:
            if not row or not any(c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise SchemaMismatch(f"{path}:{reader.line_num}: non-numeric field") from None
            if len(vals) != len(columns):
                raise SchemaMismatch(f"{path}:{reader.line_num}: expected {len(columns)} fields")
            rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, len(columns))


# --- runners ---------------------------------------------------------------

def _doublet(s: cfg.Scenario, out: Outputs):
    e = s.experiment
    rotor, body = cfg.rotor_params(s), cfg.body_params(s)
    axis = e["axis"]
    dt = cfg.get_float(e, "dt") if "dt" in e else None
    tr = doublet_response(body, rotor, axis, cfg.get_angle(e, "amplitude"),
                          cfg.get_float(e, "duration"), dt=dt,
                          tail=cfg.get_float(e, "tail", 0.0),
                          actuator_lag=cfg.get_float(e, "actuator_lag", 0.0),
                          psi0=cfg.get_angle(e, "psi0", 0.0))
    out.table("rates.csv", ["t", "p", "q", "r", "delta_p", "delta_q"],
              zip(tr.t, tr.p, tr.q, tr.r, tr.delta_p, tr.delta_q))
    cross, on = tr.cross_axis(axis), tr.on_axis(axis)
    out.put("axis", axis)
    out.put("dt", tr.meta["dt"])
    out.put("lock_number", lock_number(rotor))
    out.put("on_axis_peak", float(np.max(np.abs(on))))
    out.put("cross_axis_peak", float(np.max(np.abs(cross))))
    out.put("cross_axis_rms", float(np.sqrt(np.mean(cross**2))))


def _closed_loop(s: cfg.Scenario, out: Outputs):
    e, c = s.experiment, s.section("controller")
    model = cfg.rate_model(s)
    kw = dict(axis=e["axis"], amplitude=cfg.get_rate(e, "amplitude"),
              duration=cfg.get_float(e, "duration"), tail=cfg.get_float(e, "tail", 2.0),
              loop_hz=cfg.get_float(c, "loop_hz", 512.0),
              filter_cutoff=cfg.get_float(c, "filter_cutoff", 25.0),
              actuator_lag=cfg.get_float(c, "actuator_lag", 0.0),
              sensor_noise=cfg.get_rate(e, "sensor_noise", 0.0), seed=s.seed)
    header = ["t", "p", "q", "p_ref", "q_ref", "delta_x", "delta_y"]

    def fly(m: RateModel, name: str):
        tr = rate_doublet(m, **kw)
        out.table(name, header, zip(tr.t, tr.p, tr.q, tr.p_ref, tr.q_ref, tr.delta_x, tr.delta_y))
        return tr.cross_axis_rms()

    rms = fly(model, "closed_loop.csv")
    out.put("K_c", model.K_c)
    out.put("cross_axis_rms", rms)
    if "compare_kc" in e:
        base = model.with_gains(K_c=cfg.get_float(e, "compare_kc"))
        rms0 = fly(base, "baseline.csv")
        out.put("baseline_K_c", base.K_c)
        out.put("baseline_cross_axis_rms", rms0)
        out.put("rms_ratio", rms / rms0 if rms0 > 0 else math.inf)


def _flap_only(s: cfg.Scenario, out: Outputs):
    e = s.experiment
    rotor = cfg.rotor_params(s)
    omega = rotor.omega_nominal
    duration = cfg.get_float(e, "duration")
    dt = cfg.get_float(e, "dt") if "dt" in e else default_step(omega, duration)
    steps = int(round(duration / dt))
    cmd = CyclicCommand(cfg.get_angle(e, "delta_p", 0.0), cfg.get_angle(e, "delta_q", 0.0),
                        cfg.get_angle(e, "theta0", 0.0))
    state = FlapState(cfg.get_angle(e, "beta0", 0.0), 0.0, cfg.get_angle(e, "psi0", 0.0), omega)
    traj = integrate_flap(state, rotor, cmd, dt, steps)
    out.table("flap.csv", ["t", "psi", "beta", "beta_dot", "theta"],
              ([k * dt, x.psi, x.beta, x.beta_dot, feathering_angle(cmd, x.psi)]
               for k, x in enumerate(traj)))
    out.put("lock_number", lock_number(rotor))
    out.put("natural_frequency", natural_frequency(rotor, omega))
    out.put("steady_state_beta", steady_flap(rotor, omega, cmd.collective_theta0))
    out.put("final_beta", traj[-1].beta)
    per_rev = max(3, int(round(2 * math.pi / (omega * dt))))
    if len(traj) > per_rev:
        last = traj[-per_rev:]
        b0, b1c, b1s = tip_path_plane([x.psi for x in last], [x.beta for x in last])
        out.put("tpp_coning", b0)
        out.put("tpp_b1c", b1c)
        out.put("tpp_b1s", b1s)


def _bem_sweep(s: cfg.Scenario, out: Outputs):
    e = s.experiment
    geom = cfg.blade_geometry(s)
    rows = bem_sweep(geom, cfg.get_range(e, "rpm"), cfg.get_range(e, "pitch_deg"),
                     cfg.get_range(e, "airspeed"), rho=cfg.get_float(e, "rho", 1.225),
                     annuli=cfg.get_int(e, "annuli", 40))
    out.table("bem_sweep.csv", SWEEP_HEADER, rows)
    out.put("points", len(rows))
    out.put("max_thrust", max(r[3] for r in rows))
    out.put("max_power", max(r[4] for r in rows))


def _power_curve(s: cfg.Scenario, out: Outputs):
    e = s.experiment
    aero = cfg.airframe(s)
    mass, rho = cfg.get_float(e, "mass"), cfg.get_float(e, "rho", 1.225)
    v_min, v_max, step = (cfg.get_float(e, k) for k in ("v_min", "v_max", "v_step"))
    if not (step > 0 and v_max >= v_min):
        raise ConfigError("power curve needs v_step > 0 and v_max >= v_min")
    n = int(math.floor((v_max - v_min) / step + 1e-9))
    speeds = [v_min + i * step for i in range(n + 1)]
    rows = power_curve(speeds, mass, rho, aero)
    out.table("power_curve.csv", ["V", "cl", "cd", "P"], rows)
    vmp = min_power_speed(mass, rho, aero, v_max=max(v_max, 2 * stall_speed(mass, rho, aero)))
    out.put("stall_speed", stall_speed(mass, rho, aero))
    out.put("min_power_speed", vmp)
    out.put("min_power", power_curve([vmp], mass, rho, aero)[0][3])


def _mission_energy(s: cfg.Scenario, out: Outputs):
    m = s.section("mission")
    profile = build_mission_profile(cfg.get_float(m, "hover_current", 23.0),
                                    cfg.get_float(m, "cruise_current", 12.0),
                                    cfg.get_float(m, "wait_current", 1.0))
    dt = cfg.get_float(s.experiment, "dt", 1.0)
    out.put("duration_min", profile.total_duration / 60.0)
    out.put("charge_ah", profile.charge_ah)
    for bat in cfg.batteries(s):
        tr = simulate_discharge(bat, profile, dt)
        out.table(f"discharge_{bat.name}.csv", ["t", "soc", "volts", "amps", "watts"],
                  zip(tr.t, tr.soc, tr.volts, tr.amps, tr.watts))
        terminal, loss, source = tr.energy_balance(bat)
        out.put(f"{bat.name}.completed", tr.completed)
        out.put(f"{bat.name}.failure_segment", tr.failure_segment or "none")
        out.put(f"{bat.name}.failure_time", tr.failure_time if tr.failure_time is not None
                else "none")
        out.put(f"{bat.name}.min_cell_voltage", float(tr.volts.min()) / bat.cells_series)
        out.put(f"{bat.name}.final_soc", float(tr.soc[-1]))
        out.put(f"{bat.name}.energy_balance_error",
                abs(terminal + loss - source) / source if source > 0 else 0.0)


def _fit_rates(s: cfg.Scenario, out: Outputs):
    e = s.experiment
    if "log" in e:
        log = ingest_log(s.resolve(e["log"]))
    else:
        log = synthetic_rate_log(cfg.rate_model(s), duration=cfg.get_float(e, "duration", 60.0),
                                 rate_hz=cfg.get_float(e, "rate_hz", 100.0), seed=s.seed,
                                 noise=cfg.get_float(e, "noise", 0.0))
        out.tables["synthetic_log.csv"] = ("log", log)
    fit = fit_rate_model(log, cutoff=cfg.get_float(e, "cutoff", 15.0))
    out.table("coefficients.csv", ["axis", "offset", "dx", "dy", "p", "q", "residual_rms"],
              [["p_dot", *fit.fp, fit.residual_rms[0]], ["q_dot", *fit.fq, fit.residual_rms[1]]])
    out.put("samples", fit.samples)
    for axis, coef in (("fp", fit.fp), ("fq", fit.fq)):
        for k, v in coef._asdict().items():
            out.put(f"{axis}.{k}", v)
    out.put("residual_rms_p", fit.residual_rms[0])
    out.put("residual_rms_q", fit.residual_rms[1])


def _fit_planar(s: cfg.Scenario, out: Outputs):
    data = read_table(s.resolve(s.experiment["samples"]), ("pitch", "throttle", "power"))
    fit = fit_planar_power(data)
    pred = fit.predict(data[:, 0], data[:, 1])
    out.table("planar_fit.csv", ["pitch", "throttle", "power", "predicted", "residual"],
              zip(data[:, 0], data[:, 1], data[:, 2], pred, data[:, 2] - pred))
    out.put("a0", fit.a0)
    out.put("a_pitch", fit.a_pitch)
    out.put("a_throttle", fit.a_throttle)
    out.put("residual_rms", fit.residual_rms)


def _fit_drag(s: cfg.Scenario, out: Outputs):
    e = s.experiment
    rho = cfg.get_float(e, "rho", 1.225)
    data = read_table(s.resolve(e["samples"]), ("V", "drag"))
    k = fit_pole_drag(data, rho)
    fit = 0.5 * rho * data[:, 0] ** 2 * k
    out.table("drag_fit.csv", ["V", "drag", "fit"], zip(data[:, 0], data[:, 1], fit))
    out.put("k", k)
    out.put("rho", rho)
    out.put("drag_at_24", 0.5 * rho * 24.0**2 * k)


RUNNERS = {
    "doublet": _doublet, "closed_loop": _closed_loop, "flap_only": _flap_only,
    "bem_sweep": _bem_sweep, "power_curve": _power_curve, "mission_energy": _mission_energy,
    "fit_rates": _fit_rates, "fit_planar": _fit_planar, "fit_drag": _fit_drag,
}


def compute(s: cfg.Scenario) -> Outputs:
    out = Outputs()
    out.put("scenario", s.name)
    out.put("kind", s.kind)
    out.put("seed", s.seed)
    RUNNERS[s.kind](s, out)
    return out


def write_outputs(directory: Path, out: Outputs) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in out.tables.items():
        if header == "log":
            write_log(directory / name, rows)
        else:
            write_csv(directory / name, header, rows)
    with (directory / "summary.txt").open("w", newline="") as fh:
        for k, v in out.summary:
            fh.write(f"{k} = {fmt(v)}\n")


def run_scenario(s: cfg.Scenario, root=None) -> RunResult:
    out = compute(s)
    directory = output_root(root) / (s.output or s.name)
    write_outputs(directory, out)
    return RunResult(s, directory, out)
