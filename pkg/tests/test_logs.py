import math

import numpy as np
import pytest

from rotorlab.errors import NonMonotoneTime, SchemaMismatch
from rotorlab.logs import ingest_log, write_log
from rotorlab.sysid import FlightLog

HEADER = "t,p,q,dx,dy,rpm,coll,thr,amps,volts,tas"


def _write(path, text):
    path.write_text(text)
    return path


def test_empty_file(tmp_path):
    with pytest.raises(SchemaMismatch):
        ingest_log(_write(tmp_path / "e.csv", ""))


def test_header_only(tmp_path):
    with pytest.raises(SchemaMismatch):
        ingest_log(_write(tmp_path / "h.csv", HEADER + "\n"))


@pytest.mark.parametrize("header", ["t,p,q,dx,dy", "t,q,p,dx,dy,rpm,coll,thr,amps,volts,tas",
                                    HEADER + ",extra"])
def test_wrong_header(tmp_path, header):
    with pytest.raises(SchemaMismatch):
        ingest_log(_write(tmp_path / "w.csv", header + "\n0,0,0,0,0,0,0,0,0,0,0\n"))


def test_degrees_converted(tmp_path):
    text = ("t,p[deg/s],q[deg/s],dx,dy,rpm,coll,thr,amps,volts,tas\n"
            "0,180,90,1,2,1500,0.5,0.6,10,24,0\n"
            "0.01,-57.29577951308232,0,1,2,1500,0.5,0.6,10,24,0\n")
    log = ingest_log(_write(tmp_path / "d.csv", text))
    assert log.p == pytest.approx([math.pi, -1.0])
    assert log.q == pytest.approx([math.pi / 2, 0.0])
    assert log.delta_x[0] == 1 and log.rpm[0] == 1500


def test_unit_on_non_rate_column(tmp_path):
    with pytest.raises(SchemaMismatch):
        ingest_log(_write(tmp_path / "u.csv", HEADER.replace("dx", "dx[deg]") + "\n"
                          "0,0,0,0,0,0,0,0,0,0,0\n"))


def test_duplicate_timestamp_reports_line(tmp_path):
    rows = [HEADER] + [f"{t},0,0,0,0,,,,,," for t in ("0", "0.01", "0.02", "0.02", "0.03")]
    with pytest.raises(NonMonotoneTime) as info:
        ingest_log(_write(tmp_path / "dup.csv", "\n".join(rows) + "\n"))
    assert info.value.line == 5


def test_missing_required_value(tmp_path):
    with pytest.raises(SchemaMismatch, match="column q"):
        ingest_log(_write(tmp_path / "m.csv", HEADER + "\n0,0,,0,0,,,,,,\n"))


def test_optional_columns_read_as_nan(tmp_path):
    log = ingest_log(_write(tmp_path / "o.csv", HEADER + "\n0,0.1,0.2,3,4,,,,,,\n"))
    assert math.isnan(log.rpm[0]) and log.p_dot is None


def test_round_trip_with_accelerations(tmp_path):
    rng = np.random.default_rng(3)
    n = 50
    cols = {"t": np.arange(n) * 0.01, "p": rng.normal(size=n), "q": rng.normal(size=n),
            "delta_x": rng.normal(size=n), "delta_y": rng.normal(size=n),
            "rpm": np.full(n, 1500.0), "airspeed": np.full(n, np.nan)}
    log = FlightLog(cols, rng.normal(size=n), rng.normal(size=n))
    write_log(tmp_path / "r.csv", log)
    back = ingest_log(tmp_path / "r.csv")
    for name in ("t", "p", "q", "delta_x", "delta_y", "rpm"):
        assert np.allclose(getattr(back, name), getattr(log, name), rtol=1e-11, atol=0)
    assert np.all(np.isnan(back.airspeed))
    assert np.allclose(back.p_dot, log.p_dot, rtol=1e-11)
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == HEADER + ",pdot,qdot"
