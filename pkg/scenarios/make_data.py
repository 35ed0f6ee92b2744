"""Regenerate the data files under scenarios/data."""

from pathlib import Path

import numpy as np

from rotorlab.control import RateModel
from rotorlab.csvutil import write_csv
from rotorlab.logs import write_log
from rotorlab.sysid import pole_drag, synthetic_rate_log

here = Path(__file__).parent / "data"
here.mkdir(exist_ok=True)

write_log(here / "synthetic_rates.csv", synthetic_rate_log(RateModel.identified(), seed=0))

pitch = np.array([10, 15, 20, 25, 30, 10, 15, 20, 25, 30], dtype=float)
throttle = np.array([0.4, 0.45, 0.5, 0.55, 0.6, 0.6, 0.55, 0.5, 0.45, 0.4])
power = 35.0 + 9.5 * pitch + 610.0 * throttle
write_csv(here / "planar_samples.csv", ["pitch", "throttle", "power"], zip(pitch, throttle, power))

V = np.arange(4.0, 26.0, 2.0)
write_csv(here / "pole_drag.csv", ["V", "drag"], zip(V, pole_drag(V)))
