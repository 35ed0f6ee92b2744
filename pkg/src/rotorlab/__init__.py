"""Flight-dynamics lab for a single-rotor tail-sitter: rotor flapping and
fuselage coupling, rate-model identification, decoupling rate control,
propeller, airframe and battery models, and a scenario CLI."""

from .aero import AirframeAero, drag_polar, min_power_speed, required_power
from .body import BodyParams, CoupledState, doublet_response, step_coupled
from .closedloop import decoupling_ratio, rate_doublet
from .control import (CollectiveLinkage, RateModel, collective_linkage, mix_servos,
                      rate_control, unmix_servos)
from .energy import (BatteryModel, MissionProfile, build_mission_profile, simulate_discharge,
                     LIION_6S6P, LIPO_6S6P)
from .logs import ingest_log, write_log
from .propulsion import (BladeGeometry, OperatingPoint, bem_performance, blade_geometry_at,
                         thrust_power_coefficients)
from .rotor import (CyclicCommand, FlapState, RotorParams, feathering_angle, flap_acceleration,
                    integrate_flap, lock_number)
from .sysid import (LogFrame, filter_second_order, derive_rates, fit_planar_power,
                    fit_pole_drag, fit_rate_model)

__version__ = "0.1.0"
