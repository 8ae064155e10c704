"""Link-level simulator for multi-UAV in-band full duplex.

Every channel carries one UAV's uplink and another UAV's downlink, so the
fleet as a whole reuses each channel in both directions. The package models
the resulting co-channel interference under directional antennas.
"""
from .antenna import AntennaPattern, Pointing, gain_dbi, point_at
from .duplex import ChannelPlan, cci_pairs, evaluate_plan, optimize_plan, swap_plan, validate_plan
from .errors import (
    ConditioningError,
    EmptyMapError,
    GeometryError,
    InfeasibleError,
    MuibfdError,
    NearFieldError,
    PlanError,
    UnknownReferenceError,
)
from .gpr import Hyperparams, SampleSet, fit, fit_hyperparams, predict
from .metrics import (
    GridMap,
    TddConfig,
    area_fraction_below,
    capacity_improvement_pct,
    cci_dbm,
    downlink_sinr_db,
    shannon_capacity,
    sinr_db,
    tdd_baseline_capacity,
)
from .planner import PlanConstraints, RegionSpec, adjust_positions, keep_out_map, reference_region, simulate_map
from .propagation import fspl_db, jittered_rssi_series, link_budget, noise_floor_dbm
from .scenario import ChannelDef, Scenario, Vec3, reference_scenario, validate

__version__ = "0.1.0"

__all__ = [
    "AntennaPattern", "Pointing", "gain_dbi", "point_at",
    "ChannelPlan", "cci_pairs", "evaluate_plan", "optimize_plan", "swap_plan", "validate_plan",
    "ConditioningError", "EmptyMapError", "GeometryError", "InfeasibleError", "MuibfdError",
    "NearFieldError", "PlanError", "UnknownReferenceError",
    "Hyperparams", "SampleSet", "fit", "fit_hyperparams", "predict",
    "GridMap", "TddConfig", "area_fraction_below", "capacity_improvement_pct", "cci_dbm",
    "downlink_sinr_db", "shannon_capacity", "sinr_db", "tdd_baseline_capacity",
    "PlanConstraints", "RegionSpec", "adjust_positions", "keep_out_map", "reference_region",
    "simulate_map",
    "fspl_db", "jittered_rssi_series", "link_budget", "noise_floor_dbm",
    "ChannelDef", "Scenario", "Vec3", "reference_scenario", "validate",
]
