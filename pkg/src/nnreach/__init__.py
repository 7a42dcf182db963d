"""Reachable-set estimation and safety verification for MLPs and NARMA network models."""

__version__ = "0.1.0"

from .intervals import CellBox, Interval, Partition, contains, hull, interval_split, make_partition
from .network import Layer, NarmaModel, Network, eval_network, narma_step, register_activation
from .reach import CellBudgetError, MlpReachResult, layer_bound, reach_mlp
from .narma import ReachTube, StepSet, reach_interval_union, reach_narma
from .safety import HalfSpace, SafetySpec, Verdict, VerdictTag, Witness, box_satisfies, verify_narma, verify_tube
from .io import (
    FileFormatError,
    Scenario,
    StepMode,
    fixture_path,
    load_narma,
    load_network,
    load_scenario,
    save_narma,
    save_network,
    save_scenario,
)
from .simulate import Trajectory, check_containment, sample_trajectories

__all__ = [
    "CellBox",
    "Interval",
    "Partition",
    "contains",
    "hull",
    "interval_split",
    "make_partition",
    "Layer",
    "NarmaModel",
    "Network",
    "eval_network",
    "narma_step",
    "register_activation",
    "CellBudgetError",
    "MlpReachResult",
    "layer_bound",
    "reach_mlp",
    "ReachTube",
    "StepSet",
    "reach_interval_union",
    "reach_narma",
    "HalfSpace",
    "SafetySpec",
    "Verdict",
    "VerdictTag",
    "Witness",
    "box_satisfies",
    "verify_narma",
    "verify_tube",
    "FileFormatError",
    "Scenario",
    "StepMode",
    "fixture_path",
    "load_narma",
    "load_network",
    "load_scenario",
    "save_narma",
    "save_network",
    "save_scenario",
    "Trajectory",
    "check_containment",
    "sample_trajectories",
]
