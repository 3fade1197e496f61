"""Solvers, heuristics and bounds for the large block sale liquidation problem."""

from .backend import USING_COMPILED
from .model import (
    Instance,
    PenaltyFunction,
    PenaltyPrototype,
    Schedule,
    calibrate_eta,
    evaluate_objective,
    make_instance,
)

__all__ = [
    "USING_COMPILED",
    "Instance",
    "PenaltyFunction",
    "PenaltyPrototype",
    "Schedule",
    "calibrate_eta",
    "evaluate_objective",
    "make_instance",
]
