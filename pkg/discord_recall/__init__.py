"""Quantum discord as a resource for behavioral strategies under imperfect recall."""

from .engine.qstate import DensityMatrix, make_discordant_state
from .engine.games import ExtensiveGame, make_recall_game
from .engine.qstrategy import MeasurementScheme, make_alternating_scheme

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "make_discordant_state",
    "ExtensiveGame",
    "make_recall_game",
    "MeasurementScheme",
    "make_alternating_scheme",
]
