# Moteur numérique : états, mesures de corrélation, jeux, stratégie quantique, bruit
from .qstate import DensityMatrix, Ket, basis_ket, make_discordant_state, validate
from .measures import CorrelationReport, GridSpec, correlation_report, discord_optimized
from .games import ExtensiveGame, best_behavioral, best_mixed, make_recall_game
from .qstrategy import (
    MeasurementScheme,
    joint_action_distribution,
    make_alternating_scheme,
    sample_play,
)
from .noise import make_channel, register_channel, sweep
from .report import build_reproduce_report
from . import config_loader, linalg

__all__ = [
    "DensityMatrix",
    "Ket",
    "basis_ket",
    "make_discordant_state",
    "validate",
    "CorrelationReport",
    "GridSpec",
    "correlation_report",
    "discord_optimized",
    "ExtensiveGame",
    "best_behavioral",
    "best_mixed",
    "make_recall_game",
    "MeasurementScheme",
    "joint_action_distribution",
    "make_alternating_scheme",
    "sample_play",
    "make_channel",
    "register_channel",
    "sweep",
    "build_reproduce_report",
    "config_loader",
    "linalg",
]
