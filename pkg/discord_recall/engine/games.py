"""Single-agent extensive-form games with imperfect recall.

A game has ``stages`` sequential binary decisions.  Every decision point of a
stage (one per history of earlier actions) belongs to the information set of
that stage, and information sets may group several stages: the agent then
cannot tell those stages apart either.  A behavioral strategy draws one
independent action per decision point from the distribution of its
information set; a mixed strategy randomises once over complete plans.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ACTIONS = ("L", "R")
VARIANTS = ("single_infoset", "stage_aware")
WEIGHT_TOL = 1e-12
TIE_DIGITS = 12
REFINE_TOL = 1e-6
MAX_GRID_POINTS = 2**20
GRID_CHUNK = 65_536


class UnknownActionError(ValueError):
    """Raised for an action label outside the game's action set."""


class MissingInfosetError(KeyError):
    """Raised when a behavioral strategy does not cover an information set."""


class MalformedPlanError(ValueError):
    """Raised when a pure plan does not assign one valid action per stage."""


class GameParseError(ValueError):
    """Raised when a serialized game cannot be decoded or is inconsistent."""


def alternating_payoff(a1: str, a2: str) -> float:
    """1 when the two actions differ, 0 when they coincide."""
    for a in (a1, a2):
        if a not in ACTIONS:
            raise UnknownActionError(f"unknown action {a!r}; expected one of {ACTIONS}")
    return 1.0 if a1 != a2 else 0.0


@dataclass(frozen=True)
class ExtensiveGame:
    """Stage count, information-set partition of the stages and payoff table.

    ``information_sets[i]`` lists the (0-based) stages whose decision points
    form information set ``i``.  ``payoff_table`` maps action strings such as
    ``"LR"`` to utilities.
    """

    stages: int
    information_sets: tuple[tuple[int, ...], ...]
    payoff_table: Mapping[str, float]
    actions: tuple[str, ...] = ACTIONS
    name: str = ""
    _stage_infoset: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.stages < 1:
            raise GameParseError("a game needs at least one stage")
        if len(self.actions) != 2 or any(len(a) != 1 for a in self.actions):
            raise GameParseError("games use exactly two single-character actions")
        sets = tuple(tuple(int(s) for s in group) for group in self.information_sets)
        owner: dict[int, int] = {}
        for idx, group in enumerate(sets):
            if not group:
                raise GameParseError(f"information set {idx} is empty")
            for stage in group:
                if not 0 <= stage < self.stages:
                    raise GameParseError(f"stage {stage} out of range in information set {idx}")
                if stage in owner:
                    raise GameParseError(f"stage {stage} belongs to several information sets")
                owner[stage] = idx
        missing = [s for s in range(self.stages) if s not in owner]
        if missing:
            raise GameParseError(f"stages {missing} belong to no information set")
        table = {str(k): float(v) for k, v in dict(self.payoff_table).items()}
        for seq in self.sequences():
            if "".join(seq) not in table:
                raise GameParseError(f"payoff missing for action sequence {''.join(seq)!r}")
        object.__setattr__(self, "information_sets", sets)
        object.__setattr__(self, "payoff_table", MappingProxyType(table))
        object.__setattr__(self, "_stage_infoset", tuple(owner[s] for s in range(self.stages)))

    @property
    def num_infosets(self) -> int:
        return len(self.information_sets)

    def infoset_of_stage(self, stage: int) -> int:
        return self._stage_infoset[stage]

    def sequences(self) -> Iterable[tuple[str, ...]]:
        """All action sequences (equivalently, all pure plans), L before R."""
        return itertools.product(self.actions, repeat=self.stages)

    def decision_points(self) -> list[tuple[str, ...]]:
        """Histories of earlier actions, one per decision point."""
        points: list[tuple[str, ...]] = []
        for stage in range(self.stages):
            points.extend(itertools.product(self.actions, repeat=stage))
        return points

    @property
    def info_partition(self) -> dict[tuple[str, ...], int]:
        """Map each decision point (history) to its information set."""
        return {h: self.infoset_of_stage(len(h)) for h in self.decision_points()}

    def payoff_of(self, sequence: Sequence[str]) -> float:
        seq = tuple(sequence)
        if len(seq) != self.stages:
            raise MalformedPlanError(f"expected {self.stages} actions, got {len(seq)}")
        for a in seq:
            if a not in self.actions:
                raise UnknownActionError(f"unknown action {a!r}; expected one of {self.actions}")
        return self.payoff_table["".join(seq)]


def make_recall_game(variant: str = "single_infoset") -> ExtensiveGame:
    """Two-stage L/R game rewarding alternating actions.

    ``single_infoset`` puts both stages in one information set;
    ``stage_aware`` gives each stage its own set (only the stage-2 histories
    are merged).
    """
    key = variant.replace("-", "_").lower()
    if key == "single_infoset":
        sets: tuple[tuple[int, ...], ...] = ((0, 1),)
    elif key == "stage_aware":
        sets = ((0,), (1,))
    else:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    table = {a1 + a2: alternating_payoff(a1, a2) for a1, a2 in itertools.product(ACTIONS, repeat=2)}
    return ExtensiveGame(2, sets, table, name=key)


# ------------------------------------------------------------------
# Behavioral strategies
# ------------------------------------------------------------------


@dataclass(frozen=True)
class BehavioralStrategy:
    """Probability of choosing the first action (``L``) per information set."""

    prob_left: Mapping[int, float]

    def __post_init__(self) -> None:
        probs = {int(k): float(v) for k, v in dict(self.prob_left).items()}
        for k, p in probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for information set {k} must be in [0, 1], got {p}")
        object.__setattr__(self, "prob_left", MappingProxyType(probs))

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "BehavioralStrategy":
        return cls({i: float(p) for i, p in enumerate(vector)})

    def vector(self, game: ExtensiveGame) -> tuple[float, ...]:
        missing = [i for i in range(game.num_infosets) if i not in self.prob_left]
        if missing:
            raise MissingInfosetError(f"strategy does not cover information sets {missing}")
        return tuple(self.prob_left[i] for i in range(game.num_infosets))


def _behavioral_values(game: ExtensiveGame, probs: np.ndarray) -> np.ndarray:
    """Expected payoff for each row of ``probs`` (shape ``(N, num_infosets)``)."""
    probs = np.atleast_2d(probs)
    values = np.zeros(probs.shape[0])
    for seq in game.sequences():
        weight = np.ones(probs.shape[0])
        for stage, action in enumerate(seq):
            p = probs[:, game.infoset_of_stage(stage)]
            weight = weight * (p if action == game.actions[0] else 1.0 - p)
        values += weight * game.payoff_of(seq)
    return values


def behavioral_distribution(game: ExtensiveGame, strategy: BehavioralStrategy) -> dict[tuple[str, ...], float]:
    """Probability of each action sequence under independent per-point draws."""
    vec = strategy.vector(game)
    dist = {}
    for seq in game.sequences():
        prob = 1.0
        for stage, action in enumerate(seq):
            p = vec[game.infoset_of_stage(stage)]
            prob *= p if action == game.actions[0] else 1.0 - p
        dist[seq] = prob
    return dist


def expected_payoff_behavioral(game: ExtensiveGame, strategy: BehavioralStrategy) -> float:
    vec = np.array(strategy.vector(game), dtype=float)
    return float(_behavioral_values(game, vec[None, :])[0])


def _rank(values: np.ndarray, points: np.ndarray) -> int:
    """Index of the best row: highest value (rounded), then smallest vector."""
    keys = tuple(points[:, i] for i in range(points.shape[1] - 1, -1, -1))
    return int(np.lexsort(keys + (-np.round(values, TIE_DIGITS),))[0])


def _coarse_steps(grid_steps: int, k: int) -> int:
    steps = grid_steps
    while steps > 2 and steps**k > MAX_GRID_POINTS:
        steps -= 1
    return steps


def _grid_best(game: ExtensiveGame, axis: np.ndarray) -> np.ndarray:
    """Best point of the full ``axis^k`` grid, evaluated chunk by chunk."""
    k = game.num_infosets
    total = axis.size**k
    best, best_key = None, None
    for start in range(0, total, GRID_CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + GRID_CHUNK, total)), (axis.size,) * k)
        points = np.stack([axis[i] for i in idx], axis=1)
        values = _behavioral_values(game, points)
        row = _rank(values, points)
        key = (-float(np.round(values[row], TIE_DIGITS)), tuple(points[row].tolist()))
        if best_key is None or key < best_key:
            best, best_key = points[row], key
    return best


def best_behavioral(game: ExtensiveGame, grid_steps: int = 101) -> tuple[BehavioralStrategy, float]:
    """Grid search over ``[0, 1]^k`` followed by local stencil refinement.

    Ties go to the lexicographically smallest probability vector.  When
    ``grid_steps^k`` exceeds ``MAX_GRID_POINTS`` the coarse grid is thinned
    and the refinement starts from the wider step.
    """
    if grid_steps < 2:
        raise ValueError("grid_steps must be >= 2")
    k = game.num_infosets
    steps = _coarse_steps(grid_steps, k)
    if steps != grid_steps:
        logger.info("behavioral grid thinned from %d to %d points per axis (%d information sets)",
                    grid_steps, steps, k)
    best = _grid_best(game, np.linspace(0.0, 1.0, steps))

    step = 1.0 / (steps - 1)
    offsets = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=k)))
    while step >= REFINE_TOL:
        cand = np.clip(best[None, :] + step * offsets, 0.0, 1.0)
        cand_values = _behavioral_values(game, cand)
        best = cand[_rank(cand_values, cand)]
        step /= 2.0
    value = float(_behavioral_values(game, best[None, :])[0])
    logger.debug("best behavioral for %s: %s -> %.12f", game.name or "game", best.tolist(), value)
    return BehavioralStrategy.from_vector(best.tolist()), value


# ------------------------------------------------------------------
# Mixed strategies
# ------------------------------------------------------------------


@dataclass(frozen=True)
class MixedStrategy:
    """Distribution over pure plans (one action per stage)."""

    weights: Mapping[tuple[str, ...], float]

    def __post_init__(self) -> None:
        weights = {tuple(plan): float(w) for plan, w in dict(self.weights).items()}
        if any(w < 0.0 for w in weights.values()):
            raise ValueError("mixed-strategy weights must be nonnegative")
        total = sum(weights.values())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mixed-strategy weights must sum to 1, got {total!r}")
        object.__setattr__(self, "weights", MappingProxyType(weights))

    @classmethod
    def point_mass(cls, plan: Sequence[str]) -> "MixedStrategy":
        return cls({tuple(plan): 1.0})

    @classmethod
    def uniform(cls, plans: Sequence[Sequence[str]]) -> "MixedStrategy":
        plans = [tuple(p) for p in plans]
        return cls({p: 1.0 / len(plans) for p in plans})

    def mix(self, other: "MixedStrategy", weight: float) -> "MixedStrategy":
        """Return ``weight · self + (1 − weight) · other``."""
        if not 0.0 <= weight <= 1.0:
            raise ValueError("weight must be in [0, 1]")
        combined: dict[tuple[str, ...], float] = {}
        for plan, w in self.weights.items():
            combined[plan] = combined.get(plan, 0.0) + weight * w
        for plan, w in other.weights.items():
            combined[plan] = combined.get(plan, 0.0) + (1.0 - weight) * w
        return MixedStrategy(combined)


def alternating_mixture() -> MixedStrategy:
    """``½ (L, R) + ½ (R, L)``."""
    return MixedStrategy({("L", "R"): 0.5, ("R", "L"): 0.5})


def expected_payoff_mixed(game: ExtensiveGame, strategy: MixedStrategy) -> float:
    total = 0.0
    for plan, weight in strategy.weights.items():
        if len(plan) != game.stages:
            raise MalformedPlanError(f"plan {plan} does not assign one action per stage")
        total += weight * game.payoff_of(plan)
    return total


def best_mixed(game: ExtensiveGame) -> tuple[MixedStrategy, float]:
    """Point mass on the best pure plan (first in L < R order on ties)."""
    best_plan, best_value = None, -np.inf
    for plan in game.sequences():
        value = game.payoff_of(plan)
        if value > best_value:
            best_plan, best_value = plan, value
    return MixedStrategy.point_mass(best_plan), float(best_value)


# ------------------------------------------------------------------
# JSON document
# ------------------------------------------------------------------


def game_to_dict(game: ExtensiveGame) -> dict[str, Any]:
    return {
        "stages": game.stages,
        "information_sets": [list(group) for group in game.information_sets],
        "payoff": dict(sorted(game.payoff_table.items())),
    }


def game_from_dict(data: Any) -> ExtensiveGame:
    if not isinstance(data, dict):
        raise GameParseError("game document must be a JSON object")
    try:
        stages = int(data["stages"])
        sets = tuple(tuple(int(s) for s in group) for group in data["information_sets"])
        payoff = {str(k): float(v) for k, v in dict(data["payoff"]).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise GameParseError(f"malformed game document: {exc}") from exc
    return ExtensiveGame(stages, sets, payoff, name=str(data.get("name", "")))


__all__ = [
    "ACTIONS",
    "VARIANTS",
    "UnknownActionError",
    "MissingInfosetError",
    "MalformedPlanError",
    "GameParseError",
    "alternating_payoff",
    "ExtensiveGame",
    "make_recall_game",
    "BehavioralStrategy",
    "behavioral_distribution",
    "expected_payoff_behavioral",
    "best_behavioral",
    "MixedStrategy",
    "alternating_mixture",
    "expected_payoff_mixed",
    "best_mixed",
    "game_to_dict",
    "game_from_dict",
]
