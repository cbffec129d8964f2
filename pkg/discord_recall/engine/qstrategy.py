"""Behavioral quantum strategy: memoryless local measurements on a shared state.

Stage ``k`` of the game is played by measuring one qubit and mapping the
outcome to an action.  The reference semantics is sequential collapse: the
first measurement splits the state into renormalised branches and the second
measurement (the same object in every branch, since nothing is remembered)
is applied to each branch.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from born_sampling import RngManager, sample_binary, sample_binary_n

from .games import ACTIONS, ExtensiveGame
from .linalg import embed, partial_trace
from .measures import ProjectiveMeasurement, _matrix, computational_basis, x_basis
from .qstate import DensityMatrix

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-12
DISTRIBUTION_TOL = 1e-12
CHI2_QUANTILE = 0.999


class SchemeError(ValueError):
    """Raised for an inconsistent measurement scheme."""


class StageMismatchError(ValueError):
    """Raised when a scheme and a game disagree on the number of stages."""


@dataclass(frozen=True, eq=False)
class MeasurementStage:
    """Measurement played at ``stage`` and its outcome-label → action map."""

    stage: int
    measurement: ProjectiveMeasurement
    action_map: Mapping[str, str]

    def __post_init__(self) -> None:
        mapping = dict(self.action_map)
        missing = [lbl for lbl in self.measurement.labels if lbl not in mapping]
        if missing:
            raise SchemeError(f"stage {self.stage}: no action for outcomes {missing}")
        bad = [a for a in mapping.values() if a not in ACTIONS]
        if bad:
            raise SchemeError(f"stage {self.stage}: unknown actions {bad}")
        object.__setattr__(self, "action_map", MappingProxyType(mapping))

    @property
    def subsystem(self) -> str:
        return self.measurement.subsystem

    def action(self, outcome: int) -> str:
        return self.action_map[self.measurement.labels[outcome]]


@dataclass(frozen=True, eq=False)
class MeasurementScheme:
    """Measurement stages listed in evaluation order."""

    steps: tuple[MeasurementStage, ...]

    def __post_init__(self) -> None:
        steps = tuple(self.steps)
        if len(steps) != 2:
            raise SchemeError("a two-qubit scheme has exactly two measurement stages")
        subsystems = sorted(s.subsystem for s in steps)
        if subsystems != ["A", "B"]:
            raise SchemeError("each qubit must be measured exactly once")
        if sorted(s.stage for s in steps) != [0, 1]:
            raise SchemeError("stage indices must be 0 and 1")
        object.__setattr__(self, "steps", steps)

    @property
    def num_stages(self) -> int:
        return len(self.steps)

    def reversed(self) -> "MeasurementScheme":
        """Same stages, opposite evaluation order."""
        return MeasurementScheme(tuple(reversed(self.steps)))

    def with_action_map(self, stage: int, action_map: Mapping[str, str]) -> "MeasurementScheme":
        return MeasurementScheme(
            tuple(
                MeasurementStage(s.stage, s.measurement, action_map) if s.stage == stage else s
                for s in self.steps
            )
        )

    def with_swapped_actions(self, stage: int) -> "MeasurementScheme":
        """Exchange L and R in the action map of ``stage``."""
        swap = {"L": "R", "R": "L"}
        step = next(s for s in self.steps if s.stage == stage)
        return self.with_action_map(stage, {k: swap[v] for k, v in step.action_map.items()})


def make_alternating_scheme() -> MeasurementScheme:
    """Stage 1 measures A in {|0⟩, |1⟩} (0→L, 1→R); stage 2 measures B in
    {|+⟩, |−⟩} (−→L, +→R)."""
    return MeasurementScheme(
        (
            MeasurementStage(0, computational_basis("A"), {"0": "L", "1": "R"}),
            MeasurementStage(1, x_basis("B"), {"-": "L", "+": "R"}),
        )
    )


@dataclass(frozen=True)
class ActionDistribution:
    """Probability of each action tuple, indexed by stage."""

    probabilities: Mapping[tuple[str, ...], float]

    def __post_init__(self) -> None:
        probs = {tuple(k): float(v) for k, v in dict(self.probabilities).items()}
        stages = {len(k) for k in probs} or {2}
        if len(stages) != 1:
            raise ValueError("action tuples must all have the same length")
        (n,) = stages
        full = {seq: probs.get(seq, 0.0) for seq in itertools.product(ACTIONS, repeat=n)}
        total = sum(full.values())
        if abs(total - 1.0) > DISTRIBUTION_TOL:
            raise ValueError(f"action probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probabilities", MappingProxyType(full))

    @property
    def num_stages(self) -> int:
        return len(next(iter(self.probabilities)))

    def probability(self, *actions: str) -> float:
        return self.probabilities.get(tuple(actions), 0.0)

    def marginal(self, stage: int) -> dict[str, float]:
        out = {a: 0.0 for a in ACTIONS}
        for seq, p in self.probabilities.items():
            out[seq[stage]] += p
        return out

    def support(self, tol: float = PROBABILITY_FLOOR) -> list[tuple[str, ...]]:
        return [seq for seq, p in self.probabilities.items() if p > tol]

    def max_difference(self, other: "ActionDistribution") -> float:
        return max(abs(p - other.probability(*seq)) for seq, p in self.probabilities.items())

    def to_dict(self) -> dict[str, float]:
        return {"".join(seq): p for seq, p in self.probabilities.items()}


def _snap(probs: Sequence[float]) -> list[float]:
    """Zero out probabilities below 1e-12 and renormalise the rest."""
    snapped = [p if p >= PROBABILITY_FLOOR else 0.0 for p in probs]
    total = sum(snapped)
    return [p / total for p in snapped] if total > 0.0 else snapped


@dataclass(frozen=True)
class CollapseBranch:
    """One outcome of the first measurement and what the second one sees."""

    outcome: int
    probability: float
    post_state: DensityMatrix | None
    next_measurement: ProjectiveMeasurement
    next_probabilities: tuple[float, float]


def collapse_tree(rho, scheme: MeasurementScheme) -> list[CollapseBranch]:
    """Apply the first measurement, renormalise, then apply the second."""
    m = _matrix(rho)
    first, second = scheme.steps
    raw, posts = [], []
    for projector in first.measurement.projectors:
        op = embed(projector, first.subsystem)
        p = float(np.real(np.trace(op @ m)))
        raw.append(p)
        posts.append(op @ m @ op / p if p >= PROBABILITY_FLOOR else None)
    branches = []
    for outcome, (p, post) in enumerate(zip(_snap(raw), posts)):
        if post is None or p == 0.0:
            branches.append(CollapseBranch(outcome, 0.0, None, second.measurement, (0.0, 0.0)))
            continue
        q = [
            float(np.real(np.trace(embed(proj, second.subsystem) @ post)))
            for proj in second.measurement.projectors
        ]
        q0, q1 = _snap(q)
        branches.append(CollapseBranch(outcome, p, DensityMatrix(post), second.measurement, (q0, q1)))
        logger.debug("branch %s=%s p=%.12f next=%s", first.subsystem,
                     first.measurement.labels[outcome], p, (q0, q1))
    return branches


def _actions_for(scheme: MeasurementScheme, first_outcome: int, second_outcome: int) -> tuple[str, ...]:
    first, second = scheme.steps
    actions = [""] * scheme.num_stages
    actions[first.stage] = first.action(first_outcome)
    actions[second.stage] = second.action(second_outcome)
    return tuple(actions)


def joint_action_distribution(rho, scheme: MeasurementScheme) -> ActionDistribution:
    """Distribution of (a1, a2) under sequential collapse."""
    probs: dict[tuple[str, ...], float] = {}
    for branch in collapse_tree(rho, scheme):
        for j, q in enumerate(branch.next_probabilities):
            key = _actions_for(scheme, branch.outcome, j)
            probs[key] = probs.get(key, 0.0) + branch.probability * q
    return ActionDistribution(probs)


def joint_action_distribution_born(rho, scheme: MeasurementScheme) -> ActionDistribution:
    """Cross-check: joint Born rule with the commuting product ``P_i ⊗ Q_j``."""
    m = _matrix(rho)
    first, second = scheme.steps
    probs: dict[tuple[str, ...], float] = {}
    for i, p_op in enumerate(first.measurement.projectors):
        for j, q_op in enumerate(second.measurement.projectors):
            op = embed(p_op, first.subsystem) @ embed(q_op, second.subsystem)
            key = _actions_for(scheme, i, j)
            probs[key] = probs.get(key, 0.0) + float(np.real(np.trace(op @ m)))
    return ActionDistribution(probs)


def no_signaling_residual(rho, scheme: MeasurementScheme) -> float:
    """Largest gap between a stage's action marginal and the Born rule on the
    reduced state of its qubit alone."""
    m = _matrix(rho)
    dist = joint_action_distribution(m, scheme)
    residual = 0.0
    for step in scheme.steps:
        local = partial_trace(m, step.subsystem)
        expected = {a: 0.0 for a in ACTIONS}
        for outcome, projector in enumerate(step.measurement.projectors):
            expected[step.action(outcome)] += float(np.real(np.trace(projector @ local)))
        marginal = dist.marginal(step.stage)
        residual = max(residual, max(abs(marginal[a] - expected[a]) for a in ACTIONS))
    return residual


def expected_quantum_payoff(rho, scheme: MeasurementScheme, game: ExtensiveGame) -> float:
    if scheme.num_stages != game.stages:
        raise StageMismatchError(
            f"scheme has {scheme.num_stages} stages but the game has {game.stages}"
        )
    dist = joint_action_distribution(rho, scheme)
    return sum(p * game.payoff_of(seq) for seq, p in dist.probabilities.items())


def action_mutual_information(dist: ActionDistribution | Mapping[tuple[str, ...], float]) -> float:
    """Shannon mutual information (bits) between the two stage actions."""
    if not isinstance(dist, ActionDistribution):
        dist = ActionDistribution(dist)
    if dist.num_stages != 2:
        raise ValueError("mutual information needs a two-stage distribution")
    joint = np.array([[dist.probability(a, b) for b in ACTIONS] for a in ACTIONS])
    h_joint = stats.entropy(joint.ravel(), base=2)
    h_first = stats.entropy(joint.sum(axis=1), base=2)
    h_second = stats.entropy(joint.sum(axis=0), base=2)
    return max(float(h_first + h_second - h_joint), 0.0)


# ------------------------------------------------------------------
# Monte Carlo
# ------------------------------------------------------------------


def sample_play(
    rho,
    scheme: MeasurementScheme,
    seed: int,
    n: int,
    *,
    streams: int = 1,
) -> dict[tuple[str, ...], int]:
    """Play the scheme ``n`` times by sequential collapse.

    Plays are split into ``streams`` independent PCG64 streams named
    ``("play", k)``.  Within a stream all stage-1 uniforms of the chunk are
    drawn first, then one stage-2 uniform per play; counts of all streams are
    summed.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if streams < 1:
        raise ValueError("streams must be >= 1")
    tree = collapse_tree(rho, scheme)
    p_first = tree[0].probability
    next_first = np.array([branch.next_probabilities[0] for branch in tree])
    counts = {seq: 0 for seq in itertools.product(ACTIONS, repeat=scheme.num_stages)}
    manager = RngManager(seed)
    sizes = [n // streams + (1 if k < n % streams else 0) for k in range(streams)]
    for k, size in enumerate(sizes):
        if size == 0:
            continue
        rng = manager.get_stream("play", k)
        first = sample_binary_n(p_first, size, rng)
        second = sample_binary(next_first[first], rng)
        for i, j in itertools.product((0, 1), repeat=2):
            hits = int(np.count_nonzero((first == i) & (second == j)))
            if hits:
                counts[_actions_for(scheme, i, j)] += hits
    logger.debug("sampled %d plays with seed %d over %d stream(s)", n, seed, streams)
    return counts


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    critical: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical


def chi_square(counts: Mapping[tuple[str, ...], int], dist: ActionDistribution) -> ChiSquareResult:
    """Goodness of fit of ``counts`` against ``dist`` over its support.

    Counts on action tuples outside the support give an infinite statistic.
    """
    support = dist.support()
    total = sum(counts.values())
    if any(c > 0 for seq, c in counts.items() if seq not in support):
        return ChiSquareResult(float("inf"), max(len(support) - 1, 0), 0.0, float("nan"))
    dof = len(support) - 1
    if dof < 1 or total == 0:
        return ChiSquareResult(0.0, max(dof, 0), 1.0, 0.0)
    observed = np.array([counts.get(seq, 0) for seq in support], dtype=float)
    probs = np.array([dist.probability(*seq) for seq in support])
    expected = total * probs / probs.sum()
    result = stats.chisquare(observed, expected)
    return ChiSquareResult(
        float(result.statistic), dof, float(result.pvalue), float(stats.chi2.ppf(CHI2_QUANTILE, dof))
    )


__all__ = [
    "SchemeError",
    "StageMismatchError",
    "MeasurementStage",
    "MeasurementScheme",
    "make_alternating_scheme",
    "ActionDistribution",
    "CollapseBranch",
    "collapse_tree",
    "joint_action_distribution",
    "joint_action_distribution_born",
    "no_signaling_residual",
    "expected_quantum_payoff",
    "action_mutual_information",
    "sample_play",
    "ChiSquareResult",
    "chi_square",
]
