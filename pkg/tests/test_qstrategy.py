import itertools
import math

import numpy as np
import pytest

from discord_recall.engine.games import ExtensiveGame, make_recall_game
from discord_recall.engine.measures import (
    BlochAngles,
    computational_basis,
    measurement_from_angles,
    x_basis,
)
from discord_recall.engine.qstate import (
    bell_state,
    coin_toss_state,
    make_discordant_state,
    random_separable_state,
)
from discord_recall.engine.qstrategy import (
    ActionDistribution,
    MeasurementScheme,
    MeasurementStage,
    SchemeError,
    StageMismatchError,
    action_mutual_information,
    chi_square,
    collapse_tree,
    expected_quantum_payoff,
    joint_action_distribution,
    joint_action_distribution_born,
    make_alternating_scheme,
    no_signaling_residual,
    sample_play,
)

RHO = make_discordant_state()
SCHEME = make_alternating_scheme()
GAME = make_recall_game()


def test_alternating_scheme_maps():
    first, second = SCHEME.steps
    assert first.subsystem == "A" and first.stage == 0
    assert dict(first.action_map) == {"0": "L", "1": "R"}
    assert second.subsystem == "B" and second.stage == 1
    assert dict(second.action_map) == {"-": "L", "+": "R"}


def test_scheme_measures_each_qubit_once():
    stage = MeasurementStage(0, computational_basis("A"), {"0": "L", "1": "R"})
    other = MeasurementStage(1, x_basis("A"), {"+": "R", "-": "L"})
    with pytest.raises(SchemeError):
        MeasurementScheme((stage, other))


def test_action_map_must_be_total():
    with pytest.raises(SchemeError):
        MeasurementStage(0, computational_basis("A"), {"0": "L"})
    with pytest.raises(SchemeError):
        MeasurementStage(0, computational_basis("A"), {"0": "L", "1": "Z"})


def test_joint_distribution_discordant_state():
    dist = joint_action_distribution(RHO, SCHEME)
    assert dist.probability("L", "R") == pytest.approx(0.5, abs=1e-12)
    assert dist.probability("R", "L") == pytest.approx(0.5, abs=1e-12)
    assert dist.probability("L", "L") == 0.0
    assert dist.probability("R", "R") == 0.0


def test_joint_distribution_coin_toss():
    dist = joint_action_distribution(coin_toss_state(), SCHEME)
    for p in dist.probabilities.values():
        assert p == pytest.approx(0.25, abs=1e-12)


def test_swapped_stage2_map():
    swapped = SCHEME.with_swapped_actions(1)
    dist = joint_action_distribution(RHO, swapped)
    assert dist.probability("L", "L") == pytest.approx(0.5, abs=1e-12)
    assert dist.probability("R", "R") == pytest.approx(0.5, abs=1e-12)
    assert expected_quantum_payoff(RHO, swapped, GAME) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "state, expected",
    [(RHO, 1.0), (coin_toss_state(), 0.5)],
)
def test_expected_quantum_payoff(state, expected):
    assert expected_quantum_payoff(state, SCHEME, GAME) == pytest.approx(expected, abs=1e-12)


def test_stage_mismatch():
    three = ExtensiveGame(3, ((0, 1, 2),), {"".join(s): 0.0 for s in itertools.product("LR", repeat=3)})
    with pytest.raises(StageMismatchError):
        expected_quantum_payoff(RHO, SCHEME, three)


def test_collapse_tree_is_memoryless():
    tree = collapse_tree(RHO, SCHEME)
    assert [b.probability for b in tree] == pytest.approx([0.5, 0.5], abs=1e-12)
    for branch in tree:
        assert branch.next_measurement is SCHEME.steps[1].measurement
    assert tree[0].next_probabilities == pytest.approx((1.0, 0.0), abs=1e-12)
    assert tree[1].next_probabilities == pytest.approx((0.0, 1.0), abs=1e-12)


def test_collapse_matches_born(rng):
    states = [RHO, bell_state(), coin_toss_state()] + [random_separable_state(rng) for _ in range(5)]
    for rho in states:
        collapse = joint_action_distribution(rho, SCHEME)
        born = joint_action_distribution_born(rho, SCHEME)
        assert collapse.max_difference(born) <= 1e-12


def test_evaluation_order_irrelevant(rng):
    tilted = MeasurementScheme((
        MeasurementStage(0, measurement_from_angles("A", BlochAngles(0.7, 1.3), ("u", "d")),
                         {"u": "R", "d": "L"}),
        SCHEME.steps[1],
    ))
    for rho in (RHO, bell_state(), random_separable_state(rng)):
        for scheme in (SCHEME, tilted):
            forward = joint_action_distribution(rho, scheme)
            backward = joint_action_distribution(rho, scheme.reversed())
            assert forward.max_difference(backward) <= 1e-12


def test_no_signaling(rng):
    for rho in (RHO, bell_state(), random_separable_state(rng)):
        assert no_signaling_residual(rho, SCHEME) <= 1e-12
        assert no_signaling_residual(rho, SCHEME.reversed()) <= 1e-12


def test_action_distribution_must_sum_to_one():
    with pytest.raises(ValueError):
        ActionDistribution({("L", "R"): 0.7})


def test_action_distribution_marginal():
    dist = joint_action_distribution(RHO, SCHEME)
    assert dist.marginal(0) == pytest.approx({"L": 0.5, "R": 0.5})
    assert dist.to_dict() == pytest.approx({"LL": 0.0, "LR": 0.5, "RL": 0.5, "RR": 0.0})


@pytest.mark.parametrize(
    "state, expected",
    [(RHO, 1.0), (coin_toss_state(), 0.0)],
)
def test_action_mutual_information(state, expected):
    dist = joint_action_distribution(state, SCHEME)
    assert action_mutual_information(dist) == pytest.approx(expected, abs=1e-12)


def test_sample_play_zero():
    counts = sample_play(RHO, SCHEME, seed=1, n=0)
    assert set(counts.values()) == {0}
    assert len(counts) == 4


def test_sample_play_rejects_negative():
    with pytest.raises(ValueError):
        sample_play(RHO, SCHEME, seed=1, n=-1)


def test_sample_play_support_and_concentration():
    n = 100_000
    counts = sample_play(RHO, SCHEME, seed=1, n=n)
    assert counts[("L", "L")] == 0
    assert counts[("R", "R")] == 0
    assert sum(counts.values()) == n
    assert abs(counts[("L", "R")] / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_sample_play_deterministic():
    a = sample_play(RHO, SCHEME, seed=42, n=5_000)
    b = sample_play(RHO, SCHEME, seed=42, n=5_000)
    c = sample_play(RHO, SCHEME, seed=43, n=5_000)
    assert a == b
    assert a != c


def test_sample_play_streams_sum_to_n():
    counts = sample_play(coin_toss_state(), SCHEME, seed=7, n=10_001, streams=4)
    assert sum(counts.values()) == 10_001
    with pytest.raises(ValueError):
        sample_play(RHO, SCHEME, seed=7, n=10, streams=0)


def test_chi_square_coin_toss():
    n = 100_000
    dist = joint_action_distribution(coin_toss_state(), SCHEME)
    counts = sample_play(coin_toss_state(), SCHEME, seed=3, n=n)
    result = chi_square(counts, dist)
    assert result.dof == 3
    assert result.passed


def test_chi_square_discordant_state():
    dist = joint_action_distribution(RHO, SCHEME)
    result = chi_square(sample_play(RHO, SCHEME, seed=5, n=100_000), dist)
    assert result.dof == 1
    assert result.passed


def test_chi_square_out_of_support():
    dist = joint_action_distribution(RHO, SCHEME)
    counts = {("L", "L"): 1, ("L", "R"): 10, ("R", "L"): 10, ("R", "R"): 0}
    result = chi_square(counts, dist)
    assert math.isinf(result.statistic)
    assert not result.passed


def test_sampling_matches_analytic_for_tilted_state(rng):
    rho = random_separable_state(rng)
    dist = joint_action_distribution(rho, SCHEME)
    n = 50_000
    counts = sample_play(rho, SCHEME, seed=11, n=n)
    for seq, p in dist.probabilities.items():
        assert abs(counts[seq] / n - p) <= 5 * math.sqrt(max(p * (1 - p), 1e-12) / n) + 1e-12
    assert np.isfinite(chi_square(counts, dist).statistic)
