import math

import numpy as np
import pytest

from discord_recall.engine.measures import (
    BlochAngles,
    GridSpec,
    ProjectiveMeasurement,
    _batched_correlation,
    chsh_max,
    classical_correlation_fixed,
    computational_basis,
    conditional_states,
    correlation_report,
    correlation_tensor,
    discord_fixed,
    discord_optimized,
    measurement_for_basis,
    measurement_from_angles,
    mutual_information,
    negativity,
    x_basis,
)
from discord_recall.engine.qstate import (
    basis_ket,
    bell_state,
    coin_toss_state,
    make_discordant_state,
    maximally_mixed,
    product_state,
    random_separable_state,
    validate,
    DensityMatrix,
)

RHO = make_discordant_state()
COARSE = GridSpec(theta_points=9, phi_points=16)


@pytest.mark.parametrize(
    "state, expected",
    [(RHO, 1.0), (coin_toss_state(), 0.0), (bell_state(), 2.0)],
)
def test_mutual_information(state, expected):
    assert mutual_information(state) == pytest.approx(expected, abs=1e-9)


def test_bloch_angles_range():
    with pytest.raises(ValueError):
        BlochAngles(-0.1, 0.0)
    with pytest.raises(ValueError):
        BlochAngles(0.0, 2 * math.pi)
    wrapped = BlochAngles.normalised(4.0, 2 * math.pi + 0.5)
    assert wrapped.theta == math.pi
    assert wrapped.phi == pytest.approx(0.5)


def test_measurement_from_angles_poles_and_equator():
    comp = measurement_from_angles("A", BlochAngles(0.0, 0.0))
    assert np.allclose(comp.projectors[0], np.diag([1, 0]), atol=1e-12)
    xm = measurement_from_angles("A", BlochAngles(math.pi / 2, 0.0))
    assert np.allclose(xm.projectors[0], 0.5 * np.ones((2, 2)), atol=1e-12)
    assert np.allclose(xm.projectors[1], 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-12)


@pytest.mark.parametrize("theta, phi", [(0.3, 1.1), (2.0, 5.9), (math.pi, 0.0)])
def test_measurement_completeness(theta, phi):
    m = measurement_from_angles("B", BlochAngles(theta, phi))
    assert np.allclose(sum(m.projectors), np.eye(2), atol=1e-12)
    for p in m.projectors:
        assert np.allclose(p @ p, p, atol=1e-12)


def test_measurement_rejects_non_orthogonal_kets():
    with pytest.raises(ValueError):
        ProjectiveMeasurement("A", (basis_ket("zero"), basis_ket("plus")))


def test_measurement_for_basis_parsing():
    assert measurement_for_basis("A", "comp").labels == ("0", "1")
    assert measurement_for_basis("B", "x").labels == ("+", "-")
    custom = measurement_for_basis("A", f"{math.pi / 2},0")
    assert np.allclose(custom.projectors[0], x_basis("A").projectors[0], atol=1e-12)
    with pytest.raises(ValueError):
        measurement_for_basis("A", "y-ish")


def test_conditional_states_comp_on_a():
    outcomes = conditional_states(RHO, computational_basis("A"))
    assert [o.probability for o in outcomes] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert outcomes[0].state.allclose(basis_ket("plus").projector(), atol=1e-12)
    assert outcomes[1].state.allclose(basis_ket("minus").projector(), atol=1e-12)


def test_conditional_states_comp_on_b():
    outcomes = conditional_states(RHO, computational_basis("B"))
    for out in outcomes:
        assert out.probability == pytest.approx(0.5, abs=1e-12)
        assert out.state.allclose(np.eye(2) / 2, atol=1e-12)


def test_conditional_states_x_on_b():
    outcomes = conditional_states(RHO, x_basis("B"))
    assert outcomes[0].state.allclose(np.diag([1, 0]), atol=1e-12)
    assert outcomes[1].state.allclose(np.diag([0, 1]), atol=1e-12)


def test_conditional_states_zero_probability_branch():
    rho = product_state(DensityMatrix(np.diag([1.0, 0.0])), maximally_mixed(2))
    outcomes = conditional_states(rho, computational_basis("A"))
    assert outcomes[1].probability == 0.0
    assert outcomes[1].state is None


def test_conditional_states_normalised_and_valid(rng):
    for _ in range(10):
        rho = random_separable_state(rng)
        angles = BlochAngles(float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi)))
        outcomes = conditional_states(rho, measurement_from_angles("A", angles))
        assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)
        for out in outcomes:
            if out.state is not None:
                assert validate(out.state).passed


@pytest.mark.parametrize(
    "measurement, j, d",
    [
        (computational_basis("A"), 1.0, 0.0),
        (computational_basis("B"), 0.0, 1.0),
        (x_basis("B"), 1.0, 0.0),
    ],
)
def test_fixed_basis_values(measurement, j, d):
    assert classical_correlation_fixed(RHO, measurement) == pytest.approx(j, abs=1e-9)
    assert discord_fixed(RHO, measurement) == pytest.approx(d, abs=1e-9)


def test_fixed_discord_of_product_state():
    rho = product_state(DensityMatrix(np.diag([0.3, 0.7])), maximally_mixed(2))
    assert discord_fixed(rho, x_basis("A")) == pytest.approx(0.0, abs=1e-12)


def test_batched_matches_scalar_path(rng):
    rho = random_separable_state(rng).matrix
    thetas = rng.uniform(0, math.pi, size=12)
    phis = rng.uniform(0, 2 * math.pi, size=12)
    for sub in ("A", "B"):
        batched = _batched_correlation(rho, sub, thetas, phis)
        for t, p, j in zip(thetas, phis, batched):
            meas = measurement_from_angles(sub, BlochAngles(float(t), float(p)))
            assert j == pytest.approx(classical_correlation_fixed(rho, meas), abs=1e-10)


@pytest.mark.parametrize("subsystem", ["A", "B"])
def test_optimized_discord_discordant_state(subsystem):
    result = discord_optimized(RHO, subsystem)
    assert result.discord == pytest.approx(0.0, abs=1e-6)
    assert result.classical_correlation == pytest.approx(1.0, abs=1e-6)


def test_optimized_angles_pick_x_basis_on_b():
    result = discord_optimized(RHO, "B")
    assert result.angles.theta == pytest.approx(math.pi / 2, abs=1e-6)
    assert result.angles.phi == pytest.approx(0.0, abs=1e-6)


def test_optimized_discord_bell_state():
    assert discord_optimized(bell_state(), "A").discord == pytest.approx(1.0, abs=1e-6)


def test_optimizer_is_deterministic_with_workers():
    serial = discord_optimized(bell_state(), "B", COARSE)
    threaded = discord_optimized(bell_state(), "B", GridSpec(theta_points=9, phi_points=16, workers=4))
    assert serial.angles.theta == pytest.approx(threaded.angles.theta, abs=1e-12)
    assert serial.angles.phi == pytest.approx(threaded.angles.phi, abs=1e-12)
    assert serial.discord == pytest.approx(threaded.discord, abs=1e-12)


@pytest.mark.slow
def test_optimizer_dominates_sampled_grid(rng):
    states = [RHO, bell_state()] + [random_separable_state(rng) for _ in range(3)]
    thetas = np.linspace(0.0, math.pi, 17)
    phis = np.linspace(0.0, 2 * math.pi, 33, endpoint=False)
    for rho in states:
        for sub in ("A", "B"):
            best = discord_optimized(rho, sub).discord
            for t in thetas:
                for p in phis:
                    meas = measurement_from_angles(sub, BlochAngles(float(t), float(p)))
                    assert best <= discord_fixed(rho, meas) + 1e-9


@pytest.mark.parametrize(
    "state, expected",
    [(RHO, 0.0), (bell_state(), 0.5), (coin_toss_state(), 0.0)],
)
def test_negativity(state, expected):
    assert negativity(state) == pytest.approx(expected, abs=1e-9)


def test_negativity_of_random_separable_states(rng):
    for _ in range(25):
        assert negativity(random_separable_state(rng, terms=4)) == pytest.approx(0.0, abs=1e-9)


def test_correlation_tensor_of_discordant_state():
    expected = np.zeros((3, 3))
    expected[2, 0] = 1.0
    assert np.allclose(correlation_tensor(RHO), expected, atol=1e-12)


@pytest.mark.parametrize(
    "state, expected",
    [(RHO, 2.0), (bell_state(), 2 * math.sqrt(2)), (maximally_mixed(4), 0.0)],
)
def test_chsh_max(state, expected):
    assert chsh_max(state) == pytest.approx(expected, abs=1e-9)


def test_tsirelson_bound(rng):
    for _ in range(10):
        assert chsh_max(random_separable_state(rng)) <= 2 * math.sqrt(2) + 1e-9


def test_correlation_report_invariants(rng):
    for rho in (RHO, random_separable_state(rng)):
        report = correlation_report(rho, grid=COARSE)
        assert report.consistency_failures() == []
        assert 0.0 <= report.mutual_information <= 2.0 + 1e-9
        for entry in report.fixed:
            assert -1e-9 <= entry.classical_correlation <= min(report.s_a, report.s_b) + 1e-9


def test_correlation_report_labels():
    data = correlation_report(RHO, grid=COARSE).to_dict()
    assert set(data["optimized"]) == {"B|A", "A|B"}
    comp_b = [f for f in data["fixed"] if f["direction"] == "A|B" and f["basis"] == "comp"]
    assert comp_b[0]["D"] == pytest.approx(1.0, abs=1e-9)
    assert data["optimized"]["A|B"]["D"] == pytest.approx(0.0, abs=1e-6)
