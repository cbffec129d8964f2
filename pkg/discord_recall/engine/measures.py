"""Correlation measures for two-qubit states.

Entropies are in bits.  ``J(B|A)`` and ``D(B|A)`` are obtained by measuring
subsystem ``A``; ``J(A|B)`` and ``D(A|B)`` by measuring ``B``.  Measurements are
rank-1 projective measurements parameterised by Bloch angles::

    |ψ⟩  = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩
    |ψ⊥⟩ = sin(θ/2)|0⟩ − e^{iφ} cos(θ/2)|1⟩
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    IDENTITY,
    PAULIS,
    as_matrix,
    check_subsystem,
    embed,
    hermitian_eigenvalues,
    other_subsystem,
    partial_trace,
    partial_transpose,
    von_neumann_entropy,
)
from .qstate import DensityMatrix, Ket, basis_ket

logger = logging.getLogger(__name__)
diag_logger = logging.getLogger("diagnostics")

TWO_PI = 2.0 * math.pi
PROJECTOR_TOL = 1e-12
PROBABILITY_FLOOR = 1e-12
DISCORD_SLACK = 1e-9
TIE_DIGITS = 12


def _matrix(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"expected a two-qubit (4x4) state, got {m.shape}")
    return m


def _wrap_phi(phi: float) -> float:
    phi = phi % TWO_PI
    return 0.0 if phi >= TWO_PI else phi


@dataclass(frozen=True)
class BlochAngles:
    """Polar angle ``theta`` in [0, π] and azimuth ``phi`` in [0, 2π)."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi!r}")

    @classmethod
    def normalised(cls, theta: float, phi: float) -> "BlochAngles":
        """Clip ``theta`` and wrap ``phi`` into range."""
        return cls(min(max(float(theta), 0.0), math.pi), _wrap_phi(float(phi)))

    def kets(self) -> tuple[Ket, Ket]:
        c, s = math.cos(self.theta / 2.0), math.sin(self.theta / 2.0)
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        return (
            Ket(np.array([c, phase * s], dtype=np.complex128)),
            Ket(np.array([s, -phase * c], dtype=np.complex128)),
        )


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Two orthogonal rank-1 projectors acting on one qubit."""

    subsystem: str
    kets: tuple[Ket, Ket]
    labels: tuple[str, str] = ("0", "1")
    projectors: tuple[np.ndarray, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "subsystem", check_subsystem(self.subsystem))
        if len(self.kets) != 2 or len(self.labels) != 2:
            raise ValueError("a qubit measurement has exactly two outcomes")
        projectors = []
        for ket in self.kets:
            p = ket.projector()
            if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL or np.max(np.abs(p - p.conj().T)) > PROJECTOR_TOL:
                raise ValueError("outcome operator is not an orthogonal projector")
            p.setflags(write=False)
            projectors.append(p)
        if np.max(np.abs(sum(projectors) - IDENTITY)) > PROJECTOR_TOL:
            raise ValueError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", tuple(projectors))


def measurement_from_angles(
    subsystem: str, angles: BlochAngles, labels: tuple[str, str] = ("psi", "psi_perp")
) -> ProjectiveMeasurement:
    return ProjectiveMeasurement(subsystem, angles.kets(), labels)


def computational_basis(subsystem: str) -> ProjectiveMeasurement:
    return ProjectiveMeasurement(subsystem, (basis_ket("zero"), basis_ket("one")), ("0", "1"))


def x_basis(subsystem: str) -> ProjectiveMeasurement:
    return ProjectiveMeasurement(subsystem, (basis_ket("plus"), basis_ket("minus")), ("+", "-"))


def measurement_for_basis(subsystem: str, basis: str) -> ProjectiveMeasurement:
    """Parse ``comp``, ``x`` or ``theta,phi`` (radians) into a measurement."""
    key = basis.strip().lower()
    if key in {"comp", "z", "computational"}:
        return computational_basis(subsystem)
    if key == "x":
        return x_basis(subsystem)
    try:
        theta, phi = (float(part) for part in key.split(","))
    except ValueError as exc:
        raise ValueError(f"basis must be 'comp', 'x' or 'theta,phi', got {basis!r}") from exc
    return measurement_from_angles(subsystem, BlochAngles(theta, phi))


# ------------------------------------------------------------------
# Entropic quantities
# ------------------------------------------------------------------


def mutual_information(rho) -> float:
    """``I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)``."""
    m = _matrix(rho)
    return (
        von_neumann_entropy(partial_trace(m, "A"))
        + von_neumann_entropy(partial_trace(m, "B"))
        - von_neumann_entropy(m)
    )


@dataclass(frozen=True)
class ConditionalOutcome:
    """Outcome probability and the post-measurement state of the other qubit."""

    label: str
    probability: float
    state: DensityMatrix | None


def conditional_states(rho, measurement: ProjectiveMeasurement) -> list[ConditionalOutcome]:
    """Born probabilities and conditional states of the unmeasured qubit.

    Outcomes with probability below 1e-12 are reported with probability 0 and
    no state.
    """
    m = _matrix(rho)
    keep = other_subsystem(measurement.subsystem)
    outcomes = []
    for label, projector in zip(measurement.labels, measurement.projectors):
        op = embed(projector, measurement.subsystem)
        p = float(np.real(np.trace(op @ m)))
        if p < PROBABILITY_FLOOR:
            outcomes.append(ConditionalOutcome(label, 0.0, None))
            continue
        post = op @ m @ op / p
        outcomes.append(ConditionalOutcome(label, p, DensityMatrix(partial_trace(post, keep))))
    return outcomes


def classical_correlation_fixed(rho, measurement: ProjectiveMeasurement) -> float:
    """``J = S(ρ_unmeasured) − Σ p_i S(ρ_unmeasured|i)`` for a fixed measurement."""
    m = _matrix(rho)
    unmeasured = partial_trace(m, other_subsystem(measurement.subsystem))
    conditional = sum(
        out.probability * von_neumann_entropy(out.state.matrix)
        for out in conditional_states(m, measurement)
        if out.state is not None
    )
    return von_neumann_entropy(unmeasured) - conditional


def _clamp_discord(value: float) -> float:
    if -DISCORD_SLACK <= value < 0.0:
        return 0.0
    if value < -DISCORD_SLACK:
        logger.warning("discord %.3e is negative beyond numerical slack", value)
    return value


def discord_fixed(rho, measurement: ProjectiveMeasurement) -> float:
    """``D = I − J`` for a fixed measurement basis."""
    return _clamp_discord(mutual_information(rho) - classical_correlation_fixed(rho, measurement))


# ------------------------------------------------------------------
# Optimisation over Bloch angles
# ------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Coarse grid and refinement schedule of the measurement search."""

    theta_points: int = 37
    phi_points: int = 72
    min_rounds: int = 5
    angle_tol: float = 1e-4
    polish: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.theta_points < 2 or self.phi_points < 1:
            raise ValueError("grid needs theta_points >= 2 and phi_points >= 1")
        if self.angle_tol <= 0.0:
            raise ValueError("angle_tol must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def from_resolution(cls, n: int, **kwargs) -> "GridSpec":
        """``n`` polar points and ``2(n − 1)`` azimuthal points."""
        return cls(theta_points=n, phi_points=max(1, 2 * (n - 1)), **kwargs)


def _batched_correlation(m: np.ndarray, subsystem: str, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """``J`` for a stack of angle pairs, evaluated in one einsum pass."""
    c, s = np.cos(thetas / 2.0), np.sin(thetas / 2.0)
    phase = np.exp(1j * phis)
    kets = np.stack(
        [np.stack([c, phase * s], axis=-1), np.stack([s, -phase * c], axis=-1)]
    ).astype(np.complex128)  # (2 outcomes, N, 2)
    tensor = m.reshape(2, 2, 2, 2)
    if subsystem == "A":
        blocks = np.einsum("oni,ikjl,onj->onkl", kets.conj(), tensor, kets)
        unmeasured = partial_trace(m, "B")
    else:
        blocks = np.einsum("onk,ikjl,onl->onij", kets.conj(), tensor, kets)
        unmeasured = partial_trace(m, "A")
    blocks = 0.5 * (blocks + np.conj(np.swapaxes(blocks, -1, -2)))
    probs = np.real(np.trace(blocks, axis1=-2, axis2=-1))
    eig = np.linalg.eigvalsh(blocks)  # (2, N, 2)
    valid = probs > PROBABILITY_FLOOR
    mu = np.where(valid[..., None], eig / np.where(valid, probs, 1.0)[..., None], 0.0)
    mu = np.clip(mu, 0.0, 1.0)
    logs = np.log2(np.where(mu > 0.0, mu, 1.0))
    cond_entropy = -np.sum(mu * logs, axis=-1)
    conditional = np.sum(np.where(valid, probs, 0.0) * cond_entropy, axis=0)
    return von_neumann_entropy(unmeasured) - conditional


def _evaluate(m: np.ndarray, subsystem: str, thetas: np.ndarray, phis: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or thetas.size < 2 * workers:
        return _batched_correlation(m, subsystem, thetas, phis)
    chunks = np.array_split(np.arange(thetas.size), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda idx: _batched_correlation(m, subsystem, thetas[idx], phis[idx]), chunks)
        return np.concatenate(list(parts))


def _select(values: np.ndarray, thetas: np.ndarray, phis: np.ndarray) -> tuple[float, float, float]:
    """Best cell: largest J (to 12 digits), then smallest (θ, φ)."""
    best = min(
        range(values.size),
        key=lambda i: (-round(float(values[i]), TIE_DIGITS), float(thetas[i]), float(phis[i])),
    )
    return float(values[best]), float(thetas[best]), float(phis[best])


@dataclass(frozen=True)
class OptimizedDiscord:
    """Result of :func:`discord_optimized` for one measured subsystem."""

    subsystem: str
    discord: float
    classical_correlation: float
    mutual_information: float
    angles: BlochAngles
    evaluations: int


def max_classical_correlation(rho, subsystem: str, grid: GridSpec | None = None) -> tuple[float, BlochAngles, int]:
    """Maximise ``J`` over projective measurements of ``subsystem``.

    Returns the maximum, the maximising angles and the number of evaluations.
    """
    grid = grid or GridSpec()
    subsystem = check_subsystem(subsystem)
    m = _matrix(rho)

    theta_axis = np.linspace(0.0, math.pi, grid.theta_points)
    phi_axis = np.arange(grid.phi_points) * (TWO_PI / grid.phi_points)
    tt, pp = np.meshgrid(theta_axis, phi_axis, indexing="ij")
    thetas, phis = tt.ravel(), pp.ravel()
    values = _evaluate(m, subsystem, thetas, phis, grid.workers)
    evaluations = values.size
    best_j, best_t, best_p = _select(values, thetas, phis)
    logger.debug("coarse grid %dx%d on %s: J=%.12f at (%.6f, %.6f)",
                 grid.theta_points, grid.phi_points, subsystem, best_j, best_t, best_p)

    step_t = math.pi / (grid.theta_points - 1)
    step_p = TWO_PI / grid.phi_points
    rounds = 0
    offsets = np.array([-1.0, 0.0, 1.0])
    while rounds < grid.min_rounds or max(step_t, step_p) >= grid.angle_tol:
        cand_t = np.clip(best_t + step_t * offsets, 0.0, math.pi)
        cand_p = np.mod(best_p + step_p * offsets, TWO_PI)
        ct, cp = (a.ravel() for a in np.meshgrid(cand_t, cand_p, indexing="ij"))
        values = _batched_correlation(m, subsystem, ct, cp)
        evaluations += values.size
        best_j, best_t, best_p = _select(values, ct, cp)
        rounds += 1
        diag_logger.debug("refine %s round=%d step=(%.2e, %.2e) J=%.12f at (%.8f, %.8f)",
                          subsystem, rounds, step_t, step_p, best_j, best_t, best_p)
        step_t /= 2.0
        step_p /= 2.0

    if grid.polish:
        def objective(x: np.ndarray) -> float:
            a = BlochAngles.normalised(x[0], x[1])
            return -float(_batched_correlation(m, subsystem, np.array([a.theta]), np.array([a.phi]))[0])

        result = minimize(objective, np.array([best_t, best_p]), method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 400})
        evaluations += int(result.nfev)
        polished = BlochAngles.normalised(result.x[0], result.x[1])
        polished_j = -objective(np.array([polished.theta, polished.phi]))
        if round(polished_j, TIE_DIGITS) > round(best_j, TIE_DIGITS):
            best_j, best_t, best_p = polished_j, polished.theta, polished.phi

    return best_j, BlochAngles.normalised(best_t, best_p), evaluations


def discord_optimized(rho, subsystem: str, grid: GridSpec | None = None) -> OptimizedDiscord:
    """``D = I − max_Π J`` with the maximising Bloch angles.

    Coarse grid search, then local 3x3 grid refinement halving the step until
    both steps drop below ``grid.angle_tol`` (at least ``grid.min_rounds``
    rounds), then an optional Nelder–Mead polish kept only if it improves J.
    Grid cells may be evaluated in any order; the reduction is deterministic.
    """
    subsystem = check_subsystem(subsystem)
    info = mutual_information(rho)
    j_max, angles, evaluations = max_classical_correlation(rho, subsystem, grid)
    return OptimizedDiscord(
        subsystem=subsystem,
        discord=_clamp_discord(info - j_max),
        classical_correlation=j_max,
        mutual_information=info,
        angles=angles,
        evaluations=evaluations,
    )


# ------------------------------------------------------------------
# Entanglement and Bell nonlocality
# ------------------------------------------------------------------


def negativity(rho) -> float:
    """Sum of |negative eigenvalues| of the partial transpose over ``B``."""
    values = hermitian_eigenvalues(partial_transpose(_matrix(rho), "B"))
    return float(sum(-v for v in values if v < 0.0))


def correlation_tensor(rho) -> np.ndarray:
    """``T[i, j] = Tr[ρ (σ_i ⊗ σ_j)]`` over the Pauli operators x, y, z."""
    m = _matrix(rho)
    return np.array(
        [[float(np.real(np.trace(m @ np.kron(si, sj)))) for sj in PAULIS] for si in PAULIS]
    )


def chsh_max(rho) -> float:
    """Largest CHSH value over local settings: ``2 √(u1 + u2)``.

    ``u1``, ``u2`` are the two largest eigenvalues of ``TᵀT``.  A value above 2
    violates the CHSH inequality.
    """
    t = correlation_tensor(rho)
    u = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return 2.0 * math.sqrt(max(float(u[0] + u[1]), 0.0))


# ------------------------------------------------------------------
# Aggregate report
# ------------------------------------------------------------------


def direction_label(measured: str) -> str:
    """``D(B|A)`` when ``A`` is measured, ``D(A|B)`` when ``B`` is."""
    measured = check_subsystem(measured)
    return f"{other_subsystem(measured)}|{measured}"


@dataclass(frozen=True)
class FixedCorrelation:
    measured: str
    basis: str
    classical_correlation: float
    discord: float


@dataclass(frozen=True)
class CorrelationReport:
    """Entropies, mutual information, J/D, negativity and CHSH for one state."""

    s_a: float
    s_b: float
    s_ab: float
    mutual_information: float
    fixed: tuple[FixedCorrelation, ...]
    optimized: dict[str, OptimizedDiscord]
    negativity: float
    chsh_max: float

    def fixed_for(self, measured: str, basis: str) -> FixedCorrelation:
        for entry in self.fixed:
            if entry.measured == measured and entry.basis == basis:
                return entry
        raise KeyError(f"no fixed-basis entry for {basis!r} on {measured}")

    def consistency_failures(self, tol: float = 1e-9) -> list[str]:
        failures = []
        if abs(self.mutual_information - (self.s_a + self.s_b - self.s_ab)) > tol:
            failures.append("I != S_A + S_B - S_AB")
        for entry in self.fixed:
            opt = self.optimized.get(entry.measured)
            if opt is not None and opt.discord > entry.discord + tol:
                failures.append(
                    f"optimized D({direction_label(entry.measured)}) exceeds {entry.basis} value"
                )
        return failures

    def to_dict(self) -> dict[str, Any]:
        return {
            "S_A": self.s_a,
            "S_B": self.s_b,
            "S_AB": self.s_ab,
            "I": self.mutual_information,
            "fixed": [
                {
                    "direction": direction_label(e.measured),
                    "measured": e.measured,
                    "basis": e.basis,
                    "J": e.classical_correlation,
                    "D": e.discord,
                }
                for e in self.fixed
            ],
            "optimized": {
                direction_label(k): {
                    "measured": v.subsystem,
                    "J": v.classical_correlation,
                    "D": v.discord,
                    "theta": v.angles.theta,
                    "phi": v.angles.phi,
                }
                for k, v in sorted(self.optimized.items())
            },
            "negativity": self.negativity,
            "chsh_max": self.chsh_max,
        }


def correlation_report(
    rho,
    *,
    measured: Sequence[str] = ("A", "B"),
    bases: Sequence[str] = ("comp", "x"),
    grid: GridSpec | None = None,
) -> CorrelationReport:
    """Compute every measure for ``rho``.

    Fixed-basis values are reported for each basis in ``bases`` (``comp``,
    ``x`` or ``theta,phi``) on each subsystem in ``measured``, next to the
    optimised value for that subsystem.
    """
    m = _matrix(rho)
    s_a = von_neumann_entropy(partial_trace(m, "A"))
    s_b = von_neumann_entropy(partial_trace(m, "B"))
    s_ab = von_neumann_entropy(m)
    fixed = []
    optimized = {}
    for sub in (check_subsystem(x) for x in measured):
        for basis in bases:
            meas = measurement_for_basis(sub, basis)
            j = classical_correlation_fixed(m, meas)
            fixed.append(FixedCorrelation(sub, basis, j, discord_fixed(m, meas)))
        optimized[sub] = discord_optimized(m, sub, grid)
    return CorrelationReport(
        s_a=s_a,
        s_b=s_b,
        s_ab=s_ab,
        mutual_information=s_a + s_b - s_ab,
        fixed=tuple(fixed),
        optimized=optimized,
        negativity=negativity(m),
        chsh_max=chsh_max(m),
    )


__all__ = [
    "BlochAngles",
    "ProjectiveMeasurement",
    "measurement_from_angles",
    "computational_basis",
    "x_basis",
    "measurement_for_basis",
    "mutual_information",
    "ConditionalOutcome",
    "conditional_states",
    "classical_correlation_fixed",
    "discord_fixed",
    "GridSpec",
    "OptimizedDiscord",
    "max_classical_correlation",
    "discord_optimized",
    "negativity",
    "correlation_tensor",
    "chsh_max",
    "direction_label",
    "FixedCorrelation",
    "CorrelationReport",
    "correlation_report",
]
