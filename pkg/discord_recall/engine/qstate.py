"""Kets, density matrices and the discordant two-qubit state.

The discordant state is

    ρ_AB = ½ |0⟩⟨0| ⊗ |+⟩⟨+| + ½ |1⟩⟨1| ⊗ |−⟩⟨−|

i.e. ``¼ [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, -1], [0, 0, -1, 1]]``.  It is
stored as a dense matrix; the two-term ensemble it is built from is kept as a
separate :class:`SeparableTerm` list for the separability check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .linalg import (
    DimensionError,
    as_matrix,
    hermiticity_residual,
    kron,
)

logger = logging.getLogger(__name__)

KET_NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

BASIS_LABELS = ("zero", "one", "plus", "minus")


class StateParseError(ValueError):
    """Raised when a serialized state cannot be decoded."""


class StateValidationError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


def _fix_global_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real positive."""
    for amp in amplitudes:
        if abs(amp) > KET_NORM_TOL:
            return amplitudes * (abs(amp) / amp)
    return amplitudes


@dataclass(frozen=True, eq=False)
class Ket:
    """Normalised state vector with a fixed global phase."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > KET_NORM_TOL:
            raise ValueError(f"ket is not normalised (|ψ|² = {norm!r})")
        amps = _fix_global_phase(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def inner(self, other: "Ket") -> complex:
        """Return ``⟨self|other⟩``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        """Return ``|ψ⟩⟨ψ|``."""
        return np.outer(self.amplitudes, self.amplitudes.conj())


def basis_ket(label: str) -> Ket:
    """Return ``|0⟩``, ``|1⟩``, ``|+⟩`` or ``|−⟩`` by name."""
    s = 1.0 / math.sqrt(2.0)
    table = {
        "zero": (1.0, 0.0),
        "one": (0.0, 1.0),
        "plus": (s, s),
        "minus": (s, -s),
    }
    key = str(label).lower()
    if key not in table:
        raise ValueError(f"unknown basis label {label!r}; expected one of {BASIS_LABELS}")
    return Ket(np.array(table[key], dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Square complex matrix describing a (possibly mixed) quantum state.

    Construction only checks the shape; :func:`validate` reports on the
    physical invariants and :meth:`checked` raises when they fail.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix).copy()
        if m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def from_ket(cls, ket: Ket) -> "DensityMatrix":
        return cls(ket.projector())

    @classmethod
    def checked(cls, matrix) -> "DensityMatrix":
        """Build a state and raise :class:`StateValidationError` if invalid."""
        rho = cls(matrix)
        report = validate(rho)
        if not report.passed:
            raise StateValidationError("; ".join(report.failures))
        return rho

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def allclose(self, other: "DensityMatrix | np.ndarray", atol: float = 1e-12) -> bool:
        other_m = other.matrix if isinstance(other, DensityMatrix) else as_matrix(other)
        return other_m.shape == self.matrix.shape and bool(
            np.max(np.abs(self.matrix - other_m)) <= atol
        )


@dataclass(frozen=True)
class ValidationReport:
    """Residuals of the density-matrix invariants for one state."""

    hermiticity_residual: float
    trace_residual: float
    min_eigenvalue: float
    failures: tuple[str, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.failures


def validate(rho: DensityMatrix | np.ndarray) -> ValidationReport:
    """Check Hermiticity, unit trace and positivity; never raises on bad input."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    if not np.all(np.isfinite(m)):
        return ValidationReport(math.inf, math.inf, -math.inf, ("non-finite entries",))
    herm = hermiticity_residual(m)
    trace_res = float(abs(np.trace(m) - 1.0))
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
    failures = []
    if herm > HERMITIAN_TOL:
        failures.append(f"not Hermitian (residual {herm:.3e})")
    if trace_res > TRACE_TOL:
        failures.append(f"trace differs from 1 by {trace_res:.3e}")
    if min_eig < -PSD_TOL:
        failures.append(f"negative eigenvalue {min_eig:.3e}")
    return ValidationReport(herm, trace_res, min_eig, tuple(failures))


@dataclass(frozen=True)
class SeparableTerm:
    """One weighted product term ``p · ρ_A ⊗ ρ_B`` of a separable ensemble."""

    weight: float
    state_a: DensityMatrix
    state_b: DensityMatrix


def make_discordant_state() -> DensityMatrix:
    """Return ρ_AB = ½|0⟩⟨0|⊗|+⟩⟨+| + ½|1⟩⟨1|⊗|−⟩⟨−| as a 4x4 matrix."""
    return recombine(make_separable_decomposition())


def make_separable_decomposition() -> list[SeparableTerm]:
    """The two-term product ensemble whose mixture is the discordant state."""
    return [
        SeparableTerm(
            0.5,
            DensityMatrix.from_ket(basis_ket("zero")),
            DensityMatrix.from_ket(basis_ket("plus")),
        ),
        SeparableTerm(
            0.5,
            DensityMatrix.from_ket(basis_ket("one")),
            DensityMatrix.from_ket(basis_ket("minus")),
        ),
    ]


def recombine(terms: Sequence[SeparableTerm]) -> DensityMatrix:
    """Return ``Σ p_i ρ_A^i ⊗ ρ_B^i``."""
    total = np.zeros((4, 4), dtype=np.complex128)
    for term in terms:
        total += term.weight * kron(term.state_a.matrix, term.state_b.matrix)
    return DensityMatrix(total)


def maximally_mixed(dim: int = 2) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)


def product_state(sigma: DensityMatrix, tau: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(kron(sigma.matrix, tau.matrix))


def coin_toss_state() -> DensityMatrix:
    """Two independent fair coins, ``½I ⊗ ½I``."""
    return product_state(maximally_mixed(2), maximally_mixed(2))


def bell_state() -> DensityMatrix:
    """``|Φ⁺⟩⟨Φ⁺|`` with ``|Φ⁺⟩ = (|00⟩ + |11⟩)/√2``."""
    s = 1.0 / math.sqrt(2.0)
    return DensityMatrix.from_ket(Ket(np.array([s, 0.0, 0.0, s])))


def random_pure_ket(rng: np.random.Generator, dim: int = 2) -> Ket:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return Ket(vec / np.linalg.norm(vec))


def random_separable_terms(rng: np.random.Generator, terms: int = 3) -> list[SeparableTerm]:
    """Random ensemble of pure product states with Dirichlet weights."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    weights = rng.dirichlet(np.ones(terms))
    return [
        SeparableTerm(
            float(w),
            DensityMatrix.from_ket(random_pure_ket(rng)),
            DensityMatrix.from_ket(random_pure_ket(rng)),
        )
        for w in weights
    ]


def random_separable_state(rng: np.random.Generator, terms: int = 3) -> DensityMatrix:
    return recombine(random_separable_terms(rng, terms))


# ------------------------------------------------------------------
# JSON document ``{"dim": n, "re": [[...]], "im": [[...]]}``
# ------------------------------------------------------------------


def state_to_dict(rho: DensityMatrix) -> dict[str, Any]:
    m = rho.matrix
    return {
        "dim": rho.dim,
        "re": [[float(x) for x in row] for row in np.real(m)],
        "im": [[float(x) for x in row] for row in np.imag(m)],
    }


def state_from_dict(data: Any) -> DensityMatrix:
    """Decode the JSON document; shape problems raise :class:`StateParseError`."""
    if not isinstance(data, dict):
        raise StateParseError("state document must be a JSON object")
    try:
        dim = int(data["dim"])
        re = np.array(data["re"], dtype=float)
        im = np.array(data.get("im", np.zeros((dim, dim))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateParseError(f"malformed state document: {exc}") from exc
    if dim < 1 or re.shape != (dim, dim) or im.shape != (dim, dim):
        raise StateParseError(
            f"'re' and 'im' must both be {dim}x{dim} (got {re.shape} and {im.shape})"
        )
    return DensityMatrix(re + 1j * im)


__all__ = [
    "StateParseError",
    "StateValidationError",
    "Ket",
    "basis_ket",
    "DensityMatrix",
    "ValidationReport",
    "validate",
    "SeparableTerm",
    "make_discordant_state",
    "make_separable_decomposition",
    "recombine",
    "maximally_mixed",
    "product_state",
    "coin_toss_state",
    "bell_state",
    "random_pure_ket",
    "random_separable_terms",
    "random_separable_state",
    "state_to_dict",
    "state_from_dict",
]
