"""Dense complex linear algebra for one- and two-qubit states.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Subsystem
``A`` is always the left (high-order) factor of a Kronecker product, so a
two-qubit index ``i`` splits as ``i = 2 * a + b``.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
NEGATIVE_EIGENVALUE_TOL = 1e-10

SUBSYSTEMS = ("A", "B")

IDENTITY = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)
for _op in (IDENTITY, *PAULIS):
    _op.setflags(write=False)


class DimensionError(ValueError):
    """Raised when a matrix does not have the expected shape."""


class NonHermitianError(ValueError):
    """Raised when a matrix is not Hermitian within tolerance."""


class NegativeEigenvalueError(ValueError):
    """Raised when a state has an eigenvalue below ``-NEGATIVE_EIGENVALUE_TOL``."""


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-D ``complex128`` array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def check_subsystem(label: str) -> str:
    label = str(label).upper()
    if label not in SUBSYSTEMS:
        raise ValueError(f"subsystem must be 'A' or 'B', got {label!r}")
    return label


def other_subsystem(label: str) -> str:
    return "B" if check_subsystem(label) == "A" else "A"


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``.

    Entry ``[i * b.rows + k, j * b.cols + l]`` equals ``a[i, j] * b[k, l]``.
    """
    return np.kron(as_matrix(a), as_matrix(b))


def embed(op, subsystem: str) -> np.ndarray:
    """Lift a single-qubit operator to the two-qubit space (``op ⊗ I`` or ``I ⊗ op``)."""
    op = as_matrix(op)
    if op.shape != (2, 2):
        raise DimensionError(f"single-qubit operator must be 2x2, got {op.shape}")
    eye = np.eye(2, dtype=np.complex128)
    if check_subsystem(subsystem) == "A":
        return np.kron(op, eye)
    return np.kron(eye, op)


def partial_trace(rho, keep: str) -> np.ndarray:
    """Reduce a 4x4 two-qubit operator to the 2x2 operator of ``keep``.

    ``keep="A"`` traces out ``B`` and returns ρ_A; ``keep="B"`` traces out ``A``.
    """
    rho = as_matrix(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"partial_trace expects a 4x4 matrix, got {rho.shape}")
    tensor = rho.reshape(2, 2, 2, 2)  # (a, b, a', b')
    if check_subsystem(keep) == "A":
        return np.einsum("ijkj->ik", tensor)
    return np.einsum("ijil->jl", tensor)


def partial_transpose(rho, subsystem: str = "B") -> np.ndarray:
    """Transpose the indices of ``subsystem`` in a 4x4 two-qubit operator."""
    rho = as_matrix(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"partial_transpose expects a 4x4 matrix, got {rho.shape}")
    tensor = rho.reshape(2, 2, 2, 2)
    if check_subsystem(subsystem) == "B":
        tensor = tensor.transpose(0, 3, 2, 1)
    else:
        tensor = tensor.transpose(2, 1, 0, 3)
    return tensor.reshape(4, 4)


def hermiticity_residual(m) -> float:
    """Return ``max |m[i, j] - conj(m[j, i])|``."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got {m.shape}")
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_eigenvalues(m) -> list[float]:
    """Real eigenvalues of a Hermitian matrix, in descending order.

    The input is symmetrised before LAPACK's Hermitian solver (``eigvalsh``)
    runs, which only reads one triangle.
    """
    m = as_matrix(m)
    residual = hermiticity_residual(m)
    if residual > HERMITIAN_TOL:
        raise NonHermitianError(
            f"matrix is not Hermitian (residual {residual:.3e} > {HERMITIAN_TOL:g})"
        )
    values = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return [float(v) for v in values[::-1]]


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits, ``-Σ λ log2 λ`` with ``0 log 0 = 0``."""
    values = np.array(hermitian_eigenvalues(rho))
    if values.size and values.min() < -NEGATIVE_EIGENVALUE_TOL:
        raise NegativeEigenvalueError(
            f"eigenvalue {values.min():.3e} below -{NEGATIVE_EIGENVALUE_TOL:g}"
        )
    values = np.clip(values, 0.0, 1.0)
    nonzero = values[values > 0.0]
    entropy = float(-np.sum(nonzero * np.log2(nonzero)))
    return max(entropy, 0.0)


__all__ = [
    "DimensionError",
    "NonHermitianError",
    "NegativeEigenvalueError",
    "SUBSYSTEMS",
    "IDENTITY",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PAULIS",
    "as_matrix",
    "check_subsystem",
    "other_subsystem",
    "kron",
    "embed",
    "partial_trace",
    "partial_transpose",
    "hermiticity_residual",
    "hermitian_eigenvalues",
    "von_neumann_entropy",
]
