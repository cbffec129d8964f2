"""Local noise channels and the robustness sweep of the alternating scheme."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

try:
    import pandas as pd  # type: ignore
except Exception:  # pragma: no cover - optional dependency
    pd = None

from .games import make_recall_game
from .linalg import IDENTITY, PAULI_X, PAULI_Y, PAULI_Z, check_subsystem, embed
from .measures import GridSpec, _matrix, correlation_report
from .qstate import DensityMatrix, validate
from .qstrategy import expected_quantum_payoff, make_alternating_scheme

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-12

SWEEP_COLUMNS = (
    "strength",
    "payoff",
    "I",
    "D_BA_fixed",
    "D_AB_fixed",
    "D_BA_opt",
    "D_AB_opt",
    "negativity",
    "chsh",
)


class ChannelError(ValueError):
    """Raised for an unknown or non trace-preserving channel."""


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    """Single-qubit channel given by its Kraus operators."""

    kind: str
    strength: float
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not 0.0 <= self.strength <= 1.0:
            raise ChannelError(f"strength must be in [0, 1], got {self.strength!r}")
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus)
        if not ops or any(k.shape != (2, 2) for k in ops):
            raise ChannelError("Kraus operators must be a non-empty list of 2x2 matrices")
        completeness = sum(k.conj().T @ k for k in ops)
        residual = float(np.max(np.abs(completeness - IDENTITY)))
        if residual > COMPLETENESS_TOL:
            raise ChannelError(f"{self.kind}: Σ K†K differs from I by {residual:.3e}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    def apply(self, rho2: np.ndarray) -> np.ndarray:
        """Act on a single-qubit matrix."""
        return sum(k @ rho2 @ k.conj().T for k in self.kraus)


def depolarizing_kraus(p: float) -> list[np.ndarray]:
    """{√(1−3p/4) I, √(p/4) σx, √(p/4) σy, √(p/4) σz}; p = 1 gives ½I."""
    return [
        math.sqrt(1.0 - 0.75 * p) * IDENTITY,
        math.sqrt(p / 4.0) * PAULI_X,
        math.sqrt(p / 4.0) * PAULI_Y,
        math.sqrt(p / 4.0) * PAULI_Z,
    ]


def dephasing_kraus(p: float) -> list[np.ndarray]:
    """{√(1−p/2) I, √(p/2) σz}; p = 1 removes all coherences."""
    return [math.sqrt(1.0 - 0.5 * p) * IDENTITY, math.sqrt(p / 2.0) * PAULI_Z]


# ------------------------------------------------------------------
# Channel registry
# ------------------------------------------------------------------

CHANNELS: dict[str, Callable[[float], Sequence[np.ndarray]]] = {
    "depolarizing": depolarizing_kraus,
    "dephasing": dephasing_kraus,
}


def register_channel(kind: str, builder: Callable[[float], Sequence[np.ndarray]]) -> None:
    """Register a Kraus builder ``strength -> [K_i]`` under ``kind``."""
    CHANNELS[kind.lower()] = builder


def make_channel(kind: str, strength: float) -> NoiseChannel:
    key = kind.lower()
    if key not in CHANNELS:
        raise ChannelError(f"unknown channel {kind!r}; expected one of {sorted(CHANNELS)}")
    if not 0.0 <= strength <= 1.0:
        raise ChannelError(f"strength must be in [0, 1], got {strength!r}")
    return NoiseChannel(key, float(strength), tuple(CHANNELS[key](float(strength))))


def apply_local_channel(rho, channel: NoiseChannel, subsystem: str) -> DensityMatrix:
    """``Σ (K_i ⊗ I) ρ (K_i ⊗ I)†`` (or ``I ⊗ K_i`` for ``B``)."""
    subsystem = check_subsystem(subsystem)
    m = _matrix(rho)
    out = np.zeros((4, 4), dtype=np.complex128)
    for k in channel.kraus:
        op = embed(k, subsystem)
        out += op @ m @ op.conj().T
    return DensityMatrix(out)


def apply_noise(rho, channel: NoiseChannel, subsystems: Sequence[str] = ("A", "B")) -> DensityMatrix:
    state = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    for sub in subsystems:
        state = apply_local_channel(state, channel, sub)
    return state


# ------------------------------------------------------------------
# Sweep
# ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    strength: float
    payoff: float
    mutual_information: float
    d_ba_fixed: float
    d_ab_fixed: float
    d_ba_opt: float
    d_ab_opt: float
    negativity: float
    chsh: float
    state: DensityMatrix | None = None

    def values(self) -> tuple[float, ...]:
        """Row values in :data:`SWEEP_COLUMNS` order."""
        return (
            self.strength,
            self.payoff,
            self.mutual_information,
            self.d_ba_fixed,
            self.d_ab_fixed,
            self.d_ba_opt,
            self.d_ab_opt,
            self.negativity,
            self.chsh,
        )


def parse_subsystems(text: str | Sequence[str]) -> tuple[str, ...]:
    """``"AB"``, ``"A"``, ``"B"`` or a sequence of labels."""
    labels = tuple(text) if isinstance(text, str) else tuple(text)
    if not labels or len(set(labels)) != len(labels):
        raise ValueError(f"subsystems must be a non-empty set of A/B labels, got {text!r}")
    return tuple(check_subsystem(s) for s in labels)


def _sweep_row(rho: DensityMatrix, kind: str, strength: float, subsystems, grid) -> SweepRow:
    noisy = apply_noise(rho, make_channel(kind, strength), subsystems)
    report = validate(noisy)
    if not report.passed:
        logger.warning("swept state at %s=%.4f failed validation: %s",
                       kind, strength, "; ".join(report.failures))
    corr = correlation_report(noisy, bases=("comp",), grid=grid)
    payoff = expected_quantum_payoff(noisy, make_alternating_scheme(), make_recall_game())
    row = SweepRow(
        strength=strength,
        payoff=payoff,
        mutual_information=corr.mutual_information,
        d_ba_fixed=corr.fixed_for("A", "comp").discord,
        d_ab_fixed=corr.fixed_for("B", "comp").discord,
        d_ba_opt=corr.optimized["A"].discord,
        d_ab_opt=corr.optimized["B"].discord,
        negativity=corr.negativity,
        chsh=corr.chsh_max,
        state=noisy,
    )
    logger.debug("sweep %s p=%.4f payoff=%.6f I=%.6f", kind, strength, row.payoff,
                 row.mutual_information)
    return row


def sweep(
    rho,
    kind: str = "depolarizing",
    subsystems: str | Sequence[str] = ("A", "B"),
    steps: int = 21,
    *,
    grid: GridSpec | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    """Evaluate every measure and the alternating-scheme payoff at ``steps``
    strengths linearly spaced on [0, 1], noise applied to each listed qubit.

    Rows may be computed in parallel; they are returned in strength order.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if kind.lower() not in CHANNELS:
        raise ChannelError(f"unknown channel {kind!r}; expected one of {sorted(CHANNELS)}")
    state = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    subs = parse_subsystems(subsystems)
    strengths = [float(s) for s in np.linspace(0.0, 1.0, steps)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: _sweep_row(state, kind, s, subs, grid), strengths))
    else:
        rows = [_sweep_row(state, kind, s, subs, grid) for s in strengths]
    return rows


def first_strength_below(rows: Sequence[SweepRow], threshold: float = 0.75) -> float | None:
    """Smallest swept strength whose payoff is below ``threshold``."""
    for row in rows:
        if row.payoff < threshold:
            return row.strength
    return None


def sweep_dataframe(rows: Sequence[SweepRow]):
    if pd is None:
        raise RuntimeError("pandas is required to build the sweep table")
    return pd.DataFrame([row.values() for row in rows], columns=list(SWEEP_COLUMNS))


def write_sweep_csv(rows: Sequence[SweepRow], path) -> str:
    """Write the sweep with header ``strength,payoff,I,...,chsh``."""
    df = sweep_dataframe(rows)
    df.to_csv(path, index=False, float_format="%.12g")
    return str(path)


__all__ = [
    "ChannelError",
    "NoiseChannel",
    "depolarizing_kraus",
    "dephasing_kraus",
    "CHANNELS",
    "register_channel",
    "make_channel",
    "apply_local_channel",
    "apply_noise",
    "SWEEP_COLUMNS",
    "SweepRow",
    "parse_subsystems",
    "sweep",
    "first_strength_below",
    "sweep_dataframe",
    "write_sweep_csv",
]
