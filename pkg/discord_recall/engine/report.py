"""Reproduction report for the built-in discordant state, game and scheme.

Every row is tagged ``stated`` (a value asserted for the construction) or
``derived`` (computed here from first principles).  Only ``stated`` rows decide
the exit status; the discrepancy notes are informational.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .games import (
    VARIANTS,
    alternating_mixture,
    best_behavioral,
    best_mixed,
    expected_payoff_mixed,
    make_recall_game,
)
from .measures import GridSpec, correlation_report
from .qstate import make_discordant_state, make_separable_decomposition, recombine
from .qstrategy import (
    action_mutual_information,
    collapse_tree,
    expected_quantum_payoff,
    joint_action_distribution,
    joint_action_distribution_born,
    make_alternating_scheme,
    no_signaling_residual,
)

logger = logging.getLogger(__name__)

STATED = "stated"
DERIVED = "derived"
PROVENANCES = (STATED, DERIVED)

EXACT_TOL = 1e-12
VALUE_TOL = 1e-9
OPTIMIZER_TOL = 1e-6


@dataclass(frozen=True)
class ReportRow:
    """One checked quantity.

    ``comparison`` is ``eq`` (|value − expected| ≤ tolerance), ``gt``
    (value > expected + tolerance) or ``le`` (value ≤ expected + tolerance).
    """

    key: str
    description: str
    value: float
    expected: float
    provenance: str
    tolerance: float = VALUE_TOL
    comparison: str = "eq"

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        if self.comparison not in ("eq", "gt", "le"):
            raise ValueError(f"unknown comparison {self.comparison!r}")

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.comparison == "gt":
            return self.value > self.expected + self.tolerance
        if self.comparison == "le":
            return self.value <= self.expected + self.tolerance
        return abs(self.value - self.expected) <= self.tolerance

    def expectation(self) -> str:
        symbol = {"eq": "=", "gt": ">", "le": "<="}[self.comparison]
        return f"{symbol} {self.expected:.12g}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "description": self.description,
            "value": self.value,
            "expected": self.expected,
            "comparison": self.comparison,
            "tolerance": self.tolerance,
            "provenance": self.provenance,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class Discrepancy:
    key: str
    claim: str
    finding: str
    values: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "claim": self.claim,
            "finding": self.finding,
            "values": dict(sorted(self.values.items())),
        }


@dataclass(frozen=True)
class ReproduceReport:
    rows: tuple[ReportRow, ...]
    discrepancies: tuple[Discrepancy, ...]
    variants: tuple[str, ...]

    @property
    def passed(self) -> bool:
        """True when every ``stated`` row passes."""
        return all(r.passed for r in self.rows if r.provenance == STATED)

    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if not r.passed]

    def row(self, key: str) -> ReportRow:
        for r in self.rows:
            if r.key == key:
                return r
        raise KeyError(key)

    def to_dict(self) -> dict[str, Any]:
        return {
            "variants": list(self.variants),
            "rows": [r.to_dict() for r in self.rows],
            "discrepancies": [d.to_dict() for d in self.discrepancies],
            "passed": self.passed,
        }


def parse_variants(choice: str) -> tuple[str, ...]:
    """``single-infoset``, ``stage-aware`` or ``both``."""
    key = choice.replace("-", "_").lower()
    if key == "both":
        return VARIANTS
    if key in VARIANTS:
        return (key,)
    raise ValueError(f"variant must be single-infoset, stage-aware or both, got {choice!r}")


def build_reproduce_report(
    variant: str = "both",
    *,
    grid: GridSpec | None = None,
    grid_steps: int = 101,
) -> ReproduceReport:
    variants = parse_variants(variant)
    rho = make_discordant_state()
    scheme = make_alternating_scheme()
    corr = correlation_report(rho, bases=("comp", "x"), grid=grid)
    rows: list[ReportRow] = []

    def add(key, description, value, expected, provenance, tolerance=VALUE_TOL, comparison="eq"):
        rows.append(ReportRow(key, description, float(value), float(expected), provenance,
                              tolerance, comparison))

    recombined = recombine(make_separable_decomposition())
    add("separable_decomposition", "max |Σ p_i ρ_A⊗ρ_B − ρ_AB|",
        float(np.max(np.abs(recombined.matrix - rho.matrix))), 0.0, STATED, EXACT_TOL)
    add("S_A", "S(ρ_A)", corr.s_a, 1.0, STATED)
    add("S_B", "S(ρ_B)", corr.s_b, 1.0, STATED)
    add("S_AB", "S(ρ_AB)", corr.s_ab, 1.0, STATED)
    add("I", "I(A:B)", corr.mutual_information, 1.0, STATED)

    comp_a = corr.fixed_for("A", "comp")
    comp_b = corr.fixed_for("B", "comp")
    x_b = corr.fixed_for("B", "x")
    add("J_BA_comp", "J(B|A), A measured in {|0⟩,|1⟩}", comp_a.classical_correlation, 1.0, STATED)
    add("D_BA_comp", "D(B|A), A measured in {|0⟩,|1⟩}", comp_a.discord, 0.0, STATED)
    add("D_AB_comp_positive", "D(A|B) > 0, B measured in {|0⟩,|1⟩}", comp_b.discord, 0.0,
        STATED, VALUE_TOL, "gt")
    add("D_AB_comp", "D(A|B), B measured in {|0⟩,|1⟩}", comp_b.discord, 1.0, DERIVED)
    add("J_AB_x", "J(A|B), B measured in {|+⟩,|−⟩}", x_b.classical_correlation, 1.0, DERIVED)
    add("D_BA_opt", "optimised D(B|A)", corr.optimized["A"].discord, 0.0, DERIVED, OPTIMIZER_TOL)
    add("D_AB_opt", "optimised D(A|B)", corr.optimized["B"].discord, 0.0, DERIVED, OPTIMIZER_TOL)
    add("negativity", "negativity of ρ_AB", corr.negativity, 0.0, STATED)
    add("chsh_no_violation", "CHSH maximum does not exceed 2", corr.chsh_max, 2.0, STATED,
        VALUE_TOL, "le")
    add("chsh_max", "CHSH maximum", corr.chsh_max, 2.0, DERIVED)

    behavioral: dict[str, float] = {}
    for name in VARIANTS:
        strategy, value = best_behavioral(make_recall_game(name), grid_steps)
        behavioral[name] = value
        if name not in variants:
            continue
        if name == "single_infoset":
            add("behavioral_single_infoset", "best behavioral value, one information set",
                value, 0.5, STATED, OPTIMIZER_TOL)
            add("behavioral_single_infoset_p", "maximising Pr(L)", strategy.prob_left[0], 0.5,
                STATED, OPTIMIZER_TOL)
        else:
            add("behavioral_stage_aware", "best behavioral value, one set per stage",
                value, 1.0, DERIVED, OPTIMIZER_TOL)

    game = make_recall_game()
    add("mixed_alternating", "E[u] of ½(L,R) + ½(R,L)",
        expected_payoff_mixed(game, alternating_mixture()), 1.0, STATED, 0.0)
    add("mixed_best", "best mixed value", best_mixed(game)[1], 1.0, DERIVED, 0.0)

    dist = joint_action_distribution(rho, scheme)
    born = joint_action_distribution_born(rho, scheme)
    add("P_LR", "Pr(L, R) under the alternating scheme", dist.probability("L", "R"), 0.5,
        STATED, EXACT_TOL)
    add("P_RL", "Pr(R, L) under the alternating scheme", dist.probability("R", "L"), 0.5,
        STATED, EXACT_TOL)
    add("quantum_payoff", "expected payoff of the alternating scheme",
        expected_quantum_payoff(rho, scheme, game), 1.0, STATED, EXACT_TOL)
    add("collapse_vs_born", "max |sequential collapse − joint Born|", dist.max_difference(born),
        0.0, DERIVED, EXACT_TOL)
    add("no_signaling", "max |stage marginal − local Born rule|",
        no_signaling_residual(rho, scheme), 0.0, DERIVED, EXACT_TOL)
    tree = collapse_tree(rho, scheme)
    same_object = all(b.next_measurement is scheme.steps[1].measurement for b in tree)
    add("memoryless", "stage-2 measurement identical in every branch", float(same_object), 1.0,
        DERIVED, 0.0)
    add("action_mutual_information", "I(a1 : a2) in bits", action_mutual_information(dist), 1.0,
        DERIVED)

    discrepancies = (
        Discrepancy(
            "nonzero_discord",
            "the state carries nonzero discord",
            "only the computational-basis D(A|B) is nonzero; measuring B in "
            "{|+⟩,|−⟩} gives pure conditionals, so the optimised discord vanishes "
            "in both directions (the state is classical-classical)",
            {
                "D_AB_comp": comp_b.discord,
                "D_AB_opt": corr.optimized["B"].discord,
                "D_BA_opt": corr.optimized["A"].discord,
            },
        ),
        Discrepancy(
            "behavioral_optimum",
            "the best behavioral strategy yields 0.5",
            "0.5 is the optimum only when both stages share one information set; "
            "with the stage-2 histories merged but stage 1 distinct the behavioral "
            "optimum is 1",
            {
                "single_infoset": behavioral["single_infoset"],
                "stage_aware": behavioral["stage_aware"],
            },
        ),
    )
    report = ReproduceReport(tuple(rows), discrepancies, variants)
    for row in report.failures():
        logger.warning("%s row %s: %.12g, expected %s", row.provenance, row.key, row.value,
                       row.expectation())
    return report


def render_report_table(report: ReproduceReport) -> str:
    lines = [f"{'quantity':<28} {'value':>16} {'expected':>18} {'source':<8} status"]
    for r in report.rows:
        status = "pass" if r.passed else "FAIL"
        lines.append(
            f"{r.key:<28} {r.value:>16.12g} {r.expectation():>18} {r.provenance:<8} {status}"
        )
    lines.append("")
    lines.append("DISCREPANCY")
    for d in report.discrepancies:
        lines.append(f"- {d.key}: claim '{d.claim}'")
        lines.append(f"  {d.finding}")
        for k, v in sorted(d.values.items()):
            lines.append(f"  {k} = {v:.12g}")
    lines.append("")
    lines.append("result: " + ("pass" if report.passed else "FAIL"))
    return "\n".join(lines)


def render_rows(rows: Sequence[tuple[str, float]]) -> str:
    """Two-column ``name value`` table."""
    width = max((len(name) for name, _ in rows), default=0)
    return "\n".join(f"{name:<{width}}  {value:.12g}" for name, value in rows)


__all__ = [
    "STATED",
    "DERIVED",
    "ReportRow",
    "Discrepancy",
    "ReproduceReport",
    "parse_variants",
    "build_reproduce_report",
    "render_report_table",
    "render_rows",
]
