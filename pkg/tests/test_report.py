import pytest

from discord_recall.engine.measures import GridSpec
from discord_recall.engine.report import (
    DERIVED,
    STATED,
    ReportRow,
    ReproduceReport,
    build_reproduce_report,
    parse_variants,
    render_report_table,
)


@pytest.fixture(scope="module")
def report():
    return build_reproduce_report("both")


def test_all_rows_pass(report):
    assert report.passed
    assert report.failures() == []


def test_every_row_has_provenance(report):
    assert {r.provenance for r in report.rows} <= {STATED, DERIVED}


def test_key_values(report):
    assert report.row("quantum_payoff").value == pytest.approx(1.0, abs=1e-12)
    assert report.row("behavioral_single_infoset").value == pytest.approx(0.5, abs=1e-6)
    assert report.row("behavioral_stage_aware").value == pytest.approx(1.0, abs=1e-6)
    assert report.row("mixed_alternating").value == 1.0
    assert report.row("I").value == pytest.approx(1.0, abs=1e-9)
    assert report.row("D_AB_opt").value == pytest.approx(0.0, abs=1e-6)
    assert report.row("D_AB_opt").provenance == DERIVED
    assert report.row("quantum_payoff").provenance == STATED


def test_discrepancy_section(report):
    keys = [d.key for d in report.discrepancies]
    assert keys == ["nonzero_discord", "behavioral_optimum"]
    discord = report.discrepancies[0]
    assert discord.values["D_AB_comp"] == pytest.approx(1.0, abs=1e-9)
    assert discord.values["D_AB_opt"] == pytest.approx(0.0, abs=1e-6)


def test_table_rendering(report):
    text = render_report_table(report)
    assert "DISCREPANCY" in text
    assert text.rstrip().endswith("result: pass")


def test_variant_selection():
    single = build_reproduce_report("single-infoset", grid=GridSpec(theta_points=9, phi_points=16))
    keys = {r.key for r in single.rows}
    assert "behavioral_single_infoset" in keys
    assert "behavioral_stage_aware" not in keys
    # the discrepancy note always carries both optima
    assert single.discrepancies[1].values["stage_aware"] == pytest.approx(1.0, abs=1e-6)
    assert parse_variants("both") == ("single_infoset", "stage_aware")
    with pytest.raises(ValueError):
        parse_variants("none")


def test_only_stated_rows_gate():
    derived_fail = ReportRow("x", "derived", 2.0, 1.0, DERIVED)
    stated_ok = ReportRow("y", "stated", 1.0, 1.0, STATED)
    assert ReproduceReport((derived_fail, stated_ok), (), ("single_infoset",)).passed
    stated_fail = ReportRow("z", "stated", 0.0, 1.0, STATED)
    assert not ReproduceReport((stated_fail,), (), ("single_infoset",)).passed


@pytest.mark.parametrize(
    "value, comparison, passed",
    [(0.5, "gt", True), (0.0, "gt", False), (2.0, "le", True), (2.1, "le", False)],
)
def test_row_comparisons(value, comparison, passed):
    expected = 0.0 if comparison == "gt" else 2.0
    assert ReportRow("k", "d", value, expected, STATED, 1e-9, comparison).passed is passed


def test_row_provenance_checked():
    with pytest.raises(ValueError):
        ReportRow("k", "d", 1.0, 1.0, "quoted")
