"""
命令行与命令实现测试
"""

import argparse
import io
import json
import logging

import pytest

from twocensus import __version__
from twocensus.cli.app import (
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_USAGE,
    ensure_utf8_output,
    main,
    parse_families,
    parse_n_range,
    run,
)
from twocensus.cli.commands import (
    CensusOutcome,
    CrossCheck,
    applicable_methods,
    choose_method,
    cmd_quadform,
    cmd_sections,
    cross_check,
    parse_form_type,
    recognize_closed_form,
    recognize_form_type,
    run_census,
    split_elementary,
)
from twocensus.cli.spec_parser import parse_spec
from twocensus.cli.verify import FAMILIES
from twocensus.core.census_formulas import ClosedFormFamily, reference_census
from twocensus.core.exceptions import MethodInfeasibleError
from twocensus.core.quadform import FormFamily, FormType
from twocensus.core.subgroup_oracle import CensusTable
from twocensus.utils.i18n import set_language


@pytest.fixture(autouse=True)
def restore_logging():
    """run() 会重新配置根日志器"""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
    set_language("en_US")


def run_json(capsys, *argv):
    code = run(["--format", "json", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


# ============================================================================
# 结构识别与方法选择
# ============================================================================

class TestRecognition:
    @pytest.mark.parametrize("text,expected", [
        ("D8 * D8", FormType.plus(2)),
        ("Q8 * Q8", FormType.plus(2)),
        ("Q8 * D8 x C2^2", FormType(FormFamily.MINUS, 2, 2)),
        ("D8 * C4 * Q8", FormType(FormFamily.ALMOST, 2, 0)),
        ("Q8 * C4", FormType.almost_extraspecial(1)),
        ("D8 * C2", FormType.plus(1)),
        ("D8 x C2", FormType.extraspecial_times_elementary(1, 1)),
        ("D8^{*3} x C2", FormType(FormFamily.PLUS, 3, 1)),
    ])
    def test_form_types(self, text, expected):
        assert recognize_form_type(parse_spec(text)) == expected

    @pytest.mark.parametrize("text", ["D8 * C4 * C4", "C4 x C2", "D8 x D8", "D8 * C8", "C2^3"])
    def test_not_a_form_family(self, text):
        assert recognize_form_type(parse_spec(text)) is None

    def test_closed_form_families(self):
        assert recognize_closed_form(parse_spec("D8")) == (ClosedFormFamily.D8, 3)
        assert recognize_closed_form(parse_spec("D8 x C2 x C2^2")) == (ClosedFormFamily.D8, 6)
        assert recognize_closed_form(parse_spec("C4 x C2^3")) == (ClosedFormFamily.C4C2, 5)
        assert recognize_closed_form(parse_spec("C4")) is None

    def test_split_elementary(self):
        core, m = split_elementary(parse_spec("(D8 x C2)^2 x C2^3"))
        assert m == 5
        assert len(core) == 2

    def test_method_choice(self):
        assert choose_method(parse_spec("D8 * D8")) == "oracle"
        assert choose_method(parse_spec("D8 * D8"), prefer_fast=True) == "formula"
        assert choose_method(parse_spec("D8^{*4} x C2")) == "formula"
        assert choose_method(parse_spec("C8 x C4 x C2^3"), prefer_fast=True) == "goursat"

    def test_nothing_applies_above_every_cap(self):
        assert applicable_methods(parse_spec("C4^6 x C2")) == []

    def test_parse_form_type(self):
        assert parse_form_type("minus", 2) == FormType.minus(2)
        with pytest.raises(MethodInfeasibleError):
            parse_form_type("hyperbolic", 2)


class TestRunCensus:
    @pytest.mark.parametrize("method", ["oracle", "formula", "goursat", "quadform"])
    def test_methods_agree_on_reference_group(self, method):
        outcome = run_census(parse_spec("D8 x C2^2"), method)
        assert outcome.table.counts == reference_census(5).counts
        assert outcome.table.method == method

    def test_formula_above_oracle_cap(self):
        table = run_census(parse_spec("D8^{*4} x C2")).table
        assert table.n == 10
        assert table.s(0) == table.s(10) == 1

    def test_infeasible_formula(self):
        with pytest.raises(MethodInfeasibleError):
            run_census(parse_spec("C8 x C4"), "formula")

    def test_unknown_method(self):
        with pytest.raises(MethodInfeasibleError):
            run_census(parse_spec("D8"), "magic")

    def test_cross_check_agrees(self):
        result = cross_check(parse_spec("Q8 * D8 x C2"))
        assert set(result.outcomes) == {"oracle", "formula", "goursat", "quadform"}
        assert not result.mismatch

    def test_cross_check_skips_inapplicable(self):
        result = cross_check(parse_spec("C8 x C4"))
        assert set(result.outcomes) == {"oracle", "goursat"}
        assert set(result.skipped) == {"formula", "quadform"}
        assert not result.mismatch

    def test_mismatch_flag(self):
        left = CensusOutcome(CensusTable(3, (1, 5, 3, 1)), 0.0)
        right = CensusOutcome(CensusTable(3, (1, 3, 3, 1)), 0.0)
        assert CrossCheck({"oracle": left, "formula": right}, {}).mismatch


class TestCommands:
    def test_sections_cell(self):
        payload, code = cmd_sections(parse_spec("D8 * D8"), alpha=1, beta=1, split=True)
        assert code == 0
        (row,) = payload["rows"]
        assert (row["count"], row["s1"], row["s2"], row["s3"], row["s4"]) == ("105", "15", "0", "72", "18")
        assert row["formula"] == "ok"
        assert row["dominated"] == "yes"

    def test_sections_above_cap_use_formulas(self):
        payload, code = cmd_sections(parse_spec("D8^{*3} x C2"), alpha=2, beta=0)
        assert payload["method"] == "formula"
        assert code == 0

    def test_sections_of_large_unrecognized_group(self):
        with pytest.raises(MethodInfeasibleError):
            cmd_sections(parse_spec("C8 x C8 x C4"))

    @pytest.mark.parametrize("form_type,total", [
        (FormType.plus(2), "110"), (FormType.minus(2), "78"), (FormType.almost_extraspecial(1), "23"),
        (FormType.extraspecial_times_elementary(1, 1), "35"),
    ])
    def test_quadform_totals(self, form_type, total):
        payload, code = cmd_quadform(form_type, check=True)
        assert payload["total"] == total
        assert code == 0
        assert all(row["status"] == "ok" for row in payload["rows"])


# ============================================================================
# 命令行
# ============================================================================

class TestArguments:
    def test_n_ranges(self):
        assert parse_n_range("5") == [5]
        assert parse_n_range("3..6") == [3, 4, 5, 6]
        assert parse_n_range("3-6") == [3, 4, 5, 6]
        for bad in ("6..3", "abc", "3..", ""):
            with pytest.raises(argparse.ArgumentTypeError):
                parse_n_range(bad)

    def test_families(self):
        assert parse_families("all") == list(FAMILIES)
        assert parse_families("abelian, genextra") == ["abelian", "genextra"]
        with pytest.raises(argparse.ArgumentTypeError):
            parse_families("abelian,dihedral")

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            run(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_bad_subcommand_arguments(self):
        with pytest.raises(SystemExit) as info:
            run(["census", "D8", "--method", "magic"])
        assert info.value.code == EXIT_USAGE


class TestRun:
    def test_census_json(self, capsys):
        code, payload = run_json(capsys, "census", "D8 * D8", "--method", "oracle")
        assert code == EXIT_OK
        assert payload["total"] == "110"
        assert [row["count"] for row in payload["rows"]] == ["1", "19", "39", "35", "15", "1"]
        assert payload["version"] == __version__
        assert payload["method"] == "oracle"

    def test_census_text(self, capsys):
        assert run(["census", "D8"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "total: 10" in out
        assert "count" in out

    def test_census_csv(self, capsys):
        assert run(["--format", "csv", "census", "Q8"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "k,count"
        assert lines[1:] == ["0,1", "1,1", "2,3", "3,1"]

    def test_cross_check(self, capsys):
        code, payload = run_json(capsys, "census", "D8 * D8 x C2", "--cross-check")
        assert code == EXIT_OK
        assert payload["status"] == "ok"
        assert all(row["status"] == "ok" for row in payload["rows"])

    def test_infeasible_method(self, capsys):
        assert run(["census", "C8 x C4", "--method", "formula"]) == EXIT_USAGE
        assert capsys.readouterr().out == ""

    def test_syntax_error_reports_offset(self, capsys):
        assert run(["census", "D8 *"]) == EXIT_USAGE
        assert "byte offset 4" in capsys.readouterr().err

    def test_oracle_cap_override(self):
        assert run(["--oracle-cap", "16", "census", "D8 * D8", "--method", "oracle"]) == EXIT_USAGE
        assert run(["--oracle-cap", "4096", "census", "D8"]) == EXIT_USAGE

    def test_quadform(self, capsys):
        code, payload = run_json(capsys, "quadform", "plus", "2")
        assert code == EXIT_OK
        assert payload["total"] == "110"
        code, payload = run_json(capsys, "quadform", "minus", "2", "--check")
        assert payload["total"] == "78"
        assert [row["e"] for row in payload["rows"]][:2] == ["5", "0"]

    def test_sections(self, capsys):
        code, payload = run_json(capsys, "sections", "D8 * D8", "--alpha", "2", "--beta", "0", "--split")
        assert code == EXIT_OK
        assert payload["rows"][0]["s2"] == "33"
        assert "D8 x C2^2" in payload["notes"][0]

    def test_sections_in_chinese(self, capsys):
        code = run(["--lang", "zh_CN", "--format", "json", "sections", "D8"])
        payload = json.loads(capsys.readouterr().out)
        assert code == EXIT_OK
        assert payload["notes"][0].startswith("对照列")

    def test_lattice(self, capsys):
        code, payload = run_json(capsys, "lattice", "D8")
        assert code == EXIT_OK
        assert payload["total"] == "10"
        assert [row["count"] for row in payload["rows"]] == ["1", "5", "3", "1"]
        assert [row["normal"] for row in payload["rows"]] == ["1", "1", "3", "1"]
        assert payload["e"] == {"2": "2", "3": "0"}
        assert all(check["passed"] for check in payload["structure"].values())

    def test_verify(self, capsys):
        code, payload = run_json(capsys, "--quiet", "verify", "thm11", "--n", "3..4", "--spec", "C2^4")
        assert code == EXIT_OK
        assert payload["summary"]["FAIL"] == 0
        assert payload["summary"]["out-of-hypothesis"] == 1

    def test_mismatch_exit_code(self, capsys, monkeypatch):
        import twocensus.cli.app as app

        monkeypatch.setattr(app, "cmd_lattice", lambda spec: ({"label": "x", "rows": []}, EXIT_MISMATCH))
        assert run(["lattice", "D8"]) == EXIT_MISMATCH


class TestEntryPoint:
    def test_streams_switched_to_utf8(self):
        stream = io.TextIOWrapper(io.BytesIO(), encoding="latin-1")
        ensure_utf8_output(stream, io.StringIO())
        assert stream.encoding.lower() == "utf-8"
        stream.write("对照列")
        stream.flush()
        assert stream.buffer.getvalue() == "对照列".encode("utf-8")

    def test_main_runs_commands(self, capsys):
        assert main(["--format", "json", "census", "Q8"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["total"] == "6"
