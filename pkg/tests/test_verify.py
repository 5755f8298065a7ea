"""
定理实例验证测试
"""

import pytest

from twocensus.cli import verify
from twocensus.cli.spec_parser import parse_spec
from twocensus.cli.verify import (
    FAIL,
    FAMILIES,
    INFEASIBLE,
    OUT_OF_HYPOTHESIS,
    PASS,
    InstanceResult,
    abelian_family,
    central_product_family,
    check_instance,
    cmd_verify,
    family_instances,
    genextra_family,
    is_reference_group,
    partitions,
)
from twocensus.core.exceptions import CensusError
from twocensus.core.grouptable import format_spec
from twocensus.utils.settings import get_settings_manager


class TestFamilies:
    def test_partitions(self):
        assert list(partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
        assert len(list(partitions(8))) == 22

    def test_abelian(self):
        assert abelian_family(3) == ["C8", "C4 x C2"]
        assert abelian_family(4) == ["C16", "C8 x C2", "C4 x C4", "C4 x C2^2"]

    def test_genextra(self):
        assert genextra_family(3) == ["D8", "Q8"]
        assert genextra_family(4) == ["D8 x C2", "Q8 x C2", "D8 * C4"]
        assert "D8^{*2} * C4" in genextra_family(6)

    def test_central_products(self):
        assert central_product_family(4) == ["D8 x C2", "D8 * C4", "Q8 x C2", "Q8 * C4"]

    def test_instances_are_deduplicated(self):
        instances = family_instances([4], FAMILIES)
        labels = [format_spec(s) for s in instances]
        assert len(labels) == len(set(labels)) == 8

    def test_unknown_family(self):
        with pytest.raises(CensusError):
            family_instances([3], ["dihedral"])


class TestInstances:
    def test_elementary_abelian_is_out_of_hypothesis(self):
        result = check_instance("thm11", parse_spec("C2^4"))
        assert result.status == OUT_OF_HYPOTHESIS

    def test_small_orders_are_out_of_hypothesis(self):
        assert check_instance("cor29", parse_spec("C4")).status == OUT_OF_HYPOTHESIS

    @pytest.mark.parametrize("theorem", ["thm11", "cor29", "lem14", "lem26", "cor28"])
    def test_extraspecial_passes(self, theorem):
        assert check_instance(theorem, parse_spec("D8 * D8")).status == PASS

    def test_reference_group_attains_cyclic_bound(self):
        result = check_instance("lem14", parse_spec("D8 x C2"))
        assert result.status == PASS
        assert "(equality)" in result.detail

    @pytest.mark.parametrize("text,expected", [
        ("D8", True), ("D8 x C2", True), ("D8 * C2 x C2", True), ("D8 x C2^3", True),
        ("D8 * C4", False), ("Q8 x C2", False), ("C4 x C2^2", False), ("D8 * D8", False),
    ])
    def test_reference_group_recognition(self, make_group, text, expected):
        assert is_reference_group(make_group(text)) is expected

    def test_cyclic_equality_outside_reference_fails(self, monkeypatch):
        monkeypatch.setattr(verify, "cyclic_census", lambda group: {1: 1, 2: 11, 4: 2})
        result = check_instance("lem14", parse_spec("Q8 x C2"))
        assert result.status == FAIL
        assert "equality 14 = 14 outside D8 x C2^1" in result.detail

    def test_reference_group_below_bound_fails(self, monkeypatch):
        monkeypatch.setattr(verify, "cyclic_census", lambda group: {1: 1, 2: 11})
        result = check_instance("lem14", parse_spec("D8 x C2"))
        assert result.status == FAIL
        assert result.detail == "reference group has 12 < 14"

    def test_frattini_profile_compared_at_every_index(self, monkeypatch):
        # D8*D8 的 e = 1, 9, 6, 0, 0；只把参照的 e_3 压到 5
        monkeypatch.setattr(verify, "reference_frattini_profile", lambda n: {1: 1, 2: 11, 3: 5, 4: 2, 5: 0})
        result = check_instance("lem26", parse_spec("D8 * D8"))
        assert result.status == FAIL
        assert result.detail == "e3=6 > e3(ref)=5"

    def test_frattini_profile_passes_against_true_reference(self):
        result = check_instance("lem26", parse_spec("D8 * D8"))
        assert result.status == PASS
        assert "e2=9 e2(ref)=11" in result.detail

    def test_exponent_above_four(self):
        assert check_instance("lem26", parse_spec("C8 x C2")).status == OUT_OF_HYPOTHESIS

    def test_cor28_needs_extraspecial(self):
        assert check_instance("cor28", parse_spec("D8 x C2")).status == OUT_OF_HYPOTHESIS

    def test_caps_make_instances_infeasible(self):
        get_settings_manager().apply_overrides(section_cap=16, lemma22_cap=16)
        assert check_instance("cor28", parse_spec("D8 * D8")).status == INFEASIBLE
        assert check_instance("lem22", parse_spec("D8 * D8")).status == INFEASIBLE

    def test_engine_errors_become_infeasible(self):
        get_settings_manager().apply_overrides(oracle_cap=16)
        assert check_instance("lem22", parse_spec("D8 * D8")).status == INFEASIBLE

    def test_quotient_bound_on_small_groups(self):
        for text in ("D8", "Q8", "D8 x C2", "D8 * C4"):
            result = check_instance("lem22", parse_spec(text))
            assert result.status == PASS, result.detail

    def test_row(self):
        row = InstanceResult("thm11", "D8", 3, PASS, "formula").row()
        assert row == {"theorem": "thm11", "label": "D8", "n": "3", "method": "formula",
                       "status": "pass", "detail": ""}


class TestCmdVerify:
    @pytest.mark.parametrize("theorem", ["thm11", "cor29", "lem14", "lem26", "cor28"])
    def test_small_orders_pass(self, theorem):
        payload, code = cmd_verify(theorem, [3, 4, 5], progress=False)
        assert code == 0
        assert payload["summary"][FAIL] == 0
        assert payload["summary"][PASS] > 0

    def test_lemma22_small(self):
        payload, code = cmd_verify("lem22", [3, 4], progress=False)
        assert code == 0

    @pytest.mark.slow
    def test_theorem_up_to_order_64(self):
        payload, code = cmd_verify("thm11", [6], progress=False)
        assert code == 0

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [7, 8])
    def test_theorem_at_orders_128_and_256(self, n):
        payload, code = cmd_verify("thm11", [n], progress=False)
        assert code == 0
        assert payload["summary"][FAIL] == 0
        assert payload["summary"][PASS] > 0

    @pytest.mark.slow
    @pytest.mark.parametrize("theorem,n", [("lem26", 6), ("lem26", 7), ("cor28", 6)])
    def test_exponent_four_and_sections_beyond_order_32(self, theorem, n):
        payload, code = cmd_verify(theorem, [n], progress=False)
        assert code == 0
        assert payload["summary"][FAIL] == 0
        assert payload["summary"][PASS] > 0

    def test_extra_spec(self):
        payload, code = cmd_verify("thm11", [3], ["abelian"], ["C2^4", "C8"], progress=False)
        labels = [row["label"] for row in payload["rows"]]
        assert labels == ["C8", "C4 x C2", "C2^4"]
        assert payload["rows"][-1]["status"] == OUT_OF_HYPOTHESIS
        assert code == 0

    def test_workers_keep_order(self):
        serial, _ = cmd_verify("cor29", [4], progress=False, workers=1)
        parallel, _ = cmd_verify("cor29", [4], progress=False, workers=3)
        assert serial["rows"] == parallel["rows"]

    def test_failure_sets_exit_code(self, monkeypatch):
        def failing(spec):
            return InstanceResult("thm11", format_spec(spec), 3, FAIL, "oracle", "forced")

        monkeypatch.setitem(verify._CHECKS, "thm11", failing)
        payload, code = cmd_verify("thm11", [3], ["genextra"], progress=False)
        assert code == 1
        assert payload["summary"][FAIL] == 2

    def test_notes(self):
        payload, _ = cmd_verify("cor29", [3], ["genextra"], progress=False)
        assert payload["notes"][1] == "2 passed, 0 failed, 0 out of hypothesis, 0 infeasible"

    def test_unknown_theorem(self):
        with pytest.raises(CensusError):
            cmd_verify("thm99", [3], progress=False)
