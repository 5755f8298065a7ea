"""
计数公式测试：闭式、情形项、e_i 公式、截段公式、Goursat 与支配关系
"""

import pytest
from hypothesis import given, strategies as st

from twocensus.cli.spec_parser import parse_spec
from twocensus.core.census_formulas import (
    CASES,
    ClosedFormFamily,
    ClosedFormParams,
    GoursatCountInput,
    case_c_alternate_term,
    case_d_identity,
    case_e_identity,
    case_term,
    census_from_frattini_profile,
    closed_form_census,
    dominance_check,
    frattini_profile_from_form,
    goursat_census,
    goursat_count,
    lattice_size_extraspecial,
    lattice_size_from_frattini_profile,
    reference_census,
    reference_frattini_profile,
    section_census_formulas,
    section_census_from_profile,
    sk_closed_form,
    termwise_dominance,
)
from twocensus.core.exceptions import DimensionError, IncompleteSectionCensusError
from twocensus.core.grouptable import build
from twocensus.core.quadform import FormFamily, FormType, form_of_group, totally_singular_profile
from twocensus.core.subgroup_oracle import (
    SectionCensus,
    census,
    elementary_abelian_over_frattini,
    section_census,
)

n_values = st.integers(min_value=3, max_value=30)


def _reference_text(n: int) -> str:
    return "D8" if n == 3 else f"D8 x C2^{n - 3}"


def _c4c2_text(n: int) -> str:
    return "C4 x C2" if n == 3 else f"C4 x C2^{n - 2}"


def _form_types(n: int) -> list:
    """|Φ| = 2 且阶为 2^n 的群对应的全部标准型"""
    dim = n - 1
    types = []
    for r in range(1, dim // 2 + 1):
        types.append(FormType(FormFamily.PLUS, r, dim - 2 * r))
        types.append(FormType(FormFamily.MINUS, r, dim - 2 * r))
    for r in range(0, (dim - 1) // 2 + 1):
        types.append(FormType(FormFamily.ALMOST, r, dim - 1 - 2 * r))
    return types


class TestClosedForms:
    def test_small_tables(self):
        assert closed_form_census(3).counts == (1, 5, 3, 1)
        assert closed_form_census(4).counts == (1, 11, 15, 7, 1)
        assert closed_form_census(3, ClosedFormFamily.C4C2).counts == (1, 3, 3, 1)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_d8_family_matches_oracle(self, n):
        assert census(build(parse_spec(_reference_text(n)))).counts == reference_census(n).counts

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_c4c2_family_matches_oracle(self, n):
        oracle = census(build(parse_spec(_c4c2_text(n))))
        assert oracle.counts == closed_form_census(n, ClosedFormFamily.C4C2).counts

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [7, 8])
    def test_families_match_oracle_up_to_order_256(self, n):
        assert census(build(parse_spec(_reference_text(n)))).counts == reference_census(n).counts
        oracle = census(build(parse_spec(_c4c2_text(n))))
        assert oracle.counts == closed_form_census(n, ClosedFormFamily.C4C2).counts

    def test_parameter_checks(self):
        with pytest.raises(DimensionError):
            ClosedFormParams(2, 1)
        with pytest.raises(DimensionError):
            ClosedFormParams(4, 5)

    @given(n_values)
    def test_boundary_values(self, n):
        assert sk_closed_form(ClosedFormParams(n, 0)) == 1
        assert sk_closed_form(ClosedFormParams(n, n)) == 1
        assert sk_closed_form(ClosedFormParams(n, n, ClosedFormFamily.C4C2)) == 1


class TestCaseTerms:
    @given(n_values, st.data())
    def test_cases_sum_to_closed_form(self, n, data):
        k = data.draw(st.integers(min_value=0, max_value=n))
        total = sum(case_term(c, n, k) for c in CASES)
        assert total == sk_closed_form(ClosedFormParams(n, k, ClosedFormFamily.C4C2))

    @given(n_values, st.data())
    def test_case_identities(self, n, data):
        k = data.draw(st.integers(min_value=0, max_value=n - 1))
        assert case_d_identity(n, k)
        assert case_e_identity(n, k)

    @given(n_values, st.data())
    def test_termwise_dominance(self, n, data):
        k = data.draw(st.integers(min_value=0, max_value=n))
        assert all(termwise_dominance(n, k))

    def test_alternate_case_c_disagrees_with_enumeration(self):
        # n = 4 时两种读法恰好一致，n = 5 才分开
        assert case_term("c", 4, 2) == case_c_alternate_term(4, 2)
        assert case_term("c", 5, 2) != case_c_alternate_term(5, 2)
        oracle = census(build(parse_spec("C4 x C2^3")))
        with_alternate = sum(case_term(c, 5, 2) for c in "abde") + case_c_alternate_term(5, 2)
        assert with_alternate != oracle.s(2)
        assert sum(case_term(c, 5, 2) for c in CASES) == oracle.s(2)

    def test_unknown_case(self):
        with pytest.raises(ValueError):
            case_term("f", 4, 2)


class TestFrattiniFormulas:
    def test_profiles(self):
        assert frattini_profile_from_form(FormType.plus(2)) == {1: 1, 2: 9, 3: 6, 4: 0, 5: 0}
        assert reference_frattini_profile(3) == {1: 1, 2: 2, 3: 0}
        with pytest.raises(DimensionError):
            reference_frattini_profile(2)

    def test_census_from_profile(self):
        assert census_from_frattini_profile(4, {2: 5, 3: 2}).counts == (1, 11, 15, 7, 1)

    def test_lattice_sizes(self):
        assert lattice_size_extraspecial(2, {2: 9, 3: 6}) == 110
        assert lattice_size_extraspecial(2, {2: 5, 3: 0}) == 78
        assert lattice_size_extraspecial(1, {2: 3}, almost=True) == 23
        assert lattice_size_from_frattini_profile(3, {2: 5, 3: 2}) == 35
        with pytest.raises(DimensionError):
            lattice_size_extraspecial(0, {})

    @pytest.mark.parametrize("fixture,r,almost,total", [
        ("d8d8", 2, False, 110), ("q8d8", 2, False, 78), ("d8c4", 1, True, 23),
    ])
    def test_three_paths_agree(self, request, fixture, r, almost, total):
        group = request.getfixturevalue(fixture)
        oracle_e = elementary_abelian_over_frattini(group)
        form_e = {d + 1: c for d, c in enumerate(totally_singular_profile(form_of_group(group)))}
        assert census(group).total == total
        assert lattice_size_extraspecial(r, oracle_e, almost) == total
        assert lattice_size_extraspecial(r, form_e, almost) == total

    @pytest.mark.parametrize("n", range(3, 8))
    def test_every_form_type_is_below_reference(self, n):
        reference = reference_frattini_profile(n)
        types = _form_types(n)
        assert FormType.extraspecial_times_elementary(1, n - 3) in types
        for form_type in types:
            e = frattini_profile_from_form(form_type)
            assert sorted(e) == list(range(1, n + 1))
            for i, count in e.items():
                assert count <= reference[i], (form_type.name, i)

    @pytest.mark.parametrize("text", ["D8 * D8", "Q8 * D8", "D8 * C4", "Q8 * C4 x C2", "Q8 x C2^2", "C4 x C2^3"])
    def test_oracle_profiles_are_below_reference(self, text):
        group = build(parse_spec(text))
        reference = reference_frattini_profile(group.n)
        e = elementary_abelian_over_frattini(group)
        for i in range(1, group.n + 1):
            assert e.get(i, 0) <= reference[i], i

    @pytest.mark.parametrize("text", ["D8 * D8", "Q8 * D8", "D8 * C4", "D8 x C2", "Q8 x C2^2", "C4 x C2^2"])
    def test_census_from_form_matches_oracle(self, text):
        group = build(parse_spec(text))
        e = {d + 1: c for d, c in enumerate(totally_singular_profile(form_of_group(group)))}
        assert census_from_frattini_profile(group.n, e).counts == census(group).counts


class TestSectionFormulas:
    def test_d8d8_cells(self):
        e = frattini_profile_from_form(FormType.plus(2))
        assert section_census_formulas(e, 5, 2, 0).s2 == 33
        assert section_census_formulas(e, 5, 1, 1).as_tuple() == (15, 0, 72, 18)
        assert section_census_formulas(e, 5, 1, 1).total == 105
        assert section_census_formulas(e, 5, 4, 3).total == 0

    @pytest.mark.parametrize("text", ["D8 * D8", "Q8 * D8", "D8 * C4", "D8 x C2", "Q8 x C2"])
    def test_classes_match_oracle(self, text):
        group = build(parse_spec(text))
        e = elementary_abelian_over_frattini(group)
        predicted = section_census_from_profile(group.n, e)
        observed = section_census(group, split=True)
        assert predicted.counts == observed.counts
        assert predicted.classes == observed.classes

    @pytest.mark.parametrize("n", [4, 5])
    def test_reference_formulas_match_oracle(self, n):
        group = build(parse_spec(_reference_text(n)))
        assert section_census_from_profile(n, reference_frattini_profile(n)).counts == section_census(group).counts


class TestGoursat:
    @pytest.mark.parametrize("left,m", [
        ("D8", 1), ("D8", 2), ("Q8", 1), ("Q8", 3), ("C4 x C2", 2), ("D8 * C4", 2), ("D8 * D8", 1),
    ])
    def test_matches_oracle(self, left, m):
        a = build(parse_spec(left))
        data = GoursatCountInput(section_census(a), m, a.n)
        product = build(parse_spec(f"{left} x C2^{m}"))
        assert goursat_census(data).counts == census(product).counts

    @pytest.mark.slow
    @pytest.mark.parametrize("left,m", [("D8 * D8", 2), ("Q8 * D8", 2), ("D8 * D8", 3), ("D8 * C4", 3)])
    def test_matches_oracle_large(self, left, m):
        a = build(parse_spec(left))
        data = GoursatCountInput(section_census(a), m, a.n)
        product = build(parse_spec(f"{left} x C2^{m}"))
        assert goursat_census(data).counts == census(product).counts

    def test_formula_sections_feed_goursat(self):
        sections = section_census_from_profile(5, frattini_profile_from_form(FormType.plus(2)))
        data = GoursatCountInput(sections, 1, 5)
        assert goursat_census(data).counts == census(build(parse_spec("D8 * D8 x C2"))).counts

    def test_trivial_left_factor_gives_elementary_census(self):
        data = GoursatCountInput(SectionCensus(0, {(0, 0): 1}), 4, 0)
        assert goursat_census(data).counts == (1, 15, 35, 15, 1)

    def test_incomplete_sections(self):
        with pytest.raises(IncompleteSectionCensusError):
            GoursatCountInput(SectionCensus(3, {(0, 0): 1}), 2, 3)

    def test_k_range(self):
        data = GoursatCountInput(SectionCensus(0, {(0, 0): 1}), 2, 0)
        with pytest.raises(DimensionError):
            goursat_count(data, 3)


class TestDominance:
    def test_extraspecial_dominated(self, d8d8):
        assert dominance_check(census(d8d8), reference_census(5)).holds

    def test_violation_reported(self):
        result = dominance_check(reference_census(4), closed_form_census(4, ClosedFormFamily.C4C2))
        assert not result.holds
        assert result.first_violation == 1

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            dominance_check(reference_census(4), reference_census(5))
