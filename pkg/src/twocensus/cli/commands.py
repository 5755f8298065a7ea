"""
命令实现 - TwoCensus

主要功能：
- 计数方法选择：oracle / formula / goursat / quadform / auto
- census、sections、quadform、lattice 四个命令的报告数据
- 多方法交叉核对（不一致时标记 MISMATCH）
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from twocensus.core.census_formulas import (
    ClosedFormFamily,
    GoursatCountInput,
    census_from_frattini_profile,
    closed_form_census,
    frattini_profile_from_form,
    goursat_census,
    lattice_size_extraspecial,
    lattice_size_from_frattini_profile,
    reference_frattini_profile,
    section_census_formulas,
    section_census_from_profile,
)
from twocensus.core.exceptions import CapExceededError, MethodInfeasibleError, PreconditionError
from twocensus.core.grouptable import (
    CentralPower,
    CentralProduct,
    DirectPower,
    DirectProduct,
    Elementary,
    GroupSpec,
    GroupTable,
    Leaf,
    build,
    classify,
    format_spec,
    is_normal,
    spec_order,
)
from twocensus.core.quadform import (
    FormFamily,
    FormType,
    enumerate_singular_profile,
    form_of_group,
    standard_form,
    totally_singular_profile,
)
from twocensus.core.subgroup_oracle import (
    CensusTable,
    SectionCensus,
    census,
    elementary_abelian_over_frattini,
    enumerate_lattice,
    section_census,
    verify_lemma24,
)
from twocensus.utils.i18n import tr
from twocensus.utils.output import count_str
from twocensus.utils.settings import get_settings

logger = logging.getLogger(__name__)

METHODS = ("oracle", "formula", "goursat", "quadform", "auto")


# ============================================================================
# 表达式结构识别
# ============================================================================

def direct_factors(spec: GroupSpec) -> List[GroupSpec]:
    """展开顶层的直积与直幂"""
    if isinstance(spec, DirectProduct):
        return direct_factors(spec.left) + direct_factors(spec.right)
    if isinstance(spec, DirectPower):
        return direct_factors(spec.base) * spec.exponent
    return [spec]


def split_elementary(spec: GroupSpec) -> Tuple[List[GroupSpec], int]:
    """(非初等交换的直因子, 分离出的 C₂ 秩 m)"""
    core: List[GroupSpec] = []
    m = 0
    for factor in direct_factors(spec):
        if isinstance(factor, Elementary):
            m += factor.rank
        elif factor == Leaf("C2"):
            m += 1
        else:
            core.append(factor)
    return core, m


def join_direct(factors: List[GroupSpec]) -> Optional[GroupSpec]:
    if not factors:
        return None
    spec = factors[0]
    for factor in factors[1:]:
        spec = DirectProduct(spec, factor)
    return spec


def central_atoms(spec: GroupSpec) -> Optional[List[str]]:
    """中心积链中的原子名；含直积或 C₂^m (m ≥ 2) 时返回 None"""
    if isinstance(spec, Leaf):
        return [spec.name]
    if isinstance(spec, Elementary):
        return ["C2"] if spec.rank == 1 else None
    if isinstance(spec, CentralProduct):
        left, right = central_atoms(spec.left), central_atoms(spec.right)
        return None if left is None or right is None else left + right
    if isinstance(spec, CentralPower):
        base = central_atoms(spec.base)
        return None if base is None else base * spec.exponent
    return None


def recognize_form_type(spec: GroupSpec) -> Optional[FormType]:
    """
    识别广义超特殊族：D8/Q8 的中心积（至多带一个 C4）再直积 C₂^m

    Q8*Q8 ≅ D8*D8，Q8*C4 ≅ D8*C4，中心积中的 C2 因子被吸收。
    """
    core, m = split_elementary(spec)
    if len(core) != 1:
        return None
    atoms = central_atoms(core[0])
    if atoms is None:
        return None
    atoms = [a for a in atoms if a != "C2"]
    d8, q8, c4 = atoms.count("D8"), atoms.count("Q8"), atoms.count("C4")
    if d8 + q8 + c4 != len(atoms) or c4 > 1 or d8 + q8 == 0:
        return None
    r = d8 + q8
    if c4:
        return FormType(FormFamily.ALMOST, r, m)
    family = FormFamily.MINUS if q8 % 2 else FormFamily.PLUS
    return FormType(family, r, m)


def recognize_closed_form(spec: GroupSpec) -> Optional[Tuple[ClosedFormFamily, int]]:
    """D8×C₂^{n-3} 或 C4×C2×C₂^{n-3}"""
    core, m = split_elementary(spec)
    if core == [Leaf("D8")]:
        return ClosedFormFamily.D8, m + 3
    if core == [Leaf("C4")] and m >= 1:
        return ClosedFormFamily.C4C2, m + 2
    return None


def is_elementary_abelian_spec(spec: GroupSpec) -> bool:
    core, _ = split_elementary(spec)
    return not core


# ============================================================================
# 计数方法
# ============================================================================

@dataclass
class CensusOutcome:
    table: CensusTable
    elapsed: float


def _timed(fn: Callable[[], CensusTable]) -> CensusOutcome:
    start = time.perf_counter()
    table = fn()
    return CensusOutcome(table, time.perf_counter() - start)


def _relabel(table: CensusTable, label: str, method: str) -> CensusTable:
    return CensusTable(table.n, table.counts, label, method)


def census_by_oracle(spec: GroupSpec, cap: Optional[int] = None) -> CensusTable:
    group = build(spec)
    return _relabel(census(group, cap=cap), format_spec(spec), "oracle")


def census_by_formula(spec: GroupSpec) -> CensusTable:
    label = format_spec(spec)
    closed = recognize_closed_form(spec)
    if closed is not None:
        family, n = closed
        return _relabel(closed_form_census(n, family), label, "formula")
    form_type = recognize_form_type(spec)
    if form_type is not None:
        profile = frattini_profile_from_form(form_type)
        return census_from_frattini_profile(form_type.group_order_exponent, profile, label, "formula")
    raise MethodInfeasibleError(f"no closed form applies to {label}")


def sections_of(spec: Optional[GroupSpec]) -> Tuple[SectionCensus, int]:
    """A 的截段计数与 log₂|A|；可识别的 |Φ| = 2 族直接用公式"""
    if spec is None:
        return SectionCensus(0, {(0, 0): 1}, None, "1"), 0
    form_type = recognize_form_type(spec)
    if form_type is not None:
        n = form_type.group_order_exponent
        return section_census_from_profile(n, frattini_profile_from_form(form_type), format_spec(spec)), n
    order = spec_order(spec)
    cap = get_settings().section_cap
    if order > cap:
        raise MethodInfeasibleError(f"section census of {format_spec(spec)} needs order <= {cap}")
    group = build(spec)
    return section_census(group), group.n


def census_by_goursat(spec: GroupSpec) -> CensusTable:
    """s_k(A × C₂^m)，A 为去掉初等交换直因子后的部分"""
    core, m = split_elementary(spec)
    left = join_direct(core)
    sections, q_exp = sections_of(left)
    data = GoursatCountInput(sections, m, q_exp)
    return goursat_census(data, format_spec(spec))


def census_by_quadform(spec: GroupSpec, group: Optional[GroupTable] = None) -> CensusTable:
    label = format_spec(spec)
    if group is None:
        group = build(spec)
    if not classify(group).has_small_frattini:
        raise MethodInfeasibleError(f"|Phi({label})| != 2, quadratic form path does not apply")
    form = form_of_group(group)
    profile = {d + 1: c for d, c in enumerate(totally_singular_profile(form))}
    return census_from_frattini_profile(group.n, profile, label, "quadform")


def _goursat_feasible(spec: GroupSpec) -> bool:
    core, m = split_elementary(spec)
    if m == 0:
        return False
    left = join_direct(core)
    if left is None or recognize_form_type(left) is not None:
        return True
    return spec_order(left) <= get_settings().section_cap


def applicable_methods(spec: GroupSpec) -> List[str]:
    settings = get_settings()
    order = spec_order(spec)
    methods = []
    if order <= settings.oracle_cap:
        methods.append("oracle")
    if recognize_closed_form(spec) is not None or recognize_form_type(spec) is not None:
        methods.append("formula")
    if _goursat_feasible(spec):
        methods.append("goursat")
    if order <= settings.build_cap and recognize_form_type(spec) is not None:
        methods.append("quadform")
    return methods


def choose_method(spec: GroupSpec, prefer_fast: bool = False) -> str:
    """
    auto 的选择：阶不超过 auto_threshold 用 oracle，其余依次尝试 formula、goursat、quadform

    prefer_fast=True 时总是先试公式路径（验证时使用）。
    """
    settings = get_settings()
    methods = applicable_methods(spec)
    order = spec_order(spec)
    if not prefer_fast and order <= settings.auto_threshold and "oracle" in methods:
        return "oracle"
    for method in ("formula", "goursat", "quadform", "oracle"):
        if method in methods:
            return method
    if order <= settings.build_cap:
        group = build(spec)
        if classify(group).has_small_frattini:
            return "quadform"
    raise MethodInfeasibleError(f"no counting method applies to {format_spec(spec)} (order {order})")


def run_census(spec: GroupSpec, method: str = "auto") -> CensusOutcome:
    if method not in METHODS:
        raise MethodInfeasibleError(f"unknown method {method!r}")
    chosen = choose_method(spec) if method == "auto" else method
    runners = {
        "oracle": lambda: census_by_oracle(spec),
        "formula": lambda: census_by_formula(spec),
        "goursat": lambda: census_by_goursat(spec),
        "quadform": lambda: census_by_quadform(spec),
    }
    outcome = _timed(runners[chosen])
    logger.info(f"Census of {format_spec(spec)} by {chosen}: total {outcome.table.total} "
                f"in {outcome.elapsed:.2f}s")
    return outcome


@dataclass
class CrossCheck:
    outcomes: Dict[str, CensusOutcome]
    skipped: Dict[str, str]

    @property
    def mismatch(self) -> bool:
        tables = [o.table.counts for o in self.outcomes.values()]
        return any(t != tables[0] for t in tables[1:])


def cross_check(spec: GroupSpec) -> CrossCheck:
    """所有可用方法各算一遍"""
    outcomes: Dict[str, CensusOutcome] = {}
    skipped: Dict[str, str] = {}
    for method in ("oracle", "formula", "goursat", "quadform"):
        try:
            outcomes[method] = run_census(spec, method)
        except (MethodInfeasibleError, CapExceededError, PreconditionError) as e:
            skipped[method] = str(e)
    if not outcomes:
        raise MethodInfeasibleError(f"no counting method applies to {format_spec(spec)}")
    result = CrossCheck(outcomes, skipped)
    if result.mismatch:
        logger.warning(f"MISMATCH between methods for {format_spec(spec)}")
    return result


def cmd_census(spec: GroupSpec, method: str = "auto", check: bool = False) -> Tuple[dict, int]:
    """返回 (报告数据, 退出码)"""
    if not check:
        outcome = run_census(spec, method)
        payload = census_rows(outcome.table)
        payload["elapsed"] = f"{outcome.elapsed:.3f}"
        return payload, 0
    result = cross_check(spec)
    methods = list(result.outcomes)
    first = result.outcomes[methods[0]].table
    rows = []
    for k in range(first.n + 1):
        row = {"k": k}
        for name in methods:
            row[name] = count_str(result.outcomes[name].table.s(k))
        row["status"] = "ok" if len({result.outcomes[x].table.s(k) for x in methods}) == 1 else "MISMATCH"
        rows.append(row)
    payload = {
        "label": first.label,
        "n": first.n,
        "rows": rows,
        "total": count_str(first.total),
        "method": "+".join(methods),
        "skipped": result.skipped,
        "status": "MISMATCH" if result.mismatch else "ok",
    }
    return payload, 1 if result.mismatch else 0


def census_rows(table: CensusTable) -> dict:
    return {
        "label": table.label,
        "n": table.n,
        "rows": [{"k": k, "count": count_str(c)} for k, c in table.rows()],
        "total": count_str(table.total),
        "method": table.method,
    }


# ============================================================================
# sections
# ============================================================================

def _group_profile(group: GroupTable) -> Dict[int, int]:
    form = form_of_group(group)
    return {d + 1: c for d, c in enumerate(totally_singular_profile(form))}


def cmd_sections(spec: GroupSpec, alpha: Optional[int] = None, beta: Optional[int] = None,
                 split: bool = False) -> Tuple[dict, int]:
    """
    截段计数表，附 D8×C₂^{n-3} 的对照列与 ≤ 判定

    阶不超过 section_cap 时用枚举；否则要求群属于可识别的 |Φ| = 2 族并用公式。
    """
    label = format_spec(spec)
    order = spec_order(spec)
    method = "oracle"
    profile: Optional[Dict[int, int]] = None
    if order <= get_settings().section_cap:
        group = build(spec)
        small_phi = classify(group).has_small_frattini
        if split and not small_phi:
            raise PreconditionError(f"class split needs |Phi({label})| = 2")
        sections = section_census(group, split=split)
        n = group.n
        if small_phi:
            profile = _group_profile(group)
    else:
        form_type = recognize_form_type(spec)
        if form_type is None:
            raise MethodInfeasibleError(f"{label} is above the section cap and has no section formula")
        n = form_type.group_order_exponent
        profile = frattini_profile_from_form(form_type)
        sections = section_census_from_profile(n, profile, label)
        method = "formula"

    reference = section_census_from_profile(n, reference_frattini_profile(n)) if n >= 3 else None
    cells = sections.cells()
    if alpha is not None:
        cells = [c for c in cells if c[0] == alpha]
    if beta is not None:
        cells = [c for c in cells if c[1] == beta]
    if alpha is not None and beta is not None and not cells:
        cells = [(alpha, beta)]

    rows = []
    failures = 0
    for a, b in cells:
        count = sections.count(a, b)
        row = {"alpha": a, "beta": b, "count": count_str(count)}
        if split:
            own = sections.class_counts(a, b)
            for i, value in enumerate(own, start=1):
                row[f"s{i}"] = count_str(value)
            if profile is not None and method == "oracle":
                predicted = section_census_formulas(profile, n, a, b).as_tuple()
                row["formula"] = "ok" if predicted == own else "MISMATCH"
                failures += predicted != own
        if reference is not None:
            ref = reference.count(a, b)
            row["reference"] = count_str(ref)
            row["dominated"] = "yes" if count <= ref else "NO"
            failures += count > ref
        rows.append(row)

    note = tr("sections.reference_note", m=n - 3, n=n) if reference is not None else tr("sections.no_reference")
    payload = {
        "label": label,
        "n": n,
        "rows": rows,
        "total": count_str(sum(sections.counts.values())),
        "method": method,
        "notes": [note],
    }
    return payload, 1 if failures else 0


# ============================================================================
# quadform
# ============================================================================

def parse_form_type(name: str, r: int, m0: int = 0) -> FormType:
    family = {"plus": FormFamily.PLUS, "minus": FormFamily.MINUS, "almost": FormFamily.ALMOST}.get(name)
    if family is None:
        raise MethodInfeasibleError(f"unknown form type {name!r}")
    return FormType(family, r, m0)


def cmd_quadform(form_type: FormType, max_d: Optional[int] = None, check: bool = False) -> Tuple[dict, int]:
    """e_i（i = 2..max_d+1）与子群总数"""
    form = standard_form(form_type)
    profile = totally_singular_profile(form)
    if max_d is None:
        max_d = form.dim
    max_d = min(max_d, form.dim)
    enumerated = enumerate_singular_profile(form) if check else None

    rows = []
    mismatch = False
    for d in range(1, max_d + 1):
        row = {"i": d + 1, "e": count_str(profile[d])}
        if enumerated is not None:
            row["enumerated"] = count_str(enumerated[d])
            row["status"] = "ok" if enumerated[d] == profile[d] else "MISMATCH"
            mismatch |= enumerated[d] != profile[d]
        rows.append(row)

    e = {d + 1: c for d, c in enumerate(profile)}
    if form_type.m0 == 0 and form_type.r >= 1:
        total = lattice_size_extraspecial(form_type.r, e, almost=form_type.family is FormFamily.ALMOST)
    else:
        total = lattice_size_from_frattini_profile(form.dim, e)
    payload = {
        "label": form_type.name,
        "n": form_type.group_order_exponent,
        "rows": rows,
        "total": count_str(total),
        "method": "quadform" + ("+enumerate" if check else ""),
    }
    return payload, 1 if mismatch else 0


# ============================================================================
# lattice
# ============================================================================

def cmd_lattice(spec: GroupSpec) -> Tuple[dict, int]:
    """层大小、覆盖边数、正规子群数；（几乎）超特殊群附带结构检查"""
    group = build(spec)
    lattice = enumerate_lattice(group)
    rows = []
    for k in range(lattice.n + 1):
        level = lattice.subgroups(k)
        rows.append({
            "k": k,
            "count": count_str(len(level)),
            "normal": count_str(sum(1 for h in level if is_normal(group, h))),
            "covers": count_str(len(lattice.covers[k]) if k < lattice.n else 0),
        })
    payload = {
        "label": group.label,
        "n": group.n,
        "rows": rows,
        "total": count_str(lattice.total),
        "method": "oracle",
    }
    code = 0
    info = classify(group)
    if info.has_small_frattini:
        e = elementary_abelian_over_frattini(group, lattice)
        payload["e"] = {str(i): count_str(c) for i, c in e.items() if i >= 2}
    if info.is_extraspecial or info.is_almost_extraspecial:
        report = verify_lemma24(group, lattice)
        payload["structure"] = {
            c.name: {"passed": c.passed, "witnesses": c.witnesses} for c in report.checks
        }
        code = 0 if report.passed else 1
    return payload, code
