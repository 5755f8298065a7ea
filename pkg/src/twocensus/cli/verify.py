"""
定理验证 - TwoCensus

主要功能：
- 按族生成阶为 2^n 的可构造群（阿贝尔分拆、广义超特殊、中心积）
- 逐个实例检验 s_k(G) ≤ s_k(D8×C₂^{n-3}) 及相关引理
- 多线程执行，结果按输入顺序汇总，tqdm 显示进度
"""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from tqdm import tqdm

from twocensus.cli.commands import choose_method, is_elementary_abelian_spec, run_census
from twocensus.cli.spec_parser import parse_spec
from twocensus.core.census_formulas import (
    dominance_check,
    e_value,
    reference_census,
    reference_frattini_profile,
    section_census_formulas,
    section_census_from_profile,
)
from twocensus.core.exceptions import CensusError
from twocensus.core.grouptable import (
    Elementary,
    GroupSpec,
    GroupTable,
    build,
    classify,
    direct_product,
    format_spec,
    quotient,
    spec_order,
)
from twocensus.core.quadform import FormType, arf_classify, form_of_group, totally_singular_profile
from twocensus.core.subgroup_oracle import (
    census,
    cyclic_census,
    enumerate_lattice,
    normal_subgroups,
    section_census,
)
from twocensus.utils.i18n import tr
from twocensus.utils.output import count_str
from twocensus.utils.settings import get_settings

logger = logging.getLogger(__name__)

THEOREMS = ("thm11", "lem22", "lem14", "cor29", "lem26", "cor28")
FAMILIES = ("abelian", "genextra", "central-products")

PASS = "pass"
FAIL = "FAIL"
OUT_OF_HYPOTHESIS = "out-of-hypothesis"
INFEASIBLE = "infeasible"


# ============================================================================
# 群族
# ============================================================================

def partitions(n: int, largest: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """n 的全部分拆，部分按降序"""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for rest in partitions(n - part, part):
            yield (part,) + rest


def _with_elementary(text: str, m: int) -> str:
    if m == 0:
        return text
    tail = "C2" if m == 1 else f"C2^{m}"
    return f"{text} x {tail}" if text else tail


def _central_chain(atoms: Sequence[str]) -> str:
    return " * ".join(atoms)


def _d8_power(r: int) -> str:
    return "D8" if r == 1 else f"D8^{{*{r}}}"


def abelian_family(n: int) -> List[str]:
    """含有 ≥ 2 的部分的分拆，对应循环群的直积"""
    specs = []
    for parts in partitions(n):
        if parts[0] < 2:
            continue
        big = [f"C{1 << p}" for p in parts if p >= 2]
        specs.append(_with_elementary(" x ".join(big), parts.count(1)))
    return specs


def genextra_family(n: int) -> List[str]:
    """D8^{*r}、Q8*D8^{*(r-1)}、D8^{*r}*C4，各自再直积 C₂^m"""
    specs = []
    for r in range(1, n // 2 + 1):
        m = n - 2 * r - 1
        if m >= 0:
            specs.append(_with_elementary(_d8_power(r), m))
            minus = "Q8" if r == 1 else f"Q8 * {_d8_power(r - 1)}"
            specs.append(_with_elementary(minus, m))
        if m - 1 >= 0:
            specs.append(_with_elementary(f"{_d8_power(r)} * C4", m - 1))
    return specs


def central_product_family(n: int) -> List[str]:
    """a 个 D8 与 b 个 Q8（b ≤ 2）的中心积，可再带一个 C4 或 C8，补足 C₂^m"""
    specs = []
    for total in range(1, n // 2 + 1):
        for b in range(0, min(2, total) + 1):
            a = total - b
            base = ["D8"] * a + ["Q8"] * b
            for tail, extra in (([], 0), (["C4"], 1), (["C8"], 2)):
                m = n - (2 * total + 1 + extra)
                if m >= 0:
                    specs.append(_with_elementary(_central_chain(base + tail), m))
    return specs


_FAMILY_BUILDERS: Dict[str, Callable[[int], List[str]]] = {
    "abelian": abelian_family,
    "genextra": genextra_family,
    "central-products": central_product_family,
}


def family_instances(n_values: Iterable[int], families: Sequence[str]) -> List[GroupSpec]:
    """去重后的实例列表（按 n、族、生成顺序）"""
    seen = set()
    result = []
    for n in n_values:
        for family in families:
            if family not in _FAMILY_BUILDERS:
                raise CensusError(f"unknown family {family!r}")
            for text in _FAMILY_BUILDERS[family](n):
                spec = parse_spec(text)
                key = format_spec(spec)
                if key not in seen:
                    seen.add(key)
                    result.append(spec)
    return result


# ============================================================================
# 单个实例的检验
# ============================================================================

@dataclass
class InstanceResult:
    theorem: str
    label: str
    n: int
    status: str
    method: str = ""
    detail: str = ""

    def row(self) -> Dict[str, str]:
        return {
            "theorem": self.theorem,
            "label": self.label,
            "n": str(self.n),
            "method": self.method,
            "status": self.status,
            "detail": self.detail,
        }


def _exponent(spec: GroupSpec) -> int:
    return spec_order(spec).bit_length() - 1


def _hypothesis_guard(theorem: str, spec: GroupSpec) -> Optional[InstanceResult]:
    n = _exponent(spec)
    label = format_spec(spec)
    if is_elementary_abelian_spec(spec):
        return InstanceResult(theorem, label, n, OUT_OF_HYPOTHESIS, detail="elementary abelian")
    if n < 3:
        return InstanceResult(theorem, label, n, OUT_OF_HYPOTHESIS, detail="order below 8")
    return None


def check_thm11(spec: GroupSpec) -> InstanceResult:
    n = _exponent(spec)
    outcome = run_census(spec, choose_method(spec, prefer_fast=True))
    result = dominance_check(outcome.table, reference_census(n))
    detail = "" if result.holds else f"violations at k={list(result.violations)}"
    return InstanceResult("thm11", format_spec(spec), n, PASS if result.holds else FAIL,
                          outcome.table.method, detail)


def check_cor29(spec: GroupSpec) -> InstanceResult:
    n = _exponent(spec)
    outcome = run_census(spec, choose_method(spec, prefer_fast=True))
    bound = reference_census(n).total
    total = outcome.table.total
    return InstanceResult("cor29", format_spec(spec), n, PASS if total <= bound else FAIL,
                          outcome.table.method, f"{count_str(total)} <= {count_str(bound)}")


def is_reference_group(group: GroupTable) -> bool:
    """
    G ≅ D8×C₂^{n-3}：|Φ| = 2 的群由 G/Φ 上的二次型决定，
    因此比较 Arf 分类即可
    """
    n = group.order.bit_length() - 1
    if n < 3 or not classify(group).has_small_frattini:
        return False
    return arf_classify(form_of_group(group)) == FormType.extraspecial_times_elementary(1, n - 3)


def check_lem14(spec: GroupSpec) -> InstanceResult:
    """|L₁(G)| ≤ 7·2^{n-3}，恰在 G ≅ D8×C₂^{n-3} 时取等号"""
    n = _exponent(spec)
    group = build(spec)
    cyclic = sum(cyclic_census(group).values())
    bound = 7 << (n - 3)
    reference = is_reference_group(group)
    problems = []
    if cyclic > bound:
        problems.append(f"{cyclic} > {bound}")
    elif cyclic == bound and not reference:
        problems.append(f"equality {cyclic} = {bound} outside D8 x C2^{n - 3}")
    elif cyclic < bound and reference:
        problems.append(f"reference group has {cyclic} < {bound}")
    if problems:
        detail = "; ".join(problems)
    else:
        detail = f"{cyclic} <= {bound}" + (" (equality)" if cyclic == bound else "")
    return InstanceResult("lem14", format_spec(spec), n, FAIL if problems else PASS, "oracle", detail)


def check_lem22(spec: GroupSpec) -> InstanceResult:
    """对每个非平凡正规子群 M：s_k(G) ≤ s_k(G/M × C₂^r)，|M| = 2^r"""
    n = _exponent(spec)
    label = format_spec(spec)
    cap = get_settings().lemma22_cap
    if spec_order(spec) > cap:
        return InstanceResult("lem22", label, n, INFEASIBLE, detail=f"order above {cap}")
    group = build(spec)
    lattice = enumerate_lattice(group)
    own = census(group, lattice)
    tested = 0
    failures = []
    for normal in normal_subgroups(lattice):
        if normal.order == 1:
            continue
        factor = quotient(group, normal)
        padded = direct_product(factor, build(Elementary(normal.exponent_k)))
        result = dominance_check(own, census(padded))
        tested += 1
        if not result.holds:
            failures.append(f"|M|={normal.order} k={result.first_violation}")
    detail = f"{tested} normal subgroups" if not failures else "; ".join(failures[:5])
    return InstanceResult("lem22", label, n, FAIL if failures else PASS, "oracle", detail)


def _reference_spec(n: int) -> GroupSpec:
    return parse_spec(_with_elementary("D8", n - 3))


def check_lem26(spec: GroupSpec) -> InstanceResult:
    """
    指数 4 的群：2^n = 1 + c₂ + 2c₄；（几乎）超特殊群（n ≤ 7）还要求 c₄(D8×C₂^{n-3}) ≤ c₄(G)；
    |Φ| = 2 时对每个 i 都有 e_i(G) ≤ e_i(D8×C₂^{n-3})
    """
    n = _exponent(spec)
    label = format_spec(spec)
    group = build(spec)
    if group.exponent > 4:
        return InstanceResult("lem26", label, n, OUT_OF_HYPOTHESIS, "oracle", f"exponent {group.exponent}")
    cyclic = cyclic_census(group)
    c2, c4 = cyclic.get(2, 0), cyclic.get(4, 0)
    problems = []
    if group.order != 1 + c2 + 2 * c4:
        problems.append(f"2^n != 1 + {c2} + 2*{c4}")
    info = classify(group)
    notes = [f"c2={c2} c4={c4}"]
    if (info.is_extraspecial or info.is_almost_extraspecial) and n <= 7:
        ref_c4 = cyclic_census(build(_reference_spec(n))).get(4, 0)
        notes.append(f"c4(ref)={ref_c4}")
        if ref_c4 > c4:
            problems.append(f"c4(ref)={ref_c4} > c4={c4}")
    if info.has_small_frattini:
        profile = totally_singular_profile(form_of_group(group))
        reference = reference_frattini_profile(n)
        for d, e in enumerate(profile):
            i = d + 1
            ref_e = e_value(reference, i)
            if e > ref_e:
                problems.append(f"e{i}={e} > e{i}(ref)={ref_e}")
        notes.append(f"e2={profile[1]} e2(ref)={e_value(reference, 2)}")
    detail = "; ".join(problems) if problems else " ".join(notes)
    return InstanceResult("lem26", label, n, FAIL if problems else PASS, "oracle", detail)


def check_cor28(spec: GroupSpec) -> InstanceResult:
    """（几乎）超特殊群：各类截段计数与公式一致，且不超过 D8×C₂^{n-3} 的对应类"""
    n = _exponent(spec)
    label = format_spec(spec)
    cap = get_settings().section_cap
    if spec_order(spec) > cap:
        return InstanceResult("cor28", label, n, INFEASIBLE, detail=f"order above {cap}")
    group = build(spec)
    info = classify(group)
    if not (info.is_extraspecial or info.is_almost_extraspecial):
        return InstanceResult("cor28", label, n, OUT_OF_HYPOTHESIS, detail="not (almost) extraspecial")
    sections = section_census(group, split=True)
    e = {d + 1: c for d, c in enumerate(totally_singular_profile(form_of_group(group)))}
    reference = section_census_from_profile(n, reference_frattini_profile(n))
    problems = []
    for alpha, beta in sections.cells():
        own = sections.class_counts(alpha, beta)
        if own != section_census_formulas(e, n, alpha, beta).as_tuple():
            problems.append(f"formula mismatch at ({alpha},{beta})")
        ref = reference.class_counts(alpha, beta)
        if any(x > y for x, y in zip(own, ref)):
            problems.append(f"class dominance fails at ({alpha},{beta})")
    detail = "; ".join(problems[:5]) if problems else f"{len(sections.cells())} cells"
    return InstanceResult("cor28", label, n, FAIL if problems else PASS, "oracle", detail)


_CHECKS: Dict[str, Callable[[GroupSpec], InstanceResult]] = {
    "thm11": check_thm11,
    "lem22": check_lem22,
    "lem14": check_lem14,
    "cor29": check_cor29,
    "lem26": check_lem26,
    "cor28": check_cor28,
}


def check_instance(theorem: str, spec: GroupSpec) -> InstanceResult:
    guarded = _hypothesis_guard(theorem, spec)
    if guarded is not None:
        return guarded
    try:
        return _CHECKS[theorem](spec)
    except CensusError as e:
        logger.warning(f"{theorem} on {format_spec(spec)} skipped: {e}")
        return InstanceResult(theorem, format_spec(spec), _exponent(spec), INFEASIBLE, detail=str(e))


# ============================================================================
# 批量验证
# ============================================================================

def cmd_verify(theorem: str, n_values: Sequence[int], families: Sequence[str] = FAMILIES,
               extra_specs: Sequence[str] = (), workers: Optional[int] = None,
               progress: bool = True) -> Tuple[dict, int]:
    """
    对所有实例运行一个定理的检验

    Returns:
        (报告数据, 退出码)：任一实例 FAIL 时退出码为 1
    """
    if theorem not in _CHECKS:
        raise CensusError(f"unknown theorem {theorem!r}, expected one of {', '.join(THEOREMS)}")
    instances = family_instances(n_values, families)
    known = {format_spec(s) for s in instances}
    for text in extra_specs:
        spec = parse_spec(text)
        if format_spec(spec) not in known:
            instances.append(spec)
            known.add(format_spec(spec))

    if workers is None:
        workers = get_settings().workers
    show = progress and sys.stderr.isatty()
    logger.info(f"Verifying {theorem} on {len(instances)} groups with {workers} worker(s)")

    def run(spec: GroupSpec) -> InstanceResult:
        return check_instance(theorem, spec)

    with tqdm(total=len(instances), desc=theorem, unit="group", disable=not show, file=sys.stderr) as bar:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = []
                for result in executor.map(run, instances):
                    results.append(result)
                    bar.update(1)
        else:
            results = []
            for spec in instances:
                results.append(run(spec))
                bar.update(1)

    failed = [r for r in results if r.status == FAIL]
    summary = {status: sum(1 for r in results if r.status == status)
               for status in (PASS, FAIL, OUT_OF_HYPOTHESIS, INFEASIBLE)}
    payload = {
        "label": theorem,
        "n": ",".join(str(n) for n in n_values),
        "rows": [r.row() for r in results],
        "total": str(len(results)),
        "method": "verify",
        "summary": summary,
        "notes": [
            tr("verify.header_note"),
            tr("verify.summary", passed=summary[PASS], failed=summary[FAIL],
               out=summary[OUT_OF_HYPOTHESIS], infeasible=summary[INFEASIBLE]),
        ],
    }
    if failed:
        logger.error(f"{theorem}: {len(failed)} instance(s) failed")
    return payload, 1 if failed else 0
