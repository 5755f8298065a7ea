"""
子群格枚举 - TwoCensus

主要功能：
- 自底向上逐层枚举全部子群（SubgroupLattice）
- 子群计数 s_k、循环子群计数 c_i、包含 Φ(G) 的初等交换子群计数 e_i
- 初等交换截段计数 S_(α,β) 及四类划分
- 正规子群、共轭与补子群结构的检查报告
"""

import logging
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from twocensus.core.exceptions import CapExceededError, PreconditionError
from twocensus.core.grouptable import (
    GroupTable,
    SubgroupSet,
    bits_to_mask,
    classify,
    closure,
    conjugate,
    frattini_subgroup,
    indices_to_bits,
    induced_table,
    is_normal,
    mask_to_bits,
    normalizer,
    quotient,
)

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 256


def _popcount(bits: int) -> int:
    return bin(bits).count("1")


# ============================================================================
# 数据类型
# ============================================================================

@dataclass(frozen=True)
class CensusTable:
    """k -> s_k 的计数表，k = 0..n"""

    n: int
    counts: Tuple[int, ...]
    label: str = ""
    method: str = "oracle"

    def __post_init__(self):
        if len(self.counts) != self.n + 1:
            raise ValueError(f"census for n={self.n} needs {self.n + 1} entries, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("census counts must be nonnegative")
        if self.counts[0] != 1 or self.counts[-1] != 1:
            raise ValueError("s_0 and s_n must both be 1")

    def s(self, k: int) -> int:
        return self.counts[k] if 0 <= k <= self.n else 0

    @property
    def total(self) -> int:
        return sum(self.counts)

    def rows(self) -> List[Tuple[int, int]]:
        return list(enumerate(self.counts))


@dataclass(frozen=True)
class SubgroupLattice:
    """
    子群格

    levels[k] 是阶为 2^k 的全部子群位集（升序）；covers[k] 是 (i, j) 对，
    表示 levels[k][i] 是 levels[k+1][j] 的指数 2 子群。
    """

    parent: GroupTable
    levels: Tuple[Tuple[int, ...], ...]
    covers: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def n(self) -> int:
        return len(self.levels) - 1

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(level) for level in self.levels)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def subgroups(self, k: int) -> List[SubgroupSet]:
        return [SubgroupSet(self.parent, bits) for bits in self.levels[k]]

    def all_subgroups(self) -> List[SubgroupSet]:
        return [SubgroupSet(self.parent, bits) for level in self.levels for bits in level]

    def index_of(self, sub: SubgroupSet) -> Tuple[int, int]:
        """(k, 在 levels[k] 中的位置)"""
        k = sub.exponent_k
        level = self.levels[k]
        pos = bisect_left(level, sub.bits)
        if pos >= len(level) or level[pos] != sub.bits:
            raise KeyError("subgroup not in lattice")
        return k, pos

    def below(self, k: int) -> List[List[int]]:
        """below(k)[j] = levels[k-1] 中被 levels[k][j] 覆盖的下标"""
        result: List[List[int]] = [[] for _ in self.levels[k]]
        for i, j in self.covers[k - 1]:
            result[j].append(i)
        return result


@dataclass(frozen=True)
class SectionCensus:
    """
    初等交换截段计数

    counts[(α, β)] 为 H₂/H₁ ≅ C₂^α 且 |H₁| = 2^β 的截段个数；classes 为可选的
    (S¹, S², S³, S⁴) 划分。
    """

    n: int
    counts: Dict[Tuple[int, int], int]
    classes: Optional[Dict[Tuple[int, int], Tuple[int, int, int, int]]] = None
    label: str = ""

    def count(self, alpha: int, beta: int) -> int:
        return self.counts.get((alpha, beta), 0)

    def class_counts(self, alpha: int, beta: int) -> Tuple[int, int, int, int]:
        if self.classes is None:
            raise PreconditionError("section census was computed without the class split")
        return self.classes.get((alpha, beta), (0, 0, 0, 0))

    def cells(self) -> List[Tuple[int, int]]:
        return sorted(self.counts)

    def is_complete(self, q_exp: int) -> bool:
        """α = 0 一列必须覆盖 β = 0..q_exp（每个阶至少有一个子群）"""
        return all(self.count(0, beta) >= 1 for beta in range(q_exp + 1))


# ============================================================================
# 子群格
# ============================================================================

def _oracle_cap(cap: Optional[int]) -> Tuple[int, int]:
    from twocensus.utils.settings import get_settings
    settings = get_settings()
    return (cap if cap is not None else settings.oracle_cap), settings.oracle_hard_cap


def _check_cap(group: GroupTable, cap: Optional[int], what: str):
    limit, hard = _oracle_cap(cap)
    if limit > hard:
        raise CapExceededError(f"{what} cap", limit, hard)
    if group.order > limit:
        raise CapExceededError(f"{what} of {group.label}", group.order, limit)
    if group.order > DEFAULT_ORACLE_CAP:
        logger.warning(f"Running {what} above the default cap: order {group.order}")


def _extensions(group: GroupTable, bits: int) -> List[int]:
    """H 的全部指数 2 超群：K = H ∪ gH，g 正规化 H 且 g² ∈ H"""
    mask = bits_to_mask(bits, group.order)
    idx = np.flatnonzero(mask)
    normalizes = mask[group.conjugation[:, idx]].all(axis=1)
    candidates = np.flatnonzero(normalizes & mask[group.squares] & ~mask)
    covered = mask.copy()
    result = []
    for g in candidates:
        if covered[g]:
            continue
        coset = group.mult[g, idx]
        covered[coset] = True
        extended = mask.copy()
        extended[coset] = True
        result.append(mask_to_bits(extended))
    return result


def enumerate_lattice(group: GroupTable, cap: Optional[int] = None,
                      workers: Optional[int] = None) -> SubgroupLattice:
    """
    自底向上枚举全部子群

    Args:
        group: 群
        cap: 阶的上限（默认取配置 oracle_cap）
        workers: 每层扩展的线程数

    Raises:
        CapExceededError: 群的阶超过上限
    """
    _check_cap(group, cap, "lattice enumeration")
    if workers is None:
        from twocensus.utils.settings import get_settings
        workers = get_settings().workers

    levels: List[Tuple[int, ...]] = [(1,)]
    covers: List[Tuple[Tuple[int, int], ...]] = []
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for k in range(group.n):
            current = levels[-1]
            if executor is not None:
                extended = list(executor.map(lambda b: _extensions(group, b), current))
            else:
                extended = [_extensions(group, b) for b in current]
            next_bits = sorted({b for ext in extended for b in ext})
            position = {b: j for j, b in enumerate(next_bits)}
            edges = tuple((i, position[b]) for i, ext in enumerate(extended) for b in ext)
            levels.append(tuple(next_bits))
            covers.append(edges)
            logger.debug(f"Level {k + 1} of {group.label}: {len(next_bits)} subgroups")
    finally:
        if executor is not None:
            executor.shutdown()

    lattice = SubgroupLattice(group, tuple(levels), tuple(covers))
    logger.info(f"Enumerated {lattice.total} subgroups of {group.label}")
    return lattice


def census(group: GroupTable, lattice: Optional[SubgroupLattice] = None,
           cap: Optional[int] = None) -> CensusTable:
    """s_k = 第 k 层的大小"""
    if lattice is None:
        lattice = enumerate_lattice(group, cap)
    return CensusTable(group.n, lattice.sizes, group.label, "oracle")


def normal_subgroups(lattice: SubgroupLattice) -> List[SubgroupSet]:
    group = lattice.parent
    return [h for h in lattice.all_subgroups() if is_normal(group, h)]


# ============================================================================
# 循环子群与初等交换子群
# ============================================================================

def cyclic_census(group: GroupTable) -> Dict[int, int]:
    """
    循环子群按阶计数 {1: 1, 2: c_2, 4: c_4, ...}

    直接对每个元素生成 ⟨g⟩ 并按位集去重，不需要子群格。
    """
    order = group.order
    idx = np.arange(order)
    powers = np.zeros((order, group.exponent), dtype=np.int64)
    for t in range(1, group.exponent):
        powers[:, t] = group.mult[powers[:, t - 1], idx]
    members = np.zeros((order, order), dtype=bool)
    members[idx[:, None], powers] = True
    packed = np.packbits(members, axis=1, bitorder='little')
    seen = set()
    counts: Dict[int, int] = {}
    for g in range(order):
        key = packed[g].tobytes()
        if key in seen:
            continue
        seen.add(key)
        size = int(group.element_order[g])
        counts[size] = counts.get(size, 0) + 1
    return dict(sorted(counts.items()))


def _require_small_frattini(group: GroupTable) -> SubgroupSet:
    phi = frattini_subgroup(group)
    if phi.order != 2:
        raise PreconditionError(f"|Phi({group.label})| = {phi.order}, expected 2")
    return phi


def elementary_abelian_over_frattini(group: GroupTable,
                                     lattice: Optional[SubgroupLattice] = None) -> Dict[int, int]:
    """
    e_i：阶为 2^i、包含 Φ(G) 的初等交换子群个数，i = 1..n（e_1 = 1 即 Φ 本身）

    Raises:
        PreconditionError: |Φ(G)| ≠ 2
    """
    phi = _require_small_frattini(group)
    if lattice is None:
        lattice = enumerate_lattice(group)
    orders = group.element_order
    result: Dict[int, int] = {}
    for k in range(1, lattice.n + 1):
        count = 0
        for bits in lattice.levels[k]:
            if phi.bits & ~bits:
                continue
            if (orders[bits_to_mask(bits, group.order)] <= 2).all():
                count += 1
        result[k] = count
    return result


# ============================================================================
# 截段
# ============================================================================

def _square_bits(group: GroupTable, bits: int) -> int:
    found = np.zeros(group.order, dtype=bool)
    found[group.squares[bits_to_mask(bits, group.order)]] = True
    return mask_to_bits(found)


def section_census(group: GroupTable, split: bool = False,
                   lattice: Optional[SubgroupLattice] = None,
                   cap: Optional[int] = None) -> SectionCensus:
    """
    全部初等交换截段 H₂/H₁ 的计数

    H₁ ⊴ H₂ 且 H₂/H₁ 初等交换，当且仅当 H₁ 包含 H₂ 中所有元素的平方；
    对每个 H₂ 沿覆盖关系向下走，只访问包含这些平方的子群。

    Raises:
        CapExceededError: 群的阶超过 section_cap
        PreconditionError: split=True 而 |Φ(G)| ≠ 2
    """
    if cap is None:
        from twocensus.utils.settings import get_settings
        cap = get_settings().section_cap
    if group.order > cap:
        raise CapExceededError(f"section census of {group.label}", group.order, cap)
    phi_bits = _require_small_frattini(group).bits if split else 0
    if lattice is None:
        lattice = enumerate_lattice(group)

    below = [None] + [lattice.below(k) for k in range(1, lattice.n + 1)]
    counts: Dict[Tuple[int, int], int] = {}
    classes: Dict[Tuple[int, int], List[int]] = {}

    for k2, level in enumerate(lattice.levels):
        for j, h2 in enumerate(level):
            squares = _square_bits(group, h2)
            frontier = {j}
            k = k2
            while frontier:
                key = (k2 - k, k)
                counts[key] = counts.get(key, 0) + len(frontier)
                if split:
                    tally = classes.setdefault(key, [0, 0, 0, 0])
                    for i in frontier:
                        tally[_section_class(lattice.levels[k][i], h2, phi_bits)] += 1
                if k == 0:
                    break
                frontier = {
                    i for idx in frontier for i in below[k][idx]
                    if squares & ~lattice.levels[k - 1][i] == 0
                }
                k -= 1

    logger.info(f"Section census of {group.label}: {sum(counts.values())} sections")
    return SectionCensus(
        n=group.n,
        counts=dict(sorted(counts.items())),
        classes={key: tuple(value) for key, value in sorted(classes.items())} if split else None,
        label=group.label,
    )


def _section_class(h1: int, h2: int, phi_bits: int) -> int:
    """0..3 对应 S¹..S⁴"""
    if phi_bits & ~h1 == 0:
        return 0
    if h1 == 1:
        return 1
    if phi_bits & ~h2:
        return 2
    return 3


def is_elementary_abelian_section(group: GroupTable, h1: SubgroupSet, h2: SubgroupSet) -> bool:
    """直接检查：H₁ ⊆ H₂，H₁ 在 H₂ 中正规，且商表的指数不超过 2"""
    if not h1.issubset(h2):
        return False
    inner = induced_table(group, h2)
    members = h2.indices()
    image = SubgroupSet(inner, indices_to_bits(np.flatnonzero(np.isin(members, h1.indices()))))
    if not is_normal(inner, image):
        return False
    return quotient(inner, image).exponent <= 2


# ============================================================================
# 正规子群与共轭结构
# ============================================================================

@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: List[str] = field(default_factory=list)


@dataclass
class StructureReport:
    label: str
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _conjugates_over_transversal(group: GroupTable, sub: SubgroupSet) -> List[int]:
    """H^x，x 取遍 N_G(H) 右陪集的一组代表元"""
    norm_idx = normalizer(group, sub).indices()
    covered = np.zeros(group.order, dtype=bool)
    result = []
    for g in range(group.order):
        if covered[g]:
            continue
        covered[group.mult[norm_idx, g]] = True
        result.append(conjugate(group, sub, g).bits)
    return result


def verify_lemma24(group: GroupTable, lattice: Optional[SubgroupLattice] = None,
                   max_witnesses: int = 5) -> StructureReport:
    """
    检查（几乎）超特殊群的子群结构：

    - 非平凡正规子群恰好是包含 Φ(G) 的子群
    - 其余子群初等交换，且是 Φ 在 HΦ 中的补；阶 2^{i+1} 的 E ⊇ Φ 恰有 2^i 个补
    - 两个非正规子群共轭当且仅当 HΦ = KΦ
    - 对非正规 H、K，N_G(H) 的右陪集代表元中至多一个 x 使 H^x ⊆ K

    Raises:
        PreconditionError: G 不是（几乎）超特殊群
    """
    info = classify(group)
    if not (info.is_extraspecial or info.is_almost_extraspecial):
        raise PreconditionError(f"{group.label} is neither extraspecial nor almost extraspecial")
    if lattice is None:
        lattice = enumerate_lattice(group)
    phi = frattini_subgroup(group).bits
    orders = group.element_order

    def elementary(bits: int) -> bool:
        return bool((orders[bits_to_mask(bits, group.order)] <= 2).all())

    def times_phi(bits: int) -> int:
        # Φ 正规，HΦ 就是 H ∪ Φ 生成的子群
        return closure(group, np.flatnonzero(bits_to_mask(bits | phi, group.order))).bits

    normal_check = CheckResult("normal subgroups contain Phi", True)
    non_normal: List[int] = []
    for h in lattice.all_subgroups():
        if h.bits == 1:
            continue
        contains_phi = phi & ~h.bits == 0
        if is_normal(group, h) != contains_phi:
            normal_check.passed = False
            if len(normal_check.witnesses) < max_witnesses:
                normal_check.witnesses.append(f"order {h.order} bits {h.bits:#x}")
        if not contains_phi:
            non_normal.append(h.bits)

    complement_check = CheckResult("non-normal subgroups complement Phi", True)
    by_closure: Dict[int, List[int]] = {}
    for bits in non_normal:
        product = times_phi(bits)
        if not elementary(bits) or not elementary(product) or _popcount(product) != 2 * _popcount(bits):
            complement_check.passed = False
            if len(complement_check.witnesses) < max_witnesses:
                complement_check.witnesses.append(f"non-normal subgroup {bits:#x} does not complement Phi")
        by_closure.setdefault(product, []).append(bits)
    for level in lattice.levels[2:]:
        for bits in level:
            if phi & ~bits == 0 and elementary(bits):
                found = len(by_closure.get(bits, []))
                expected = _popcount(bits) // 2
                if found != expected:
                    complement_check.passed = False
                    if len(complement_check.witnesses) < max_witnesses:
                        complement_check.witnesses.append(
                            f"E={bits:#x}: {found} complements, expected {expected}")

    conjugacy_check = CheckResult("conjugate iff same H*Phi", True)
    transversal_check = CheckResult("at most one conjugating coset per containment", True)
    conjugates: Dict[int, List[int]] = {}
    for closure_bits, members in by_closure.items():
        for bits in members:
            conjugates[bits] = _conjugates_over_transversal(group, SubgroupSet(group, bits))
        orbit = set(conjugates[members[0]])
        if orbit != set(members):
            conjugacy_check.passed = False
            if len(conjugacy_check.witnesses) < max_witnesses:
                conjugacy_check.witnesses.append(
                    f"H*Phi={closure_bits:#x}: orbit {len(orbit)} vs class {len(members)}")

    for h_bits in non_normal:
        for k_bits in non_normal:
            if _popcount(k_bits) < _popcount(h_bits):
                continue
            inside = sum(1 for c in conjugates[h_bits] if c & ~k_bits == 0)
            if inside > 1:
                transversal_check.passed = False
                if len(transversal_check.witnesses) < max_witnesses:
                    transversal_check.witnesses.append(f"H={h_bits:#x} K={k_bits:#x}: {inside} cosets")

    report = StructureReport(group.label, [normal_check, complement_check, conjugacy_check, transversal_check])
    logger.info(f"Structure check of {group.label}: {'passed' if report.passed else 'FAILED'}")
    return report
