"""
闭式计数公式 - TwoCensus

主要功能：
- D8×C₂^{n-3} 与 C4×C2×C₂^{n-3} 的 s_k 闭式及 C4×C2 的逐情形项
- |Φ(G)| = 2 的群由 e_i 给出 s_k 与 |L(G)|
- 初等交换截段的四类计数公式
- 基于截段计数的 Goursat 计数 s_k(A × C₂^m)
- 计数表之间的支配关系检查
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

from twocensus.core.exceptions import DimensionError, IncompleteSectionCensusError
from twocensus.core.gf2linalg import gaussian_binomial, gl2_order, subspace_count
from twocensus.core.quadform import FormType, closed_form_count
from twocensus.core.subgroup_oracle import CensusTable, SectionCensus

logger = logging.getLogger(__name__)

binom2 = gaussian_binomial


# ============================================================================
# D8 与 C4×C2 两族的闭式
# ============================================================================

class ClosedFormFamily(Enum):
    D8 = "d8"
    C4C2 = "c4c2"

    @property
    def reference_spec(self) -> str:
        return "D8" if self is ClosedFormFamily.D8 else "C4 x C2"


@dataclass(frozen=True)
class ClosedFormParams:
    n: int
    k: int
    family: ClosedFormFamily = ClosedFormFamily.D8

    def __post_init__(self):
        if self.n < 3:
            raise DimensionError(f"closed forms need n >= 3, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise DimensionError(f"need 0 <= k <= {self.n}, got {self.k}")


def _scaled(binomial: int, coefficient) -> int:
    """binomial 为 0 时不计算系数（系数中的 2 的幂此时可能是负指数）"""
    return coefficient() * binomial if binomial else 0


def closed_form_terms(params: ClosedFormParams) -> Tuple[int, int, int, int]:
    """四个对齐的项；逐项比较即得两族之间的支配关系"""
    n, k = params.n, params.k
    b0 = binom2(n - 3, k)
    b1 = binom2(n - 3, k - 1)
    b2 = binom2(n - 3, k - 2)
    b3 = binom2(n - 3, k - 3)
    last = _scaled(b3, lambda: 1 << (2 * n - 2 * k))
    if params.family is ClosedFormFamily.D8:
        second = _scaled(b1, lambda: 5 << (n - k - 2))
        third = _scaled(b2, lambda: ((1 << (n - k)) + 1) << (n - k - 1))
    else:
        second = _scaled(b1, lambda: 3 << (n - k - 2))
        # 展开形式：k = n-1 时因式分解形式有分数中间量
        third = _scaled(b2, lambda: (1 << (2 * n - 2 * k - 2)) + (1 << (n - k)))
    return b0, second, third, last


def sk_closed_form(params: ClosedFormParams) -> int:
    return sum(closed_form_terms(params))


def closed_form_census(n: int, family: ClosedFormFamily = ClosedFormFamily.D8) -> CensusTable:
    counts = tuple(sk_closed_form(ClosedFormParams(n, k, family)) for k in range(n + 1))
    label = f"{family.reference_spec} x C2^{n - 3}" if n > 3 else family.reference_spec
    return CensusTable(n, counts, label, "formula")


def reference_census(n: int) -> CensusTable:
    """D8×C₂^{n-3} 的计数表"""
    return closed_form_census(n, ClosedFormFamily.D8)


CASES = ("a", "b", "c", "d", "e")


def case_term(case: str, n: int, k: int) -> int:
    """
    C4×C2×C₂^{n-3} 中按 A₂ 分类的子群个数：
    a) A₂ = 1，b) |A₂| = 2，c) A₂ 循环 4 阶，d) A₂ ≅ C₂²，e) A₂ = C4×C2
    """
    if n < 3:
        raise DimensionError(f"case terms need n >= 3, got {n}")
    if case == "a":
        return binom2(n - 3, k)
    if case == "b":
        return _scaled(binom2(n - 3, k - 1), lambda: 3 << (n - k - 2))
    if case == "c":
        return _scaled(binom2(n - 3, k - 2), lambda: 1 << (n - k))
    if case == "d":
        return _scaled(binom2(n - 3, k - 2), lambda: 1 << (2 * n - 2 * k - 2))
    if case == "e":
        return _scaled(binom2(n - 3, k - 3), lambda: 1 << (2 * n - 2 * k))
    raise ValueError(f"unknown case {case!r}")


def case_c_alternate_term(n: int, k: int) -> int:
    """情形 c) 的另一种读法：中间项取 binom(n-3, k-1)₂；与枚举结果不符"""
    first = 2 * binom2(n - 3, k - 2)
    middle = _scaled(binom2(n - 3, k - 1), lambda: 2 * ((1 << (n - k - 1)) - 1))
    return first + middle


def case_d_identity(n: int, k: int) -> bool:
    """1 + 3(2^{n-k-1} − 1) + 6·binom(n-k-1, 2)₂ = 2^{2n-2k-2}，k < n"""
    t = 1 << (n - k - 1)
    return 1 + 3 * (t - 1) + 6 * binom2(n - k - 1, 2) == t * t


def case_e_identity(n: int, k: int) -> bool:
    """1 + 3(2^{n-k} − 1) + 6·binom(n-k, 2)₂ = 2^{2n-2k}"""
    t = 1 << (n - k)
    return 1 + 3 * (t - 1) + 6 * binom2(n - k, 2) == t * t


# ============================================================================
# |Φ(G)| = 2 的群
# ============================================================================

def e_value(e: Mapping[int, int], i: int) -> int:
    """e_i，约定 e_1 = 1（Φ 本身）且 i ≤ 0 时为 0"""
    if i <= 0:
        return 0
    if i == 1:
        return e.get(1, 1)
    return e.get(i, 0)


def frattini_profile_from_form(form_type: FormType) -> Dict[int, int]:
    """标准型的 e_i，i = 1..dim+1"""
    decomposition = form_type.decomposition()
    return {d + 1: closed_form_count(decomposition, d) for d in range(form_type.dim + 1)}


def reference_frattini_profile(n: int) -> Dict[int, int]:
    """D8×C₂^{n-3} 的 e_i"""
    if n < 3:
        raise DimensionError(f"reference group needs n >= 3, got {n}")
    return frattini_profile_from_form(FormType.extraspecial_times_elementary(1, n - 3))


def sk_from_frattini_profile(n: int, e: Mapping[int, int], k: int) -> int:
    """
    s_0 = 1；k ≥ 1 时 s_k = binom(n-1, k-1)₂ + 2^k·e_{k+1}

    第一项是包含 Φ 的子群，第二项是 Φ 在阶 2^{k+1} 的初等交换子群中的补。
    """
    if not 0 <= k <= n:
        raise DimensionError(f"need 0 <= k <= {n}, got {k}")
    if k == 0:
        return 1
    return binom2(n - 1, k - 1) + (e_value(e, k + 1) << k)


def census_from_frattini_profile(n: int, e: Mapping[int, int], label: str = "",
                                 method: str = "quadform") -> CensusTable:
    counts = tuple(sk_from_frattini_profile(n, e, k) for k in range(n + 1))
    return CensusTable(n, counts, label, method)


def lattice_size_from_frattini_profile(d: int, e: Mapping[int, int]) -> int:
    """|L(G)| = 1 + Σ_i binom(d, i)₂ + Σ_{i≥1} e_{i+1}·2^i，d = dim G/Φ(G)"""
    return 1 + subspace_count(d) + sum(e_value(e, i + 1) << i for i in range(1, d + 1))


def lattice_size_extraspecial(r: int, e: Mapping[int, int], almost: bool = False) -> int:
    """超特殊群（d = 2r）或几乎超特殊群（d = 2r+1）的子群总数"""
    if r < 1:
        raise DimensionError(f"r must be positive, got {r}")
    d = 2 * r + (1 if almost else 0)
    return 1 + subspace_count(d) + sum(e_value(e, i + 1) << i for i in range(1, r + 1))


# ============================================================================
# 截段公式
# ============================================================================

@dataclass(frozen=True)
class SectionClasses:
    s1: int
    s2: int
    s3: int
    s4: int

    @property
    def total(self) -> int:
        return self.s1 + self.s2 + self.s3 + self.s4

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return self.s1, self.s2, self.s3, self.s4


def section_census_formulas(e: Mapping[int, int], n: int, alpha: int, beta: int) -> SectionClasses:
    """
    |Φ(G)| = 2 的群中 (α, β) 截段的四类计数：

    - S¹（Φ ⊆ H₁）：G/Φ ≅ C₂^{n-1} 中嵌套子空间对，binom(n-1, β-1)₂·binom(n-β, α)₂
    - S²（H₁ = 1）：e_α + e_{α+1}·2^α
    - S³（Φ ⊄ H₂）：e_{α+β+1}·binom(α+β, β)₂·2^{α+β}
    - S⁴（Φ ⊆ H₂, Φ ⊄ H₁ ≠ 1）：e_{α+β}·binom(α+β-1, β)₂·2^β
    """
    if alpha < 0 or beta < 0 or alpha + beta > n:
        return SectionClasses(0, 0, 0, 0)
    s1 = binom2(n - 1, beta - 1) * binom2(n - beta, alpha) if beta >= 1 else 0
    if beta == 0:
        return SectionClasses(s1, e_value(e, alpha) + (e_value(e, alpha + 1) << alpha), 0, 0)
    s3 = e_value(e, alpha + beta + 1) * binom2(alpha + beta, beta) << (alpha + beta)
    s4 = e_value(e, alpha + beta) * binom2(alpha + beta - 1, beta) << beta
    return SectionClasses(s1, 0, s3, s4)


def section_census_from_profile(n: int, e: Mapping[int, int], label: str = "") -> SectionCensus:
    """全部 (α, β) 的截段计数（含四类划分），可用于任意规模"""
    counts: Dict[Tuple[int, int], int] = {}
    classes: Dict[Tuple[int, int], Tuple[int, int, int, int]] = {}
    for beta in range(n + 1):
        for alpha in range(n - beta + 1):
            split = section_census_formulas(e, n, alpha, beta)
            if split.total:
                counts[(alpha, beta)] = split.total
                classes[(alpha, beta)] = split.as_tuple()
    return SectionCensus(n, counts, classes, label)


# ============================================================================
# Goursat
# ============================================================================

@dataclass(frozen=True)
class GoursatCountInput:
    """左因子 A 的截段计数、右因子 C₂^m 的秩、|A| = 2^{q_exp}"""

    sections: SectionCensus
    m: int
    q_exp: int

    def __post_init__(self):
        if self.m < 0:
            raise DimensionError(f"elementary rank must be nonnegative, got {self.m}")
        if not self.sections.is_complete(self.q_exp):
            raise IncompleteSectionCensusError(
                f"section census lacks subgroup counts for some order up to 2^{self.q_exp}")


def goursat_count(data: GoursatCountInput, k: int) -> int:
    """
    s_k(A × C₂^m) = Σ_{(α,β)} |S_(α,β)(A)|·|GL(α,2)|·binom(m, b₁)₂·binom(m-b₁, α)₂，b₁ = k-α-β

    每个子群对应唯一的五元组 (A₁, A₂, B₁, B₂, φ)；C₂^m 的截段都是初等交换的。
    """
    if not 0 <= k <= data.q_exp + data.m:
        raise DimensionError(f"need 0 <= k <= {data.q_exp + data.m}, got {k}")
    total = 0
    for (alpha, beta), count in data.sections.counts.items():
        b1 = k - alpha - beta
        if b1 < 0 or b1 + alpha > data.m:
            continue
        total += count * gl2_order(alpha) * binom2(data.m, b1) * binom2(data.m - b1, alpha)
    return total


def goursat_census(data: GoursatCountInput, label: str = "") -> CensusTable:
    n = data.q_exp + data.m
    counts = tuple(goursat_count(data, k) for k in range(n + 1))
    logger.debug(f"Goursat census of {label or 'A'} x C2^{data.m}: total {sum(counts)}")
    return CensusTable(n, counts, label, "goursat")


# ============================================================================
# 支配关系
# ============================================================================

@dataclass(frozen=True)
class DominanceResult:
    holds: bool
    first_violation: Optional[int] = None
    violations: Tuple[int, ...] = ()


def dominance_check(left: CensusTable, right: CensusTable) -> DominanceResult:
    """
    left.s(k) ≤ right.s(k) 对所有 k 成立？

    Raises:
        DimensionError: 两表的 n 不同
    """
    if left.n != right.n:
        raise DimensionError(f"cannot compare censuses with n={left.n} and n={right.n}")
    violations = tuple(k for k in range(left.n + 1) if left.s(k) > right.s(k))
    if violations:
        return DominanceResult(False, violations[0], violations)
    return DominanceResult(True)


def termwise_dominance(n: int, k: int) -> List[bool]:
    """C4×C2 族的每一项不超过 D8 族的对应项"""
    left = closed_form_terms(ClosedFormParams(n, k, ClosedFormFamily.C4C2))
    right = closed_form_terms(ClosedFormParams(n, k, ClosedFormFamily.D8))
    return [a <= b for a, b in zip(left, right)]
