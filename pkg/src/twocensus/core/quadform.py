"""
F₂ 上的二次型 - TwoCensus

主要功能：
- 上三角系数表示的二次型 QuadraticForm 及其极化双线性型
- 标准型 Plus / Minus / AlmostExtraspecial / ExtraspecialTimesElementary
- 由 |Φ(G)| = 2 的群构造 G/Φ(G) 上的二次型
- 分解（非退化部分、根基）与 Arf 不变量分类
- 全奇异子空间计数：枚举模式与闭式模式
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from twocensus.core.exceptions import (
    CapExceededError,
    DimensionError,
    FormClassificationError,
    PreconditionError,
    WellDefinednessError,
)
from twocensus.core.gf2linalg import (
    MAX_WIDTH,
    BitVec,
    Gf2Subspace,
    gaussian_binomial,
    kernel_basis,
    parity,
)
from twocensus.core.grouptable import GroupTable, center, frattini_subgroup

logger = logging.getLogger(__name__)


def _as_bits(vector: Union[int, BitVec]) -> int:
    return vector.bits if isinstance(vector, BitVec) else int(vector)


def _parity_array(values: np.ndarray) -> np.ndarray:
    folded = values.astype(np.uint64)
    for shift in (32, 16, 8, 4, 2, 1):
        folded ^= folded >> np.uint64(shift)
    return (folded & np.uint64(1)).astype(np.uint8)


# ============================================================================
# 二次型
# ============================================================================

@dataclass(frozen=True)
class QuadraticForm:
    """
    q(v) = Σ_{i≤j} a_ij v_i v_j

    rows[i] 的第 j 位为 a_ij（只允许 j ≥ i）。
    """

    dim: int
    rows: Tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.dim <= MAX_WIDTH:
            raise DimensionError(f"form dimension must be in 0..{MAX_WIDTH}, got {self.dim}")
        if len(self.rows) != self.dim:
            raise DimensionError(f"expected {self.dim} coefficient rows, got {len(self.rows)}")
        for i, row in enumerate(self.rows):
            if row < 0 or row >> self.dim or row & ((1 << i) - 1):
                raise DimensionError(f"row {i} is not upper triangular within width {self.dim}")

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]]) -> "QuadraticForm":
        """由上三角 0/1 矩阵构造；下三角部分必须为 0"""
        dim = len(matrix)
        rows = tuple(sum((int(matrix[i][j]) & 1) << j for j in range(dim)) for i in range(dim))
        return cls(dim, rows)

    @classmethod
    def from_values(cls, dim: int, diagonal: Sequence[int], pairing) -> "QuadraticForm":
        """由 q(e_i) 与 B(e_i, e_j) 构造"""
        rows = []
        for i in range(dim):
            row = (diagonal[i] & 1) << i
            for j in range(i + 1, dim):
                if pairing(i, j):
                    row |= 1 << j
            rows.append(row)
        return cls(dim, tuple(rows))

    def __call__(self, vector: Union[int, BitVec]) -> int:
        v = _as_bits(vector)
        value = 0
        for i, row in enumerate(self.rows):
            if v >> i & 1:
                value ^= parity(row & v)
        return value

    @cached_property
    def gram(self) -> Tuple[int, ...]:
        """极化型的 Gram 行：B(u, v) = Σ_i u_i·parity(gram[i] & v)"""
        gram = [0] * self.dim
        for i, row in enumerate(self.rows):
            off_diagonal = row & ~(1 << i)
            gram[i] |= off_diagonal
            for j in range(i + 1, self.dim):
                if off_diagonal >> j & 1:
                    gram[j] |= 1 << i
        return tuple(gram)

    def polar(self, u: Union[int, BitVec], v: Union[int, BitVec]) -> int:
        """B(u, v) = q(u+v) + q(u) + q(v)"""
        return parity(self.pairing_vector(_as_bits(u)) & _as_bits(v))

    def pairing_vector(self, u: int) -> int:
        """g_u，使得 B(u, v) = parity(g_u & v)"""
        acc = 0
        for i, row in enumerate(self.gram):
            if u >> i & 1:
                acc ^= row
        return acc

    def radical(self) -> Gf2Subspace:
        """{v : B(v, ·) = 0}"""
        if self.dim == 0:
            raise DimensionError("zero-dimensional form has no ambient space")
        return Gf2Subspace.from_rows(self.dim, kernel_basis(self.gram, self.dim))

    def orthogonal_sum(self, other: "QuadraticForm") -> "QuadraticForm":
        shift = self.dim
        rows = self.rows + tuple(row << shift for row in other.rows)
        return QuadraticForm(self.dim + other.dim, rows)

    def substitute(self, matrix: Sequence[Union[int, BitVec]]) -> "QuadraticForm":
        """
        基变换 e_i ↦ matrix[i] 后的同一个二次型 q∘A

        Raises:
            DimensionError: matrix 不是 dim 个线性无关向量
        """
        images = [_as_bits(v) for v in matrix]
        if len(images) != self.dim or any(v >> self.dim for v in images):
            raise DimensionError(f"substitution needs {self.dim} vectors of width {self.dim}")
        if self.dim and Gf2Subspace.from_rows(self.dim, images).dim != self.dim:
            raise DimensionError("substitution matrix is singular")
        return QuadraticForm.from_values(
            self.dim,
            [self(v) for v in images],
            lambda i, j: self.polar(images[i], images[j]),
        )

    def values(self) -> np.ndarray:
        """全部 2^dim 个向量上的取值"""
        vectors = np.arange(1 << self.dim, dtype=np.uint64)
        result = np.zeros(vectors.size, dtype=np.uint8)
        for i, row in enumerate(self.rows):
            selected = ((vectors >> np.uint64(i)) & np.uint64(1)).astype(np.uint8)
            result ^= selected & _parity_array(vectors & np.uint64(row))
        return result

    def __str__(self) -> str:
        return "\n".join(
            "".join("1" if row >> j & 1 else "0" for j in range(self.dim)) for row in self.rows
        )


# ============================================================================
# 标准型
# ============================================================================

class FormFamily(Enum):
    PLUS = "plus"
    MINUS = "minus"
    ALMOST = "almost"


@dataclass(frozen=True)
class FormType:
    """
    标准型：D8^{*r}（PLUS）、Q8*D8^{*(r-1)}（MINUS）、D8^{*r}*C4（ALMOST），
    m0 > 0 时再直积 C₂^{m0}
    """

    family: FormFamily
    r: int
    m0: int = 0

    def __post_init__(self):
        if self.r < 0 or self.m0 < 0:
            raise DimensionError("form type parameters must be nonnegative")
        if self.family is FormFamily.MINUS and self.r < 1:
            raise DimensionError("Minus(r) needs r >= 1")

    @classmethod
    def plus(cls, r: int) -> "FormType":
        return cls(FormFamily.PLUS, r)

    @classmethod
    def minus(cls, r: int) -> "FormType":
        return cls(FormFamily.MINUS, r)

    @classmethod
    def almost_extraspecial(cls, r: int) -> "FormType":
        return cls(FormFamily.ALMOST, r)

    @classmethod
    def extraspecial_times_elementary(cls, r: int, m0: int) -> "FormType":
        return cls(FormFamily.PLUS, r, m0)

    @property
    def dim(self) -> int:
        return 2 * self.r + (1 if self.family is FormFamily.ALMOST else 0) + self.m0

    @property
    def group_order_exponent(self) -> int:
        """对应群的 n = dim + 1"""
        return self.dim + 1

    @property
    def name(self) -> str:
        if self.family is FormFamily.PLUS and self.m0:
            return f"ExtraspecialTimesElementary({self.r}, {self.m0})"
        base = {
            FormFamily.PLUS: "Plus",
            FormFamily.MINUS: "Minus",
            FormFamily.ALMOST: "AlmostExtraspecial",
        }[self.family]
        return f"{base}({self.r})" + (f" x E({self.m0})" if self.m0 else "")

    def group_spec_text(self) -> str:
        """对应群的表达式字符串"""
        if self.family is FormFamily.MINUS:
            core = "Q8" if self.r == 1 else f"Q8 * D8^{{*{self.r - 1}}}"
        elif self.r == 0:
            if self.family is not FormFamily.ALMOST:
                raise DimensionError("Plus(0) belongs to no group with |Phi| = 2")
            core = "C4"
        else:
            core = "D8" if self.r == 1 else f"D8^{{*{self.r}}}"
            if self.family is FormFamily.ALMOST:
                core += " * C4"
        if self.m0:
            core = f"{core} x C2^{self.m0}"
        return core

    def decomposition(self) -> "FormDecomposition":
        return FormDecomposition(
            r=self.r,
            arf=1 if self.family is FormFamily.MINUS else 0,
            anisotropic_radical=self.family is FormFamily.ALMOST,
            zero_radical_dim=self.m0,
        )


def standard_form(form_type: FormType) -> QuadraticForm:
    """双曲平面 q(x,y)=xy 的正交和，按类型替换最后一个平面或添加根基坐标"""
    rows: List[int] = []
    for i in range(form_type.r):
        rows.append(1 << (2 * i + 1))
        rows.append(0)
    if form_type.family is FormFamily.MINUS:
        j = 2 * (form_type.r - 1)
        rows[j] = (1 << j) | (1 << (j + 1))
        rows[j + 1] = 1 << (j + 1)
    if form_type.family is FormFamily.ALMOST:
        rows.append(1 << len(rows))
    rows.extend([0] * form_type.m0)
    return QuadraticForm(len(rows), tuple(rows))


# ============================================================================
# 分解与分类
# ============================================================================

@dataclass(frozen=True)
class FormDecomposition:
    """非退化部分的 r 与 Arf 不变量，根基上 q 是否非零，以及 q 为零的根基维数"""

    r: int
    arf: int
    anisotropic_radical: bool
    zero_radical_dim: int

    @property
    def dim(self) -> int:
        return 2 * self.r + int(self.anisotropic_radical) + self.zero_radical_dim


def symplectic_basis(form: QuadraticForm) -> List[Tuple[int, int]]:
    """极化型的辛基 (e_i, f_i)，B(e_i, f_i) = 1，不同对之间正交"""
    pool = [1 << i for i in range(form.dim)]
    pairs = []
    while True:
        found = None
        for a, u in enumerate(pool):
            g = form.pairing_vector(u)
            for b, w in enumerate(pool):
                if parity(g & w):
                    found = (a, b)
                    break
            if found:
                break
        if found is None:
            return pairs
        e, f = pool[found[0]], pool[found[1]]
        pairs.append((e, f))
        rest = [x for i, x in enumerate(pool) if i not in found]
        pool = []
        for x in rest:
            if form.polar(x, f):
                x ^= e
            if form.polar(x, e):
                x ^= f
            if x:
                pool.append(x)


def decompose_form(form: QuadraticForm) -> FormDecomposition:
    """把任意二次型分解为 非退化 ⊥（至多一条各向异性根基线）⊥ q 为零的根基"""
    pairs = symplectic_basis(form)
    r = len(pairs)
    radical_dim = form.dim - 2 * r
    anisotropic = False
    if radical_dim:
        anisotropic = any(form(v.bits) for v in form.radical().basis)
    arf = 0
    for e, f in pairs:
        arf ^= form(e) & form(f)
    decomposition = FormDecomposition(r, arf, anisotropic, radical_dim - int(anisotropic))
    logger.debug(f"Decomposed form of dim {form.dim}: {decomposition}")
    return decomposition


def arf_classify(form: QuadraticForm) -> FormType:
    """
    按 Arf 不变量与根基上的取值分类

    Raises:
        FormClassificationError: q 在维数 ≥ 2 的根基上非零
    """
    d = decompose_form(form)
    if d.anisotropic_radical:
        if d.zero_radical_dim:
            raise FormClassificationError(
                f"q is nonzero on a radical of dimension {d.zero_radical_dim + 1}")
        return FormType.almost_extraspecial(d.r)
    if d.arf:
        return FormType(FormFamily.MINUS, d.r, d.zero_radical_dim)
    return FormType(FormFamily.PLUS, d.r, d.zero_radical_dim)


# ============================================================================
# 全奇异子空间计数
# ============================================================================

def orthogonal_singular_count(r: int, epsilon: int, k: int) -> int:
    """2r 维非退化型（ε = +1 为 plus，-1 为 minus）的 k 维全奇异子空间数"""
    top = r if epsilon > 0 else r - 1
    if k < 0 or k > top:
        return 0
    numerator = 1
    denominator = 1
    for j in range(k):
        numerator *= ((1 << (r - j)) - epsilon) * ((1 << (r - j - 1)) + epsilon)
        denominator *= (1 << (j + 1)) - 1
    return numerator // denominator


def symplectic_isotropic_count(r: int, k: int) -> int:
    """2r 维辛空间的 k 维全迷向子空间数"""
    if k < 0 or k > r:
        return 0
    numerator = 1
    denominator = 1
    for j in range(k):
        numerator *= (1 << (2 * (r - j))) - 1
        denominator *= (1 << (j + 1)) - 1
    return numerator // denominator


def closed_form_count(decomposition: FormDecomposition, d: int) -> int:
    """
    闭式计数

    各向异性根基线存在时，全奇异子空间与商空间上的全迷向子空间一一对应；
    q 为零的 s0 维根基按 W ∩ R 的维数 a 卷积：Σ_a N_core(d−a)·binom(s0,a)₂·2^{(s0−a)(d−a)}。
    """
    if d < 0 or d > decomposition.dim:
        return 0

    def core(k: int) -> int:
        if decomposition.anisotropic_radical:
            return symplectic_isotropic_count(decomposition.r, k)
        if decomposition.r == 0:
            return 1 if k == 0 else 0
        return orthogonal_singular_count(decomposition.r, -1 if decomposition.arf else 1, k)

    s0 = decomposition.zero_radical_dim
    total = 0
    for a in range(min(d, s0) + 1):
        total += core(d - a) * gaussian_binomial(s0, a) * (1 << ((s0 - a) * (d - a)))
    return total


def _dfs_profile(values: np.ndarray, form: QuadraticForm, rows: List[int],
                 last_pivot: int, counts: List[int]):
    """在规范 RREF 基上深度优先：下一行主元大于上一主元且所有已选行在该列为 0"""
    counts[len(rows)] += 1
    dim = form.dim
    start = last_pivot + 1
    if start >= dim:
        return
    vectors = np.arange(1, 1 << (dim - start), dtype=np.uint64) << np.uint64(start)
    keep = values[vectors] == 0
    for row in rows:
        keep &= _parity_array(vectors & np.uint64(form.pairing_vector(row))) == 0
    vectors = vectors[keep]
    if rows and vectors.size:
        lowest = (vectors & (~vectors + np.uint64(1)))
        used = np.uint64(0)
        for row in rows:
            used |= np.uint64(row)
        vectors = vectors[(lowest & used) == 0]
    for v in vectors.tolist():
        pivot = (v & -v).bit_length() - 1
        _dfs_profile(values, form, rows + [v], pivot, counts)


def _enumeration_cap() -> int:
    from twocensus.utils.settings import get_settings
    return get_settings().enumeration_cap


def enumerate_singular_profile(form: QuadraticForm, workers: int = 1) -> List[int]:
    """
    枚举模式：counts[d] 为 d 维全奇异子空间个数

    每个子空间只以它的规范 RREF 基出现一次，不需要除以有序基的个数。

    Raises:
        CapExceededError: 维数超过 enumeration_cap
    """
    cap = _enumeration_cap()
    if form.dim > cap:
        raise CapExceededError("singular subspace enumeration", form.dim, cap)
    counts = [0] * (form.dim + 1)
    if form.dim == 0:
        counts[0] = 1
        return counts
    values = form.values()
    roots = (np.flatnonzero(values[1:] == 0) + 1).tolist()
    counts[0] = 1

    def branch(v: int) -> List[int]:
        local = [0] * (form.dim + 1)
        _dfs_profile(values, form, [v], (v & -v).bit_length() - 1, local)
        return local

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            partials = list(executor.map(branch, roots))
    else:
        partials = [branch(v) for v in roots]
    for local in partials:
        for d, c in enumerate(local):
            counts[d] += c
    return counts


def totally_singular_profile(form: QuadraticForm, mode: str = "auto") -> List[int]:
    """d = 0..dim 的全奇异子空间计数；mode ∈ {auto, closed, enumerate}"""
    if mode == "enumerate":
        return enumerate_singular_profile(form)
    if mode not in ("auto", "closed"):
        raise ValueError(f"unknown counting mode {mode!r}")
    decomposition = decompose_form(form)
    return [closed_form_count(decomposition, d) for d in range(form.dim + 1)]


def count_totally_singular(form: QuadraticForm, d: int, mode: str = "auto") -> int:
    """
    d 维全奇异子空间个数（对相应的群即 e_{d+1}）

    Raises:
        DimensionError: d > dim(q)
        CapExceededError: 枚举模式下维数超过上限
    """
    if d < 0 or d > form.dim:
        raise DimensionError(f"need 0 <= d <= {form.dim}, got {d}")
    if d == 0:
        return 1
    return totally_singular_profile(form, mode)[d]


def validate_closed_form(form: QuadraticForm) -> bool:
    """闭式计数与枚举计数逐维一致"""
    closed = totally_singular_profile(form, "closed")
    enumerated = enumerate_singular_profile(form)
    if closed != enumerated:
        logger.warning(f"Closed form disagrees with enumeration: {closed} vs {enumerated}")
        return False
    return True


# ============================================================================
# 群上的二次型
# ============================================================================

@dataclass(frozen=True)
class GroupFormData:
    """G/Φ(G) 的坐标化：basis 为陪集代表生成元，coset_vector[g] 为 g 所在陪集的坐标"""

    form: QuadraticForm
    basis: Tuple[int, ...]
    coset_vector: np.ndarray
    frattini_generator: int


def group_form_data(group: GroupTable) -> GroupFormData:
    """
    Raises:
        PreconditionError: |Φ(G)| ≠ 2 或 Φ(G) 不在中心内
        WellDefinednessError: q 依赖于陪集代表元
    """
    phi = frattini_subgroup(group)
    if phi.order != 2:
        raise PreconditionError(f"|Phi({group.label})| = {phi.order}, expected 2")
    if not phi.issubset(center(group)):
        raise PreconditionError(f"Phi({group.label}) is not central")
    x = int(phi.indices()[1])

    reached = np.zeros(group.order, dtype=bool)
    reached[[0, x]] = True
    basis: List[int] = []
    while not reached.all():
        g = int(np.argmin(reached))
        basis.append(g)
        members = np.flatnonzero(reached)
        reached[group.mult[members, g]] = True
    m = len(basis)
    if (1 << m) * 2 != group.order:
        raise WellDefinednessError(f"G/Phi of {group.label} is not elementary abelian")

    reps = np.zeros(1 << m, dtype=np.int64)
    for v in range(1, 1 << m):
        low = (v & -v).bit_length() - 1
        reps[v] = group.mult[reps[v ^ (1 << low)], basis[low]]
    coset_vector = np.full(group.order, -1, dtype=np.int64)
    coset_vector[reps] = np.arange(1 << m)
    coset_vector[group.mult[reps, x]] = np.arange(1 << m)
    if (coset_vector < 0).any():
        raise WellDefinednessError("coset representatives do not cover the group")

    squares = group.squares
    if not np.isin(squares, [0, x]).all():
        raise WellDefinednessError(f"a square of {group.label} lies outside Phi")
    q_of_element = (squares == x).astype(np.uint8)
    if not np.array_equal(q_of_element, q_of_element[group.mult[:, x]]):
        raise WellDefinednessError("q depends on the coset representative")

    def q(v: int) -> int:
        return int(q_of_element[reps[v]])

    form = QuadraticForm.from_values(
        m,
        [q(1 << i) for i in range(m)],
        lambda i, j: q((1 << i) | (1 << j)) ^ q(1 << i) ^ q(1 << j),
    )
    coset_vector.flags.writeable = False
    return GroupFormData(form, tuple(basis), coset_vector, x)


def form_of_group(group: GroupTable) -> QuadraticForm:
    """G/Φ(G) 上的二次型：q(v̄) = a 当且仅当 v² = x^a，Φ(G) = ⟨x⟩"""
    return group_form_data(group).form


def commutator_pairing_agrees(group: GroupTable, data: Optional[GroupFormData] = None) -> bool:
    """对所有元素对检查 B(ū, v̄) = 1 当且仅当 [u, v] ≠ 1"""
    if data is None:
        data = group_form_data(group)
    vectors = data.coset_vector
    gram_of = np.array([data.form.pairing_vector(int(v)) for v in range(1 << data.form.dim)],
                       dtype=np.uint64)
    commutes = group.mult == group.mult.T
    pairing = _parity_array(gram_of[vectors][:, None] & vectors[None, :].astype(np.uint64))
    return bool(np.array_equal(pairing == 1, ~commutes))
