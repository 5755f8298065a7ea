"""
GF(2) 线性代数 - TwoCensus

主要功能：
- 位向量 BitVec 与既约行阶梯形子空间 Gf2Subspace
- 子空间与超子空间枚举
- 高斯二项式系数与 GL(α,2) 的阶

约定：位向量第 i 个坐标对应整数的第 i 位，也是字符串形式的第 i 个字符；
一行的主元是它最小下标的 1。
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from twocensus.core.exceptions import CapExceededError, DimensionError

logger = logging.getLogger(__name__)

MAX_WIDTH = 64


def _lowest_bit(value: int) -> int:
    return (value & -value).bit_length() - 1


def parity(value: int) -> int:
    """整数二进制表示中 1 的个数的奇偶性"""
    return bin(value).count("1") & 1


@dataclass(frozen=True)
class BitVec:
    """F₂^m 中的向量"""

    width: int
    bits: int

    def __post_init__(self):
        if not 0 < self.width <= MAX_WIDTH:
            raise DimensionError(f"BitVec width must be in 1..{MAX_WIDTH}, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise DimensionError(f"bits {self.bits:#x} do not fit width {self.width}")

    @classmethod
    def from_string(cls, text: str) -> "BitVec":
        """'110' -> 坐标 0、1 为 1"""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise DimensionError(f"not a 0/1 string: {text!r}")
        bits = sum(1 << i for i, ch in enumerate(text) if ch == "1")
        return cls(len(text), bits)

    def to_string(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.width))

    def __str__(self) -> str:
        return self.to_string()

    def __xor__(self, other: "BitVec") -> "BitVec":
        self._check_width(other)
        return BitVec(self.width, self.bits ^ other.bits)

    def dot(self, other: "BitVec") -> int:
        self._check_width(other)
        return parity(self.bits & other.bits)

    @property
    def weight(self) -> int:
        return bin(self.bits).count("1")

    @property
    def pivot(self) -> int:
        """最小下标的非零坐标；零向量返回 -1"""
        return _lowest_bit(self.bits) if self.bits else -1

    def _check_width(self, other: "BitVec"):
        if other.width != self.width:
            raise DimensionError(f"width mismatch: {self.width} vs {other.width}")


def _reduce_rows(rows: Iterable[int]) -> Tuple[int, ...]:
    """整数行的既约行阶梯形：主元递增，每个主元列只有一个 1"""
    basis: List[int] = []
    for row in rows:
        for b in basis:
            if row >> _lowest_bit(b) & 1:
                row ^= b
        if not row:
            continue
        pivot_mask = row & -row
        basis = [b ^ row if b & pivot_mask else b for b in basis]
        basis.append(row)
    return tuple(sorted(basis, key=_lowest_bit))


@dataclass(frozen=True)
class Gf2Subspace:
    """F₂^m 的子空间，以规范 RREF 基表示；空基表示零子空间"""

    ambient_dim: int
    basis: Tuple[BitVec, ...] = ()

    def __post_init__(self):
        if not 0 < self.ambient_dim <= MAX_WIDTH:
            raise DimensionError(f"ambient dimension must be in 1..{MAX_WIDTH}")
        rows = tuple(v.bits for v in self.basis)
        if any(v.width != self.ambient_dim for v in self.basis):
            raise DimensionError("basis width differs from ambient dimension")
        if _reduce_rows(rows) != rows:
            raise DimensionError("basis is not in reduced row echelon form")

    @classmethod
    def from_rows(cls, ambient_dim: int, rows: Iterable[int]) -> "Gf2Subspace":
        reduced = _reduce_rows(rows)
        return cls(ambient_dim, tuple(BitVec(ambient_dim, r) for r in reduced))

    @property
    def rows(self) -> Tuple[int, ...]:
        return tuple(v.bits for v in self.basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> Tuple[int, ...]:
        return tuple(v.pivot for v in self.basis)

    def contains(self, vector: BitVec) -> bool:
        if vector.width != self.ambient_dim:
            raise DimensionError("vector width differs from ambient dimension")
        value = vector.bits
        for b in self.rows:
            if value >> _lowest_bit(b) & 1:
                value ^= b
        return value == 0

    __contains__ = contains

    def elements(self) -> Iterator[BitVec]:
        """按系数枚举子空间中的全部 2^dim 个向量"""
        rows = self.rows
        for coeffs in range(1 << len(rows)):
            value = 0
            for i, r in enumerate(rows):
                if coeffs >> i & 1:
                    value ^= r
            yield BitVec(self.ambient_dim, value)

    def join(self, other: "Gf2Subspace") -> "Gf2Subspace":
        if other.ambient_dim != self.ambient_dim:
            raise DimensionError("ambient dimension mismatch")
        return Gf2Subspace.from_rows(self.ambient_dim, self.rows + other.rows)

    def is_subspace_of(self, other: "Gf2Subspace") -> bool:
        return all(other.contains(v) for v in self.basis)

    def __str__(self) -> str:
        inner = ", ".join(str(v) for v in self.basis)
        return f"<{inner}>"


def rref(vectors: Sequence[BitVec], ambient_dim: Optional[int] = None) -> Gf2Subspace:
    """
    生成向量组张成空间的规范 RREF 基

    Args:
        vectors: 同宽度的位向量
        ambient_dim: 向量组为空时必须给出

    Raises:
        DimensionError: 宽度不一致，或空向量组且未给出维数
    """
    widths = {v.width for v in vectors}
    if len(widths) > 1:
        raise DimensionError(f"mixed widths: {sorted(widths)}")
    if widths:
        width = widths.pop()
        if ambient_dim is not None and ambient_dim != width:
            raise DimensionError("ambient_dim disagrees with vector width")
    elif ambient_dim is None:
        raise DimensionError("ambient_dim is required for an empty vector list")
    else:
        width = ambient_dim
    return Gf2Subspace.from_rows(width, (v.bits for v in vectors))


def kernel_basis(rows: Sequence[int], width: int) -> List[int]:
    """{v : parity(row & v) = 0 对所有行} 的一组基，每个自由列一个向量"""
    reduced = _reduce_rows(rows)
    pivots = [_lowest_bit(r) for r in reduced]
    basis = []
    for free in range(width):
        if free in pivots:
            continue
        v = 1 << free
        for p, r in zip(pivots, reduced):
            if r >> free & 1:
                v |= 1 << p
        basis.append(v)
    return basis


@lru_cache(maxsize=None)
def gaussian_binomial(n: int, k: int) -> int:
    """
    F₂^n 中 k 维子空间的个数 binom(n,k)₂；k<0 或 k>n 时为 0

    每一步先乘后除，部分积本身就是高斯二项式，所以除法总是整除。
    """
    if n < 0:
        raise DimensionError(f"gaussian_binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    value = 1
    for i in range(k):
        value = value * ((1 << (n - i)) - 1) // ((1 << (i + 1)) - 1)
    return value


@lru_cache(maxsize=None)
def gl2_order(alpha: int) -> int:
    """|GL(α,2)| = ∏_{i<α} (2^α − 2^i)，α=0 时为 1"""
    if alpha < 0:
        raise DimensionError(f"gl2_order needs alpha >= 0, got {alpha}")
    value = 1
    for i in range(alpha):
        value *= (1 << alpha) - (1 << i)
    return value


def subspace_count(m: int) -> int:
    """F₂^m 的子空间总数"""
    return sum(gaussian_binomial(m, k) for k in range(m + 1))


def _enumeration_cap(cap: Optional[int]) -> int:
    if cap is not None:
        return cap
    from twocensus.utils.settings import get_settings
    return get_settings().enumeration_cap


def _iter_rref_rows(m: int, k: int) -> Iterator[Tuple[int, ...]]:
    """按主元集合与自由位枚举所有 k 维 RREF 基（整数行）"""
    for pivots in combinations(range(m), k):
        pivot_set = set(pivots)
        free_slots = [
            (row, col)
            for row, p in enumerate(pivots)
            for col in range(p + 1, m)
            if col not in pivot_set
        ]
        base = [1 << p for p in pivots]
        for assignment in product((0, 1), repeat=len(free_slots)):
            rows = list(base)
            for (row, col), bit in zip(free_slots, assignment):
                if bit:
                    rows[row] |= 1 << col
            yield tuple(rows)


def enumerate_subspaces(m: int, k: int, cap: Optional[int] = None) -> Iterator[Gf2Subspace]:
    """
    逐个产生 F₂^m 的全部 k 维子空间（规范 RREF 形式，每个恰好一次）

    Raises:
        DimensionError: 不满足 0 ≤ k ≤ m
        CapExceededError: m 超过枚举上限
    """
    if not 0 <= k <= m or m < 1:
        raise DimensionError(f"need 0 <= k <= m and m >= 1, got m={m}, k={k}")
    limit = _enumeration_cap(cap)
    if m > limit:
        raise CapExceededError("subspace enumeration", m, limit)
    for rows in _iter_rref_rows(m, k):
        yield Gf2Subspace(m, tuple(BitVec(m, r) for r in rows))


def enumerate_oversubspaces(subspace: Gf2Subspace, k: int, cap: Optional[int] = None) -> Iterator[Gf2Subspace]:
    """
    逐个产生包含 U 的全部 k 维子空间

    把 F₂^m/U 等同于 U 的非主元坐标张成的空间，枚举其中 k−dim U 维子空间后
    与 U 合并。个数等于 binom(m − dim U, k − dim U)₂。
    """
    m = subspace.ambient_dim
    base_dim = subspace.dim
    if not base_dim <= k <= m:
        raise DimensionError(f"need dim(U)={base_dim} <= k={k} <= {m}")
    limit = _enumeration_cap(cap)
    if m > limit:
        raise CapExceededError("oversubspace enumeration", m, limit)
    free_cols = [c for c in range(m) if c not in set(subspace.pivots)]
    quotient_dim = len(free_cols)
    if k == base_dim:
        yield subspace
        return
    for rows in _iter_rref_rows(quotient_dim, k - base_dim):
        lifted = []
        for r in rows:
            value = 0
            for j, col in enumerate(free_cols):
                if r >> j & 1:
                    value |= 1 << col
            lifted.append(value)
        yield Gf2Subspace.from_rows(m, subspace.rows + tuple(lifted))
