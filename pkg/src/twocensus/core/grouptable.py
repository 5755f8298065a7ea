"""
有限 2-群乘法表 - TwoCensus

主要功能：
- 稠密乘法表 GroupTable 与位集子群 SubgroupSet
- 群表达式 GroupSpec（C2^m、C_{2^k}、D8、Q8、直积、中心积、幂）及其构造
- 商群、中心、导群、Frattini 子群
- 按定义判别（几乎/广义）超特殊群

元素用 0..|G|-1 编号，0 是单位元。子群用 Python 整数位集表示：第 i 位为 1
当且仅当元素 i 属于该子群。
"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

from twocensus.core.exceptions import (
    CapExceededError,
    CentralProductError,
    GroupTableError,
    NotNormalError,
)

logger = logging.getLogger(__name__)


# ============================================================================
# 位集辅助函数
# ============================================================================

def mask_to_bits(mask: np.ndarray) -> int:
    """布尔数组 -> 整数位集"""
    return int.from_bytes(np.packbits(mask, bitorder='little').tobytes(), 'little')


def bits_to_mask(bits: int, order: int) -> np.ndarray:
    """整数位集 -> 长度为 order 的布尔数组"""
    raw = np.frombuffer(bits.to_bytes((order + 7) // 8, 'little'), dtype=np.uint8)
    return np.unpackbits(raw, bitorder='little', count=order).astype(bool)


def indices_to_bits(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << int(i)
    return bits


def log2_exact(value: int) -> int:
    """2 的幂的指数；不是 2 的幂时抛出 ValueError"""
    if value < 1 or value & (value - 1):
        raise ValueError(f"{value} is not a power of two")
    return value.bit_length() - 1


# ============================================================================
# 群表达式
# ============================================================================

@dataclass(frozen=True)
class Leaf:
    """原子群：C2、C4、C8、C16…、D8、Q8"""
    name: str


@dataclass(frozen=True)
class Elementary:
    """初等交换群 C₂^rank"""
    rank: int


@dataclass(frozen=True)
class DirectProduct:
    left: "GroupSpec"
    right: "GroupSpec"


@dataclass(frozen=True)
class CentralProduct:
    left: "GroupSpec"
    right: "GroupSpec"


@dataclass(frozen=True)
class DirectPower:
    base: "GroupSpec"
    exponent: int


@dataclass(frozen=True)
class CentralPower:
    base: "GroupSpec"
    exponent: int


GroupSpec = Union[Leaf, Elementary, DirectProduct, CentralProduct, DirectPower, CentralPower]

# 优先级：直积 < 中心积 < 幂 < 原子
_PREC = {DirectProduct: 1, CentralProduct: 2, DirectPower: 3, CentralPower: 3, Leaf: 4, Elementary: 4}


def format_spec(spec: GroupSpec) -> str:
    """把表达式树打印成可重新解析的字符串（只加必要的括号）"""
    if isinstance(spec, Leaf):
        return spec.name
    if isinstance(spec, Elementary):
        return f"C2^{spec.rank}"
    if isinstance(spec, (DirectProduct, CentralProduct)):
        op = " x " if isinstance(spec, DirectProduct) else " * "
        prec = _PREC[type(spec)]
        left = format_spec(spec.left)
        right = format_spec(spec.right)
        if _PREC[type(spec.left)] < prec:
            left = f"({left})"
        # 左结合：右操作数同级时也要括号
        if _PREC[type(spec.right)] <= prec:
            right = f"({right})"
        return left + op + right
    base = format_spec(spec.base)
    if _PREC[type(spec.base)] < 4 or isinstance(spec.base, Elementary):
        base = f"({base})"
    if isinstance(spec, DirectPower):
        return f"{base}^{spec.exponent}"
    return f"{base}^{{*{spec.exponent}}}"


def cyclic_order(name: str) -> Optional[int]:
    """'C16' -> 16；不是循环群原子时返回 None"""
    if name.startswith("C") and name[1:].isdigit():
        value = int(name[1:])
        if value >= 2 and value & (value - 1) == 0:
            return value
    return None


def spec_order(spec: GroupSpec) -> int:
    """不构造乘法表，直接由表达式算出群的阶"""
    if isinstance(spec, Leaf):
        if spec.name in ("D8", "Q8"):
            return 8
        value = cyclic_order(spec.name)
        if value is None:
            raise GroupTableError(f"unknown atom {spec.name!r}")
        return value
    if isinstance(spec, Elementary):
        return 1 << spec.rank
    if isinstance(spec, DirectProduct):
        return spec_order(spec.left) * spec_order(spec.right)
    if isinstance(spec, CentralProduct):
        return spec_order(spec.left) * spec_order(spec.right) // 2
    base = spec_order(spec.base)
    if isinstance(spec, DirectPower):
        return base ** spec.exponent
    return base ** spec.exponent // (1 << (spec.exponent - 1))


# ============================================================================
# 乘法表
# ============================================================================

class GroupTable:
    """
    以稠密乘法表给出的有限 2-群

    构造后不可变；mult[a, b] 是 a·b 的编号。
    """

    identity = 0

    def __init__(self, mult: np.ndarray, label: str, designated: Optional[int] = None,
                 projection: Optional[np.ndarray] = None, validate: bool = True):
        mult = np.ascontiguousarray(mult, dtype=np.int32)
        if mult.ndim != 2 or mult.shape[0] != mult.shape[1]:
            raise GroupTableError(f"multiplication table must be square, got shape {mult.shape}")
        self.order = int(mult.shape[0])
        try:
            self.n = log2_exact(self.order)
        except ValueError:
            raise GroupTableError(f"order {self.order} is not a power of two") from None
        mult.flags.writeable = False
        self.mult = mult
        self.label = label
        self.designated = designated
        self.projection = projection
        if projection is not None:
            projection.flags.writeable = False
        if validate:
            self._validate()

    def __repr__(self) -> str:
        return f"GroupTable({self.label!r}, order={self.order})"

    # ------------------------------------------------------------------
    # 校验
    # ------------------------------------------------------------------
    def _validate(self):
        from twocensus.utils.settings import get_settings
        settings = get_settings()
        order = self.order
        mult = self.mult
        if mult.min() < 0 or mult.max() >= order:
            raise GroupTableError("table entries out of range")
        idx = np.arange(order)
        if not (np.array_equal(mult[0], idx) and np.array_equal(mult[:, 0], idx)):
            raise GroupTableError("element 0 is not a two-sided identity")
        if not (np.sort(mult, axis=1) == idx).all() or not (np.sort(mult, axis=0) == idx[:, None]).all():
            raise GroupTableError("a row or column is not a permutation")
        if order <= settings.associativity_exhaustive_limit:
            for a in range(order):
                # (a·b)·c 与 a·(b·c)
                if not np.array_equal(mult[mult[a]], mult[a][mult]):
                    raise GroupTableError(f"associativity fails for a={a}")
        else:
            rng = np.random.default_rng(settings.random_seed)
            a, b, c = rng.integers(0, order, size=(3, settings.associativity_samples))
            if not np.array_equal(mult[mult[a, b], c], mult[a, mult[b, c]]):
                raise GroupTableError("associativity fails on sampled triples")
        orders = self.element_order
        if np.any(orders & (orders - 1)):
            raise GroupTableError("an element order is not a power of two")
        logger.debug(f"Validated table {self.label} of order {order}")

    # ------------------------------------------------------------------
    # 缓存的派生数据
    # ------------------------------------------------------------------
    @cached_property
    def element_order(self) -> np.ndarray:
        idx = np.arange(self.order)
        orders = np.zeros(self.order, dtype=np.int64)
        orders[0] = 1
        power = idx.copy()
        t = 1
        while (orders == 0).any():
            power = self.mult[power, idx]
            t += 1
            if t > self.order:
                raise GroupTableError("element of infinite order in table")
            orders[(power == 0) & (orders == 0)] = t
        orders.flags.writeable = False
        return orders

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.argmax(self.mult == 0, axis=1).astype(np.int32)
        inv.flags.writeable = False
        return inv

    @cached_property
    def squares(self) -> np.ndarray:
        idx = np.arange(self.order)
        sq = self.mult[idx, idx]
        sq.flags.writeable = False
        return sq

    @cached_property
    def conjugation(self) -> np.ndarray:
        """conjugation[g, h] = g·h·g⁻¹"""
        table = self.mult[self.mult, self.inverse[:, None]]
        table.flags.writeable = False
        return table

    @property
    def exponent(self) -> int:
        return int(self.element_order.max())

    @property
    def all_bits(self) -> int:
        return (1 << self.order) - 1

    # ------------------------------------------------------------------
    # 子群
    # ------------------------------------------------------------------
    def subgroup(self, bits: int, check: bool = True) -> "SubgroupSet":
        """由位集构造子群；check=True 时检查封闭性"""
        sub = SubgroupSet(self, bits)
        if check:
            idx = sub.indices()
            mask = sub.mask()
            if not mask[0] or not mask[self.mult[np.ix_(idx, idx)]].all():
                raise GroupTableError("bit set is not a subgroup")
        return sub

    def whole(self) -> "SubgroupSet":
        return SubgroupSet(self, self.all_bits)

    def commutator_elements(self) -> np.ndarray:
        """所有换位子 [a,b] = a⁻¹b⁻¹ab（去重），按行分块计算"""
        mult, inv = self.mult, self.inverse
        found = np.zeros(self.order, dtype=bool)
        step = 256
        for start in range(0, self.order, step):
            a = np.arange(start, min(start + step, self.order))
            left = mult[inv[a][:, None], inv[None, :]]
            right = mult[a]
            found[mult[left, right]] = True
        return np.flatnonzero(found)


@dataclass(frozen=True, eq=False)
class SubgroupSet:
    """父群元素编号上的规范位集子群（不可变，可作字典键）"""

    __slots__ = ("parent", "bits")

    parent: GroupTable
    bits: int

    @property
    def order(self) -> int:
        return bin(self.bits).count("1")

    @property
    def exponent_k(self) -> int:
        """log₂|H|"""
        return self.order.bit_length() - 1

    def mask(self) -> np.ndarray:
        return bits_to_mask(self.bits, self.parent.order)

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask())

    def __contains__(self, element: int) -> bool:
        return bool(self.bits >> int(element) & 1)

    def issubset(self, other: "SubgroupSet") -> bool:
        return self.bits & ~other.bits == 0

    def __le__(self, other: "SubgroupSet") -> bool:
        return self.issubset(other)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubgroupSet) and self.parent is other.parent and self.bits == other.bits

    def __hash__(self) -> int:
        return hash(self.bits)

    def __repr__(self) -> str:
        return f"SubgroupSet(order={self.order}, of={self.parent.label!r})"

    def is_elementary_abelian(self) -> bool:
        return bool((self.parent.element_order[self.indices()] <= 2).all())


# ============================================================================
# 原子群
# ============================================================================

def _cyclic(order: int) -> np.ndarray:
    idx = np.arange(order)
    return (idx[:, None] + idx[None, :]) % order


def _elementary(rank: int) -> np.ndarray:
    idx = np.arange(1 << rank)
    return idx[:, None] ^ idx[None, :]


def _dihedral8() -> np.ndarray:
    # 编号 a + 4b 表示 r^a s^b；(r^a s^b)(r^c s^d) = r^(a + (-1)^b c) s^(b+d)
    table = np.zeros((8, 8), dtype=np.int32)
    for x in range(8):
        a, b = x % 4, x // 4
        for y in range(8):
            c, d = y % 4, y // 4
            table[x, y] = (a + (c if b == 0 else -c)) % 4 + 4 * ((b + d) % 2)
    return table


# 四元数单位 1,i,j,k 的乘积：(单位, 是否变号)
_QUATERNION_UNITS = {
    (0, 0): (0, 0), (0, 1): (1, 0), (0, 2): (2, 0), (0, 3): (3, 0),
    (1, 0): (1, 0), (1, 1): (0, 1), (1, 2): (3, 0), (1, 3): (2, 1),
    (2, 0): (2, 0), (2, 1): (3, 1), (2, 2): (0, 1), (2, 3): (1, 0),
    (3, 0): (3, 0), (3, 1): (2, 0), (3, 2): (1, 1), (3, 3): (0, 1),
}


def _quaternion8() -> np.ndarray:
    # 编号 u + 4s 表示 (-1)^s·u，u ∈ {1,i,j,k}
    table = np.zeros((8, 8), dtype=np.int32)
    for x in range(8):
        for y in range(8):
            unit, flip = _QUATERNION_UNITS[(x % 4, y % 4)]
            sign = (x // 4 + y // 4 + flip) % 2
            table[x, y] = unit + 4 * sign
    return table


def designated_involution(spec: GroupSpec) -> int:
    """
    中心积的粘合点：唯一的中心对合元编号

    D8 为 r²，Q8 为 -1，C_{2^k} 为生成元的 2^{k-1} 次幂；C₂^m (m ≥ 2) 没有
    规范的选择，直接拒绝。
    """
    if isinstance(spec, Leaf):
        if spec.name == "D8":
            return 2
        if spec.name == "Q8":
            return 4
        value = cyclic_order(spec.name)
        if value is not None:
            return value // 2
        raise GroupTableError(f"unknown atom {spec.name!r}")
    if isinstance(spec, Elementary):
        if spec.rank == 1:
            return 1
        raise CentralProductError(f"C2^{spec.rank} has no designated central involution")
    raise CentralProductError(f"{format_spec(spec)} is not an atom; build it to get its involution")


def _leaf_table(spec: Union[Leaf, Elementary]) -> GroupTable:
    if isinstance(spec, Elementary):
        designated = 1 if spec.rank == 1 else None
        return GroupTable(_elementary(spec.rank), format_spec(spec), designated, validate=False)
    if spec.name == "D8":
        mult = _dihedral8()
    elif spec.name == "Q8":
        mult = _quaternion8()
    else:
        value = cyclic_order(spec.name)
        if value is None:
            raise GroupTableError(f"unknown atom {spec.name!r}")
        mult = _cyclic(value)
    return GroupTable(mult, spec.name, designated_involution(spec), validate=False)


# ============================================================================
# 构造
# ============================================================================

def direct_product(a: GroupTable, b: GroupTable, label: Optional[str] = None) -> GroupTable:
    """分量乘法：(a1,b1)(a2,b2) 的编号为 a·|B| + b"""
    nb = b.order
    mult = (a.mult[:, None, :, None] * nb + b.mult[None, :, None, :]).reshape(a.order * nb, a.order * nb)
    return GroupTable(mult, label or f"{a.label} x {b.label}", validate=False)


def quotient(group: GroupTable, normal: SubgroupSet, label: Optional[str] = None,
             designated: Optional[int] = None) -> GroupTable:
    """
    商群 G/N 的陪集乘法表，保留投影 G -> G/N

    Raises:
        NotNormalError: N 不是 G 的正规子群
    """
    if normal.parent is not group:
        raise NotNormalError("subgroup belongs to another table")
    if not is_normal(group, normal):
        raise NotNormalError(f"subgroup of order {normal.order} is not normal in {group.label}")
    n_idx = normal.indices()
    projection = np.full(group.order, -1, dtype=np.int64)
    reps: List[int] = []
    for g in range(group.order):
        if projection[g] < 0:
            projection[group.mult[g, n_idx]] = len(reps)
            reps.append(g)
    reps_arr = np.array(reps)
    mult = projection[group.mult[np.ix_(reps_arr, reps_arr)]]
    if label is None:
        label = f"({group.label})/N{normal.order}"
    return GroupTable(mult, label, designated, projection=projection, validate=False)


def central_product(a: GroupTable, b: GroupTable, label: Optional[str] = None) -> GroupTable:
    """(A×B)/⟨(z_A, z_B)⟩，z 为各自的指定中心对合元"""
    for operand in (a, b):
        if operand.designated is None:
            raise CentralProductError(f"{operand.label} has no designated central involution")
    nb = b.order
    product_table = direct_product(a, b)
    z = a.designated * nb + b.designated
    amalgam = SubgroupSet(product_table, 1 | 1 << z)
    table = quotient(product_table, amalgam, label or f"{a.label} * {b.label}")
    return GroupTable(table.mult, table.label, int(table.projection[a.designated * nb]),
                      projection=table.projection, validate=False)


def _cap(cap: Optional[int]) -> int:
    if cap is not None:
        return cap
    from twocensus.utils.settings import get_settings
    return get_settings().build_cap


def _build(spec: GroupSpec) -> GroupTable:
    if isinstance(spec, (Leaf, Elementary)):
        return _leaf_table(spec)
    label = format_spec(spec)
    if isinstance(spec, DirectProduct):
        return direct_product(_build(spec.left), _build(spec.right), label)
    if isinstance(spec, CentralProduct):
        return central_product(_build(spec.left), _build(spec.right), label)
    if spec.exponent < 1:
        raise GroupTableError(f"power exponent must be positive in {label}")
    base = _build(spec.base)
    table = base
    combine = direct_product if isinstance(spec, DirectPower) else central_product
    for _ in range(spec.exponent - 1):
        table = combine(table, base)
    return GroupTable(table.mult, label, table.designated, validate=False)


def build(spec: GroupSpec, cap: Optional[int] = None, validate: bool = True) -> GroupTable:
    """
    由表达式构造乘法表

    Raises:
        CapExceededError: 群的阶超过构造上限
        CentralProductError: 中心积的操作数没有指定对合元
    """
    order = spec_order(spec)
    limit = _cap(cap)
    if order > limit:
        raise CapExceededError(f"building {format_spec(spec)}", order, limit)
    table = _build(spec)
    result = GroupTable(table.mult, format_spec(spec), table.designated, validate=validate)
    logger.info(f"Built {result.label} of order {result.order}")
    return result


# ============================================================================
# 子群运算
# ============================================================================

def closure(group: GroupTable, elements: Iterable[int]) -> SubgroupSet:
    """由元素生成的子群"""
    gens = np.unique(np.fromiter((int(e) for e in elements), dtype=np.int64))
    mask = np.zeros(group.order, dtype=bool)
    mask[0] = True
    frontier = np.array([0])
    if gens.size == 0:
        return SubgroupSet(group, 1)
    while frontier.size:
        products = group.mult[np.ix_(frontier, gens)].ravel()
        fresh = np.unique(products[~mask[products]])
        mask[fresh] = True
        frontier = fresh
    return SubgroupSet(group, mask_to_bits(mask))


def _conjugates(group: GroupTable, sub: SubgroupSet) -> np.ndarray:
    """[g, j] = g·h_j·g⁻¹"""
    idx = sub.indices()
    return group.mult[group.mult[:, idx], group.inverse[:, None]]


def normalizer(group: GroupTable, sub: SubgroupSet) -> SubgroupSet:
    mask = sub.mask()
    inside = mask[_conjugates(group, sub)].all(axis=1)
    return SubgroupSet(group, mask_to_bits(inside))


def is_normal(group: GroupTable, sub: SubgroupSet) -> bool:
    return bool(sub.mask()[_conjugates(group, sub)].all())


def conjugate(group: GroupTable, sub: SubgroupSet, g: int) -> SubgroupSet:
    """H^g = g⁻¹·H·g"""
    idx = sub.indices()
    g_inv = int(group.inverse[g])
    image = group.mult[group.mult[g_inv, idx], g]
    return SubgroupSet(group, indices_to_bits(image))


def induced_table(group: GroupTable, sub: SubgroupSet) -> GroupTable:
    """子群自身的乘法表（元素按父群编号升序重新编号）"""
    idx = sub.indices()
    position = np.full(group.order, -1, dtype=np.int64)
    position[idx] = np.arange(idx.size)
    mult = position[group.mult[np.ix_(idx, idx)]]
    return GroupTable(mult, f"subgroup of order {idx.size} in {group.label}", validate=False)


def center(group: GroupTable) -> SubgroupSet:
    commuting = (group.mult == group.mult.T).all(axis=1)
    return SubgroupSet(group, mask_to_bits(commuting))


def derived_subgroup(group: GroupTable) -> SubgroupSet:
    return closure(group, group.commutator_elements())


def frattini_subgroup(group: GroupTable) -> SubgroupSet:
    """2-群中 Φ(G) = ⟨平方元, 换位子⟩"""
    generators = np.union1d(np.unique(group.squares), group.commutator_elements())
    return closure(group, generators)


def element_order_profile(group: GroupTable) -> Dict[int, int]:
    """元素阶谱 {阶: 个数}"""
    return dict(sorted(Counter(int(o) for o in group.element_order).items()))


@dataclass(frozen=True)
class GroupClassification:
    is_elementary_abelian: bool
    is_abelian: bool
    is_extraspecial: bool
    is_almost_extraspecial: bool
    is_generalized_extraspecial: bool
    exponent: int
    frattini_order: int

    @property
    def has_small_frattini(self) -> bool:
        """|Φ(G)| = 2：二次型与 e_i 公式适用"""
        return self.frattini_order == 2


def classify(group: GroupTable) -> GroupClassification:
    z = center(group)
    d = derived_subgroup(group)
    phi = frattini_subgroup(group)
    is_abelian = z.bits == group.all_bits
    exponent = group.exponent
    phi_is_derived_of_order_two = d.bits == phi.bits and phi.order == 2
    z_is_cyclic_four = z.order == 4 and bool((group.element_order[z.indices()] == 4).any())
    return GroupClassification(
        is_elementary_abelian=is_abelian and exponent <= 2,
        is_abelian=is_abelian,
        is_extraspecial=phi_is_derived_of_order_two and z.bits == phi.bits,
        is_almost_extraspecial=phi_is_derived_of_order_two and z_is_cyclic_four,
        is_generalized_extraspecial=phi_is_derived_of_order_two and d.issubset(z),
        exponent=exponent,
        frattini_order=phi.order,
    )
