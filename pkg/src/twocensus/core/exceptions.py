"""
异常定义 - TwoCensus

所有引擎错误都继承自 CensusError，命令行层据此决定退出码。
"""


class CensusError(Exception):
    """引擎错误基类"""


class DimensionError(CensusError, ValueError):
    """维数或阶指数超出允许范围"""


class CapExceededError(CensusError, ValueError):
    """规模超过配置上限（枚举爆炸保护）"""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds configured cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class GroupTableError(CensusError, ValueError):
    """乘法表不满足群公理"""


class CentralProductError(CensusError, ValueError):
    """中心积的操作数没有指定的中心对合元"""


class NotNormalError(CensusError, ValueError):
    """商群要求的子群不是正规子群"""


class PreconditionError(CensusError, ValueError):
    """操作前提条件不成立（例如 |Φ(G)| ≠ 2）"""


class WellDefinednessError(CensusError):
    """二次型与陪集代表的选取有关，说明 Φ(G) 不在中心里"""


class FormClassificationError(CensusError, ValueError):
    """二次型不属于任何标准类型"""


class IncompleteSectionCensusError(CensusError, ValueError):
    """截面普查不完整，无法做 Goursat 计数"""


class MethodInfeasibleError(CensusError):
    """所选计数方法不适用于该群"""


class SpecSyntaxError(CensusError, ValueError):
    """群表达式语法错误，带字节偏移"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset
