"""
TwoCensus - 有限 2-群的精确子群计数

子包：
- core: 群表、子群格、GF(2) 线性代数、二次型与计数公式
- utils: 配置、国际化、报告输出
- cli: 群表达式解析与命令行
"""

__version__ = "0.1.0"
