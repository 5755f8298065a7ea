"""
测试公共设置：把 src 加入路径，并提供常用群的乘法表
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from twocensus.cli.spec_parser import parse_spec  # noqa: E402
from twocensus.core.grouptable import build  # noqa: E402
from twocensus.utils.settings import reset_settings  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_settings():
    """每个测试都从默认配置开始"""
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def make_group():
    """由表达式字符串构造乘法表"""
    def _make(text: str):
        return build(parse_spec(text))
    return _make


@pytest.fixture(scope="session")
def d8d8():
    return build(parse_spec("D8 * D8"))


@pytest.fixture(scope="session")
def q8d8():
    return build(parse_spec("Q8 * D8"))


@pytest.fixture(scope="session")
def d8c4():
    return build(parse_spec("D8 * C4"))
