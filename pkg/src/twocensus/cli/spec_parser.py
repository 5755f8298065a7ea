"""
群表达式解析器

语法（x 优先级最低，均为左结合）：
    direct  := central ('x' central)*
    central := power ('*' power)*
    power   := primary ('^' INT | '^{*' INT '}')*
    primary := ATOM | '(' direct ')'
ATOM 为 C2、C4、C8、C16…、D8、Q8；C2^m 解析为初等交换群 E(m)。
"""

import logging
import re
from dataclasses import dataclass
from typing import List, Optional

from twocensus.core.exceptions import SpecSyntaxError
from twocensus.core.grouptable import (
    CentralPower,
    CentralProduct,
    DirectPower,
    DirectProduct,
    Elementary,
    GroupSpec,
    Leaf,
    cyclic_order,
    format_spec,
)

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(?P<atom>[A-Z][0-9]+)|(?P<int>[0-9]+)|(?P<op>[x*^(){}]))")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        match = _TOKEN.match(text, pos)
        if match is None or match.end() == pos:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), _byte_offset(text, start)))
        pos = match.end()
    tokens.append(Token("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _accept(self, text: str) -> Optional[Token]:
        tok = self.current
        if tok.kind == "op" and tok.text == text:
            self.pos += 1
            return tok
        return None

    def _expect(self, text: str) -> Token:
        tok = self._accept(text)
        if tok is None:
            raise SpecSyntaxError(f"expected {text!r}", self.current.offset)
        return tok

    def _integer(self) -> int:
        tok = self.current
        if tok.kind != "int":
            raise SpecSyntaxError("expected an exponent", tok.offset)
        self.pos += 1
        value = int(tok.text)
        if value < 1:
            raise SpecSyntaxError("exponent must be positive", tok.offset)
        return value

    def parse(self) -> GroupSpec:
        spec = self.direct()
        if self.current.kind != "end":
            raise SpecSyntaxError(f"unexpected {self.current.text!r}", self.current.offset)
        return spec

    def direct(self) -> GroupSpec:
        spec = self.central()
        while self._accept("x"):
            spec = DirectProduct(spec, self.central())
        return spec

    def central(self) -> GroupSpec:
        spec = self.power()
        while self._accept("*"):
            spec = CentralProduct(spec, self.power())
        return spec

    def power(self) -> GroupSpec:
        spec = self.primary()
        while self._accept("^"):
            if self._accept("{"):
                self._expect("*")
                exponent = self._integer()
                self._expect("}")
                spec = CentralPower(spec, exponent)
            else:
                exponent = self._integer()
                if spec == Leaf("C2"):
                    spec = Elementary(exponent)
                else:
                    spec = DirectPower(spec, exponent)
        return spec

    def primary(self) -> GroupSpec:
        tok = self.current
        if tok.kind == "atom":
            if tok.text not in ("D8", "Q8") and cyclic_order(tok.text) is None:
                raise SpecSyntaxError(f"unknown group {tok.text!r}", tok.offset)
            self.pos += 1
            return Leaf(tok.text)
        if self._accept("("):
            spec = self.direct()
            self._expect(")")
            return spec
        if tok.kind == "end":
            raise SpecSyntaxError("unexpected end of expression", tok.offset)
        raise SpecSyntaxError(f"unexpected {tok.text!r}", tok.offset)


def parse_spec(text: str) -> GroupSpec:
    """
    解析群表达式

    Raises:
        SpecSyntaxError: 语法错误，offset 为出错位置的字节偏移
    """
    spec = _Parser(text).parse()
    logger.debug(f"Parsed {text!r} as {format_spec(spec)}")
    return spec


def pretty(spec: GroupSpec) -> str:
    return format_spec(spec)
