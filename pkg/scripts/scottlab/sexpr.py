"""
Formula DSL
-----------

S-expression reader and canonical printer for formulas.

    (forall (x) (or (R x x) (exists (y) (and (R x y) (not (= x y))))))
    (and* ladder (U) (x) :bound 5)
    (exists>= 2 (x) (U0 x))

Bare symbols are variables, ``@c`` names a signature constant and ``$3`` a
Henkin constant. ``true``/``false`` read as the empty conjunction and
disjunction. ``implies`` and ``exists>=`` are expanded while reading, so the
printer only ever emits core forms and ``format_formula(parse_formula(s))``
is a fixed point after one round.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple, Union

from .errors import FormulaSyntaxError
from .syntax import (
    BOTTOM,
    TOP,
    And,
    App,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Henkin,
    Or,
    Schema,
    Term,
    Var,
    counting_exists,
    implication,
    negate,
)

# tokens
[T_EOF, T_SYMBOL, T_STRING, T_INTEGER, T_OPEN, T_CLOSE] = range(6)
# states
[S_START, S_SYMBOL, S_STRING] = range(3)

_DELIMITERS = " \t\r\n;()\""
_INTEGER_RE = re.compile(r"^-?\d+$")
_RESERVED = {"and", "or", "not", "forall", "exists", "implies", "exists>=", "and*", "or*", "true", "false"}


@dataclass
class Token:
    kind: int
    value: Any
    line: int
    column: int


@dataclass
class Node:
    """A read s-expression: an atom token or a list with its opening position."""

    value: Union[Token, List["Node"]]
    line: int
    column: int

    @property
    def is_list(self) -> bool:
        return isinstance(self.value, list)

    @property
    def symbol(self) -> Optional[str]:
        if isinstance(self.value, Token) and self.value.kind == T_SYMBOL:
            return self.value.value
        return None


class SexprReader:
    """Character-level state machine producing position-tagged tokens."""

    def __init__(self, text: str):
        self.input = io.StringIO(text)
        self.line = 1
        self.column = 0
        self.pushed: Optional[Tuple[str, int, int]] = None

    def getc(self) -> str:
        if self.pushed is not None:
            char, self.line, self.column = self.pushed
            self.pushed = None
            return char
        char = self.input.read(1)
        if char == "\n":
            self.line += 1
            self.column = 0
        elif char:
            self.column += 1
        return char

    def ungetc(self, char: str, line: int, column: int) -> None:
        self.pushed = (char, self.line, self.column)
        self.line, self.column = line, column

    def get_token(self) -> Token:
        chars: List[str] = []
        state = S_START
        start = (self.line, self.column)
        while True:
            before = (self.line, self.column)
            char = self.getc()
            if state == S_START:
                if not char:
                    return Token(T_EOF, None, self.line, self.column)
                if char in " \t\r\n":
                    continue
                if char == ";":
                    while char and char != "\n":
                        char = self.getc()
                    continue
                start = (self.line, self.column)
                if char == "(":
                    return Token(T_OPEN, None, *start)
                if char == ")":
                    return Token(T_CLOSE, None, *start)
                if char == '"':
                    state = S_STRING
                    continue
                state = S_SYMBOL
                chars.append(char)
            elif state == S_SYMBOL:
                if not char or char in _DELIMITERS:
                    if char:
                        self.ungetc(char, *before)
                    text = "".join(chars)
                    if _INTEGER_RE.match(text):
                        return Token(T_INTEGER, int(text), *start)
                    return Token(T_SYMBOL, text, *start)
                chars.append(char)
            elif state == S_STRING:
                if not char:
                    raise FormulaSyntaxError("unexpected end of input inside string", *start)
                if char == "\\":
                    chars.append(self.getc())
                elif char == '"':
                    return Token(T_STRING, "".join(chars), *start)
                else:
                    chars.append(char)

    def read(self, token: Optional[Token] = None) -> Optional[Node]:
        token = token or self.get_token()
        if token.kind == T_EOF:
            return None
        if token.kind == T_CLOSE:
            raise FormulaSyntaxError("unexpected ')'", token.line, token.column)
        if token.kind != T_OPEN:
            return Node(token, token.line, token.column)
        items: List[Node] = []
        while True:
            inner = self.get_token()
            if inner.kind == T_CLOSE:
                return Node(items, token.line, token.column)
            if inner.kind == T_EOF:
                raise FormulaSyntaxError("end of input inside list", token.line, token.column)
            items.append(self.read(inner))

    def read_all(self) -> List[Node]:
        nodes: List[Node] = []
        while True:
            node = self.read()
            if node is None:
                return nodes
            nodes.append(node)


def _fail(message: str, node: Node) -> FormulaSyntaxError:
    return FormulaSyntaxError(message, node.line, node.column)


# ---------------------------------------------------------------------------
# Reading formulas
# ---------------------------------------------------------------------------


def parse_term(node: Node) -> Term:
    if node.is_list:
        items = node.value
        if not items or items[0].symbol is None:
            raise _fail("function application needs a function symbol", node)
        return App(items[0].symbol, tuple(parse_term(item) for item in items[1:]))
    token = node.value
    if token.kind == T_INTEGER:
        raise _fail(f"bare number {token.value} is not a term", node)
    if token.kind != T_SYMBOL:
        raise _fail("expected a term", node)
    text = token.value
    if text.startswith("@") and len(text) > 1:
        return Const(text[1:])
    if text.startswith("$"):
        if not _INTEGER_RE.match(text[1:]) or int(text[1:]) < 0:
            raise _fail(f"Henkin constant needs a natural index: {text}", node)
        return Henkin(int(text[1:]))
    if text in _RESERVED or text.startswith(":"):
        raise _fail(f"reserved word '{text}' used as a term", node)
    return Var(text)


def _parse_data(node: Node) -> Any:
    if node.is_list:
        return tuple(_parse_data(item) for item in node.value)
    return node.value.value


def _parse_names(node: Node) -> Tuple[str, ...]:
    if not node.is_list:
        raise _fail("expected a parenthesized variable list", node)
    names = []
    for item in node.value:
        name = item.symbol
        if name is None or name in _RESERVED or name[:1] in "@$:":
            raise _fail("expected a variable name", item)
        names.append(name)
    if len(set(names)) != len(names):
        raise _fail("repeated variable in quantifier block", node)
    return tuple(names)


def _parse_schema(items: List[Node], node: Node) -> Schema:
    from .schemas import get_enumerator

    if len(items) < 4:
        raise _fail("schema form is (and* enumerator (params) (args) [:bound n] [:neg])", node)
    name = items[1].symbol
    if name is None:
        raise _fail("schema needs an enumerator name", items[1])
    if not items[2].is_list or not items[3].is_list:
        raise _fail("schema params and args must be lists", node)
    params = _parse_data(items[2])
    args = tuple(parse_term(item) for item in items[3].value)
    bound: Optional[int] = None
    negated = False
    rest = items[4:]
    position = 0
    while position < len(rest):
        keyword = rest[position].symbol
        if keyword == ":neg":
            negated = True
            position += 1
        elif keyword == ":bound":
            if position + 1 >= len(rest) or rest[position + 1].is_list or rest[position + 1].value.kind != T_INTEGER:
                raise _fail(":bound needs a natural number", rest[position])
            bound = rest[position + 1].value.value
            if bound < 0:
                raise _fail(":bound needs a natural number", rest[position + 1])
            position += 2
        else:
            raise _fail("unknown schema option", rest[position])
    try:
        enumerator = get_enumerator(name)
        enumerator.validate(params, args)
    except ValueError as exc:
        raise _fail(str(exc), items[1]) from None
    return Schema(name, params, args, bound, negated)


def parse_node(node: Node) -> Formula:
    if not node.is_list:
        symbol = node.symbol
        if symbol == "true":
            return TOP
        if symbol == "false":
            return BOTTOM
        raise _fail(f"expected a formula, found {node.value.value!r}", node)

    items = node.value
    if not items:
        raise _fail("empty form", node)
    head = items[0].symbol
    if head is None:
        raise _fail("form must start with a symbol", items[0])

    if head in ("and", "or"):
        children = tuple(parse_node(item) for item in items[1:])
        return And(children) if head == "and" else Or(children)
    if head in ("and*", "or*"):
        schema = _parse_schema(items, node)
        return And(schema) if head == "and*" else Or(schema)
    if head == "not":
        if len(items) != 2:
            raise _fail("not takes one formula", node)
        return negate(parse_node(items[1]))
    if head in ("forall", "exists"):
        if len(items) != 3:
            raise _fail(f"{head} takes a variable list and a body", node)
        names = _parse_names(items[1])
        body = parse_node(items[2])
        return Forall(names, body) if head == "forall" else Exists(names, body)
    if head == "implies":
        if len(items) != 3:
            raise _fail("implies takes two formulas", node)
        return implication(parse_node(items[1]), parse_node(items[2]))
    if head == "exists>=":
        if len(items) != 4 or items[1].is_list or items[1].value.kind != T_INTEGER:
            raise _fail("exists>= takes a count, one variable and a body", node)
        names = _parse_names(items[2])
        if len(names) != 1:
            raise _fail("exists>= binds exactly one variable", items[2])
        return counting_exists(items[1].value.value, names[0], parse_node(items[3]))
    if head in _RESERVED or head[:1] in "@$:":
        raise _fail(f"'{head}' cannot name a relation", items[0])
    return Atom(head, tuple(parse_term(item) for item in items[1:]))


def parse_formulas(text: str) -> List[Formula]:
    return [parse_node(node) for node in SexprReader(text).read_all()]


def parse_formula(text: str) -> Formula:
    nodes = SexprReader(text).read_all()
    if not nodes:
        raise FormulaSyntaxError("no formula found", 1, 0)
    if len(nodes) > 1:
        raise _fail("trailing input after formula", nodes[1])
    return parse_node(nodes[0])


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PLAIN_SYMBOL_RE = re.compile(r"^[^\s;()\"@$:\d-][^\s;()\"]*$")


def format_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Const):
        return f"@{term.name}"
    if isinstance(term, Henkin):
        return f"${term.index}"
    inner = " ".join(format_term(arg) for arg in term.args)
    return f"({term.func} {inner})" if inner else f"({term.func})"


def _format_data(value: Any) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not schema data")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        if _PLAIN_SYMBOL_RE.match(value) and value not in _RESERVED:
            return value
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (tuple, list)):
        return "(" + " ".join(_format_data(item) for item in value) + ")"
    raise TypeError(f"Unsupported schema data: {value!r}")


def _format_schema(head: str, schema: Schema) -> str:
    args = " ".join(format_term(arg) for arg in schema.args)
    parts = [head, schema.enumerator, _format_data(schema.params), f"({args})"]
    if schema.bound is not None:
        parts.append(f":bound {schema.bound}")
    if schema.negated:
        parts.append(":neg")
    return "(" + " ".join(parts) + ")"


def format_formula(formula: Formula) -> str:
    if isinstance(formula, Atom):
        inner = " ".join([formula.rel] + [format_term(arg) for arg in formula.args])
        text = f"({inner})"
        return text if formula.positive else f"(not {text})"
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            return _format_schema("and*" if isinstance(formula, And) else "or*", formula.children)
        if not formula.children:
            return "true" if isinstance(formula, And) else "false"
        head = "and" if isinstance(formula, And) else "or"
        return "(" + " ".join([head] + [format_formula(child) for child in formula.children]) + ")"
    head = "forall" if isinstance(formula, Forall) else "exists"
    return f"({head} ({' '.join(formula.vars)}) {format_formula(formula.body)})"
