# ============================ #
#   Guard Expression Language
# ============================ #

"""
Closed expression language for edge guards and join specifications.

    expr  := or
    or    := and ("or" and)*
    and   := not ("and" not)*
    not   := "not" not | cmp
    cmp   := atom (("==" | "!=" | "<" | "<=" | ">" | ">=") atom)?
    atom  := INT | STRING | "true" | "false" | "null" | "x" | NAME | "(" expr ")"

`x` (alias `value`) is the token being tested. Bare names are only meaningful
in join specifications, where they stand for "this input pin is offered".
The literal `else` is a whole guard on its own.
"""
import re
from typing import Any, Callable, List, Optional, Set, Tuple

from activity_sos.entity.model_entity import Guard
from activity_sos.entity.state_entity import TokenKind, TokenValue
from activity_sos.exception.exception import GuardEvaluationError, ModelParseError

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>-?\d+)|(?P<str>\"[^\"]*\"|'[^']*')|(?P<op>==|!=|<=|>=|<|>|\(|\))|(?P<name>[A-Za-z_][A-Za-z_0-9]*))"
)
_KEYWORDS = {"and", "or", "not", "true", "false", "null", "else"}
_VAR_NAMES = {"x", "value"}
_COMPARISONS = {"==", "!=", "<", "<=", ">", ">="}


class _CT:
    """Python-side stand-in for a ControlToken inside comparisons."""

    def __repr__(self) -> str:
        return "CT"


CT_VALUE = _CT()


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise ModelParseError(f"unexpected character in guard '{text}'", line=None, column=None)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Tuple[str, str, int]:
        token = self.peek()
        if token is None:
            raise ModelParseError(f"unexpected end of guard '{self.text}'")
        self.pos += 1
        return token

    def accept(self, value: str) -> bool:
        token = self.peek()
        if token is not None and token[1] == value and token[0] in ("op", "name"):
            self.pos += 1
            return True
        return False

    def parse(self) -> Tuple:
        if len(self.tokens) == 1 and self.tokens[0][1] == "else":
            return ("else",)
        expr = self.parse_or()
        if self.peek() is not None:
            _, value, column = self.peek()
            raise ModelParseError(f"unexpected '{value}' at column {column} in guard '{self.text}'")
        return expr

    def parse_or(self) -> Tuple:
        left = self.parse_and()
        while self.accept("or"):
            left = ("or", left, self.parse_and())
        return left

    def parse_and(self) -> Tuple:
        left = self.parse_not()
        while self.accept("and"):
            left = ("and", left, self.parse_not())
        return left

    def parse_not(self) -> Tuple:
        if self.accept("not"):
            return ("not", self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> Tuple:
        left = self.parse_atom()
        token = self.peek()
        if token is not None and token[0] == "op" and token[1] in _COMPARISONS:
            self.pos += 1
            return ("cmp", token[1], left, self.parse_atom())
        return left

    def parse_atom(self) -> Tuple:
        kind, value, column = self.take()
        if kind == "int":
            return ("const", int(value))
        if kind == "str":
            return ("const", value[1:-1])
        if kind == "op" and value == "(":
            expr = self.parse_or()
            if not self.accept(")"):
                raise ModelParseError(f"missing ')' in guard '{self.text}'")
            return expr
        if kind == "name":
            if value == "true":
                return ("const", True)
            if value == "false":
                return ("const", False)
            if value == "null":
                return ("null",)
            if value in _VAR_NAMES:
                return ("var",)
            if value in _KEYWORDS:
                raise ModelParseError(f"misplaced '{value}' at column {column} in guard '{self.text}'")
            return ("name", value)
        raise ModelParseError(f"unexpected '{value}' at column {column} in guard '{self.text}'")


def parse_guard(text: Any) -> Guard:
    """Document value → Guard. Booleans and None are accepted as shorthands."""
    if text is None or text is True:
        text = "true"
    elif text is False:
        text = "false"
    text = str(text).strip()
    return Guard(text=text, expr=_Parser(text).parse())


TRUE_GUARD = parse_guard("true")


def names_in(guard: Guard) -> Set[str]:
    """Bare names referenced by a guard (join specification pins)."""
    found: Set[str] = set()

    def walk(node: Tuple) -> None:
        if node[0] == "name":
            found.add(node[1])
        for child in node[1:]:
            if isinstance(child, tuple):
                walk(child)

    walk(guard.expr)
    return found


def uses_token(guard: Guard) -> bool:
    found = []

    def walk(node: Tuple) -> None:
        if node[0] == "var":
            found.append(node)
        for child in node[1:]:
            if isinstance(child, tuple):
                walk(child)

    walk(guard.expr)
    return bool(found)


# ================================
# 🧮 Evaluation
# ================================
def _python_value(token: TokenValue) -> Any:
    if token.kind is TokenKind.CONTROL:
        return CT_VALUE
    if token.kind is TokenKind.NULL:
        return None
    if token.kind is TokenKind.EVENT:
        return token
    return token.value


def _evaluate(node: Tuple, lookup: Callable[[Tuple], Any]) -> Any:
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "null":
        return None
    if tag in ("var", "name"):
        return lookup(node)
    if tag == "not":
        return not _truth(_evaluate(node[1], lookup))
    if tag == "and":
        return _truth(_evaluate(node[1], lookup)) and _truth(_evaluate(node[2], lookup))
    if tag == "or":
        return _truth(_evaluate(node[1], lookup)) or _truth(_evaluate(node[2], lookup))
    if tag == "cmp":
        op, left, right = node[1], _evaluate(node[2], lookup), _evaluate(node[3], lookup)
        if op == "==":
            return left == right and type(left) is type(right)
        if op == "!=":
            return not (left == right and type(left) is type(right))
        comparable = (isinstance(left, int) and not isinstance(left, bool) and isinstance(right, int) and not isinstance(right, bool)) or (
            isinstance(left, str) and isinstance(right, str)
        )
        if not comparable:
            raise GuardEvaluationError(f"cannot compare {left!r} {op} {right!r}")
        return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[op]
    raise GuardEvaluationError(f"unknown guard node {tag}")


def _truth(value: Any) -> bool:
    if not isinstance(value, bool):
        raise GuardEvaluationError(f"guard operand {value!r} is not boolean")
    return value


def eval_guard(guard: Guard, token: TokenValue, otherwise: Optional[bool] = None) -> bool:
    """
    Evaluates a guard over one token value.

    `otherwise` is the value of an `else` guard and is only supplied in a
    decision context; evaluating `else` without it is an error.
    """
    if guard.is_else:
        if otherwise is None:
            raise GuardEvaluationError("'else' guard evaluated outside a decision")
        return otherwise

    def lookup(node: Tuple) -> Any:
        if node[0] == "var":
            return _python_value(token)
        raise GuardEvaluationError(f"unknown name '{node[1]}' in guard '{guard.text}'")

    return _truth(_evaluate(guard.expr, lookup))


def eval_join_spec(guard: Guard, offered: Set[str]) -> bool:
    """Join specification: each bare name is true iff that input pin is offered tokens."""

    def lookup(node: Tuple) -> Any:
        if node[0] == "name":
            return node[1] in offered
        raise GuardEvaluationError("join specifications cannot reference the token value")

    return _truth(_evaluate(guard.expr, lookup))
