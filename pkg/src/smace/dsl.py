"""Parser for the rule text DSL and system-level validity checks.

Grammar::

    rule    := "if" cond ("and" cond)* "then" outcome ["else" outcome]
    cond    := ident op number
    op      := "<=" | ">=" | "<" | ">"
    outcome := number | ident

Identifiers are letters, digits, and underscores, not starting with a
digit. Numbers accept decimal and scientific notation and are stored as
64-bit floats. Disjunctions are rejected; write one rule per branch.

Validity of a whole system is governed by three assumptions:

* A1 - conditions compare a feature against a finite numeric constant;
* A2 - each condition involves exactly one feature (no feature-to-feature
  comparisons);
* A3 - models consume input features only, never another model's output.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .core import (
    ComparisonOp,
    Condition,
    DecisionSystem,
    FeatureId,
    FeatureKind,
    LinearBackend,
    Outcome,
    Rule,
    _format_number,
)
from .errors import SmaceError


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    """A problem found while parsing or validating.

    ``position`` is a 1-based (line, column) pair into the source text;
    system-level diagnostics with no source location use (0, 0).
    """

    position: tuple[int, int]
    message: str
    severity: Severity = Severity.ERROR

    def __str__(self) -> str:
        line, col = self.position
        where = f"{line}:{col}: " if line else ""
        return f"{where}{self.severity.value}: {self.message}"


class RuleSyntaxError(SmaceError):
    """Raised by :func:`parse_rule`; carries the diagnostics."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class ParsedRule:
    rule: Rule
    default_outcome: Outcome | None  # set by an "else" clause, if present


_TOKEN_RE = re.compile(
    r"(?P<op><=|>=|<|>)"
    r"|(?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_]\w*)"
    r"|(?P<junk>\S)"
)

_KEYWORDS = frozenset({"if", "and", "then", "else", "or"})


@dataclass(frozen=True)
class _Token:
    kind: str  # "op" | "number" | "ident" | "junk" | "end"
    text: str
    position: tuple[int, int]


def _tokenize(text: str) -> list[_Token]:
    line_starts = [0] + [m.end() for m in re.finditer(r"\n", text)]

    def position(offset: int) -> tuple[int, int]:
        line = 0
        for i, start in enumerate(line_starts):
            if start <= offset:
                line = i
        return line + 1, offset - line_starts[line] + 1

    tokens = []
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup or "junk"
        tokens.append(_Token(kind, match.group(), position(match.start())))
    end_pos = position(len(text) - 1) if text else (1, 1)
    tokens.append(_Token("end", "", (end_pos[0], end_pos[1] + 1)))
    return tokens


class _Parser:
    def __init__(self, text: str, features: dict[str, FeatureId]):
        self.tokens = _tokenize(text)
        self.features = features
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.current
        if token.kind != "end":
            self.pos += 1
        return token

    def fail(self, message: str, token: _Token | None = None):
        token = token or self.current
        raise RuleSyntaxError([ParseDiagnostic(token.position, message)])

    def expect_keyword(self, word: str) -> None:
        token = self.advance()
        if token.kind != "ident" or token.text != word:
            self.fail(f"expected {word!r}, found {token.text!r}", token)

    def parse(self, name: str) -> ParsedRule:
        self.expect_keyword("if")
        conditions = [self.parse_condition()]
        while True:
            token = self.current
            if token.kind == "ident" and token.text == "and":
                self.advance()
                conditions.append(self.parse_condition())
            elif token.kind == "ident" and token.text == "or":
                self.fail("disjunction ('or') is not supported; write separate rules", token)
            elif token.kind == "ident" and token.text == "then":
                self.advance()
                break
            else:
                self.fail(f"expected 'and' or 'then', found {token.text!r}", token)
        consequence = self.parse_outcome()
        default: Outcome | None = None
        if self.current.kind == "ident" and self.current.text == "else":
            self.advance()
            default = self.parse_outcome()
        if self.current.kind != "end":
            self.fail(f"unexpected trailing input {self.current.text!r}")
        seen = set()
        for cond in conditions:
            key = (cond.feature.name, cond.op, cond.threshold)
            if key in seen:
                self.fail(f"duplicate condition '{cond}'", self.tokens[0])
            seen.add(key)
        return ParsedRule(Rule(name, tuple(conditions), consequence), default)

    def parse_condition(self) -> Condition:
        lhs = self.advance()
        if lhs.kind != "ident" or lhs.text in _KEYWORDS:
            self.fail(f"expected a feature name, found {lhs.text!r}", lhs)
        feature = self.features.get(lhs.text)
        if feature is None:
            self.fail(f"unknown feature {lhs.text!r}", lhs)
        op_token = self.advance()
        if op_token.kind != "op":
            self.fail(f"expected a comparison operator, found {op_token.text!r}", op_token)
        rhs = self.advance()
        if rhs.kind == "ident":
            if rhs.text in self.features:
                self.fail(
                    f"condition compares two features ({lhs.text!r} vs {rhs.text!r}); "
                    "A2 requires a single feature per condition",
                    rhs,
                )
            self.fail(
                f"right-hand side {rhs.text!r} is not a numeric constant; "
                "A1 requires numeric thresholds",
                rhs,
            )
        if rhs.kind != "number":
            self.fail(f"expected a numeric threshold, found {rhs.text!r}", rhs)
        threshold = float(rhs.text)
        if not math.isfinite(threshold):
            self.fail(f"threshold {rhs.text!r} is not finite; A1 requires finite values", rhs)
        return Condition(feature, ComparisonOp(op_token.text), threshold)

    def parse_outcome(self) -> Outcome:
        token = self.advance()
        if token.kind == "number":
            return _parse_outcome_number(token.text)
        if token.kind == "ident" and token.text not in _KEYWORDS:
            return token.text
        self.fail(f"expected an outcome label, found {token.text!r}", token)
        raise AssertionError("unreachable")


def _parse_outcome_number(text: str) -> Outcome:
    value = float(text)
    if re.fullmatch(r"[+-]?\d+", text) and abs(value) < 2**53:
        return int(text)
    return value


def parse_rule(text: str, features: dict[str, FeatureId], name: str = "rule") -> ParsedRule:
    """Parse one rule. Raises :class:`RuleSyntaxError` on any problem, so
    parsing is total: every input yields a rule or an error diagnostic."""
    if not text.strip():
        raise RuleSyntaxError([ParseDiagnostic((1, 1), "empty rule text")])
    return _Parser(text, features).parse(name)


def try_parse_rule(
    text: str, features: dict[str, FeatureId], name: str = "rule"
) -> tuple[ParsedRule | None, list[ParseDiagnostic]]:
    try:
        return parse_rule(text, features, name), []
    except RuleSyntaxError as exc:
        return None, exc.diagnostics


def render_rule(rule: Rule, default_outcome: Outcome | None = None) -> str:
    """Inverse of :func:`parse_rule` up to whitespace: reparsing the output
    yields a structurally equal rule."""
    body = " and ".join(str(c) for c in rule.conditions)
    text = f"if {body} then {_render_outcome(rule.consequence)}"
    if default_outcome is not None:
        text += f" else {_render_outcome(default_outcome)}"
    return text


def _render_outcome(outcome: Outcome) -> str:
    if isinstance(outcome, bool):
        raise ValueError("boolean outcomes are not part of the DSL")
    if isinstance(outcome, int):
        return str(outcome)
    if isinstance(outcome, float):
        return _format_number(outcome)
    return outcome


# -- whole-system validation ---------------------------------------------------

_NO_POSITION = (0, 0)


def _error(message: str) -> ParseDiagnostic:
    return ParseDiagnostic(_NO_POSITION, message, Severity.ERROR)


def validate_system(system: DecisionSystem) -> list[ParseDiagnostic]:
    """Check A1-A3 plus structural integrity; empty list means valid."""
    diagnostics: list[ParseDiagnostic] = []
    known = {f.name: f for f in system.all_features}

    for model in system.models:
        for f in model.input_features:
            if f.kind is not FeatureKind.INPUT:
                diagnostics.append(
                    _error(
                        f"model {model.name!r} consumes internal feature {f.name!r}; "
                        "A3 requires models to use input features only"
                    )
                )
            elif f.name not in known or known[f.name] != f:
                diagnostics.append(
                    _error(f"model {model.name!r} references unknown feature {f.name!r}")
                )
        if isinstance(model.backend, LinearBackend):
            if len(model.backend.coefficients) != len(model.input_features):
                diagnostics.append(
                    _error(
                        f"model {model.name!r} declares {len(model.input_features)} inputs "
                        f"but {len(model.backend.coefficients)} coefficients"
                    )
                )

    for rule in system.policy.rules:
        seen = set()
        for cond in rule.conditions:
            if not math.isfinite(cond.threshold):
                diagnostics.append(
                    _error(
                        f"rule {rule.name!r}: condition on {cond.feature.name!r} has a "
                        "non-finite threshold; A1 requires finite numeric values"
                    )
                )
            if cond.feature.name not in known or known[cond.feature.name] != cond.feature:
                diagnostics.append(
                    _error(f"rule {rule.name!r} references unknown feature {cond.feature.name!r}")
                )
            key = (cond.feature.name, cond.op, cond.threshold)
            if key in seen:
                diagnostics.append(_error(f"rule {rule.name!r} repeats condition '{cond}'"))
            seen.add(key)

    return diagnostics
