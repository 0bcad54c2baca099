"""Reader and writer for ``.cfr`` rule files.

One statement per line::

    # comment
    rule r1: IF alarm AND (radio OR tv) THEN earthquake CF 0.7
    evidence alarm = 1

Keywords are case-insensitive. AND binds tighter than OR.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .cf import CFRangeError, _check_cf
from .network import And, Expr, NetworkError, Or, Prop, Rule

__all__ = ["RulebaseDocument", "RulebaseSyntaxError", "parse_rulebase", "serialize_rulebase"]

KEYWORDS = {"rule", "if", "then", "cf", "and", "or", "evidence"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#.*)
  | (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.\-]*)
  | (?P<punct>[():=])
    """,
    re.VERBOSE,
)


class RulebaseSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class RulebaseDocument:
    rules: list[Rule] = field(default_factory=list)
    evidence: dict[str, float] = field(default_factory=dict)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m:
            raise RulebaseSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "ws":
            text = m.group()
            if kind == "ident" and text.lower() in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, text, pos + 1))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], lineno: int, line: str):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.end_col = len(line.rstrip()) + 1

    def error(self, msg: str):
        col = self.toks[self.i].col if self.i < len(self.toks) else self.end_col
        raise RulebaseSyntaxError(msg, self.lineno, col)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def keyword(self, word: str) -> bool:
        t = self.peek()
        if t and t.kind == "kw" and t.text.lower() == word:
            self.i += 1
            return True
        return False

    def expect_kw(self, word: str):
        if not self.keyword(word):
            self.error(f"expected {word.upper()}")

    def expect_punct(self, ch: str):
        t = self.peek()
        if not (t and t.kind == "punct" and t.text == ch):
            self.error(f"expected {ch!r}")
        self.i += 1

    def ident(self, what: str) -> str:
        t = self.peek()
        if not (t and t.kind == "ident"):
            self.error(f"expected {what}")
        self.i += 1
        return t.text

    def number(self, what: str) -> tuple[float, int]:
        t = self.peek()
        if not (t and t.kind == "number"):
            self.error(f"expected {what}")
        self.i += 1
        return float(t.text), t.col

    def done(self):
        if self.peek() is not None:
            self.error("unexpected trailing input")

    def expr(self) -> Expr:
        parts = [self.term()]
        while self.keyword("or"):
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def term(self) -> Expr:
        parts = [self.factor()]
        while self.keyword("and"):
            parts.append(self.factor())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def factor(self) -> Expr:
        t = self.peek()
        if t and t.kind == "punct" and t.text == "(":
            self.i += 1
            e = self.expr()
            self.expect_punct(")")
            return e
        return Prop(self.ident("proposition"))


def parse_rulebase(text: str) -> RulebaseDocument:
    """Parse rule-file text; raises :class:`RulebaseSyntaxError` on the first problem."""
    doc = RulebaseDocument()
    ids: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokenize(line, lineno)
        if not toks:
            continue
        p = _Parser(toks, lineno, line)
        if p.keyword("rule"):
            rid_col = p.peek().col if p.peek() else p.end_col
            rid = p.ident("rule id")
            if rid in ids:
                raise RulebaseSyntaxError(f"duplicate rule id {rid!r}", lineno, rid_col)
            p.expect_punct(":")
            p.expect_kw("if")
            antecedent = p.expr()
            p.expect_kw("then")
            cons_col = p.peek().col if p.peek() else p.end_col
            consequent = p.ident("consequent proposition")
            p.expect_kw("cf")
            cf, col = p.number("certainty factor")
            p.done()
            try:
                _check_cf(cf, "CF")
                rule = Rule(rid, antecedent, consequent, cf)
            except CFRangeError as exc:
                raise RulebaseSyntaxError(str(exc), lineno, col) from None
            except NetworkError as exc:
                raise RulebaseSyntaxError(str(exc), lineno, cons_col) from None
            ids.add(rid)
            doc.rules.append(rule)
        elif p.keyword("evidence"):
            name_col = p.peek().col if p.peek() else p.end_col
            name = p.ident("proposition")
            p.expect_punct("=")
            cf, col = p.number("certainty factor")
            p.done()
            try:
                _check_cf(cf, "evidence CF")
            except CFRangeError as exc:
                raise RulebaseSyntaxError(str(exc), lineno, col) from None
            if name in doc.evidence:
                raise RulebaseSyntaxError(f"evidence for {name!r} given twice", lineno, name_col)
            doc.evidence[name] = cf
        else:
            p.error("expected 'rule' or 'evidence'")
    return doc


def serialize_rulebase(doc: RulebaseDocument) -> str:
    lines = [f"rule {r.id}: IF {r.antecedent} THEN {r.consequent} CF {r.cf!r}" for r in doc.rules]
    lines += [f"evidence {k} = {v!r}" for k, v in doc.evidence.items()]
    return "\n".join(lines) + "\n"
