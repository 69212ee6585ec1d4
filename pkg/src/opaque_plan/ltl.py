"""LTL formulas: AST, concrete syntax, negation normal form, lasso semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


TRUE = Top()
FALSE = Bottom()

_UNARY = (Not, Next, Eventually, Always)
_BINARY = (And, Or, Until, Release)


def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _UNARY):
        return (f.operand,)
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order walk; children are yielded before their parents."""
    seen: set[Formula] = set()
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        g, expanded = stack.pop()
        if expanded:
            if g not in seen:
                seen.add(g)
                yield g
            continue
        if g in seen:
            continue
        stack.append((g, True))
        for c in reversed(_children(g)):
            stack.append((c, False))


def props(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


# -- concrete syntax ---------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


_TOKEN = re.compile(r"\s*(?:(?P<op>&&|\|\||->|[!()])|(?P<word>[A-Za-z][A-Za-z0-9_]*))")
_UNARY_LETTERS = {"X": Next, "F": Eventually, "G": Always}
_ATOM_START = {"true", "false", "IDENT", "("}
_UNARY_START = {"!", "X", "F", "G"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Tokens as (kind, text, byte offset).

    A word made only of X/F/G letters is split into unary operators, so
    ``GF p`` lexes as ``G F p``.
    """
    out: list[tuple[str, str, int]] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        start = m.start("op") if m.group("op") else m.start("word")
        byte = len(text[:start].encode())
        if m.group("op"):
            out.append((m.group("op"), m.group("op"), byte))
        else:
            word = m.group("word")
            if word in ("true", "false", "U", "R"):
                out.append((word, word, byte))
            elif set(word) <= set(_UNARY_LETTERS):
                for k, ch in enumerate(word):
                    out.append((ch, ch, byte + k))
            else:
                out.append(("IDENT", word, byte))
        pos = m.end()
    out.append(("EOF", "", len(text.encode())))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.toks[self.i][0]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, expected: Iterable[str]) -> ParseError:
        kind, text, off = self.toks[self.i]
        what = "end of input" if kind == "EOF" else f"token {text!r}"
        return ParseError(f"unexpected {what}", off, expected)

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Or(Not(lhs), self.implication())
        return lhs

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "||":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.binary()
        while self.peek() == "&&":
            self.take()
            f = And(f, self.binary())
        return f

    def binary(self) -> Formula:
        f = self.unary()
        op = self.peek()
        if op in ("U", "R"):
            self.take()
            rhs = self.binary()
            return Until(f, rhs) if op == "U" else Release(f, rhs)
        return f

    def unary(self) -> Formula:
        kind = self.peek()
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind in _UNARY_LETTERS:
            self.take()
            return _UNARY_LETTERS[kind](self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, text, _ = self.toks[self.i]
        if kind == "true":
            self.take()
            return TRUE
        if kind == "false":
            self.take()
            return FALSE
        if kind == "IDENT":
            self.take()
            return Atom(text)
        if kind == "(":
            self.take()
            f = self.implication()
            if self.peek() != ")":
                raise self.fail({")", "&&", "||", "->", "U", "R"})
            self.take()
            return f
        raise self.fail(_ATOM_START | _UNARY_START)


def parse(text: str) -> Formula:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if not text.strip():
        raise ParseError("empty formula", 0, _ATOM_START | _UNARY_START)
    p = _Parser(text)
    f = p.implication()
    if p.peek() != "EOF":
        raise p.fail({"&&", "||", "->", "U", "R", "end of input"})
    return f


def to_string(f: Formula) -> str:
    """Render in the concrete syntax accepted by :func:`parse`.

    Binary operands are parenthesized whenever they are themselves binary,
    which keeps ``parse(to_string(f)) == f`` without a precedence table.
    """

    def wrap(g: Formula) -> str:
        s = to_string(g)
        return f"({s})" if isinstance(g, _BINARY) else s

    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + wrap(f.operand)
    if isinstance(f, Next):
        return "X " + wrap(f.operand)
    if isinstance(f, Eventually):
        return "F " + wrap(f.operand)
    if isinstance(f, Always):
        return "G " + wrap(f.operand)
    op = {And: "&&", Or: "||", Until: "U", Release: "R"}[type(f)]
    return f"{wrap(f.left)} {op} {wrap(f.right)}"


# -- normal form -------------------------------------------------------------


def to_nnf(f: Formula) -> Formula:
    """Push negations to atoms; F and G become U and R."""
    if isinstance(f, (Top, Bottom, Atom)):
        return f
    if isinstance(f, Not):
        return _negate(f.operand)
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Next):
        return Next(to_nnf(f.operand))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, to_nnf(f.operand))
    if isinstance(f, Always):
        return Release(FALSE, to_nnf(f.operand))
    raise TypeError(f"not a formula: {f!r}")


def _negate(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Atom):
        return Not(f)
    if isinstance(f, Not):
        return to_nnf(f.operand)
    if isinstance(f, And):
        return Or(_negate(f.left), _negate(f.right))
    if isinstance(f, Or):
        return And(_negate(f.left), _negate(f.right))
    if isinstance(f, Next):
        return Next(_negate(f.operand))
    if isinstance(f, Until):
        return Release(_negate(f.left), _negate(f.right))
    if isinstance(f, Release):
        return Until(_negate(f.left), _negate(f.right))
    if isinstance(f, Eventually):
        return Release(FALSE, _negate(f.operand))
    if isinstance(f, Always):
        return Until(TRUE, _negate(f.operand))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    return all(
        not isinstance(g, (Eventually, Always))
        and (not isinstance(g, Not) or isinstance(g.operand, Atom))
        for g in subformulas(f)
    )


# -- semantics on ultimately periodic words ----------------------------------


@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``prefix . loop^omega`` over proposition sets."""

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in self.prefix))
        object.__setattr__(self, "loop", tuple(frozenset(x) for x in self.loop))

    def __len__(self) -> int:
        return len(self.prefix) + len(self.loop)

    def letter(self, i: int) -> frozenset[str]:
        k = len(self.prefix)
        return self.prefix[i] if i < k else self.loop[(i - k) % len(self.loop)]

    def successor(self, i: int) -> int:
        """Position following ``i`` among the ``len(self)`` distinct suffixes."""
        return i + 1 if i + 1 < len(self) else len(self.prefix)

    def rotated(self) -> "LassoWord":
        return LassoWord(self.prefix + self.loop, self.loop)


def lasso(prefix: Iterable[Iterable[str]], loop: Iterable[Iterable[str]]) -> LassoWord:
    return LassoWord(tuple(frozenset(x) for x in prefix), tuple(frozenset(x) for x in loop))


def eval_lasso(f: Formula, w: LassoWord) -> bool:
    """Decide ``w |= f`` by computing each subformula's truth at every position.

    Until is the least and Release the greatest fixed point of its one-step
    unfolding, iterated over the finitely many suffix positions.
    """
    n = len(w)
    nxt = [w.successor(i) for i in range(n)]
    letters = [w.letter(i) for i in range(n)]
    val: dict[Formula, list[bool]] = {}
    for g in subformulas(f):
        if isinstance(g, Top):
            v = [True] * n
        elif isinstance(g, Bottom):
            v = [False] * n
        elif isinstance(g, Atom):
            v = [g.name in letters[i] for i in range(n)]
        elif isinstance(g, Not):
            v = [not b for b in val[g.operand]]
        elif isinstance(g, And):
            a, b = val[g.left], val[g.right]
            v = [a[i] and b[i] for i in range(n)]
        elif isinstance(g, Or):
            a, b = val[g.left], val[g.right]
            v = [a[i] or b[i] for i in range(n)]
        elif isinstance(g, Next):
            a = val[g.operand]
            v = [a[nxt[i]] for i in range(n)]
        elif isinstance(g, (Until, Eventually)):
            a = [True] * n if isinstance(g, Eventually) else val[g.left]
            b = val[g.operand] if isinstance(g, Eventually) else val[g.right]
            v = _fixpoint(a, b, nxt, least=True)
        elif isinstance(g, (Release, Always)):
            a = [False] * n if isinstance(g, Always) else val[g.left]
            b = val[g.operand] if isinstance(g, Always) else val[g.right]
            v = _fixpoint(a, b, nxt, least=False)
        else:
            raise TypeError(f"not a formula: {g!r}")
        val[g] = v
    return val[f][0]


def _fixpoint(a: list[bool], b: list[bool], nxt: list[int], least: bool) -> list[bool]:
    n = len(a)
    v = [not least] * n
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if least:
                new = b[i] or (a[i] and v[nxt[i]])
            else:
                new = b[i] and (a[i] or v[nxt[i]])
            if new != v[i]:
                v[i] = new
                changed = True
    return v
