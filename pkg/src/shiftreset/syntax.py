"""Terms, contexts, binding and concrete syntax for the shift/reset calculus.

Terms use a locally nameless encoding: bound occurrences are de Bruijn
indices (`Bound`), free occurrences are names (`Var`).  Binders keep the
source name only as a printing hint, which does not take part in equality,
so ``==`` on terms is alpha-equivalence and every substitution is
capture-free by construction.

Contexts are frame sequences stored innermost first: the frame next to the
hole comes first, the outermost frame last.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

# Reduction of random terms builds deep trees; the default limit is too low.
if sys.getrecursionlimit() < 8000:
    sys.setrecursionlimit(8000)

KEYWORDS = frozenset({"S", "shift"})


class OpenTermError(ValueError):
    """Raised when an operation that needs a closed term receives an open one."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class of all term nodes."""

    def children(self) -> tuple[Term, ...]:
        return ()

    @cached_property
    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for c in self.children():
            out |= c.free_vars
        return out

    @cached_property
    def loose(self) -> int:
        """Number of enclosing binders this term needs (0 if locally closed)."""
        return max((c.loose for c in self.children()), default=0)

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children())

    @cached_property
    def has_hole(self) -> bool:
        return any(c.has_hole for c in self.children())

    @cached_property
    def has_control(self) -> bool:
        return any(c.has_control for c in self.children())

    @property
    def closed(self) -> bool:
        return not self.free_vars and self.loose == 0

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, eq=True)
class Var(Term):
    name: str

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return frozenset((self.name,))


@dataclass(frozen=True, eq=True)
class Bound(Term):
    index: int

    @cached_property
    def loose(self) -> int:
        return self.index + 1


@dataclass(frozen=True, eq=True)
class Lam(Term):
    hint: str = field(compare=False)
    body: Term

    def children(self) -> tuple[Term, ...]:
        return (self.body,)

    @cached_property
    def loose(self) -> int:
        return max(self.body.loose - 1, 0)


@dataclass(frozen=True, eq=True)
class App(Term):
    fun: Term
    arg: Term

    def children(self) -> tuple[Term, ...]:
        return (self.fun, self.arg)


@dataclass(frozen=True, eq=True)
class Shift(Term):
    hint: str = field(compare=False)
    body: Term

    def children(self) -> tuple[Term, ...]:
        return (self.body,)

    @cached_property
    def loose(self) -> int:
        return max(self.body.loose - 1, 0)

    @cached_property
    def has_control(self) -> bool:
        return True


@dataclass(frozen=True, eq=True)
class Reset(Term):
    body: Term

    def children(self) -> tuple[Term, ...]:
        return (self.body,)

    @cached_property
    def has_control(self) -> bool:
        return True


@dataclass(frozen=True, eq=True)
class Hole(Term):
    """The hole of a general context; never part of an ordinary term."""

    @cached_property
    def has_hole(self) -> bool:
        return True


Binder = Union[Lam, Shift]


def is_value(t: Term) -> bool:
    return isinstance(t, Lam)


def free_vars(t: Term) -> frozenset[str]:
    return t.free_vars


def alpha_eq(t0: Term, t1: Term) -> bool:
    return t0 == t1


def require_closed(*terms: Term) -> None:
    for t in terms:
        if not t.closed:
            names = ", ".join(sorted(t.free_vars)) or "<dangling index>"
            raise OpenTermError(f"term has free variables: {names}")


def rebuild(t: Term, children: Iterable[Term]) -> Term:
    """Return a node of the same kind as `t` with new children."""
    cs = tuple(children)
    match t:
        case Lam(hint=h):
            return Lam(h, cs[0])
        case Shift(hint=h):
            return Shift(h, cs[0])
        case App():
            return App(cs[0], cs[1])
        case Reset():
            return Reset(cs[0])
    return t


# ---------------------------------------------------------------------------
# Index manipulation


def shift_indices(t: Term, by: int, cutoff: int = 0) -> Term:
    """Add `by` to every index >= `cutoff` (indices below are bound inside)."""
    if by == 0 or t.loose <= cutoff:
        return t
    match t:
        case Bound(index=i):
            return Bound(i + by) if i >= cutoff else t
        case Lam(hint=h, body=b):
            return Lam(h, shift_indices(b, by, cutoff + 1))
        case Shift(hint=h, body=b):
            return Shift(h, shift_indices(b, by, cutoff + 1))
        case App(fun=f, arg=a):
            return App(shift_indices(f, by, cutoff), shift_indices(a, by, cutoff))
        case Reset(body=b):
            return Reset(shift_indices(b, by, cutoff))
    return t


def instantiate(body: Term, arg: Term) -> Term:
    """Substitute `arg` for index 0 of a binder body and drop that binder.

    Works whether or not `arg` is locally closed (de Bruijn beta).
    """
    cache: dict[int, Term] = {}

    def shifted(depth: int) -> Term:
        if depth not in cache:
            cache[depth] = shift_indices(arg, depth)
        return cache[depth]

    def go(t: Term, depth: int) -> Term:
        if t.loose <= depth:
            return t
        match t:
            case Bound(index=i):
                if i == depth:
                    return shifted(depth)
                return Bound(i - 1) if i > depth else t
            case Lam(hint=h, body=b):
                return Lam(h, go(b, depth + 1))
            case Shift(hint=h, body=b):
                return Shift(h, go(b, depth + 1))
            case App(fun=f, arg=a):
                return App(go(f, depth), go(a, depth))
            case Reset(body=b):
                return Reset(go(b, depth))
        return t

    return go(body, 0)


def abstract(t: Term, name: str) -> Term:
    """Turn free occurrences of `name` into index 0 of a new binder body."""
    if name not in t.free_vars and t.loose == 0:
        return t

    def go(u: Term, depth: int) -> Term:
        if name not in u.free_vars and u.loose <= depth:
            return u
        match u:
            case Var(name=n):
                return Bound(depth) if n == name else u
            case Bound(index=i):
                return Bound(i + 1) if i >= depth else u
            case Lam(hint=h, body=b):
                return Lam(h, go(b, depth + 1))
            case Shift(hint=h, body=b):
                return Shift(h, go(b, depth + 1))
            case App(fun=f, arg=a):
                return App(go(f, depth), go(a, depth))
            case Reset(body=b):
                return Reset(go(b, depth))
        return u

    return go(t, 0)


def lam(name: str, body: Term) -> Lam:
    """Build ``\\name.body`` binding the free occurrences of `name` in `body`."""
    return Lam(name, abstract(body, name))


def shift(name: str, body: Term) -> Shift:
    return Shift(name, abstract(body, name))


def apps(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def substitute(t: Term, x: str, s: Term) -> Term:
    """Capture-avoiding ``t[x := s]`` for a free name `x`."""
    if x not in t.free_vars:
        return t

    def go(u: Term, depth: int) -> Term:
        if x not in u.free_vars:
            return u
        match u:
            case Var(name=n) if n == x:
                return shift_indices(s, depth)
            case Lam(hint=h, body=b):
                return Lam(h, go(b, depth + 1))
            case Shift(hint=h, body=b):
                return Shift(h, go(b, depth + 1))
            case App(fun=f, arg=a):
                return App(go(f, depth), go(a, depth))
            case Reset(body=b):
                return Reset(go(b, depth))
        return u

    return go(t, 0)


def substitute_all(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Simultaneous substitution of free names."""
    live = {x: s for x, s in sigma.items() if x in t.free_vars}
    if not live:
        return t
    names = set(live)

    def go(u: Term, depth: int) -> Term:
        if not (names & u.free_vars):
            return u
        match u:
            case Var(name=n):
                return shift_indices(live[n], depth)
            case Lam(hint=h, body=b):
                return Lam(h, go(b, depth + 1))
            case Shift(hint=h, body=b):
                return Shift(h, go(b, depth + 1))
            case App(fun=f, arg=a):
                return App(go(f, depth), go(a, depth))
            case Reset(body=b):
                return Reset(go(b, depth))
        return u

    return go(t, 0)


class FreshNames:
    """Deterministic supply of names avoiding a given set."""

    def __init__(self, avoid: Iterable[str] = (), style: str = "number"):
        self.used = set(avoid) | KEYWORDS
        self.style = style

    def __call__(self, base: str) -> str:
        name = base
        n = 0
        while name in self.used:
            n += 1
            name = base + ("'" * n if self.style == "prime" else str(n))
        self.used.add(name)
        return name


def open_binder(b: Binder, avoid: Iterable[str] = ()) -> tuple[str, Term]:
    """Open a binder body with a fresh free name; returns (name, body)."""
    name = FreshNames(set(avoid) | b.body.free_vars)(b.hint)
    return name, instantiate(b.body, Var(name))


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class AppliedValue:
    """The frame ``v []``: the hole is the argument of the value `value`."""

    value: Term

    def __post_init__(self):
        if not _frame_value(self.value):
            raise ValueError(f"AppliedValue needs a value, got {pretty(self.value)}")


@dataclass(frozen=True)
class PendingArg:
    """The frame ``[] arg``: the hole is applied to `arg`."""

    arg: Term


@dataclass(frozen=True)
class ResetFrame:
    """The frame ``<[]>``."""


Frame = Union[AppliedValue, PendingArg]
EvalFrame = Union[AppliedValue, PendingArg, ResetFrame]


def _frame_value(t: Term) -> bool:
    # Variables (free or bound) count as values where open contexts are allowed.
    return isinstance(t, (Lam, Var, Bound))


def _fill(frame: EvalFrame, t: Term) -> Term:
    if isinstance(frame, AppliedValue):
        return App(frame.value, t)
    if isinstance(frame, PendingArg):
        return App(t, frame.arg)
    return Reset(t)


def _frame_terms(frames: Iterable[EvalFrame]) -> Iterator[Term]:
    for f in frames:
        if isinstance(f, AppliedValue):
            yield f.value
        elif isinstance(f, PendingArg):
            yield f.arg


@dataclass(frozen=True)
class PureContext:
    """A pure evaluation context; `frames[0]` is adjacent to the hole."""

    frames: tuple[Frame, ...] = ()

    def __post_init__(self):
        for f in self.frames:
            if not isinstance(f, (AppliedValue, PendingArg)):
                raise ValueError(f"not a pure frame: {f!r}")

    def __add__(self, outer: PureContext) -> PureContext:
        """``inner + outer`` is the context ``outer[inner[]]``."""
        return PureContext(self.frames + outer.frames)

    def __len__(self) -> int:
        return len(self.frames)

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return frozenset().union(*(t.free_vars for t in _frame_terms(self.frames)))

    @property
    def closed(self) -> bool:
        return all(t.closed for t in _frame_terms(self.frames))

    def __str__(self) -> str:
        return pretty(plug(self, Hole()))


EMPTY = PureContext()


@dataclass(frozen=True)
class EvalContext:
    """An evaluation context: pure frames interleaved with resets."""

    frames: tuple[EvalFrame, ...] = ()

    def __add__(self, outer: EvalContext) -> EvalContext:
        return EvalContext(self.frames + outer.frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __str__(self) -> str:
        return pretty(plug(self, Hole()))


@dataclass(frozen=True)
class GeneralContext:
    """A term with exactly one `Hole`, possibly under binders."""

    term: Term

    def __post_init__(self):
        if _count_holes(self.term) != 1:
            raise ValueError("a context needs exactly one hole")

    def __str__(self) -> str:
        return pretty(self.term)


def _count_holes(t: Term) -> int:
    if isinstance(t, Hole):
        return 1
    return sum(_count_holes(c) for c in t.children())


def plug(c: PureContext | EvalContext | GeneralContext, t: Term) -> Term:
    """Fill the hole of `c` with `t`.

    Filling a general context may capture free names of `t` under the
    context's binders; the other kinds never capture.
    """
    if isinstance(c, GeneralContext):
        return _plug_general(c.term, t)
    for f in c.frames:
        t = _fill(f, t)
    return t


def _plug_general(c: Term, t: Term) -> Term:
    binders: list[str] = []  # outermost first

    def go(u: Term, depth: int) -> Term:
        if not u.has_hole:
            return u
        match u:
            case Hole():
                return _capture_names(t, binders)
            case Lam(hint=h, body=b):
                binders.append(h)
                r = Lam(h, go(b, depth + 1))
                binders.pop()
                return r
            case Shift(hint=h, body=b):
                binders.append(h)
                r = Shift(h, go(b, depth + 1))
                binders.pop()
                return r
            case _:
                return rebuild(u, [go(ch, depth) for ch in u.children()])

    return go(c, 0)


def _capture_names(t: Term, binders: list[str]) -> Term:
    # Free names of `t` that match an enclosing binder hint become bound to
    # the innermost such binder.
    for depth_from_inner, name in enumerate(reversed(binders)):
        if name in t.free_vars:
            t = _bind_at(t, name, depth_from_inner)
    return t


def _bind_at(t: Term, name: str, index: int) -> Term:
    def go(u: Term, depth: int) -> Term:
        if name not in u.free_vars:
            return u
        match u:
            case Var(name=n) if n == name:
                return Bound(index + depth)
            case Lam(hint=h, body=b):
                return Lam(h, go(b, depth + 1))
            case Shift(hint=h, body=b):
                return Shift(h, go(b, depth + 1))
            case _:
                return rebuild(u, [go(c, depth) for c in u.children()])

    return go(t, 0)


def to_pure_context(c: GeneralContext) -> PureContext:
    """Read a hole-term as a pure evaluation context, if it is one."""
    path: list[Frame] = []  # outermost first
    t = c.term
    while not isinstance(t, Hole):
        if isinstance(t, App) and t.fun.has_hole:
            path.append(PendingArg(t.arg))
            t = t.fun
        elif isinstance(t, App) and _frame_value(t.fun):
            path.append(AppliedValue(t.fun))
            t = t.arg
        else:
            raise ValueError(f"not a pure evaluation context: {c}")
    return PureContext(tuple(reversed(path)))


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>--[^\n]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>[\\λ.()<>⟨⟩@])"
)

_SYMBOLS = {"λ": "\\", "⟨": "<", "⟩": ">"}


@dataclass
class _Tok:
    kind: str  # "name", "kw", "sym", "eof"
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        text = m.group()
        col = pos - line_start + 1
        if m.lastgroup == "name":
            toks.append(_Tok("kw" if text in KEYWORDS else "name", text, line, col))
        elif m.lastgroup == "sym":
            toks.append(_Tok("sym", _SYMBOLS.get(text, text), line, col))
        for i, ch in enumerate(text):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, src: str, allow_hole: bool):
        self.toks = _tokenize(src)
        self.i = 0
        self.scope: list[str] = []  # innermost last
        self.allow_hole = allow_hole

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, what: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{what}, found {found}", t.line, t.col)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            raise self.error(f"expected {text or kind}")
        self.i += 1
        return t

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind == "name" or (t.kind == "sym" and t.text in ("(", "<", "@"))

    def starts_binder(self) -> bool:
        t = self.tok
        return t.kind == "kw" or (t.kind == "sym" and t.text == "\\")

    def term(self) -> Term:
        if self.starts_binder():
            is_shift = self.tok.kind == "kw"
            self.i += 1
            name = self.expect("name").text
            self.expect("sym", ".")
            self.scope.append(name)
            body = self.term()
            self.scope.pop()
            return Shift(name, body) if is_shift else Lam(name, body)
        return self.app()

    def app(self) -> Term:
        if not self.starts_atom():
            raise self.error("expected a term")
        t = self.atom()
        while True:
            if self.starts_atom():
                t = App(t, self.atom())
            elif self.starts_binder():
                # A trailing binder extends as far right as possible.
                return App(t, self.term())
            else:
                return t

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "name":
            self.i += 1
            for depth, name in enumerate(reversed(self.scope)):
                if name == t.text:
                    return Bound(depth)
            return Var(t.text)
        self.i += 1
        if t.text == "(":
            inner = self.term()
            self.expect("sym", ")")
            return inner
        if t.text == "<":
            inner = self.term()
            self.expect("sym", ">")
            return Reset(inner)
        if t.text == "@" and self.allow_hole:
            return Hole()
        self.i -= 1
        raise self.error("expected a term")


def _parse(src: str, allow_hole: bool) -> Term:
    p = _Parser(src, allow_hole)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    return t


def parse(src: str, defs: Mapping[str, Term] | None = None) -> Term:
    """Parse a term; free names listed in `defs` are replaced by their terms."""
    t = _parse(src, allow_hole=False)
    return substitute_all(t, defs) if defs else t


def parse_context(src: str, defs: Mapping[str, Term] | None = None) -> GeneralContext:
    """Parse a context written with ``@`` for the hole, e.g. ``i @``."""
    t = _parse(src, allow_hole=True)
    if defs:
        t = substitute_all(t, defs)
    return GeneralContext(t)


def parse_pure_context(src: str, defs: Mapping[str, Term] | None = None) -> PureContext:
    return to_pure_context(parse_context(src, defs))


def pretty(t: Term) -> str:
    """Concrete syntax with minimal parentheses; bound names are kept
    distinct from each other and from free names by priming."""
    free = t.free_vars
    out: list[str] = []

    def name_for(b: Binder, scope: list[str]) -> str:
        avoid = set(scope) | free
        return FreshNames(avoid, style="prime")(b.hint)

    def go(u: Term, scope: list[str], prec: int) -> None:
        # prec 0: anywhere, 1: function position, 2: argument position
        match u:
            case Var(name=n):
                out.append(n)
            case Bound(index=i):
                out.append(scope[-1 - i] if i < len(scope) else f"#{i}")
            case Hole():
                out.append("@")
            case Reset(body=b):
                out.append("<")
                go(b, scope, 0)
                out.append(">")
            case App(fun=f, arg=a):
                if prec == 2:
                    out.append("(")
                go(f, scope, 1)
                out.append(" ")
                go(a, scope, 2)
                if prec == 2:
                    out.append(")")
            case Lam() | Shift():
                if prec:
                    out.append("(")
                name = name_for(u, scope)
                out.append(f"\\{name}." if isinstance(u, Lam) else f"S {name}.")
                go(u.body, scope + [name], 0)
                if prec:
                    out.append(")")

    go(t, [], 0)
    return "".join(out)


# Abbreviations available to every parser entry point.
I = lam("x", Var("x"))
W = lam("x", App(Var("x"), Var("x")))
OMEGA = App(W, W)

PRELUDE: dict[str, Term] = {"i": I, "w": W, "omega": OMEGA}


def term(src: str) -> Term:
    """Parse with the `i`, `w`, `omega` abbreviations available."""
    return parse(src, PRELUDE)


def pure_context(src: str) -> PureContext:
    return parse_pure_context(src, PRELUDE)


def context(src: str) -> GeneralContext:
    return parse_context(src, PRELUDE)
