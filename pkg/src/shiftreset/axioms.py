"""The equational theory of shift and reset as a rewrite system, with a
bounded bidirectional proof search.

Rewriting works on subterms in place, including under binders: subterms
there may contain dangling de Bruijn indices, and the rewrites are written
so that they stay correct at any binder depth.  Variables, free or bound,
count as values when matching value metavariables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from .syntax import (
    App,
    AppliedValue,
    Bound,
    FreshNames,
    Lam,
    PendingArg,
    PureContext,
    Reset,
    Shift,
    Term,
    Var,
    instantiate,
    lam,
    parse,
    parse_pure_context,
    plug,
    pretty,
    rebuild,
    shift,
    shift_indices,
    substitute,
    PRELUDE,
)


class AxiomTag(str, Enum):
    BETA_V = "beta-v"
    ETA_V = "eta-v"
    BETA_OMEGA = "beta-omega"
    RESET_VALUE = "reset-value"
    RESET_SHIFT = "reset-shift"
    RESET_LIFT = "reset-lift"
    S_RESET = "S-reset"
    S_ELIM = "S-elim"

    def __str__(self) -> str:
        return self.value


class Direction(str, Enum):
    LTR = "L->R"
    RTL = "R->L"

    def flip(self) -> Direction:
        return Direction.RTL if self is Direction.LTR else Direction.LTR

    def __str__(self) -> str:
        return self.value


LTR, RTL = Direction.LTR, Direction.RTL

Path = tuple[int, ...]


class SideConditionError(ValueError):
    """An axiom instance violates a side condition of its schema."""


@dataclass(frozen=True)
class Match:
    path: Path
    axiom: AxiomTag
    direction: Direction
    result: Term
    bindings: tuple[tuple[str, str], ...] = ()


# Helpers on possibly-open subterms ------------------------------------------


def _is_val(t: Term) -> bool:
    return isinstance(t, (Lam, Var, Bound))


def _mentions(t: Term, index: int) -> bool:
    """Does `t` refer to the binder `index` levels out (at t's own level)?"""
    if t.loose <= index:
        return False
    match t:
        case Bound(index=i):
            return i == index
        case Lam(body=b) | Shift(body=b):
            return _mentions(b, index + 1)
        case _:
            return any(_mentions(c, index) for c in t.children())


def _shift_ctx(e: PureContext, by: int) -> PureContext:
    frames = []
    for f in e.frames:
        if isinstance(f, AppliedValue):
            frames.append(AppliedValue(shift_indices(f.value, by)))
        else:
            frames.append(PendingArg(shift_indices(f.arg, by)))
    return PureContext(tuple(frames))


def _ctx_mentions(e: PureContext, index: int) -> bool:
    for f in e.frames:
        if _mentions(f.value if isinstance(f, AppliedValue) else f.arg, index):
            return True
    return False


def pure_splits(t: Term, bound: int | None = None) -> Iterator[tuple[PureContext, Term]]:
    """All ways to write `t` as ``E[u]`` with E pure (variables as values)."""

    def go(u: Term, outer: tuple) -> Iterator[tuple[PureContext, Term]]:
        # outer: frames found so far, outermost first
        yield PureContext(tuple(reversed(outer))), u
        if bound is not None and len(outer) >= bound:
            return
        if isinstance(u, App):
            yield from go(u.fun, outer + (PendingArg(u.arg),))
            if _is_val(u.fun):
                yield from go(u.arg, outer + (AppliedValue(u.fun),))

    return go(t, ())


def _cont(e: PureContext) -> Lam:
    # \x.<E[x]> built one binder deeper than E lives.
    return Lam("x", Reset(plug(_shift_ctx(e, 1), Bound(0))))


def _show(t: Term | PureContext) -> str:
    return str(t) if isinstance(t, PureContext) else pretty(t)


# Root-level rewrites -------------------------------------------------------


def _root_rewrites(u: Term, frame_bound: int) -> Iterator[tuple[AxiomTag, Direction, Term, dict]]:
    # Left to right.
    if isinstance(u, App) and isinstance(u.fun, Lam):
        body, a = u.fun.body, u.arg
        if _is_val(a):
            yield AxiomTag.BETA_V, LTR, instantiate(body, a), {"v": a}
        for e, hole in pure_splits(body, frame_bound):
            if hole == Bound(0) and not _ctx_mentions(e, 0):
                yield AxiomTag.BETA_OMEGA, LTR, plug(_shift_ctx(e, -1), a), {"E": e, "t": a}
    if isinstance(u, Lam) and isinstance(u.body, App) and u.body.arg == Bound(0):
        v = u.body.fun
        if _is_val(v) and not _mentions(v, 0):
            yield AxiomTag.ETA_V, LTR, shift_indices(v, -1), {"v": v}
    if isinstance(u, Reset):
        b = u.body
        if _is_val(b):
            yield AxiomTag.RESET_VALUE, LTR, b, {"v": b}
        for e, hole in pure_splits(b):
            if isinstance(hole, Shift):
                yield AxiomTag.RESET_SHIFT, LTR, Reset(instantiate(hole.body, _cont(e))), {"E": e, "t": hole}
        if isinstance(b, App) and isinstance(b.fun, Lam) and isinstance(b.arg, Reset):
            yield (
                AxiomTag.RESET_LIFT,
                LTR,
                App(Lam(b.fun.hint, Reset(b.fun.body)), b.arg),
                {"t0": b.fun.body, "t1": b.arg.body},
            )
    if isinstance(u, Shift):
        b = u.body
        if isinstance(b, Reset):
            yield AxiomTag.S_RESET, LTR, Shift(u.hint, b.body), {"t": b.body}
        if isinstance(b, App) and b.fun == Bound(0) and not _mentions(b.arg, 0):
            yield AxiomTag.S_ELIM, LTR, shift_indices(b.arg, -1), {"t": b.arg}

    # Right to left.  The inverses of beta-v and reset-shift need
    # anti-substitution and have infinitely many solutions; they are not
    # generated here (replay still accepts them, see `step_valid`).
    if _is_val(u):
        yield AxiomTag.ETA_V, RTL, Lam("x", App(shift_indices(u, 1), Bound(0))), {"v": u}
        yield AxiomTag.RESET_VALUE, RTL, Reset(u), {"v": u}
    for e, hole in pure_splits(u, frame_bound):
        if len(e) == 0:
            continue
        redex = App(Lam("x", plug(_shift_ctx(e, 1), Bound(0))), hole)
        yield AxiomTag.BETA_OMEGA, RTL, redex, {"E": e, "t": hole}
    if (
        isinstance(u, App)
        and isinstance(u.fun, Lam)
        and isinstance(u.fun.body, Reset)
        and isinstance(u.arg, Reset)
    ):
        lifted = Reset(App(Lam(u.fun.hint, u.fun.body.body), u.arg))
        yield AxiomTag.RESET_LIFT, RTL, lifted, {"t0": u.fun.body.body, "t1": u.arg.body}
    if isinstance(u, Shift):
        yield AxiomTag.S_RESET, RTL, Shift(u.hint, Reset(u.body)), {"t": u.body}
    yield AxiomTag.S_ELIM, RTL, Shift("k", App(Bound(0), shift_indices(u, 1))), {"t": u}


def _subterms(t: Term, path: Path = ()) -> Iterator[tuple[Path, Term]]:
    yield path, t
    for i, c in enumerate(t.children()):
        yield from _subterms(c, path + (i,))


def subterm_at(t: Term, path: Path) -> Term:
    for i in path:
        t = t.children()[i]
    return t


def replace_at(t: Term, path: Path, new: Term) -> Term:
    if not path:
        return new
    cs = list(t.children())
    cs[path[0]] = replace_at(cs[path[0]], path[1:], new)
    return rebuild(t, cs)


def axiom_matches(t: Term, frame_bound: int = 4) -> list[Match]:
    """Every single-step rewrite of `t`, at every position, both directions."""
    out = []
    for path, u in _subterms(t):
        for tag, direction, r, binds in _root_rewrites(u, frame_bound):
            out.append(
                Match(
                    path,
                    tag,
                    direction,
                    replace_at(t, path, r),
                    tuple((k, _show(v)) for k, v in binds.items()),
                )
            )
    return out


def step_valid(before: Term, m: Match, frame_bound: int = 8) -> bool:
    """Is `m.result` an instance of the stated equation applied to `before`?

    A right-to-left step is accepted when the left-to-right rewrite of the
    result gives back `before`, which also covers inverses that
    `axiom_matches` does not enumerate.
    """
    try:
        sub = subterm_at(before, m.path)
        new_sub = subterm_at(m.result, m.path)
    except IndexError:
        return False
    if replace_at(before, m.path, new_sub) != m.result:
        return False
    for tag, d, r, _ in _root_rewrites(sub, frame_bound):
        if tag is m.axiom and d is m.direction and r == new_sub:
            return True
    back = m.direction.flip()
    for tag, d, r, _ in _root_rewrites(new_sub, frame_bound):
        if tag is m.axiom and d is back and r == sub:
            return True
    return False


# Proofs --------------------------------------------------------------------


@dataclass(frozen=True)
class ProofTrace:
    start: Term
    end: Term
    steps: tuple[Match, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def replay(self) -> bool:
        t = self.start
        for m in self.steps:
            if not step_valid(t, m):
                return False
            t = m.result
        return t == self.end

    def lines(self) -> list[str]:
        return [
            f"{n}. ({'.'.join(map(str, m.path))}) {m.axiom} {m.direction}   {pretty(m.result)}"
            for n, m in enumerate(self.steps, 1)
        ]


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0


def prove_equal(
    t0: Term, t1: Term, budget: int = 10_000, frame_bound: int = 4, stats: SearchStats | None = None
) -> ProofTrace | None:
    """Breadth-first search from both ends, meeting in the middle.

    `budget` limits the number of expanded nodes; None means no derivation
    was found within it.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    stats = stats if stats is not None else SearchStats()
    if t0 == t1:
        return ProofTrace(t0, t1, ())
    parents: tuple[dict, dict] = ({t0: None}, {t1: None})
    frontiers = [[t0], [t1]]
    while frontiers[0] or frontiers[1]:
        side = 0 if frontiers[0] and (len(frontiers[0]) <= len(frontiers[1]) or not frontiers[1]) else 1
        nxt = []
        for u in frontiers[side]:
            if stats.expanded >= budget:
                return None
            stats.expanded += 1
            for m in axiom_matches(u, frame_bound):
                r = m.result
                if r in parents[side]:
                    continue
                stats.generated += 1
                parents[side][r] = (u, m)
                if r in parents[1 - side]:
                    proof = _join(t0, t1, r, parents)
                    if not proof.replay():
                        raise AssertionError("proof search produced a trace that does not replay")
                    return proof
                nxt.append(r)
        frontiers[side] = nxt
    return None


def _join(t0: Term, t1: Term, meet: Term, parents: tuple[dict, dict]) -> ProofTrace:
    forward = []
    u = meet
    while parents[0][u] is not None:
        prev, m = parents[0][u]
        forward.append(m)
        u = prev
    forward.reverse()
    backward = []
    u = meet
    while parents[1][u] is not None:
        prev, m = parents[1][u]
        backward.append(Match(m.path, m.axiom, m.direction.flip(), prev, m.bindings))
        u = prev
    return ProofTrace(t0, t1, tuple(forward + backward))


# Instances -----------------------------------------------------------------


def _term(x) -> Term:
    return parse(x, PRELUDE) if isinstance(x, str) else x


def _ctx(x) -> PureContext:
    return parse_pure_context(x, PRELUDE) if isinstance(x, str) else x


def instance(name: str | AxiomTag, inst: Mapping[str, object]) -> tuple[Term, Term]:
    """Both sides of an axiom schema under the given metavariable values.

    Names (`x`, `k`) are strings; `t`, `t0`, `t1`, `v` are terms or source
    text; `E` is a pure context or context text with ``@`` for the hole.
    """
    tag = AxiomTag(name)
    g = inst.get
    x, k = g("x", "x"), g("k", "k")
    if tag is AxiomTag.BETA_V:
        t, v = _term(g("t")), _term(g("v"))
        _need_value(v, tag)
        return App(lam(x, t), v), substitute(t, x, v)
    if tag is AxiomTag.ETA_V:
        v = _term(g("v"))
        _need_value(v, tag)
        if x in v.free_vars:
            raise SideConditionError(f"{tag}: {x} occurs free in {pretty(v)}")
        return lam(x, App(v, Var(x))), v
    if tag is AxiomTag.BETA_OMEGA:
        e, t = _ctx(g("E")), _term(g("t"))
        if x in e.free_vars:
            raise SideConditionError(f"{tag}: {x} occurs free in the context {e}")
        return App(lam(x, plug(e, Var(x))), t), plug(e, t)
    if tag is AxiomTag.RESET_VALUE:
        v = _term(g("v"))
        _need_value(v, tag)
        return Reset(v), v
    if tag is AxiomTag.RESET_SHIFT:
        e, t = _ctx(g("E")), _term(g("t"))
        y = FreshNames(e.free_vars | t.free_vars)(g("x", "x"))
        kont = lam(y, Reset(plug(e, Var(y))))
        return Reset(plug(e, shift(k, t))), Reset(substitute(t, k, kont))
    if tag is AxiomTag.RESET_LIFT:
        t0, t1 = _term(g("t0")), _term(g("t1"))
        return Reset(App(lam(x, t0), Reset(t1))), App(lam(x, Reset(t0)), Reset(t1))
    if tag is AxiomTag.S_RESET:
        t = _term(g("t"))
        return shift(k, Reset(t)), shift(k, t)
    t = _term(g("t"))
    if k in t.free_vars:
        raise SideConditionError(f"{tag}: {k} occurs free in {pretty(t)}")
    return shift(k, App(Var(k), t)), t


def _need_value(v: Term, tag: AxiomTag) -> None:
    if not _is_val(v):
        raise SideConditionError(f"{tag}: {pretty(v)} is not a value")


# Closed instances of every schema, used by the test suites and the CLI.
FIXTURES: dict[AxiomTag, list[dict]] = {
    AxiomTag.BETA_V: [
        {"x": "x", "t": "x x", "v": "i"},
        {"x": "x", "t": r"\y.x y", "v": "w"},
        {"x": "x", "t": "<x (S k. k x)>", "v": "i"},
        {"x": "x", "t": "S k. x", "v": "i"},
    ],
    AxiomTag.ETA_V: [
        {"x": "x", "v": "i"},
        {"x": "x", "v": "w"},
        {"x": "x", "v": r"\y.S k. k y"},
        {"x": "x", "v": r"\y.omega"},
    ],
    AxiomTag.BETA_OMEGA: [
        {"x": "x", "E": "@ i", "t": "i"},
        {"x": "x", "E": "w @", "t": "<i>"},
        {"x": "x", "E": "@ w", "t": "S k. k i"},
        {"x": "x", "E": "i (@ i)", "t": "omega"},
    ],
    AxiomTag.RESET_VALUE: [
        {"v": "i"},
        {"v": "w"},
        {"v": r"\x.S k. k x"},
    ],
    AxiomTag.RESET_SHIFT: [
        {"E": "@", "k": "k", "t": "k i"},
        {"E": "@ w", "k": "k", "t": "k (k i)"},
        {"E": "i @", "k": "k", "t": "w"},
        {"E": "@ (S j. j i)", "k": "k", "t": "k i"},
    ],
    AxiomTag.RESET_LIFT: [
        {"x": "x", "t0": "x", "t1": "i"},
        {"x": "x", "t0": "x x", "t1": "S k. k w"},
        {"x": "x", "t0": "S k. x", "t1": "i i"},
    ],
    AxiomTag.S_RESET: [
        {"k": "k", "t": "k i"},
        {"k": "k", "t": "i"},
        {"k": "k", "t": "k (S j. j i)"},
    ],
    AxiomTag.S_ELIM: [
        {"k": "k", "t": "i"},
        {"k": "k", "t": "w"},
        {"k": "k", "t": "i i"},
    ],
}


# Cross-checking against the CPS route ----------------------------------------


@dataclass
class CrossCheck:
    proof: ProofTrace | None
    cps: object
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def derived(self) -> bool:
        return self.proof is not None

    @property
    def contradiction(self) -> bool:
        from .cps import NotEquivalent

        return self.derived and isinstance(self.cps, NotEquivalent)


def cross_check(t0: Term, t1: Term, budget: int = 2_000, fuel: int = 5_000) -> CrossCheck:
    """Run the proof search and the CPS normalization on the same pair.

    A derivation together with distinct CPS normal forms would mean a bug:
    the equations are sound for the CPS translation.
    """
    from .cps import cps_equiv

    stats = SearchStats()
    proof = prove_equal(t0, t1, budget, stats=stats)
    return CrossCheck(proof, cps_equiv(t0, t1, fuel), stats)
