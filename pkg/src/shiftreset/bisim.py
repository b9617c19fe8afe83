"""Bounded big-step applicative bisimulation game.

Both terms are run to quiescence; their classes (value, stuck, diverging
within fuel) must agree.  Values are then probed with every value of the
pool, stuck terms with every context of the pool, and the game continues on
the results until the depth bound.  Diverging pairs match.

A `Distinguished` verdict carries a concrete experiment and is re-checked
against the reduction semantics before it is returned.  `BisimilarUpTo` is
only evidence: the pool and depth are finite.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from . import lts, reduction
from .lts import ContextProbe, Label, ValueProbe
from .axioms import instance
from .syntax import (
    EMPTY,
    PRELUDE,
    App,
    AppliedValue,
    GeneralContext,
    I,
    PendingArg,
    PureContext,
    Reset,
    Term,
    W,
    is_value,
    parse,
    parse_pure_context,
    plug,
    pretty,
    require_closed,
    term,
)


@dataclass(frozen=True)
class ProbePool:
    values: tuple[Term, ...]
    contexts: tuple[PureContext, ...]
    depth: int = 4
    fuel: int = 500

    def __post_init__(self):
        if self.depth < 0 or self.fuel < 1:
            raise ValueError("pool needs depth >= 0 and fuel >= 1")
        for v in self.values:
            if not (is_value(v) and v.closed):
                raise ValueError(f"pool value is not a closed value: {pretty(v)}")
        for e in self.contexts:
            if not e.closed:
                raise ValueError(f"pool context is not closed: {e}")

    def fingerprint(self) -> str:
        text = "\n".join(
            [pretty(v) for v in self.values]
            + ["--"]
            + [str(e) for e in self.contexts]
            + [f"{self.depth}/{self.fuel}"]
        )
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def with_bounds(self, depth: int | None = None, fuel: int | None = None) -> ProbePool:
        return ProbePool(
            self.values,
            self.contexts,
            self.depth if depth is None else depth,
            self.fuel if fuel is None else fuel,
        )


def default_pool() -> ProbePool:
    return ProbePool(
        values=(
            I,
            W,
            term(r"\x.omega"),
            term(r"\x.\y.x"),
            term(r"\x.S k. k x"),
        ),
        contexts=(
            EMPTY,
            PureContext((AppliedValue(I),)),
            PureContext((PendingArg(I),)),
            PureContext((AppliedValue(term(r"\x.omega")),)),
        ),
        depth=4,
        fuel=500,
    )


def load_pool(text: str, depth: int = 4, fuel: int = 500) -> ProbePool:
    """Read a pool from JSON ``{"values": [...], "contexts": [...]}``;
    contexts use ``@`` for the hole."""
    data = json.loads(text)
    return ProbePool(
        values=tuple(parse(s, PRELUDE) for s in data.get("values", [])),
        contexts=tuple(parse_pure_context(s, PRELUDE) for s in data.get("contexts", [])),
        depth=data.get("depth", depth),
        fuel=data.get("fuel", fuel),
    )


@dataclass(frozen=True)
class Distinguished:
    trace: tuple[Label, ...]
    reason: str

    kind = "distinguished"


@dataclass(frozen=True)
class BisimilarUpTo:
    depth: int
    pool: str

    kind = "bisimilar-up-to"


Verdict = Union[Distinguished, BisimilarUpTo]


class _Found(Exception):
    def __init__(self, trace: list[Label], reason: str):
        self.trace = trace
        self.reason = reason


@dataclass
class _Game:
    pool: ProbePool
    observed: dict = field(default_factory=dict)
    # pair -> largest remaining depth at which it was (or is being) explored
    visited: dict = field(default_factory=dict)

    def observe(self, t: Term) -> reduction.Observable:
        obs = self.observed.get(t)
        if obs is None:
            obs = lts.observables(t, self.pool.fuel)
            self.observed[t] = obs
        return obs

    def play(self, t0: Term, t1: Term, depth: int, path: list[Label]) -> None:
        if t0 == t1:
            return
        o0, o1 = self.observe(t0), self.observe(t1)
        if o0.kind != o1.kind:
            raise _Found(path + [self.witness(o0, o1)], f"{o0.kind} vs {o1.kind}")
        if depth == 0 or o0.kind == "timeout":
            return
        u0, u1 = o0.term, o1.term
        key = (u0, u1)
        if self.visited.get(key, -1) >= depth:
            return
        self.visited[key] = depth
        if o0.kind == "value":
            for v in self.pool.values:
                self.play(lts.probe_value(u0, v), lts.probe_value(u1, v), depth - 1, path + [ValueProbe(v)])
        else:
            for e in self.pool.contexts:
                self.play(
                    lts.probe_context(u0, e), lts.probe_context(u1, e), depth - 1, path + [ContextProbe(e)]
                )

    def witness(self, o0, o1) -> Label:
        # The label one side can perform after internal steps and the other cannot.
        if "stuck" in (o0.kind, o1.kind):
            return ContextProbe(EMPTY)
        return ValueProbe(self.pool.values[0] if self.pool.values else I)


def check(t0: Term, t1: Term, pool: ProbePool | None = None) -> Verdict:
    """Play the bounded game between two closed terms."""
    require_closed(t0, t1)
    pool = pool or default_pool()
    game = _Game(pool)
    try:
        game.play(t0, t1, pool.depth, [])
    except _Found as found:
        verdict = Distinguished(tuple(found.trace), found.reason)
        if not replay(t0, t1, verdict.trace, pool.fuel):
            raise AssertionError(f"distinguishing trace does not replay: {format_trace(verdict.trace)}")
        return verdict
    return BisimilarUpTo(pool.depth, pool.fingerprint())


def _apply(t: Term, label: Label, fuel: int) -> reduction.Observable:
    # Evaluate the experiment through the reduction semantics only:
    # a value probe is an application, a context probe a reset-enclosed plug.
    # The first step performs the probe itself, hence the extra unit of fuel.
    if isinstance(label, ValueProbe):
        return reduction.evaluate(App(t, label.v), fuel + 1)
    return reduction.evaluate(Reset(plug(label.e, t)), fuel + 1)


def replay(t0: Term, t1: Term, trace: Sequence[Label], fuel: int) -> bool:
    """Re-run a distinguishing experiment with the reduction semantics.

    Every label but the last must be performed by both terms; at the end
    the two results have different classes.
    """
    o0, o1 = reduction.evaluate(t0, fuel), reduction.evaluate(t1, fuel)
    for label in trace[:-1]:
        if o0.kind != o1.kind or o0.kind == "timeout":
            return False
        if isinstance(label, ValueProbe) != (o0.kind == "value"):
            return False
        o0, o1 = _apply(o0.term, label, fuel), _apply(o1.term, label, fuel)
    return o0.kind != o1.kind


def format_trace(trace: Sequence[Label]) -> str:
    return " ; ".join(str(l) for l in trace) or "(empty)"


def congruence_sample(
    t0: Term, t1: Term, contexts: Sequence[GeneralContext], pool: ProbePool | None = None
) -> list[tuple[GeneralContext, Verdict]]:
    """Check the pair under each context; closing contexts only."""
    out = []
    for c in contexts:
        p0, p1 = plug(c, t0), plug(c, t1)
        require_closed(p0, p1)
        out.append((c, check(p0, p1, pool)))
    return out


# Axiom instances -----------------------------------------------------------


def check_axiom_instance(name: str, instantiation: Mapping[str, object], pool: ProbePool | None = None) -> Verdict:
    """Build both sides of an axiom instance and play the game on them."""
    lhs, rhs = instance(name, instantiation)
    return check(lhs, rhs, pool)

