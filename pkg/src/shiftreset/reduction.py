"""Call-by-value reduction with shift and reset: decomposition, steps, evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .syntax import (
    App,
    AppliedValue,
    Bound,
    EvalContext,
    Lam,
    PendingArg,
    PureContext,
    Reset,
    ResetFrame,
    Shift,
    Term,
    instantiate,
    is_value,
    plug,
    pretty,
    require_closed,
)

RBETA = "Rbeta"
RSHIFT = "Rshift"
RRESET = "Rreset"


# Redexes ----------------------------------------------------------------


@dataclass(frozen=True)
class Beta:
    fun: Lam
    arg: Term

    def recompose(self) -> Term:
        return App(self.fun, self.arg)


@dataclass(frozen=True)
class Capture:
    """The redex ``<E[S k.t]>``; `shift` is the ``S k.t`` node."""

    context: PureContext
    shift: Shift

    @property
    def bound(self) -> str:
        return self.shift.hint

    @property
    def body(self) -> Term:
        return self.shift.body

    def recompose(self) -> Term:
        return Reset(plug(self.context, self.shift))


@dataclass(frozen=True)
class ResetValue:
    v: Term

    def recompose(self) -> Term:
        return Reset(self.v)


Redex = Union[Beta, Capture, ResetValue]


# Decompositions ---------------------------------------------------------


@dataclass(frozen=True)
class IsValue:
    v: Term


@dataclass(frozen=True)
class IsStuck:
    """A stuck term ``E[S k.t]``."""

    context: PureContext
    shift: Shift


@dataclass(frozen=True)
class Decomposed:
    context: EvalContext
    redex: Redex


Decomposition = Union[IsValue, IsStuck, Decomposed]


def recompose(d: Decomposition) -> Term:
    if isinstance(d, IsValue):
        return d.v
    if isinstance(d, IsStuck):
        return plug(d.context, d.shift)
    return plug(d.context, d.redex.recompose())


# Observables ------------------------------------------------------------


@dataclass(frozen=True)
class Value:
    term: Term
    steps: int = 0

    kind = "value"


@dataclass(frozen=True)
class Stuck:
    term: Term
    steps: int = 0

    kind = "stuck"


@dataclass(frozen=True)
class Timeout:
    remaining: Term
    steps_used: int

    kind = "timeout"

    @property
    def term(self) -> Term:
        return self.remaining

    @property
    def steps(self) -> int:
        return self.steps_used


Observable = Union[Value, Stuck, Timeout]


# -------------------------------------------------------------------------


def decompose(t: Term) -> Decomposition:
    """Split a closed term into value, stuck term, or context and redex.

    One left-to-right descent; `frames` holds the context found so far,
    outermost first.
    """
    require_closed(t)
    frames: list = []
    while True:
        if isinstance(t, App):
            frames.append(PendingArg(t.arg))
            t = t.fun
        elif isinstance(t, Reset):
            frames.append(ResetFrame())
            t = t.body
        elif isinstance(t, Lam):
            if not frames:
                return IsValue(t)
            top = frames.pop()
            if isinstance(top, PendingArg):
                frames.append(AppliedValue(t))
                t = top.arg
            elif isinstance(top, AppliedValue):
                return Decomposed(_eval_ctx(frames), Beta(top.value, t))
            else:
                return Decomposed(_eval_ctx(frames), ResetValue(t))
        elif isinstance(t, Shift):
            cut = _last_reset(frames)
            if cut is None:
                return IsStuck(PureContext(tuple(reversed(frames))), t)
            pure = PureContext(tuple(reversed(frames[cut + 1 :])))
            return Decomposed(_eval_ctx(frames[:cut]), Capture(pure, t))
        else:  # pragma: no cover - excluded by require_closed
            raise AssertionError(f"unexpected node {t!r}")


def _eval_ctx(frames_outer_first: list) -> EvalContext:
    return EvalContext(tuple(reversed(frames_outer_first)))


def _last_reset(frames: list) -> int | None:
    for i in range(len(frames) - 1, -1, -1):
        if isinstance(frames[i], ResetFrame):
            return i
    return None


def continuation(context: PureContext) -> Lam:
    """``\\x.<E[x]>`` for a closed pure context E."""
    # E is closed, so index 0 in the hole can only refer to the new binder.
    return Lam("x", Reset(plug(context, Bound(0))))


def contract(r: Redex) -> tuple[Term, str]:
    if isinstance(r, Beta):
        return instantiate(r.fun.body, r.arg), RBETA
    if isinstance(r, Capture):
        return Reset(instantiate(r.shift.body, continuation(r.context))), RSHIFT
    return r.v, RRESET


def step_rule(t: Term) -> tuple[Term, str] | None:
    """One reduction step and the name of the rule used, or None."""
    d = decompose(t)
    if not isinstance(d, Decomposed):
        return None
    contractum, rule = contract(d.redex)
    return plug(d.context, contractum), rule


def step(t: Term) -> Term | None:
    r = step_rule(t)
    return None if r is None else r[0]


def classify(t: Term, steps: int = 0) -> Value | Stuck:
    return Value(t, steps) if is_value(t) else Stuck(t, steps)


def evaluate(t: Term, fuel: int) -> Observable:
    """Reduce until a value or stuck term, or until `fuel` steps are spent."""
    require_closed(t)
    n = 0
    while True:
        r = step_rule(t)
        if r is None:
            return classify(t, n)
        if n == fuel:
            return Timeout(t, n)
        t = r[0]
        n += 1


def trace(t: Term, fuel: int) -> list[tuple[Term, str]]:
    """The successive reducts of `t`, each tagged with the rule that fired."""
    require_closed(t)
    out = []
    for _ in range(fuel):
        r = step_rule(t)
        if r is None:
            break
        out.append(r)
        t = r[0]
    return out


def final_observable(t: Term, steps: list[tuple[Term, str]]) -> Observable:
    """Classify the end of a trace produced by `trace`."""
    last = steps[-1][0] if steps else t
    if step(last) is None:
        return classify(last, len(steps))
    return Timeout(last, len(steps))


def trace_json(t: Term, fuel: int) -> list[dict]:
    steps = trace(t, fuel)
    obs = final_observable(t, steps)
    out: list[dict] = [{"term": pretty(u), "rule": rule} for u, rule in steps]
    out.append({"result": obs.kind, "term": pretty(obs.term), "steps": obs.steps})
    return out


def dumps_trace(t: Term, fuel: int) -> str:
    return json.dumps(trace_json(t, fuel), ensure_ascii=False)


def is_stuck_shape(t: Term) -> bool:
    """True iff `t` is ``E[S k.s]`` for a pure context E."""
    while isinstance(t, App):
        if isinstance(t.fun, Lam):
            t = t.arg
        else:
            t = t.fun
    return isinstance(t, Shift)

