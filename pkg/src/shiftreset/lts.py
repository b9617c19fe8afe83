"""The labelled transition system for shift and reset.

Three kinds of transitions: internal steps (`Tau`), application to a
value supplied by the environment (`ValueProbe`), and capture of a pure
context supplied by the environment under an implicit reset
(`ContextProbe`).

`tau_step`, `probe_value` and `probe_context` are the transition
functions used by the rest of the package.  `derive` builds the full
inference tree rule by rule and serves as an independent check on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from . import reduction
from .reduction import Observable, Timeout
from .syntax import (
    EMPTY,
    App,
    AppliedValue,
    Lam,
    PendingArg,
    PureContext,
    Reset,
    Shift,
    Term,
    instantiate,
    is_value,
    pretty,
    require_closed,
)

RULES = (
    "LTSbeta",
    "LTSreset",
    "LTScompl",
    "LTScompr",
    "LTScompreset",
    "LTScaptreset",
    "LTSval",
    "LTSshift",
    "LTScaptl",
    "LTScaptr",
)


@dataclass(frozen=True)
class Tau:
    def __str__(self) -> str:
        return "tau"


@dataclass(frozen=True)
class ValueProbe:
    v: Term

    def __post_init__(self):
        if not (is_value(self.v) and self.v.closed):
            raise ValueError("a value label must be a closed value")

    def __str__(self) -> str:
        return f"value {pretty(self.v)}"


@dataclass(frozen=True)
class ContextProbe:
    e: PureContext

    def __post_init__(self):
        if not self.e.closed:
            raise ValueError("a context label must be closed")

    def __str__(self) -> str:
        return f"context {self.e}"


Label = Union[Tau, ValueProbe, ContextProbe]
TAU = Tau()


@dataclass(frozen=True)
class Transition:
    source: Term
    label: Label
    target: Term


# Transition functions -----------------------------------------------------


def tau_step(t: Term) -> Term | None:
    """The internal transition of a closed term, if any."""
    require_closed(t)
    return _tau(t)


def _tau(t: Term) -> Term | None:
    if isinstance(t, App):
        f, a = t.fun, t.arg
        if isinstance(f, Lam):
            if isinstance(a, Lam):
                return instantiate(f.body, a)
            a2 = _tau(a)
            return None if a2 is None else App(f, a2)
        f2 = _tau(f)
        return None if f2 is None else App(f2, a)
    if isinstance(t, Reset):
        b = t.body
        if isinstance(b, Lam):
            return b
        b2 = _tau(b)
        if b2 is not None:
            return Reset(b2)
        return _capture(b, ())
    return None


def _capture(t: Term, frames: tuple) -> Term | None:
    # t --E--> t' where E = frames (innermost first); rules shift/captl/captr.
    while True:
        if isinstance(t, Shift):
            return _shift_result(t, PureContext(frames))
        if not isinstance(t, App):
            return None
        if isinstance(t.fun, Lam):
            frames = (AppliedValue(t.fun),) + frames
            t = t.arg
        else:
            frames = (PendingArg(t.arg),) + frames
            t = t.fun


def _shift_result(s: Shift, e: PureContext) -> Term:
    return Reset(instantiate(s.body, reduction.continuation(e)))


def probe_value(t: Term, v: Term) -> Term | None:
    """``t --v--> t'``: defined only when `t` is an abstraction."""
    require_closed(t, v)
    if not is_value(v):
        raise ValueError("probe_value needs a value")
    if not isinstance(t, Lam):
        return None
    return instantiate(t.body, v)


def probe_context(t: Term, e: PureContext) -> Term | None:
    """``t --E--> t'``: defined only when `t` is stuck.

    For ``t = E'[S k.s]`` the result is ``<s[k := \\x.<E[E'[x]]>]>``.
    """
    require_closed(t)
    if not e.closed:
        raise ValueError("probe_context needs a closed context")
    d = reduction.decompose(t)
    if not isinstance(d, reduction.IsStuck):
        return None
    return _shift_result(d.shift, d.context + e)


def transition(t: Term, label: Label) -> Term | None:
    if isinstance(label, Tau):
        return tau_step(t)
    if isinstance(label, ValueProbe):
        return probe_value(t, label.v)
    return probe_context(t, label.e)


def observables(t: Term, fuel: int) -> Observable:
    """Run internal steps to quiescence and classify the result."""
    require_closed(t)
    n = 0
    while True:
        u = _tau(t)
        if u is None:
            return reduction.classify(t, n)
        if n == fuel:
            return Timeout(t, n)
        t = u
        n += 1


def available(t: Term) -> dict:
    """What a closed term can do: its tau successor and accepted probes."""
    require_closed(t)
    succ = _tau(t)
    if succ is not None:
        probes = "none"
    elif is_value(t):
        probes = "value"
    else:
        probes = "context"
    return {"tau": succ, "accepts": probes}


# Inference trees ----------------------------------------------------------


@dataclass(frozen=True)
class Derivation:
    rule: str
    source: Term
    label: Label
    target: Term
    premises: tuple[Derivation, ...] = ()

    def rules(self) -> list[str]:
        """Rule names from the conclusion upwards."""
        out = [self.rule]
        for p in self.premises:
            out.extend(p.rules())
        return out

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        line = f"{pad}{pretty(self.source)} --{self.label}--> {pretty(self.target)}   [{self.rule}]"
        return "\n".join([line] + [p.render(indent + 1) for p in self.premises])


def derive(t: Term, label: Label = TAU) -> Derivation | None:
    """Search the rules for a derivation of ``t --label--> _``.

    The rules are syntax-directed, so at most one derivation exists.
    """
    require_closed(t)
    if isinstance(label, Tau):
        return _derive_tau(t)
    if isinstance(label, ValueProbe):
        if isinstance(t, Lam):
            return Derivation("LTSval", t, label, instantiate(t.body, label.v))
        return None
    return _derive_ctx(t, label.e)


def _derive_tau(t: Term) -> Derivation | None:
    match t:
        case App(fun=Lam() as f, arg=Lam() as v):
            return Derivation("LTSbeta", t, TAU, instantiate(f.body, v))
        case App(fun=Lam() as f, arg=a):
            p = _derive_tau(a)
            if p is not None:
                return Derivation("LTScompr", t, TAU, App(f, p.target), (p,))
            return None
        case App(fun=f, arg=a):
            p = _derive_tau(f)
            if p is not None:
                return Derivation("LTScompl", t, TAU, App(p.target, a), (p,))
            return None
        case Reset(body=Lam() as v):
            return Derivation("LTSreset", t, TAU, v)
        case Reset(body=b):
            p = _derive_tau(b)
            if p is not None:
                return Derivation("LTScompreset", t, TAU, Reset(p.target), (p,))
            p = _derive_ctx(b, EMPTY)
            if p is not None:
                return Derivation("LTScaptreset", t, TAU, p.target, (p,))
            return None
    return None


def _derive_ctx(t: Term, e: PureContext) -> Derivation | None:
    label = ContextProbe(e)
    match t:
        case Shift():
            return Derivation("LTSshift", t, label, _shift_result(t, e))
        case App(fun=Lam() as v, arg=a):
            p = _derive_ctx(a, PureContext((AppliedValue(v),)) + e)
            if p is not None:
                return Derivation("LTScaptr", t, label, p.target, (p,))
            return None
        case App(fun=f, arg=a):
            p = _derive_ctx(f, PureContext((PendingArg(a),)) + e)
            if p is not None:
                return Derivation("LTScaptl", t, label, p.target, (p,))
            return None
    return None

