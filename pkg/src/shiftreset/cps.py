"""CPS translation of shift/reset into the pure lambda calculus, and a
fuel-bounded beta-eta normalizer for deciding CPS equivalence."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .syntax import (
    App,
    Bound,
    FreshNames,
    Lam,
    Reset,
    Shift,
    Term,
    Var,
    apps,
    instantiate,
    lam,
    open_binder,
    shift_indices,
    substitute,
)


class NormalizationTimeout(Exception):
    """Raised when normalization runs out of fuel."""


def theta_init() -> Lam:
    """The initial delimited continuation ``\\x.\\k2.k2 x``."""
    return lam("x", lam("k2", App(Var("k2"), Var("x"))))


def cps_translate(t: Term) -> Term:
    """Translate a term into a control-free term expecting a continuation
    and a metacontinuation."""
    fresh = FreshNames(t.free_vars)
    out = _cps(t, fresh)
    if out.has_control:
        raise AssertionError("CPS output contains shift or reset")
    return out


def _cps(t: Term, fresh: FreshNames) -> Term:
    k1, k2 = fresh("k1"), fresh("k2")

    def wrap(body: Term) -> Term:
        return lam(k1, lam(k2, body))

    match t:
        case Var():
            return wrap(apps(Var(k1), t, Var(k2)))
        case Lam():
            x, body = open_binder(t, fresh.used)
            fresh.used.add(x)
            return wrap(apps(Var(k1), lam(x, _cps(body, fresh)), Var(k2)))
        case App(fun=f, arg=a):
            x0, x1 = fresh("x0"), fresh("x1")
            k2a, k2b = fresh("k2'"), fresh("k2''")
            inner = lam(x1, lam(k2b, apps(Var(x0), Var(x1), Var(k1), Var(k2b))))
            outer = lam(x0, lam(k2a, apps(_cps(a, fresh), inner, Var(k2a))))
            return wrap(apps(_cps(f, fresh), outer, Var(k2)))
        case Reset(body=b):
            x = fresh("x")
            meta = lam(x, apps(Var(k1), Var(x), Var(k2)))
            return wrap(apps(_cps(b, fresh), theta_init(), meta))
        case Shift():
            k, body = open_binder(t, fresh.used)
            fresh.used.add(k)
            x1, x2 = fresh("x1"), fresh("x2")
            k1a, k2a = fresh("k1'"), fresh("k2'")
            captured = lam(
                x1,
                lam(k1a, lam(k2a, apps(Var(k1), Var(x1), lam(x2, apps(Var(k1a), Var(x2), Var(k2a)))))),
            )
            return wrap(apps(substitute(_cps(body, fresh), k, captured), theta_init(), Var(k2)))
    raise ValueError(f"cannot translate {t!r}")


# Normalization ---------------------------------------------------------------


class _Fuel:
    def __init__(self, n: int):
        self.left = n

    def spend(self) -> None:
        if self.left <= 0:
            raise NormalizationTimeout
        self.left -= 1


def beta_normalize(t: Term, fuel: int) -> Term:
    """Normal-order (leftmost-outermost) beta normal form within `fuel` steps.

    Rebuilds the term on every step, so it is quadratic on growing terms.
    Kept as a reference for `nbe_normalize`.
    """
    return _nf(t, _Fuel(fuel))


def _nf(t: Term, fuel: _Fuel) -> Term:
    # Reduce the head first (normal order), then normalize the pieces.
    while True:
        args = []
        head = t
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fun
        if isinstance(head, Lam) and args:
            fuel.spend()
            t = instantiate(head.body, args.pop())
            while args:
                t = App(t, args.pop())
            continue
        if isinstance(head, Lam):
            return Lam(head.hint, _nf(head.body, fuel))
        if isinstance(head, (Reset, Shift)):
            raise ValueError("normalization is defined on control-free terms only")
        out = head
        for a in reversed(args):
            out = App(out, _nf(a, fuel))
        return out


# Normalization by evaluation: closures over lazily forced environments, so
# a beta step costs O(1) instead of a copy of the body.  Neutral heads are
# free names (str) or de Bruijn levels (int) introduced by read-back.


class _Thunk:
    __slots__ = ("term", "env", "value")

    def __init__(self, term, env, value=None):
        self.term, self.env, self.value = term, env, value


class _Clo:
    __slots__ = ("hint", "body", "env")

    def __init__(self, hint, body, env):
        self.hint, self.body, self.env = hint, body, env


class _Neu:
    __slots__ = ("head", "spine")

    def __init__(self, head, spine=()):
        self.head, self.spine = head, spine


def _force(th: _Thunk, fuel: _Fuel):
    if th.value is None:
        th.value = _eval(th.term, th.env, fuel)
        th.term = th.env = None
    return th.value


def _eval(t: Term, env, fuel: _Fuel):
    while True:
        if isinstance(t, App):
            f = _eval(t.fun, env, fuel)
            arg = _Thunk(t.arg, env)
            if isinstance(f, _Neu):
                return _Neu(f.head, f.spine + (arg,))
            fuel.spend()
            t, env = f.body, (arg, f.env)
        elif isinstance(t, Bound):
            e = env
            for _ in range(t.index):
                e = e[1]
            return _force(e[0], fuel)
        elif isinstance(t, Lam):
            return _Clo(t.hint, t.body, env)
        elif isinstance(t, Var):
            return _Neu(t.name)
        else:
            raise ValueError("normalization is defined on control-free terms only")


def _read_back(v, depth: int, fuel: _Fuel) -> Term:
    if isinstance(v, _Clo):
        fresh = _Thunk(None, None, _Neu(depth))
        return Lam(v.hint, _read_back(_eval(v.body, (fresh, v.env), fuel), depth + 1, fuel))
    out = Var(v.head) if isinstance(v.head, str) else Bound(depth - v.head - 1)
    for th in v.spine:
        out = App(out, _read_back(_force(th, fuel), depth, fuel))
    return out


def nbe_normalize(t: Term, fuel: int) -> Term:
    """Beta normal form by call-by-need evaluation and read-back.

    Fuel counts closure applications; entering a body during read-back is
    free.  Finds the normal form whenever one exists, like normal order.
    """
    if t.loose:
        raise ValueError("nbe_normalize needs a locally closed term")
    f = _Fuel(fuel)
    try:
        return _read_back(_eval(t, None, f), 0, f)
    except RecursionError:
        raise NormalizationTimeout from None


def eta_normalize(t: Term) -> Term:
    """Contract every ``\\x.f x`` with x not free in f, bottom-up to a fixpoint."""
    match t:
        case Lam(hint=h, body=b):
            b = eta_normalize(b)
            if isinstance(b, App) and b.arg == Bound(0) and not _uses_zero(b.fun):
                return shift_indices(b.fun, -1)
            return Lam(h, b)
        case App(fun=f, arg=a):
            return App(eta_normalize(f), eta_normalize(a))
    return t


def _uses_zero(t: Term, depth: int = 0) -> bool:
    if t.loose <= depth:
        return False
    match t:
        case Bound(index=i):
            return i == depth
        case Lam(body=b):
            return _uses_zero(b, depth + 1)
        case App(fun=f, arg=a):
            return _uses_zero(f, depth) or _uses_zero(a, depth)
    return False


def has_beta_redex(t: Term) -> bool:
    match t:
        case App(fun=Lam()):
            return True
        case App(fun=f, arg=a):
            return has_beta_redex(f) or has_beta_redex(a)
        case Lam(body=b):
            return has_beta_redex(b)
    return False


def has_eta_redex(t: Term) -> bool:
    match t:
        case Lam(body=App(fun=f, arg=Bound(index=0))) if not _uses_zero(f):
            return True
        case Lam(body=b):
            return has_eta_redex(b)
        case App(fun=f, arg=a):
            return has_eta_redex(f) or has_eta_redex(a)
    return False


def normalize_beta_eta(t: Term, fuel: int) -> Term:
    """Beta-eta normal form of a control-free term.

    Raises `NormalizationTimeout` when more than `fuel` beta steps are
    needed.
    """
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    nf = eta_normalize(nbe_normalize(t, fuel))
    if has_beta_redex(nf) or has_eta_redex(nf):
        raise AssertionError("normal form still has a redex")
    return nf


# Equivalence -----------------------------------------------------------------


@dataclass(frozen=True)
class Equivalent:
    normal_form: Term

    kind = "equivalent"


@dataclass(frozen=True)
class NotEquivalent:
    normal_forms: tuple[Term, Term]

    kind = "not-equivalent"


@dataclass(frozen=True)
class Unknown:
    timed_out: tuple[int, ...]  # which sides ran out of fuel

    kind = "unknown"


EquivVerdict = Union[Equivalent, NotEquivalent, Unknown]


def cps_equiv(t0: Term, t1: Term, fuel: int = 5_000) -> EquivVerdict:
    """Compare the beta-eta normal forms of both CPS translations."""
    nfs: list[Term | None] = []
    for t in (t0, t1):
        try:
            nfs.append(normalize_beta_eta(cps_translate(t), fuel))
        except NormalizationTimeout:
            nfs.append(None)
    missing = tuple(i for i, nf in enumerate(nfs) if nf is None)
    if missing:
        return Unknown(missing)
    if nfs[0] == nfs[1]:
        return Equivalent(nfs[0])
    return NotEquivalent((nfs[0], nfs[1]))
