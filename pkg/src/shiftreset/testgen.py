"""Random term generation and differential checks of the semantics.

Each driver generates a corpus from one seeded RNG stream and returns a
JSON-ready report ``{"checked": n, "failures": [...], "rule_coverage": {...}}``.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator

from . import cps, lts, reduction
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
    Var,
    is_value,
    plug,
    pretty,
)

CONSTRUCTORS = ("var", "lam", "app", "shift", "reset")
FREE_NAMES = ("a", "b", "c")


@dataclass(frozen=True)
class GenConfig:
    max_size: int = 14
    seed: int = 0
    weights: dict = field(
        default_factory=lambda: {"var": 3.0, "lam": 2.0, "app": 4.0, "shift": 1.0, "reset": 1.0}
    )
    closed: bool = True
    reset_bias: float = 0.3

    def __post_init__(self):
        if self.max_size < 0:
            raise ValueError("max_size must be non-negative")
        if set(self.weights) - set(CONSTRUCTORS):
            raise ValueError(f"unknown constructors in weights: {set(self.weights) - set(CONSTRUCTORS)}")
        if any(w < 0 for w in self.weights.values()) or not any(w > 0 for w in self.weights.values()):
            raise ValueError("weights must be non-negative with at least one positive")
        if not 0.0 <= self.reset_bias <= 1.0:
            raise ValueError("reset_bias must be a probability")


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.w = {c: float(cfg.weights.get(c, 0.0)) for c in CONSTRUCTORS}

    def term(self) -> Term:
        if self.cfg.closed:
            if self.cfg.max_size < 2:
                # Nothing closed fits; the smallest closed term is the identity.
                return Lam("x", Bound(0))
            return self.gen(self.cfg.max_size, 0, ())
        return self.gen(max(self.cfg.max_size, 1), 0, FREE_NAMES)

    def gen(self, budget: int, depth: int, free: tuple[str, ...]) -> Term:
        if budget >= 2 and self.w["reset"] > 0 and self.rng.random() < self.cfg.reset_bias:
            inner = self._node(budget - 1, depth, free)
            return Reset(inner) if inner.has_control else inner
        return self._node(budget, depth, free)

    def _node(self, budget: int, depth: int, free: tuple[str, ...]) -> Term:
        has_vars = depth > 0 or bool(free)
        least = 1 if has_vars else 2  # smallest term in this scope
        feasible = []
        if has_vars:
            feasible.append("var")
        if budget >= 2:
            feasible += ["lam", "shift"]
        if budget >= 1 + least:
            feasible.append("reset")
        if budget >= 1 + 2 * least:
            feasible.append("app")
        weighted = [c for c in feasible if self.w[c] > 0]
        if not weighted:
            # Weights rule out every option that fits; fall back to the
            # smallest well-formed term.
            weighted = ["var"] if has_vars else ["lam"]
            weights = [1.0]
        else:
            weights = [self.w[c] for c in weighted]
        kind = self.rng.choices(weighted, weights)[0]
        if kind == "var":
            n = depth + len(free)
            i = self.rng.randrange(n)
            return Bound(i) if i < depth else Var(free[i - depth])
        if kind == "lam":
            return Lam(self.rng.choice("xyz"), self.gen(budget - 1, depth + 1, free))
        if kind == "shift":
            return Shift(self.rng.choice(("k", "j")), self.gen(budget - 1, depth + 1, free))
        if kind == "reset":
            return Reset(self.gen(budget - 1, depth, free))
        left = self.rng.randint(least, budget - 1 - least)
        f = self.gen(left, depth, free)
        a = self.gen(budget - 1 - f.size, depth, free)
        return App(f, a)


def gen_term(cfg: GenConfig) -> Term:
    """One term, determined by `cfg.seed`."""
    return _Gen(cfg, random.Random(cfg.seed)).term()


def gen_terms(cfg: GenConfig, n: int) -> Iterator[Term]:
    """`n` terms drawn from a single RNG stream seeded by `cfg.seed`."""
    g = _Gen(cfg, random.Random(cfg.seed))
    for _ in range(n):
        yield g.term()


# Oracles -------------------------------------------------------------------


def enumerate_decompositions(t: Term) -> list[tuple[EvalContext, Term]]:
    """Every (F, r) with ``F[r] = t``, F an evaluation context and r a redex.

    Brute force over all subterm positions; independent of
    `reduction.decompose`.
    """
    out = []

    def is_redex(u: Term) -> bool:
        if isinstance(u, App):
            return isinstance(u.fun, Lam) and is_value(u.arg)
        if isinstance(u, Reset):
            return is_value(u.body) or reduction.is_stuck_shape(u.body)
        return False

    def go(u: Term, outer: tuple) -> None:
        if is_redex(u):
            out.append((EvalContext(tuple(reversed(outer))), u))
        if isinstance(u, App):
            go(u.fun, outer + (PendingArg(u.arg),))
            if is_value(u.fun):
                go(u.arg, outer + (AppliedValue(u.fun),))
        elif isinstance(u, Reset):
            go(u.body, outer + (ResetFrame(),))

    go(t, ())
    return out


def _stuck_shape_ok(t: Term) -> bool:
    d = reduction.decompose(t)
    return (
        isinstance(d, reduction.IsStuck)
        and reduction.is_stuck_shape(t)
        and plug(d.context, d.shift) == t
    )


# Drivers -------------------------------------------------------------------


def _report(checked: int, failures: list, coverage: Counter) -> dict:
    return {"checked": checked, "failures": failures, "rule_coverage": dict(sorted(coverage.items()))}


def diff_lts_reduction(
    n: int,
    cfg: GenConfig = GenConfig(),
    fuel: int = 200,
    tau: Callable[[Term], Term | None] = lts.tau_step,
    corpus: list[Term] | None = None,
) -> dict:
    """Compare the internal transitions with reduction along full traces.

    `tau` can be replaced to test the harness itself.
    """
    terms = list(corpus or []) + list(gen_terms(cfg, n))
    failures = []
    cov: Counter = Counter({r: 0 for r in (reduction.RBETA, reduction.RSHIFT, reduction.RRESET, *lts.RULES)})
    for t in terms:
        u = t
        for _ in range(fuel + 1):
            red = reduction.step_rule(u)
            nxt = tau(u)
            if (red is None) != (nxt is None) or (red is not None and red[0] != nxt):
                failures.append(
                    {
                        "term": pretty(t),
                        "at": pretty(u),
                        "reduction": None if red is None else pretty(red[0]),
                        "lts": None if nxt is None else pretty(nxt),
                    }
                )
                break
            if red is None:
                _probe_coverage(u, cov)
                break
            cov[red[1]] += 1
            d = lts.derive(u)
            if d is not None:
                cov.update(d.rules())
            u = red[0]
    return _report(len(terms), failures, cov)


def _probe_coverage(u: Term, cov: Counter) -> None:
    label = lts.ValueProbe(Lam("x", Bound(0))) if is_value(u) else lts.ContextProbe(PureContext())
    d = lts.derive(u, label)
    if d is not None:
        cov.update(d.rules())


def diff_stuck_law(n: int, cfg: GenConfig = GenConfig(), fuel: int = 200, corpus: list[Term] | None = None) -> dict:
    """Check unique decomposition on every term of every trace, and the shape
    of every stuck result."""
    terms = list(corpus or []) + list(gen_terms(cfg, n))
    failures = []
    cov: Counter = Counter({"value": 0, "stuck": 0, "timeout": 0})
    for t in terms:
        u = t
        for _ in range(fuel + 1):
            problem = _decomposition_problem(u)
            if problem:
                failures.append({"term": pretty(t), "at": pretty(u), "problem": problem})
                break
            nxt = reduction.step(u)
            if nxt is None:
                break
            u = nxt
        obs = reduction.evaluate(t, fuel)
        cov[obs.kind] += 1
        if obs.kind == "stuck" and not _stuck_shape_ok(obs.term):
            failures.append({"term": pretty(t), "at": pretty(obs.term), "problem": "stuck result has the wrong shape"})
    return _report(len(terms), failures, cov)


def _decomposition_problem(u: Term) -> str | None:
    d = reduction.decompose(u)
    if reduction.recompose(d) != u:
        return "recomposition differs"
    found = enumerate_decompositions(u)
    if isinstance(d, reduction.Decomposed):
        if len(found) != 1:
            return f"{len(found)} decompositions"
        ctx, r = found[0]
        if ctx != d.context or r != d.redex.recompose():
            return "decomposition differs from the brute-force one"
    elif found:
        return f"{type(d).__name__} but {len(found)} redex positions"
    elif isinstance(d, reduction.IsValue) != is_value(u):
        return "value classification differs"
    elif isinstance(d, reduction.IsStuck) and not reduction.is_stuck_shape(u):
        return "stuck without the E[S k.t] shape"
    return None


def diff_cps_sound(n: int, cfg: GenConfig = GenConfig(), fuel: int = 5_000, corpus: list[Term] | None = None) -> dict:
    """For terms that take a step, the CPS translations of both sides must
    have the same beta-eta normal form when both normalize within fuel."""
    terms = list(corpus or []) + list(gen_terms(cfg, n))
    failures = []
    cov: Counter = Counter({"equivalent": 0, "not-equivalent": 0, "unknown": 0, "no-step": 0})
    for t in terms:
        r = reduction.step_rule(t)
        if r is None:
            cov["no-step"] += 1
            continue
        verdict = cps.cps_equiv(t, r[0], fuel)
        cov[verdict.kind] += 1
        if isinstance(verdict, cps.NotEquivalent):
            failures.append({"term": pretty(t), "step": pretty(r[0]), "rule": r[1]})
    return _report(len(terms), failures, cov)


def stepping_terms(cfg: GenConfig, n: int, limit: int = 100_000) -> list[Term]:
    """The first `n` generated closed terms that can take a reduction step."""
    out = []
    for t in gen_terms(cfg, limit):
        if reduction.step(t) is not None:
            out.append(t)
            if len(out) == n:
                break
    return out


CHECKS = {"lts": diff_lts_reduction, "stuck": diff_stuck_law, "cps-sound": diff_cps_sound}


def mutant_without_captreset(t: Term) -> Term | None:
    """`lts.tau_step` with the rule for capture under a reset removed."""
    d = lts.derive(t)
    if d is None or "LTScaptreset" in d.rules():
        return None
    return d.target

