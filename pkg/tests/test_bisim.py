import json

import pytest
from hypothesis import given, settings

from shiftreset import bisim, reduction
from shiftreset.bisim import (
    BisimilarUpTo,
    Distinguished,
    ProbePool,
    check,
    check_axiom_instance,
    congruence_sample,
    default_pool,
    load_pool,
    replay,
)
from shiftreset.lts import ContextProbe, ValueProbe
from shiftreset.syntax import EMPTY, I, OMEGA, OpenTermError, W, App, context, term
from strategies import closed_terms


def test_default_pool():
    pool = default_pool()
    assert I in pool.values
    assert EMPTY in pool.contexts
    assert (pool.depth, pool.fuel) == (4, 500)
    assert pool.fingerprint() == default_pool().fingerprint()


def test_pool_validation():
    with pytest.raises(ValueError):
        ProbePool((OMEGA,), ())
    with pytest.raises(ValueError):
        ProbePool((I,), (), depth=-1)


def test_stuck_versus_value():
    v = check(term("S k. k i"), I)
    assert v == Distinguished((ContextProbe(EMPTY),), "stuck vs value")


@pytest.mark.parametrize(
    "t0, t1",
    [("<i>", "i"), ("omega", "omega omega"), (r"\x.(\y.y) x", r"\y.y"), ("<<i w>>", "<i w>")],
)
def test_bisimilar_pairs(t0, t1):
    assert isinstance(check(term(t0), term(t1)), BisimilarUpTo)


def test_distinguished_after_probing():
    # Both are values; applying them to i tells them apart.
    v = check(I, term(r"\x.omega"))
    assert isinstance(v, Distinguished)
    assert v.trace[0] == ValueProbe(I)
    assert replay(I, term(r"\x.omega"), v.trace, 500)


def test_depth_zero_only_compares_classes():
    pool = default_pool().with_bounds(depth=0)
    assert isinstance(check(I, term(r"\x.omega"), pool), BisimilarUpTo)


def test_open_terms_rejected():
    with pytest.raises(OpenTermError):
        check(term("x"), I)


def test_load_pool():
    pool = load_pool(json.dumps({"values": ["i", "w"], "contexts": ["i @", "@ (w w)"]}), depth=2)
    assert pool.values == (I, W)
    assert len(pool.contexts) == 2 and pool.depth == 2


def test_axiom_instances():
    assert isinstance(check_axiom_instance("beta-v", {"t": "x x", "v": "i"}), BisimilarUpTo)
    assert isinstance(check_axiom_instance("reset-lift", {"t0": "x", "t1": "i"}), BisimilarUpTo)
    assert isinstance(check_axiom_instance("S-elim", {"t": "i"}), Distinguished)


def test_congruence_sample():
    [(_, v)] = congruence_sample(term("<i>"), I, [context("<@ w>")])
    assert isinstance(v, BisimilarUpTo)
    [(_, v)] = congruence_sample(term("S k. k i"), I, [context("@")])
    assert isinstance(v, Distinguished)
    with pytest.raises(OpenTermError):
        congruence_sample(I, W, [context(r"@ x")])


@settings(max_examples=60)
@given(closed_terms(10))
def test_reduction_step_is_bisimilar(t):
    t1 = reduction.step(t)
    if t1 is not None:
        assert isinstance(check(t, t1, default_pool().with_bounds(depth=2, fuel=100)), BisimilarUpTo)


@settings(max_examples=60)
@given(closed_terms(10), closed_terms(10))
def test_distinguished_traces_replay(t0, t1):
    pool = default_pool().with_bounds(depth=2, fuel=100)
    v = check(t0, t1, pool)
    if isinstance(v, Distinguished):
        assert replay(t0, t1, v.trace, pool.fuel)
        # A larger depth never turns a difference into a match.
        assert isinstance(check(t0, t1, pool.with_bounds(depth=3)), Distinguished)


def test_replay_rejects_bogus_trace():
    assert not replay(I, I, (ValueProbe(I),), 100)
    assert not replay(I, W, (ContextProbe(EMPTY), ValueProbe(I)), 100)


def test_format_trace():
    assert bisim.format_trace(()) == "(empty)"
    assert bisim.format_trace((ContextProbe(EMPTY),)) == "context @"


def test_self_application_pair():
    assert isinstance(check(App(W, I), I), BisimilarUpTo)
