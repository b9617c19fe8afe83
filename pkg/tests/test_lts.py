import pytest
from hypothesis import assume, given

from shiftreset import lts, reduction
from shiftreset.lts import TAU, ContextProbe, ValueProbe, derive, probe_context, probe_value, tau_step
from shiftreset.syntax import (
    EMPTY,
    App,
    AppliedValue,
    I,
    OMEGA,
    PendingArg,
    PureContext,
    Reset,
    W,
    plug,
    pure_context,
    term,
)
from strategies import closed_terms, closed_values, pure_contexts

EXAMPLE = term("<i (S k. w) (w w)>")


def test_example_capture_transition():
    assert tau_step(EXAMPLE) == term("<w>")


def test_example_inference_tree():
    d = derive(EXAMPLE)
    assert d.rules() == ["LTScaptreset", "LTScaptl", "LTScaptr", "LTSshift"]
    assert d.target == term("<w>")
    captl = d.premises[0]
    assert captl.label == ContextProbe(EMPTY)
    captr = captl.premises[0]
    assert captr.source == term("i (S k. w)")
    assert captr.label == ContextProbe(pure_context("@ (w w)"))
    shift = captr.premises[0]
    assert shift.source == term("S k. w")
    assert shift.label == ContextProbe(PureContext((AppliedValue(I), PendingArg(term("w w")))))
    assert "LTSshift" in d.render()


@pytest.mark.parametrize(
    "src, expected, rule",
    [("<i>", "i", "LTSreset"), ("(\\x.x) i", "i", "LTSbeta"), ("(i i) w", "i w", "LTScompl"),
     ("i (i w)", "i w", "LTScompr"), ("<i i>", "<i>", "LTScompreset")],
)
def test_single_rules(src, expected, rule):
    assert tau_step(term(src)) == term(expected)
    assert derive(term(src)).rule == rule


def test_probe_value():
    assert probe_value(W, I) == term("i i")
    assert probe_value(term("i (S k. w)"), I) is None
    assert probe_value(term(r"\x.(\y.y) x"), W) == term(r"(\y.y) w")
    assert derive(W, ValueProbe(I)).rule == "LTSval"


def test_probe_context():
    ctx = PureContext((AppliedValue(I), PendingArg(term("w w"))))
    assert probe_context(term("S k. w"), ctx) == term("<w>")
    assert probe_context(term("S k. k i"), EMPTY) == term(r"<(\x.<x>) i>")
    assert probe_context(I, EMPTY) is None


def test_labels_must_be_closed():
    with pytest.raises(ValueError):
        ValueProbe(term("x"))
    with pytest.raises(ValueError):
        ValueProbe(OMEGA)


def test_observables():
    assert lts.observables(term("<<i>>"), 10).kind == lts.observables(term("<i>"), 10).kind == "value"
    assert lts.observables(OMEGA, 100).kind == "timeout"
    assert lts.observables(term("S k. w"), 10).kind == "stuck"


def test_available():
    assert lts.available(I) == {"tau": None, "accepts": "value"}
    assert lts.available(term("S k. w")) == {"tau": None, "accepts": "context"}
    assert lts.available(term("<i>"))["tau"] == I


@given(closed_terms(14))
def test_tau_equals_reduction(t):
    assert tau_step(t) == reduction.step(t)


@given(closed_terms(14))
def test_derivation_oracle_agrees(t):
    d = derive(t)
    assert (d is None) == (tau_step(t) is None)
    if d is not None:
        assert d.target == tau_step(t)


@given(closed_terms(12), pure_contexts())
def test_context_probe_is_capture_under_reset(t, e):
    r = probe_context(t, e)
    assume(r is not None)
    assert reduction.decompose(t).__class__ is reduction.IsStuck
    assert tau_step(Reset(plug(e, t))) == r
    assert derive(t, ContextProbe(e)).target == r


@given(closed_values(), closed_values())
def test_value_probe_is_application(t, v):
    assert tau_step(App(t, v)) == probe_value(t, v)


def test_tau_label_is_default():
    assert derive(term("<i>"), TAU).rule == "LTSreset"
