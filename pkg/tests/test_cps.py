import pytest
from hypothesis import given

from shiftreset import reduction
from shiftreset.cps import (
    Equivalent,
    NormalizationTimeout,
    NotEquivalent,
    Unknown,
    beta_normalize,
    cps_equiv,
    cps_translate,
    eta_normalize,
    has_beta_redex,
    has_eta_redex,
    nbe_normalize,
    normalize_beta_eta,
    theta_init,
)
from shiftreset.syntax import I, OMEGA, Var, lam, parse, pretty, term
from strategies import closed_terms, terms


def test_variable_clause():
    assert cps_translate(Var("x")) == parse(r"\k1.\k2. k1 x k2")
    assert pretty(cps_translate(Var("x"))) == r"\k1.\k2.k1 x k2"


def test_abstraction_clause():
    body = cps_translate(Var("x"))
    assert cps_translate(I) == lam("k1", lam("k2", parse("k1 F k2", {"F": lam("x", body)})))


def test_reset_clause():
    inner = cps_translate(Var("y"))
    expected = parse(r"\k1.\k2. T th (\x. k1 x k2)", {"T": inner, "th": theta_init()})
    assert cps_translate(term("<y>")) == expected


def test_theta_init():
    assert theta_init() == parse(r"\x.\k2.k2 x")


def test_normalizer_examples():
    assert normalize_beta_eta(parse(r"(\x.x) y"), 10) == Var("y")
    assert normalize_beta_eta(parse(r"\x. f x"), 10) == Var("f")
    assert normalize_beta_eta(parse(r"\x. x x"), 10) == parse(r"\x. x x")
    with pytest.raises(NormalizationTimeout):
        normalize_beta_eta(OMEGA, 1000)


def test_normalizer_rejects_control():
    with pytest.raises(ValueError):
        normalize_beta_eta(term("<i>"), 10)


def test_fuel_is_counted_in_beta_steps():
    t = parse(r"(\x.x) ((\x.x) y)")
    with pytest.raises(NormalizationTimeout):
        nbe_normalize(t, 1)
    assert nbe_normalize(t, 2) == Var("y")
    assert beta_normalize(t, 2) == Var("y")


def test_normal_order_finds_normal_form_past_divergent_argument():
    t = parse(r"(\x.\y.y) omega", {"omega": OMEGA})
    assert nbe_normalize(t, 10) == parse(r"\y.y")
    assert beta_normalize(t, 10) == parse(r"\y.y")


def test_deep_divergence_is_a_timeout():
    y_i = term(r"(\f.(\x.f (x x)) (\x.f (x x))) i")
    for fuel in (100, 100_000):
        with pytest.raises(NormalizationTimeout):
            nbe_normalize(y_i, fuel)


@pytest.mark.parametrize(
    "t0, t1, kind",
    [("<i>", "i", "equivalent"), ("S k. k i", "i", "equivalent"),
     ("omega", "omega omega", "unknown"), ("i", "w", "not-equivalent")],
)
def test_cps_equiv_examples(t0, t1, kind):
    assert cps_equiv(term(t0), term(t1)).kind == kind


def test_verdict_payloads():
    v = cps_equiv(term("i"), term("w"))
    assert isinstance(v, NotEquivalent) and v.normal_forms[0] != v.normal_forms[1]
    assert cps_equiv(OMEGA, I) == Unknown((0,))
    assert isinstance(cps_equiv(term("<i>"), I), Equivalent)


@given(terms(max_size=14, free=("a", "b")))
def test_translation_has_no_control_and_keeps_free_variables(t):
    c = cps_translate(t)
    assert not c.has_control
    assert c.free_vars == t.free_vars


@given(terms(max_size=14, free=("a",)))
def test_nbe_agrees_with_stepping_normalizer(t):
    c = cps_translate(t)
    try:
        expected = beta_normalize(c, 2000)
    except NormalizationTimeout:
        return
    assert nbe_normalize(c, 10_000) == expected


@given(terms(max_size=12, free=("a",)))
def test_normal_forms_have_no_redexes(t):
    try:
        nf = normalize_beta_eta(cps_translate(t), 2000)
    except NormalizationTimeout:
        return
    assert not has_beta_redex(nf) and not has_eta_redex(nf)
    assert eta_normalize(nf) == nf


@given(closed_terms(14))
def test_reduction_is_sound_for_cps(t):
    t1 = reduction.step(t)
    if t1 is not None:
        assert not isinstance(cps_equiv(t, t1, 2000), NotEquivalent)
