import pytest
from hypothesis import given, strategies as st

from shiftreset import lts, reduction
from shiftreset.syntax import I, parse, pretty, term
from shiftreset.testgen import (
    GenConfig,
    diff_cps_sound,
    diff_lts_reduction,
    diff_stuck_law,
    enumerate_decompositions,
    gen_term,
    gen_terms,
    mutant_without_captreset,
    stepping_terms,
)

EXAMPLE = term("<(S k1. i (k1 i)) (S k2. w) (w w)>")
PURE = {"var": 1, "lam": 1, "app": 2, "shift": 0, "reset": 0}


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(weights={"var": -1, "lam": 1})
    with pytest.raises(ValueError):
        GenConfig(weights={"var": 0, "lam": 0})
    with pytest.raises(ValueError):
        GenConfig(weights={"loop": 1})
    with pytest.raises(ValueError):
        GenConfig(reset_bias=1.5)


def test_smallest_closed_term():
    assert gen_term(GenConfig(max_size=1)) == I


def test_seed_determinism():
    cfg = GenConfig(seed=11)
    assert list(gen_terms(cfg, 20)) == list(gen_terms(cfg, 20))
    assert gen_term(cfg) == gen_term(GenConfig(seed=11))


def test_pure_weights_give_pure_terms():
    for t in gen_terms(GenConfig(weights=PURE, seed=3), 200):
        assert not t.has_control


@given(st.integers(0, 10**6), st.integers(1, 20), st.booleans())
def test_generated_terms_are_valid(seed, size, closed):
    cfg = GenConfig(max_size=size, seed=seed, closed=closed)
    for t in gen_terms(cfg, 5):
        assert t.size <= max(size, 2 if closed else 1)
        assert t.closed or not closed
        assert t.loose == 0
        assert parse(pretty(t)) == t


def test_decomposition_oracle():
    [(ctx, r)] = enumerate_decompositions(EXAMPLE)
    d = reduction.decompose(EXAMPLE)
    assert (ctx, r) == (d.context, d.redex.recompose())
    assert enumerate_decompositions(term("S k. k")) == []
    assert enumerate_decompositions(I) == []


def test_lts_differential_with_example():
    report = diff_lts_reduction(50, GenConfig(seed=1), fuel=200, corpus=[EXAMPLE])
    assert report["checked"] == 51
    assert report["failures"] == []


def test_mutant_is_caught():
    report = diff_lts_reduction(0, fuel=50, tau=mutant_without_captreset, corpus=[EXAMPLE])
    assert len(report["failures"]) == 1
    assert report["failures"][0]["term"] == pretty(EXAMPLE)
    assert mutant_without_captreset(term("<i>")) == lts.tau_step(term("<i>"))


def test_stuck_law():
    report = diff_stuck_law(100, GenConfig(seed=2), corpus=[term("S k. k"), term("<S k. k>")])
    assert report["failures"] == []
    assert reduction.evaluate(term("S k. k"), 10).kind == "stuck"
    assert reduction.step(term("<S k. k>")) is not None


def test_cps_soundness_report_shape():
    report = diff_cps_sound(30, GenConfig(seed=4), fuel=2000)
    assert set(report) == {"checked", "failures", "rule_coverage"}
    assert report["failures"] == []
    assert report["rule_coverage"]["not-equivalent"] == 0


def test_stepping_terms():
    ts = stepping_terms(GenConfig(seed=5), 10)
    assert len(ts) == 10
    assert all(reduction.step(t) is not None for t in ts)
