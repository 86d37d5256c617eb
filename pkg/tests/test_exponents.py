from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersive_lab.exponents import (
    INF,
    EmptyWindowError,
    EquationParams,
    ExponentError,
    ExponentTriple,
    SelectionResult,
    admissible_enumerate,
    as_exponent,
    check_thm1_conditions,
    critical_index,
    dispersive_beta,
    dual,
    in_class_S,
    in_class_W,
    recip,
    scaling_exponent,
    select_schrodinger_exponents,
    select_wave_exponents,
)


def inv(x):
    return F(0) if x == "inf" else 1 / F(x)


def oracle_S(N, k, q, r, rt):
    """Class membership written out from the definition, no library calls."""
    if q != "inf" and F(q) <= 2:
        return False
    if r == "inf" or rt == "inf" or not 2 <= F(rt) <= F(r):
        return False
    return 2 * inv(q) + (N - k) * inv(r) + k * inv(rt) == F(N, 2)


def oracle_W(N, k, q, r, rt):
    if q != "inf" and F(q) <= 2:
        return False
    if r == "inf" or rt == "inf" or not 2 <= F(rt) <= F(r):
        return False
    half = F(N - 1, 2)
    return (inv(q) + (N - k) * inv(r) + k * inv(rt) == half
            and 2 * inv(q) + (N - k - 1) * inv(r) + k * inv(rt) <= half)


def T(*v):
    return ExponentTriple.parse(v)


def test_infinity_arithmetic():
    assert recip(INF) == 0
    assert dual(INF) == 1
    assert dual(F(2)) == 2
    assert dual(F(4)) == F(4, 3)
    assert as_exponent("16/3") == F(16, 3)
    assert as_exponent("inf") is INF


def test_float_exponents_refused():
    with pytest.raises(ExponentError):
        as_exponent(0.3)


def test_triple_validation_and_str():
    t = T("16/3", 4, "16/7")
    assert str(t) == "(16/3, 4, 16/7)"
    assert t.dual().recips() == tuple(1 - x for x in t.recips())
    with pytest.raises(ExponentError):
        T(F(1, 2), 2, 2)


@pytest.mark.parametrize("N,p,expected", [(3, 3, F(1, 2)), (4, 3, F(1)), (2, 5, F(1, 2))])
def test_critical_index(N, p, expected):
    assert critical_index(N, p) == expected
    assert critical_index(N, p) == F(N, 2) - 2 / (F(p) - 1)


def test_critical_index_rejects_small_p():
    with pytest.raises(ExponentError):
        critical_index(3, 1)


@pytest.mark.parametrize("N,p,s,expected", [(3, 3, F(1, 2), 0), (3, 3, 1, F(1, 2)), (4, 2, 0, 0)])
def test_scaling_exponent(N, p, s, expected):
    assert scaling_exponent(N, p, s) == expected


@given(st.integers(1, 8), st.fractions(min_value=F(11, 10), max_value=F(9)))
def test_scaling_vanishes_at_critical_index(N, p):
    assert scaling_exponent(N, p, critical_index(N, p)) == 0


@pytest.mark.parametrize("N,k,t,expected", [
    (3, 2, ("inf", 2, 2), True),
    (3, 2, (4, 4, 4), False),
    (3, 2, (4, 4, "8/3"), True),
])
def test_class_S_examples(N, k, t, expected):
    assert in_class_S(N, k, T(*t)) is expected
    assert oracle_S(N, k, *t) is expected


@pytest.mark.parametrize("N,k,t,expected", [
    (2, 1, ("inf", 4, 4), True),
    (3, 1, (4, 4, 4), True),
    (2, 1, (8, 4, 8), False),
])
def test_class_W_examples(N, k, t, expected):
    assert in_class_W(N, k, T(*t)) is expected
    assert oracle_W(N, k, *t) is expected


def test_class_S_reduces_to_classical_when_r_equals_rt():
    # 2/q + N/r = N/2 with q > 2
    for N in (3, 4, 5):
        for r in (F(3), F(4), F(6), F(10, 3)):
            iq = (F(N, 2) - N / r) / 2
            if 0 < iq < F(1, 2):
                assert in_class_S(N, 1, ExponentTriple(1 / iq, r, r))


def test_boundary_exclusions():
    assert not in_class_S(3, 2, T(2, 6, 6))  # q = 2 endpoint
    assert not in_class_S(3, 2, T("inf", "inf", 2))


@pytest.mark.parametrize("args,expected", [
    ((3, 2, 2, "inf", "inf"), F(3, 2)),
    ((3, 2, 2, "inf", 2), F(1, 2)),
    ((5, 1, 1, 2, 2), F(0)),
])
def test_dispersive_beta(args, expected):
    assert dispersive_beta(*args) == expected


def test_dispersive_beta_rejects_small_exponents():
    with pytest.raises(ExponentError):
        dispersive_beta(3, 2, 2, F(3, 2), 2)


fr = st.fractions(min_value=F(2), max_value=F(50), max_denominator=20)


@given(fr, fr, fr, st.integers(1, 2))
def test_dispersive_beta_monotone(r1, r2, rt, sigma):
    lo, hi = min(r1, r2), max(r1, r2)
    assert dispersive_beta(4, 2, sigma, lo, rt) <= dispersive_beta(4, 2, sigma, hi, rt)
    assert dispersive_beta(4, 2, sigma, rt, lo) <= dispersive_beta(4, 2, sigma, rt, hi)


def test_thm_conditions_examples():
    r = check_thm1_conditions(EquationParams(3, 2, 2, 0, 3), T("inf", 2, 2))
    assert r == {"condition_sc2": True, "implied_s": 0, "strict": False}
    r = check_thm1_conditions(EquationParams(3, 1, 1, 0, 3), T(4, 4, 4))
    assert r == {"condition_sc2": True, "implied_s": F(1, 2), "strict": False}
    r = check_thm1_conditions(EquationParams(3, 2, 2, 0, 3), T(4, 4, 4))
    assert r["implied_s"] == F(1, 4)
    # sc2: 1/2 <= 1*(1/4) + 2*(1/4) = 3/4, strict
    assert r["condition_sc2"] and r["strict"]


def test_schrodinger_selection_midpoint():
    sel = select_schrodinger_exponents(3, 1, 3)
    assert sel.window == (F(0), F(1, 2))
    assert sel.epsilon == F(1, 4)
    assert sel.triple == T("16/3", 4, "16/7")
    assert sel.beta == F(1, 4)
    q, r, rt = sel.triple.recips()
    assert 2 * q + r + 2 * rt == F(3, 2)
    assert oracle_S(3, 2, "16/3", 4, "16/7")


def test_schrodinger_selection_critical_is_empty():
    with pytest.raises(EmptyWindowError):
        select_schrodinger_exponents(3, 1, 5)


def test_schrodinger_selection_N4():
    sel = select_schrodinger_exponents(4, 1, 2)
    assert sel.window == (F(0), F(1, 2))
    assert sel.beta > 0 and in_class_S(4, 2, sel.triple)


def test_wave_selection_pinned():
    sel = select_wave_exponents(2, F(1, 2), 4, F(5, 4))
    assert sel.window == (F(1), F(3, 2))
    assert sel.triple == T(20, 5, 4)
    assert sel.beta == F(3, 4)
    assert F(1, 20) + F(1, 5) + F(1, 4) == F(1, 2)
    assert oracle_W(2, 1, 20, 5, 4)


def test_wave_selection_lower_endpoint_rejected():
    with pytest.raises(ExponentError):
        select_wave_exponents(2, F(1, 2), 3)


def test_wave_selection_N3():
    sel = select_wave_exponents(3, F(1, 2), 3)
    assert sel.beta > 0 and in_class_W(3, 1, sel.triple)


def test_selection_pick_rules():
    sel = select_schrodinger_exponents(3, 1, 3, lambda lo, hi: lo + (hi - lo) / 4)
    assert sel.epsilon == F(1, 8)
    with pytest.raises(ExponentError):
        select_schrodinger_exponents(3, 1, 3, F(1, 2))


def test_selection_result_invariants():
    with pytest.raises(ExponentError):
        SelectionResult(F(1), (F(0), F(1, 2)), T("inf", 2, 2), F(1))


@settings(max_examples=60)
@given(st.integers(3, 6), st.fractions(min_value=F(1, 10), max_value=F(1), max_denominator=10),
       st.fractions(min_value=F(13, 12), max_value=F(8), max_denominator=12))
def test_schrodinger_selection_properties(N, s, p):
    try:
        sel = select_schrodinger_exponents(N, s, p)
    except ExponentError:
        return
    assert in_class_S(N, 2, sel.triple)
    assert sel.beta == F(N - 2, 4) * (1 + F(4, N - 2) - p) - sel.epsilon
    assert sel.beta > 0


@settings(max_examples=60)
@given(st.integers(2, 6), st.fractions(min_value=F(1, 10), max_value=F(1, 2), max_denominator=10),
       st.fractions(min_value=F(13, 12), max_value=F(8), max_denominator=12))
def test_wave_selection_properties(N, s, p):
    try:
        sel = select_wave_exponents(N, s, p)
    except ExponentError:
        return
    assert in_class_W(N, 1, sel.triple)
    assert sel.beta == 1 - (p + 1) / sel.triple.q > 0


def test_enumeration_examples_and_roundtrip():
    s = admissible_enumerate(3, 2, "S", 2)
    assert T("inf", 2, 2) in s
    w = admissible_enumerate(2, 1, "W", 4)
    assert T("inf", 4, 4) in w
    for t in admissible_enumerate(3, 2, "S", 6):
        assert in_class_S(3, 2, t)
        assert oracle_S(3, 2, *t.as_strings())
    for t in w:
        assert oracle_W(2, 1, *t.as_strings())
    assert admissible_enumerate(3, 2, "S", 6) == admissible_enumerate(3, 2, "S", 6)


def test_enumeration_is_exhaustive_against_brute_force():
    got = set(admissible_enumerate(3, 2, "S", 6))
    recips = sorted({F(a, b) for b in range(1, 7) for a in range(b + 1) if F(a, b) <= F(1, 2)})
    want = set()
    for a in recips:
        for b in recips:
            for c in recips:
                q = "inf" if a == 0 else str(1 / a)
                if b == 0 or c == 0:
                    continue
                if oracle_S(3, 2, q, str(1 / b), str(1 / c)):
                    want.add(T(q, str(1 / b), str(1 / c)))
    assert got == want
