from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import small_fraction
from polarscale.exactpoly import (
    IsolatingInterval,
    NotSquareFreeError,
    RationalPolynomial as P,
    certify_nonnegative,
    count_roots,
    format_rational,
    isolate_roots,
    parse_rational,
    poly_add,
    poly_compose,
    poly_derivative,
    poly_eval,
    poly_gcd,
    refine_root,
    squarefree_decomposition,
    squarefree_part,
    sturm_chain,
    symmetric_reduction,
)

F = Fraction
H = P.x()
F0 = P([0, 1, -1])  # h(1-h)
F1 = P([0, 1, -2, 2, -1])


def poly_st(max_degree: int = 6):
    return st.lists(small_fraction, min_size=0, max_size=max_degree + 1).map(P)


def _sympy(p: P):
    x = sympy.Symbol("x")
    return sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in p.coefficients])), x)


# ---------------------------------------------------------------------------
# representation

def test_rationals_are_stored_reduced():
    p = P([F(2, 4), F(6, 8)])
    assert p.coefficients == (F(1, 2), F(3, 4))
    assert all(c.denominator > 0 for c in p.coefficients)


def test_zero_polynomial_has_empty_coefficients():
    assert P([0, 0, 0]).coefficients == ()
    assert P([1, 2, 0]).degree == 1


def test_parse_and_format_round_trip():
    for text in ["3/4", "-7/2", "0/1", "5/1"]:
        assert format_rational(parse_rational(text)) == text
    assert parse_rational("1e-4") == F(1, 10000)
    assert parse_rational("0.5") == F(1, 2)


def test_json_round_trip():
    assert F1.to_json() == '["0/1", "1/1", "-2/1", "2/1", "-1/1"]'
    assert P.from_json(F1.to_json()) == F1


# ---------------------------------------------------------------------------
# arithmetic examples

def test_poly_add_examples():
    assert poly_add(F0, P()) == F0
    assert poly_add(F0, -F0) == P()
    assert poly_add(P([0, F(1, 2)]), P([0, F(1, 3)])) == P([0, F(5, 6)])


def test_poly_compose_examples():
    assert poly_compose(F0, H * H) == P([0, 0, 1, 0, -1])
    assert poly_compose(F1, H) == F1
    # expanded by hand: (2h - h^2)(1 - h)^2
    assert poly_compose(F0, P([0, 2, -1])) == P([0, 2, -5, 4, -1])


def test_poly_derivative_examples():
    assert poly_derivative(F0) == P([1, -2])
    assert poly_derivative(P([7])) == P()
    assert poly_derivative(P([0, 0, 0, 0, 1])) == P([0, 0, 0, 4])


def test_poly_eval_examples():
    assert poly_eval(F0, F(1, 2)) == F(1, 4)
    assert poly_eval(P([F(3, 7), 5, 9]), 0) == F(3, 7)
    assert poly_eval(F1, F(1, 2)) == F(3, 16)


def test_poly_gcd_examples():
    assert poly_gcd(F0, H) == H
    assert poly_gcd(P([2, 4, 6]), P()) == P([F(1, 3), F(2, 3), 1])
    assert poly_gcd(F1, F0) == P([0, -1, 1])
    with pytest.raises(ValueError, match="gcd of zero polynomials"):
        poly_gcd(P(), P())


@given(poly_st(5), poly_st(5), poly_st(3))
def test_poly_gcd_matches_sympy(a, b, c):
    if (a * c).is_zero() and (b * c).is_zero():
        return
    g = poly_gcd(a * c, b * c)
    ref = sympy.gcd(_sympy(a * c), _sympy(b * c)).monic()
    assert [F(int(c.p), int(c.q)) for c in reversed(ref.all_coeffs())] == list(g.coefficients)


@given(poly_st(4), poly_st(3), st.lists(small_fraction, min_size=1, max_size=8))
def test_compose_is_evaluation_homomorphism(p, q, xs):
    pq = poly_compose(p, q)
    if p.degree >= 1 and q.degree >= 1:
        assert pq.degree == p.degree * q.degree
    for x in xs:
        assert poly_eval(pq, x) == poly_eval(p, poly_eval(q, x))


def test_compose_homomorphism_on_100_random_points():
    rng = random.Random(11)
    p = P([F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(7)])
    q = P([F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(4)])
    pq = poly_compose(p, q)
    for _ in range(100):
        x = F(rng.randint(-500, 500), rng.randint(1, 97))
        assert pq(x) == p(q(x))


@given(poly_st(6), poly_st(6))
def test_divmod_reconstructs(p, q):
    from polarscale.exactpoly import poly_divmod

    if q.is_zero():
        return
    quo, rem = poly_divmod(p, q)
    assert quo * q + rem == p
    assert rem.is_zero() or rem.degree < q.degree


# ---------------------------------------------------------------------------
# Sturm chains and root counting

def test_sturm_chain_examples():
    ch = sturm_chain(P([1, -2]))
    assert ch.sequence == (P([1, -2]), P([-2]))
    ch = sturm_chain(P([F(-1, 4), 0, 1]))
    assert len(ch) == 3
    assert ch.sequence[1] == P([0, 2])
    last = ch.sequence[2]
    assert last.degree == 0 and last.coefficients[0] > 0
    ch = sturm_chain(P([1, 0, 1]))
    for a, b in [(-5, 5), (0, 1), (-100, 3)]:
        assert ch.count(a, b) == 0


def test_sturm_chain_rejects_bad_input():
    with pytest.raises(ValueError):
        sturm_chain(P())
    with pytest.raises(NotSquareFreeError) as info:
        sturm_chain(P.from_roots([F(1, 3), F(1, 3), 2]))
    assert info.value.factor == P([F(-1, 3), 1])


def test_sturm_chain_remainder_relation():
    p = P.from_roots([F(-3, 2), F(1, 5), 2, 7]) * P([1, 0, 1])
    seq = sturm_chain(p).sequence
    for i in range(2, len(seq)):
        from polarscale.exactpoly import poly_divmod

        _, r = poly_divmod(seq[i - 2], seq[i - 1])
        ratio = {c / d for c, d in zip(seq[i].coefficients, (-r).coefficients)}
        assert len(ratio) == 1 and ratio.pop() > 0


def test_count_roots_examples():
    assert count_roots(P([1, -2]), 0, 1) == 1
    assert count_roots(P([1, 0, 1]), 0, 1) == 0
    assert count_roots(P([-2]), 0, 1) == 0
    with pytest.raises(ValueError):
        count_roots(P(), 0, 1)


def test_count_roots_half_open_convention():
    p = P.from_roots([0, 1])
    assert count_roots(p, 0, 1) == 1  # root at hi counts, root at lo does not
    assert count_roots(p, -1, 0) == 1
    assert count_roots(p, F(-1, 2), F(3, 2)) == 2


@st.composite
def constructed_polys(draw):
    """Polynomials with known distinct real roots: prod (x - r_i) times a root-free factor."""
    roots = draw(st.lists(
        st.builds(Fraction, st.integers(-90, 90), st.integers(1, 9)).filter(lambda r: -10 < r < 10),
        min_size=0, max_size=6, unique=True,
    ))
    mult = [draw(st.integers(1, 2)) for _ in roots]
    p = P([draw(st.integers(1, 5))])
    for r, k in zip(roots, mult):
        p = p * P([-r, 1]) ** k
    if draw(st.booleans()):
        p = p * P([draw(st.integers(1, 9)), 0, 1])
    return p, sorted(roots)


@given(constructed_polys())
def test_count_roots_matches_constructed_roots(case):
    p, roots = case
    assert count_roots(p, -10, 10) == len(roots)
    lo, hi = F(-1, 3), F(7, 2)
    assert count_roots(p, lo, hi) == sum(1 for r in roots if lo < r <= hi)


def test_count_roots_matches_dense_sign_scan():
    # independent oracle: sign changes of a dense float evaluation, on
    # random square-free integer polynomials whose roots are well separated
    import numpy as np

    rng = random.Random(5)
    grid = np.arange(-10 + 1e-4 / 2, 10, 1e-4)
    checked = 0
    while checked < 40:
        coeffs = [rng.randint(-20, 20) for _ in range(rng.randint(1, 8) + 1)]
        if coeffs[-1] == 0:
            continue
        p = P(coeffs)
        real = [complex(r) for r in sympy.Poly(list(reversed(coeffs)), sympy.Symbol("x")).nroots()]
        real = sorted(r.real for r in real if abs(r.imag) < 1e-12)
        gaps = [b - a for a, b in zip(real, real[1:])]
        if gaps and min(gaps) < 1e-2:
            continue
        vals = np.polyval(list(reversed(coeffs)), grid)
        scan = int(np.sum(np.sign(vals[1:]) * np.sign(vals[:-1]) < 0))
        assert count_roots(p, -10, 10) == scan
        checked += 1


@given(poly_st(7))
def test_count_roots_matches_sympy(p):
    if p.is_zero() or p.degree == 0:
        return
    ref = _sympy(p).count_roots()  # counts with multiplicity
    distinct = len(set(_sympy(squarefree_part(p)).real_roots()))
    assert count_roots(p, -10**6, 10**6) == distinct
    assert distinct <= ref


@given(constructed_polys())
def test_sturm_variations_at_infinity_count_all_roots(case):
    p, roots = case
    sf = squarefree_part(p)
    ch = sturm_chain(sf)
    assert ch.variations_at_infinity(False) - ch.variations_at_infinity(True) == len(roots)


def test_squarefree_decomposition():
    p = P.from_roots([1, 2, 2, 3, 3, 3]) * 5
    parts = squarefree_decomposition(p)
    assert {k for _, k in parts} >= {1, 2, 3}
    prod = P([1])
    for f, k in parts:
        prod = prod * f ** k
    assert prod.monic() == p.monic()


# ---------------------------------------------------------------------------
# isolation and refinement

@pytest.mark.parametrize("method", ["sturm", "descartes"])
def test_isolate_roots_examples(method):
    ivs = isolate_roots(P.from_roots([F(1, 3), F(2, 3)]), 0, 1, method=method)
    assert len(ivs) == 2
    assert F(1, 3) in ivs[0] and F(2, 3) in ivs[1]
    assert isolate_roots(P([1, 0, 1]), 0, 1, method=method) == []
    g0 = poly_derivative(F1) * F0 - F1 * poly_derivative(F0)
    ivs = isolate_roots(g0, 0, 1, method=method)
    assert any(F(1, 2) in iv for iv in ivs)


@pytest.mark.parametrize("method", ["sturm", "descartes"])
@given(case=constructed_polys())
def test_isolation_is_one_root_per_interval(method, case):
    p, roots = case
    ivs = isolate_roots(p, -10, 10, method=method)
    assert len(ivs) == len(roots)
    for iv, r in zip(ivs, roots):
        assert iv.lo < iv.hi and r in iv
    for a, b in zip(ivs, ivs[1:]):
        assert a.hi <= b.lo


def test_refine_root_examples():
    p = P([-1, 2])
    iv = refine_root(p, IsolatingInterval(F(0), F(1)), F(1, 10**6))
    assert iv.width < F(1, 10**6) and F(1, 2) in iv
    q = P([F(-1, 2), 0, 1])
    (iv,) = isolate_roots(q, 0, 1)
    iv = refine_root(q, iv, F(1, 10**4))
    # bisection oracle on doubles
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if mid * mid < 0.5 else (lo, mid)
    assert float(iv.lo) <= lo <= float(iv.hi)
    assert abs(float(iv.midpoint) - 0.7071) < 1e-4
    narrow = IsolatingInterval(F(7071, 10**4), F(7072, 10**4))
    assert refine_root(q, narrow, F(1, 10**3)) is narrow


@given(constructed_polys(), st.integers(1, 30))
def test_refine_root_preserves_sign_change(case, bits):
    p, roots = case
    sf = squarefree_part(p)
    eps = F(1, 2**bits)
    for iv, r in zip(isolate_roots(sf, -10, 10), roots):
        out = refine_root(sf, iv, eps)
        assert out.width < eps and r in out
        assert sf.sign_at(out.hi) == 0 or sf.sign_at(out.lo) * sf.sign_at(out.hi) < 0


# ---------------------------------------------------------------------------
# nonnegativity certificates

@pytest.mark.parametrize("method", ["sturm", "descartes"])
def test_certify_nonnegative_examples(method):
    assert certify_nonnegative(P([2]), 0, 1, method=method)
    assert not certify_nonnegative(P([1, -2]), 0, 1, method=method)
    assert certify_nonnegative(F1 - F(3, 4) * F0, 0, 1, method=method)
    assert not certify_nonnegative(F1 - F(3, 4) * F0 - P([F(1, 10**9)]), 0, 1, method=method)


@pytest.mark.parametrize("method", ["sturm", "descartes"])
def test_certify_touching_roots(method):
    touching = P.from_roots([F(1, 3), F(1, 3), F(3, 4), F(3, 4)])
    assert certify_nonnegative(touching, 0, 1, method=method)
    assert not certify_nonnegative(touching * P([F(-1, 2), 1]), 0, 1, method=method)
    # a sign change exactly at an endpoint is outside the open interval
    assert certify_nonnegative(P([0, 1]), 0, 1, method=method)


@given(constructed_polys(), st.sampled_from([1, -1]))
def test_certificate_routes_agree(case, sign):
    p, _ = case
    p = p * sign
    a = certify_nonnegative(p, F(-7, 2), F(9, 2), method="sturm")
    b = certify_nonnegative(p, F(-7, 2), F(9, 2), method="descartes")
    assert a.holds == b.holds
    # oracle: exact evaluation at the roots' neighbourhoods decides the sign
    pts = [F(-7, 2), F(9, 2)] + [F(k, 8) for k in range(-28, 37)]
    if any(p(x) < 0 for x in pts):
        assert not a.holds
    if not a.holds and a.witness is not None:
        assert p(a.witness) < 0


def test_symmetric_reduction_of_f1():
    q = symmetric_reduction(F1, 0, 1)
    assert q is not None
    s = P([F(-1, 2), 1]) ** 2  # (h - 1/2)^2
    assert poly_compose(q, s) == F1
    assert symmetric_reduction(P([0, 1]), 0, 1) is None
