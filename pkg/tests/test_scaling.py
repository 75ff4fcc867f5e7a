from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from polarscale.exactpoly import RationalPolynomial as P, certify_nonnegative, count_roots, poly_compose
from polarscale.scaling import (
    BEC_LIMIT_RATIO,
    DEFAULT_PRECISION,
    GuardError,
    build_fn_family,
    check_lemma1,
    check_suitable,
    compute_am,
    compute_mu,
    compute_table,
    critical_points,
    h2,
    h2_inverse,
    h2_inverse_lower_bound,
    rate_bound,
)

F = Fraction
H = P.x()


# ---------------------------------------------------------------------------
# independent float oracle for f_n: the recursion evaluated pointwise

def f_float(n: int, h):
    if n == 0:
        return h * (1 - h)
    return (f_float(n - 1, h * h) + f_float(n - 1, 2 * h - h * h)) / 2


def ratio_oracle(m: int) -> float:
    """Grid minimum of f_{m+1}/f_m plus the boundary limit evaluated at h = 1e-30."""
    h = np.linspace(1e-4, 0.5, 50001)
    grid = float(np.min(f_float(m + 1, h) / f_float(m, h)))
    with mpmath.workdps(80):
        t = mpmath.mpf("1e-30")
        edge = float(f_float(m + 1, t) / f_float(m, t))
    return min(grid, edge)


# ---------------------------------------------------------------------------
# f_n family

@pytest.fixture(scope="module")
def family():
    return build_fn_family(10)


def test_family_base_examples(family):
    assert family[0] == P([0, 1, -1])
    assert family[1](F(1, 2)) == F(3, 16)
    for n in range(11):
        assert family[n](0) == 0 and family[n](1) == 0


def test_family_recursion_identity(family):
    sq, other = H * H, P([0, 2, -1])
    for n in range(1, 11):
        assert family[n] * 2 - poly_compose(family[n - 1], sq) - poly_compose(family[n - 1], other) == P()


def test_family_degree_and_symmetry(family):
    flip = P([1, -1])
    for n in range(11):
        assert family[n].degree == 2 ** (n + 1)
        assert poly_compose(family[n], flip) == family[n]


def test_family_matches_float_recursion(family):
    for n in range(6):
        for x in [0.1, 0.37, 0.5, 0.81]:
            assert float(family[n](F(x))) == pytest.approx(f_float(n, x), rel=1e-12)


def test_guards():
    with pytest.raises(GuardError, match="no_guard"):
        build_fn_family(13)
    with pytest.raises(GuardError):
        compute_am(11)
    with pytest.raises(GuardError):
        compute_table(11)


# ---------------------------------------------------------------------------
# suitability

@pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 5])
def test_check_suitable_small_m(m):
    cert = check_suitable(m)
    assert cert and cert.suitable
    assert cert.sign_changing_roots == 0
    assert cert.second_derivative_degree == 2 ** (m + 1) - 2


def test_suitability_certificate_rejects_convex_piece():
    # x^4 - x^2 is not concave on [0, 1]; the same machinery must say so
    assert not certify_nonnegative(-(P([0, 0, -1, 0, 1]).derivative().derivative()), 0, 1)


# ---------------------------------------------------------------------------
# a_m and mu_m

def test_compute_am_m0():
    b = compute_am(0)
    assert b.a_lo <= F(3, 4) < b.a_hi
    assert b.a_hi - b.a_lo <= DEFAULT_PRECISION
    assert abs(float(b.a_lo) - 0.75) <= 1e-4
    assert b.artifacts.minimizer.kind == "center"
    assert b.artifacts.minimizer.exact_value == F(3, 4)
    assert b.suitable is True


@pytest.mark.parametrize("m", range(6))
def test_compute_am_against_float_oracle(m):
    b = compute_am(m)
    oracle = ratio_oracle(m)
    assert float(b.a_lo) <= oracle + 1e-12
    assert oracle - float(b.a_hi) <= 1e-8
    assert 0 < b.a_hi - b.a_lo <= DEFAULT_PRECISION


def test_compute_am_tighter_precision():
    p = F(1, 10**6)
    b = compute_am(2, p)
    assert 0 < b.a_hi - b.a_lo <= p
    coarse = compute_am(2)
    assert coarse.a_lo <= b.a_hi and b.a_lo <= coarse.a_hi


@pytest.mark.parametrize("m", range(5))
def test_certification_soundness(m):
    b = compute_am(m)
    f1, f0 = build_fn_family(m + 1)[m + 1], build_fn_family(m)[m]
    assert certify_nonnegative(f1 - f0 * b.a_lo, 0, 1)
    samples = [b.artifacts.minimizer.h_lo, b.artifacts.minimizer.h_hi]
    refuted = certify_nonnegative(f1 - f0 * b.a_hi, 0, 1, method="descartes", samples=samples)
    assert not refuted
    assert refuted.witness is None or (f1 - f0 * b.a_hi)(refuted.witness) < 0


def test_a_lo_monotone_and_below_limit():
    rows = [compute_am(m) for m in range(6)]
    for a, b in zip(rows, rows[1:]):
        assert a.a_lo < b.a_lo
    assert all(float(r.a_lo) < BEC_LIMIT_RATIO for r in rows)


def test_compute_mu_rounds_down():
    b = compute_mu(0)
    assert b.mu_lo == pytest.approx(2.409, abs=1e-3)
    assert b.mu_lo <= -1 / math.log2(float(b.a_lo))
    with mpmath.workdps(50):
        exact = -1 / mpmath.log(mpmath.mpf(b.a_lo.numerator) / b.a_lo.denominator, 2)
    assert b.mu_lo <= exact


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_critical_point_routes_agree(m):
    sym = critical_points(m, route="symmetric")
    direct = critical_points(m, route="direct")
    assert any(F(1, 2) in iv for iv in direct)
    # unreduced g = f_{m+1}' f_m - f_{m+1} f_m' has the same interior roots
    fam = build_fn_family(m + 1)
    g = fam[m + 1].derivative() * fam[m] - fam[m + 1] * fam[m].derivative()
    assert count_roots(g, F(1, 2), F(1) - F(1, 10**9)) == len(sym)
    assert len(direct) == 2 * len(sym) + 1
    for iv in sym:
        assert count_roots(g, iv.lo, iv.hi) >= 1


def test_table_rows_and_serialization():
    rows = compute_table(2)
    assert [r.m for r in rows] == [0, 1, 2]
    d = rows[0].to_json_dict()
    assert set(d) == {"m", "a_lo", "a_hi", "mu_lo", "suitable"}
    assert Fraction(d["a_lo"]) == rows[0].a_lo
    row = rows[0].csv_row()
    assert row[0] == "0" and row[3] == "true"
    assert float(row[1]) <= float(rows[0].a_lo)


def test_table_is_schedule_independent():
    assert compute_table(3, threads=1) == compute_table(3, threads=3)


# ---------------------------------------------------------------------------
# ratio bound along the family

@pytest.mark.parametrize("m,n", [(0, 4), (2, 6), (4, 8), (3, 3)])
def test_check_lemma1(m, n):
    assert check_lemma1(m, n, [F(k, 64) for k in range(65)])


# ---------------------------------------------------------------------------
# rate bound

def test_rate_bound_m0():
    r = rate_bound(0, 10, F(1, 2))
    assert r.gamma == F(1, 4)
    assert 2 * r.alpha + r.beta == r.gamma
    assert r.rate_R == pytest.approx(0.5 - (1 / 16) * 2 ** (-10 / 2.409), abs=1e-5)
    assert r.rate_R_exact == F(1, 2) - F(1, 16) * r.a_lo**10


def test_rate_bound_n_equals_m():
    for m in (0, 2, 4):
        r = rate_bound(m, m, F(1, 3))
        assert r.gap == r.gamma / 4 * r.a_lo**m
        assert r.gap == build_fn_family(m)[m](F(1, 3)) / 4


def test_rate_bound_m8():
    r = rate_bound(8, 20, F(1, 2))
    assert r.mu == pytest.approx(3.553, abs=1e-3)
    assert r.gamma == build_fn_family(8)[8](F(1, 2)) / r.a_lo**8
    assert float(r.gamma) == pytest.approx(2 ** (8 / r.mu) * float(build_fn_family(8)[8](F(1, 2))), rel=1e-6)
    expected = float(r.gamma) ** 2 / 16 * 2 ** (20 * (1 - 2 * r.theta)) / (8 * 20 * r.theta)
    assert r.reliability_lower == pytest.approx(expected, rel=1e-5)


def test_rate_bound_errors():
    for H_W in (0, 1, F(3, 2)):
        with pytest.raises(ValueError):
            rate_bound(0, 4, H_W)
    with pytest.raises(ValueError):
        rate_bound(4, 2, F(1, 2))
    assert rate_bound(0, 0, F(1, 2)).reliability_lower is None


# ---------------------------------------------------------------------------
# binary entropy inverse

def test_h2_inverse_examples():
    assert h2_inverse(1.0) == 0.5
    assert h2_inverse(0.0) == 0.0
    y = h2_inverse(0.5)
    assert y == pytest.approx(brentq(lambda t: h2(t) - 0.5, 1e-15, 0.5, xtol=1e-15), abs=1e-11)
    assert y == pytest.approx(0.1100, abs=1e-4)
    assert y >= 0.5 / 8
    for bad in (-0.1, 1.5):
        with pytest.raises(ValueError):
            h2_inverse(bad)


@given(st.floats(min_value=1e-9, max_value=2**-0.5))
def test_h2_inverse_lower_bound_holds(x):
    assert h2_inverse_lower_bound(x) <= h2_inverse(x) + 1e-12


@given(st.floats(min_value=0.0, max_value=1.0))
def test_h2_inverse_is_inverse(x):
    y = h2_inverse(x)
    assert 0 <= y <= 0.5
    assert abs(h2(y) - x) < 1e-9
