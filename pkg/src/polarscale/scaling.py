"""Decay-rate polynomials of the erasure channel and certified scaling bounds.

``f_0(h) = h(1 - h)`` and ``2 f_n(h) = f_{n-1}(h^2) + f_{n-1}(2h - h^2)``
describe how fast ``E[H_n (1 - H_n)]`` shrinks along the polarization
process of BEC(h). The per-step decay is bounded below by
``a_m = inf_h f_{m+1}(h) / f_m(h)`` and turned into a scaling exponent
``mu_m = -1 / log2(a_m)``.

Every f_n is symmetric about 1/2, so the expensive work happens in the
variable ``s = (h - 1/2)^2`` on ``[0, 1/4]`` where degrees halve.
"""
from __future__ import annotations

import math
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from mpmath import iv

from .exactpoly import (
    IsolatingInterval,
    NonnegativityCertificate,
    RationalPolynomial,
    certify_nonnegative,
    format_rational,
    isolate_roots,
    parse_rational,
    poly_gcd,
    refine_root,
    squarefree_part,
    symmetric_reduction,
)

__all__ = [
    "GuardError",
    "CertificationError",
    "FnFamily",
    "SuitabilityCertificate",
    "CriticalCandidate",
    "ScalingArtifacts",
    "ScalingBound",
    "RateBoundReport",
    "build_fn_family",
    "check_suitable",
    "compute_am",
    "compute_mu",
    "compute_table",
    "critical_points",
    "check_lemma1",
    "rate_bound",
    "h2",
    "h2_inverse",
    "h2_inverse_lower_bound",
    "DEFAULT_PRECISION",
    "MAX_N_GUARD",
    "MAX_M_GUARD",
    "BEC_LIMIT_RATIO",
]

DEFAULT_PRECISION = Fraction(1, 10**4)
MAX_N_GUARD = 12
MAX_M_GUARD = 10
# 2 ** (-1 / 3.62713), the conjectured limit of a_m
BEC_LIMIT_RATIO = 0.8260

_HALF = Fraction(1, 2)
_QUARTER = Fraction(1, 4)


class GuardError(ValueError):
    """Requested size exceeds the exact-computation guard."""


class CertificationError(RuntimeError):
    """A bound that should certify did not; signals an internal inconsistency."""


# ---------------------------------------------------------------------------
# the f_n family

@dataclass(frozen=True)
class FnFamily:
    max_n: int
    polys: tuple[RationalPolynomial, ...]

    def __getitem__(self, n: int) -> RationalPolynomial:
        return self.polys[n]

    def __len__(self) -> int:
        return len(self.polys)


_family: list[RationalPolynomial] = []
_family_lock = threading.Lock()
_H = RationalPolynomial.x()
_ONE_MINUS_H = RationalPolynomial([1, -1])


def _extend_family(max_n: int) -> None:
    with _family_lock:
        if not _family:
            _family.append(_H * _ONE_MINUS_H)
        while len(_family) <= max_n:
            prev = _family[-1]
            # f_{n-1}(2h - h^2) = f_{n-1}(1 - (1-h)^2) = g(1 - h) with g = f_{n-1}(h^2),
            # because f_{n-1} is symmetric about 1/2
            g = prev(_H * _H)
            _family.append((g + g.scale(-1).shift(-1)) / 2)


def _check_guard(value: int, limit: int, name: str, no_guard: bool) -> None:
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    if value > limit and not no_guard:
        raise GuardError(
            f"{name}={value} exceeds the exact-computation guard {limit}; "
            "pass no_guard=True (CLI: --no-guard) or use the float path in experiments"
        )


def build_fn_family(max_n: int, no_guard: bool = False) -> FnFamily:
    """Exact ``f_0, ..., f_max_n``; ``deg f_n = 2**(n+1)``."""
    _check_guard(max_n, MAX_N_GUARD, "max_n", no_guard)
    _extend_family(max_n)
    return FnFamily(max_n, tuple(_family[: max_n + 1]))


def _fn(n: int) -> RationalPolynomial:
    if len(_family) <= n:
        _extend_family(n)
    return _family[n]


# ---------------------------------------------------------------------------
# suitability

@dataclass(frozen=True)
class SuitabilityCertificate:
    """Concavity evidence for ``f_m``: ``-f_m'' >= 0`` on [0, 1]."""

    m: int
    suitable: bool
    second_derivative_degree: int
    sign_changing_roots: int | None
    certificate: NonnegativityCertificate

    def __bool__(self) -> bool:
        return self.suitable

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "suitable": self.suitable,
            "second_derivative_degree": self.second_derivative_degree,
            "sign_changing_roots": self.sign_changing_roots,
            "certificate": self.certificate.to_dict(),
        }


@lru_cache(maxsize=None)
def _suitability(m: int) -> SuitabilityCertificate:
    neg_dd = -_fn(m).derivative().derivative()
    cert = certify_nonnegative(neg_dd, 0, 1, method="sturm")
    return SuitabilityCertificate(m, cert.holds, neg_dd.degree, cert.sign_changing_roots, cert)


def check_suitable(m: int, no_guard: bool = False) -> SuitabilityCertificate:
    """Certify concavity of ``f_m`` on [0, 1] with a Sturm root count."""
    _check_guard(m, MAX_N_GUARD, "m", no_guard)
    return _suitability(m)


# ---------------------------------------------------------------------------
# a_m and mu_m

@dataclass(frozen=True)
class CriticalCandidate:
    """One place where the infimum of ``f_{m+1}/f_m`` may sit.

    ``h_lo, h_hi`` enclose the candidate on the right half ``[1/2, 1]``
    (the mirror image is implied by symmetry). ``value_hi`` is a dyadic
    upper bound on a ratio value near the candidate, hence on the infimum.
    ``exact_value`` is set for the closed-form candidates h = 1/2 and
    h in {0, 1} (where the ratio is a limit after cancelling ``h(1-h)``).
    """

    kind: str
    h_lo: Fraction
    h_hi: Fraction
    value_hi: Fraction
    exact_value: Fraction | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "h_lo": format_rational(self.h_lo),
            "h_hi": format_rational(self.h_hi),
            "value_hi": format_rational(self.value_hi),
            "exact_value": None if self.exact_value is None else format_rational(self.exact_value),
        }


@dataclass(frozen=True)
class ScalingArtifacts:
    common_factor: RationalPolynomial
    g_degree: int
    interior_roots: int
    candidates: tuple[CriticalCandidate, ...]
    minimizer: CriticalCandidate
    certificate: NonnegativityCertificate

    def to_dict(self) -> dict:
        return {
            "common_factor": [format_rational(c) for c in self.common_factor.coefficients],
            "g_degree": self.g_degree,
            "interior_roots": self.interior_roots,
            "candidates": [c.to_dict() for c in self.candidates],
            "minimizer": self.minimizer.to_dict(),
            "certificate": self.certificate.to_dict(),
        }


@dataclass(frozen=True)
class ScalingBound:
    m: int
    a_lo: Fraction
    a_hi: Fraction
    mu_lo: float
    suitable: bool | None
    precision: Fraction
    artifacts: ScalingArtifacts | None = field(default=None, compare=False)

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "a_lo": format_rational(self.a_lo),
            "a_hi": format_rational(self.a_hi),
            "mu_lo": self.mu_lo,
            "suitable": self.suitable,
        }

    def csv_row(self) -> list[str]:
        # a_m and mu_m are truncated, never rounded up
        a_trunc = math.floor(self.a_lo * 10**6) / 10**6
        mu_trunc = math.floor(self.mu_lo * 10**6) / 10**6
        return [str(self.m), f"{a_trunc:.6f}", f"{mu_trunc:.6f}", str(self.suitable).lower()]


def _mu_floor(a: Fraction) -> float:
    """Largest double not above ``-1/log2(a)`` for rational ``0 < a < 1``."""
    iv.dps = 60
    x = iv.mpf(a.numerator) / a.denominator
    mu = -iv.log(2) / iv.log(x)
    lo = mu.a
    f = float(lo.a) if hasattr(lo, "a") else float(lo)
    while iv.mpf(f) > lo:
        f = math.nextafter(f, -math.inf)
    return f


def _sqrt_bounds(q: Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    r = math.isqrt(q.numerator * scale * scale // q.denominator)
    lo = Fraction(r, scale)
    hi = lo if lo * lo == q else Fraction(r + 1, scale)
    return lo, hi


@lru_cache(maxsize=None)
def _reduced_pair(m: int):
    """``(common, F1, F0)`` with ``f_{m+1} = common*F1``, ``f_m = common*F0`` and
    ``gcd(F1, F0) = 1``."""
    f1, f0 = _fn(m + 1), _fn(m)
    common = RationalPolynomial([0, 1, -1])  # h(1 - h), keeps both quotients positive
    try:
        F1, r1 = divmod(f1, common)
        F0, r0 = divmod(f0, common)
        ok = r1.is_zero() and r0.is_zero() and poly_gcd(F1, F0).degree == 0
    except ValueError:
        ok = False
    if not ok:
        common = poly_gcd(f1, f0)
        if common(_HALF) < 0:
            common = -common
        F1, F0 = divmod(f1, common)[0], divmod(f0, common)[0]
    return common, F1, F0


@lru_cache(maxsize=None)
def _symmetric_pair(m: int):
    """``A, B`` with ``F1(h) = A(s)``, ``F0(h) = B(s)``, ``s = (h - 1/2)^2``, and
    ``g_s = A'B - AB'``."""
    _, F1, F0 = _reduced_pair(m)
    A = symmetric_reduction(F1, 0, 1)
    B = symmetric_reduction(F0, 0, 1)
    if A is None or B is None:
        raise CertificationError("reduced f-ratio lost its symmetry about 1/2")
    g = A.derivative() * B - A * B.derivative()
    return A, B, g


def critical_points(m: int, route: str = "symmetric", method: str = "auto") -> list[IsolatingInterval]:
    """Isolating intervals (in h, within (0, 1]) for the roots of
    ``g = F1' F0 - F1 F0'`` where ``F1/F0`` is the reduced ratio.

    ``route="direct"`` isolates g itself; ``route="symmetric"`` isolates
    the half-degree polynomial in ``s = (h - 1/2)^2`` and maps each root to
    the right half (the left half mirrors it, h = 1/2 is always a root).
    Both routes must agree; the direct one is practical for small m only.
    """
    if route == "direct":
        _, F1, F0 = _reduced_pair(m)
        g = F1.derivative() * F0 - F1 * F0.derivative()
        return isolate_roots(g, 0, 1, method=method)
    if route != "symmetric":
        raise ValueError(f"unknown route {route!r}")
    _, _, g = _symmetric_pair(m)
    out = []
    for iv_s in isolate_roots(g, 0, _QUARTER, method=method):
        if iv_s.hi == _QUARTER and g.sign_at(_QUARTER) == 0:
            continue  # h in {0, 1}: not interior
        lo, _ = _sqrt_bounds(iv_s.lo)
        _, hi = _sqrt_bounds(iv_s.hi)
        out.append(IsolatingInterval(_HALF + lo, _HALF + hi))
    return out


def _ratio(A: RationalPolynomial, B: RationalPolynomial, s: Fraction) -> Fraction:
    den = B(s)
    if den <= 0:
        raise CertificationError("denominator of the reduced ratio is not positive")
    return A(s) / den


def _dyadic_floor(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(x * (1 << bits)), 1 << bits)


def _dyadic_ceil(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)


@lru_cache(maxsize=None)
def _compute_am_cached(m: int, precision: Fraction, method: str) -> tuple:
    A, B, g = _symmetric_pair(m)
    common, _, _ = _reduced_pair(m)
    gsf = squarefree_part(g)
    width = precision / (1 << 20)
    bits = max(8, math.ceil(math.log2(4 / precision)) + 1)
    candidates: list[CriticalCandidate] = []

    def usable(t: Fraction) -> bool:
        return 0 < t < _QUARTER and gsf.sign_at(t) != 0

    def near_value(points: Iterable[Fraction]) -> Fraction | None:
        # exact values run to thousands of digits; a dyadic ceiling keeps
        # them upper bounds while bounding their size
        vals = [_ratio(A, B, t) for t in points if usable(t)]
        return _dyadic_ceil(min(vals), bits + 4) if vals else None

    # h = 1/2, i.e. s = 0
    center = near_value([width])
    if center is not None:
        hi_h = _HALF + _sqrt_bounds(width)[1]
        candidates.append(CriticalCandidate("center", _HALF, hi_h, center, _ratio(A, B, Fraction(0))))
    # h in {0, 1}, i.e. s = 1/4: limit of the reduced ratio
    edge = near_value([_QUARTER - width])
    if edge is not None:
        lo_h = _HALF + _sqrt_bounds(_QUARTER - width)[0]
        candidates.append(CriticalCandidate("boundary", lo_h, Fraction(1), edge, _ratio(A, B, _QUARTER)))
    isolated = isolate_roots(g, 0, _QUARTER, method=method)
    interior = 0
    for iv_s in isolated:
        if iv_s.hi == _QUARTER and g.sign_at(_QUARTER) == 0:
            continue
        interior += 1
        r = refine_root(gsf, iv_s, width)
        pts = [r.lo, r.hi]
        if not any(usable(t) for t in pts):
            pts += [r.hi - r.width / 4, r.hi + r.width / 4]
        value = near_value(pts)
        if value is None:
            raise CertificationError(f"no usable evaluation point near root in {r}")
        lo_h = _HALF + _sqrt_bounds(r.lo)[0]
        hi_h = _HALF + _sqrt_bounds(r.hi)[1]
        candidates.append(CriticalCandidate("interior", lo_h, hi_h, value))
    if not candidates:
        raise CertificationError("no candidate for the infimum")

    best = min(candidates, key=lambda c: (c.value_hi, c.h_lo))
    a_hi = best.value_hi
    a_lo = _dyadic_floor(a_hi - precision / 4, bits)
    samples = [c.h_lo for c in candidates] + [c.h_hi for c in candidates]
    cert = certify_nonnegative(_fn(m + 1) - _fn(m) * a_lo, 0, 1, method=method, samples=samples)
    if not cert.holds:
        raise CertificationError(f"f_{m + 1} - a_lo f_{m} >= 0 failed for a_lo={a_lo}")
    artifacts = ScalingArtifacts(
        common, 2 * g.degree + 1, 2 * interior + 1, tuple(candidates), best, cert
    )
    return a_lo, a_hi, artifacts


def compute_am(
    m: int,
    precision=DEFAULT_PRECISION,
    *,
    method: str = "auto",
    with_suitability: bool = True,
    no_guard: bool = False,
) -> ScalingBound:
    """Certified enclosure ``a_lo <= a_m < a_hi`` with ``a_hi - a_lo <= precision``.

    The ratio ``f_{m+1}/f_m`` is first reduced by the common factor
    ``h(1-h)``; its critical points are isolated exactly and refined, the
    ratio evaluated near each of them and at the two closed-form
    candidates gives ``a_hi``, and ``a_lo`` is a dyadic number below that
    which is then proven with ``f_{m+1} - a_lo f_m >= 0`` on [0, 1].
    """
    _check_guard(m, MAX_M_GUARD, "m", no_guard)
    precision = parse_rational(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")
    a_lo, a_hi, artifacts = _compute_am_cached(m, precision, method)
    suitable = check_suitable(m, no_guard=True).suitable if with_suitability else None
    return ScalingBound(m, a_lo, a_hi, _mu_floor(a_lo), suitable, precision, artifacts)


def compute_mu(m: int, precision=DEFAULT_PRECISION, **kwargs) -> ScalingBound:
    """Same record as :func:`compute_am`; ``mu_lo`` is ``-1/log2(a_lo)`` rounded down."""
    return compute_am(m, precision, **kwargs)


def _table_row(args) -> ScalingBound:
    m, precision, method, no_guard = args
    return compute_am(m, precision, method=method, no_guard=no_guard)


def compute_table(
    max_m: int, precision=DEFAULT_PRECISION, *, threads: int = 1, method: str = "auto", no_guard: bool = False
) -> list[ScalingBound]:
    """Rows ``m = 0..max_m``; with ``threads > 1`` rows run in worker processes."""
    _check_guard(max_m, MAX_M_GUARD, "max_m", no_guard)
    precision = parse_rational(precision)
    jobs = [(m, precision, method, no_guard) for m in range(max_m + 1)]
    if threads > 1 and len(jobs) > 1:
        # largest rows first so the pool stays busy
        order = sorted(range(len(jobs)), key=lambda k: -jobs[k][0])
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(order, pool.map(_table_row, [jobs[k] for k in order])))
        return [results[k] for k in range(len(jobs))]
    return [_table_row(job) for job in jobs]


# ---------------------------------------------------------------------------
# ratio checks and the rate bound

def check_lemma1(m: int, n: int, grid: Sequence, precision=DEFAULT_PRECISION) -> bool:
    """Exact test of ``f_n(h) >= a_lo**(n-m) * f_m(h)`` at every grid point."""
    if m > n:
        raise ValueError("need m <= n")
    if m == n:
        return True
    a = compute_am(m, precision, with_suitability=False).a_lo
    fn, fm = _fn(n), _fn(m)
    factor = a ** (n - m)
    return all(fn(h) >= factor * fm(h) for h in map(parse_rational, grid))


def h2(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def h2_inverse(x: float, tol: float = 1e-12) -> float:
    """The ``y`` in [0, 1/2] with ``h2(y) = x``, by bisection."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"h2_inverse needs 0 <= x <= 1, got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if h2(mid) < x:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def h2_inverse_lower_bound(x: float) -> float:
    """``x / (8 log2(1/x))``, a lower bound on ``h2_inverse(x)`` for ``x <= 1/sqrt(2)``."""
    if not 0.0 <= x <= math.sqrt(0.5):
        raise ValueError("the bound needs 0 <= x <= 1/sqrt(2)")
    if x == 0.0:
        return 0.0
    return x / (8 * math.log2(1 / x))


@dataclass(frozen=True)
class RateBoundReport:
    """Quantities tying the decay bound to rate and reliability.

    With ``gamma = f_m(H)/a^m`` (``a = 2**(-1/mu)``), at least a
    ``gamma/4 * 2**(n(1-1/mu))`` share of the good indices for rate
    ``rate_R`` have entropy above ``gamma/4 * 2**(-n/mu)``, so any code of
    rate ``>= rate_R`` has reliability sum at least ``reliability_lower``.
    ``reliability_lower`` is ``None`` for ``n = 0`` where the bound is void.
    """

    m: int
    n: int
    H_W: Fraction
    a_lo: Fraction
    mu: float
    gamma: Fraction
    alpha: Fraction
    beta: Fraction
    theta: float
    gap: Fraction
    rate_R_exact: Fraction
    rate_R: float
    reliability_lower: float | None

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "H_W": format_rational(self.H_W),
            "a_lo": format_rational(self.a_lo),
            "mu": self.mu,
            "gamma": format_rational(self.gamma),
            "alpha": format_rational(self.alpha),
            "beta": format_rational(self.beta),
            "theta": self.theta,
            "gap": format_rational(self.gap),
            "rate_R": self.rate_R,
            "reliability_lower": self.reliability_lower,
        }


def rate_bound(m: int, n: int, H_W, precision=DEFAULT_PRECISION) -> RateBoundReport:
    H_W = parse_rational(H_W)
    if not 0 < H_W < 1:
        raise ValueError(f"H(W) must lie in (0, 1), got {H_W}")
    if n < m:
        raise ValueError("need n >= m")
    if not check_suitable(m):
        raise ValueError(f"m={m} is not suitable (f_m is not concave)")
    bound = compute_am(m, precision, with_suitability=False)
    a = bound.a_lo
    gamma = _fn(m)(H_W) / a**m
    alpha, beta = gamma / 4, gamma / 2
    theta = 1.0 / bound.mu_lo
    gap = gamma / 4 * a**n
    rate = 1 - H_W - gap
    reliability = None
    if n > 0:
        # (gamma^2/16) 2^{n(1-2 theta)} / (8 n theta) with 2^{-n theta} = a^n
        reliability = float(gamma * gamma / 16 * 2**n * a ** (2 * n)) / (8 * n * theta)
    return RateBoundReport(
        m, n, H_W, a, bound.mu_lo, gamma, alpha, beta, theta, gap, rate, float(rate), reliability
    )
