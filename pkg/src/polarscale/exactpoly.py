"""Exact univariate polynomial algebra over the rationals.

Polynomials are stored densely as a tuple of integer numerators over one
positive common denominator, which keeps the hot loops (pseudo-remainders,
Horner evaluation) in integer arithmetic. Public accessors hand out
:class:`fractions.Fraction` coefficients.

Root counting follows Sturm's theorem with the half-open convention
``(lo, hi]``: ``V(lo) - V(hi)`` is the number of distinct real roots in
``(lo, hi]``, with zero entries dropped from the sign sequences. This holds
even when ``lo`` or ``hi`` is itself a root.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Sequence

try:
    import gmpy2

    _mpz = gmpy2.mpz

    def _content(values: Sequence) -> int:
        return gmpy2.gcd(*values) if len(values) > 1 else abs(values[0])

except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    gmpy2 = None
    _mpz = int

    def _content(values: Sequence) -> int:
        g = 0
        for v in values:
            g = gcd(g, v)
            if g == 1:
                break
        return g


BigRational = Fraction

__all__ = [
    "BigRational",
    "RationalPolynomial",
    "SturmChain",
    "IsolatingInterval",
    "NonnegativityCertificate",
    "NotSquareFreeError",
    "parse_rational",
    "format_rational",
    "poly_add",
    "poly_compose",
    "poly_derivative",
    "poly_eval",
    "poly_gcd",
    "squarefree_part",
    "squarefree_decomposition",
    "sturm_chain",
    "count_roots",
    "isolate_roots",
    "refine_root",
    "certify_nonnegative",
    "symmetric_reduction",
    "STURM_DEGREE_LIMIT",
]


def parse_rational(value) -> Fraction:
    """Parse ``"num/den"``, an integer, a decimal string or a number exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats given on the command line are meant as decimals, not binary
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        num, _, den = text.partition("/")
        if num.lstrip("+-").isdigit() and (not den or den.isdigit()):
            # big integer strings bypass the interpreter's digit limit
            return Fraction(_parse_int(num), _parse_int(den) if den else 1)
        return Fraction(text)
    return Fraction(value)


def _parse_int(text: str) -> int:
    return int(gmpy2.mpz(text)) if gmpy2 is not None else int(text)


def _int_str(v: int) -> str:
    return gmpy2.mpz(v).digits() if gmpy2 is not None else str(v)


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{_int_str(q.numerator)}/{_int_str(q.denominator)}"


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _strip(c: list) -> list:
    while c and not c[-1]:
        c.pop()
    return c


class NotSquareFreeError(ValueError):
    """Raised when a Sturm chain is requested for a polynomial with repeated roots."""

    def __init__(self, factor: "RationalPolynomial"):
        super().__init__(f"polynomial is not square-free; repeated factor {factor}")
        self.factor = factor


class RationalPolynomial:
    """Dense polynomial with rational coefficients, lowest degree first.

    Instances are immutable and hashable. Arithmetic operators accept other
    polynomials as well as ints and Fractions.
    """

    __slots__ = ("_num", "_den")

    def __init__(self, coefficients: Iterable = ()):
        fr = [parse_rational(c) for c in coefficients]
        den = 1
        for c in fr:
            den = den * c.denominator // gcd(den, c.denominator)
        nums = [int(c.numerator * (den // c.denominator)) for c in fr]
        self._set(nums, den)

    def _set(self, nums: list, den: int) -> None:
        nums = _strip([int(v) for v in nums])
        if not nums:
            self._num, self._den = (), 1
            return
        g = gcd(_content(nums), den) if den != 1 else 1
        if g > 1:
            nums = [v // g for v in nums]
            den //= g
        self._num = tuple(nums)
        self._den = int(den)

    @classmethod
    def from_integers(cls, nums: Iterable[int], den: int = 1) -> "RationalPolynomial":
        if den <= 0:
            raise ValueError("denominator must be positive")
        p = cls.__new__(cls)
        p._set(list(nums), den)
        return p

    @classmethod
    def constant(cls, c) -> "RationalPolynomial":
        return cls([c])

    @classmethod
    def x(cls) -> "RationalPolynomial":
        return cls.from_integers([0, 1])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "RationalPolynomial":
        p = cls.from_integers([1])
        for r in roots:
            p = p * cls([-parse_rational(r), 1])
        return p

    # -- accessors -------------------------------------------------------
    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self._den) for v in self._num)

    @property
    def numerators(self) -> tuple[int, ...]:
        """Integer numerators over :attr:`denominator`."""
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def degree(self) -> int:
        """Degree, or -1 for the zero polynomial."""
        return len(self._num) - 1

    def is_zero(self) -> bool:
        return not self._num

    def is_constant(self) -> bool:
        return len(self._num) <= 1

    @property
    def leading_coefficient(self) -> Fraction:
        if not self._num:
            return Fraction(0)
        return Fraction(self._num[-1], self._den)

    def __len__(self) -> int:
        return len(self._num)

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self._num):
            return Fraction(self._num[k], self._den)
        return Fraction(0)

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other) -> "RationalPolynomial | None":
        if isinstance(other, RationalPolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial.constant(other)
        return None

    def __add__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        a, b = self._num, q._num
        da, db = self._den, q._den
        den = da * db // gcd(da, db)
        fa, fb = den // da, den // db
        n = max(len(a), len(b))
        out = [
            (a[i] * fa if i < len(a) else 0) + (b[i] * fb if i < len(b) else 0)
            for i in range(n)
        ]
        return RationalPolynomial.from_integers(out, den)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial.from_integers([-v for v in self._num], self._den)

    def __sub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return q + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return RationalPolynomial.from_integers(
                [v * c.numerator for v in self._num], self._den * c.denominator
            )
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return RationalPolynomial.from_integers(
            _int_mul(self._num, other._num), self._den * other._den
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                raise ZeroDivisionError("polynomial division by zero")
            return self * (1 / c)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = RationalPolynomial.from_integers([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, other: "RationalPolynomial"):
        return poly_divmod(self, other)

    def __floordiv__(self, other):
        return poly_divmod(self, other)[0]

    def __mod__(self, other):
        return poly_divmod(self, other)[1]

    def __eq__(self, other):
        q = self._coerce(other)
        if q is None:
            return NotImplemented
        return self._num == q._num and self._den == q._den

    def __hash__(self):
        return hash((self._num, self._den))

    def __call__(self, x):
        if isinstance(x, RationalPolynomial):
            return poly_compose(self, x)
        return poly_eval(self, x)

    def __repr__(self):
        if not self._num:
            return "RationalPolynomial(0)"
        terms = []
        for k, c in enumerate(self.coefficients):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*h" if k == 1 else f"{c}*h^{k}")
        return "RationalPolynomial(" + " + ".join(terms) + ")"

    # -- conveniences ----------------------------------------------------
    def derivative(self) -> "RationalPolynomial":
        return poly_derivative(self)

    def monic(self) -> "RationalPolynomial":
        if not self._num:
            return self
        lead = self._num[-1]
        return RationalPolynomial([Fraction(v, lead) for v in self._num])

    def primitive(self) -> tuple[Fraction, "RationalPolynomial"]:
        """Split into ``content * primitive`` with integer primitive part and
        positive content."""
        if not self._num:
            return Fraction(0), self
        g = _content(self._num)
        return Fraction(int(g), self._den), RationalPolynomial.from_integers(
            [v // g for v in self._num]
        )

    def sign_at(self, x) -> int:
        return _sign(_eval_scaled(self._num, parse_rational(x)))

    def shift(self, c) -> "RationalPolynomial":
        """Return ``p(h + c)``."""
        c = parse_rational(c)
        nums = _taylor_shift(list(self._num), c.numerator, c.denominator)
        return RationalPolynomial.from_integers(nums, self._den * c.denominator ** max(self.degree, 0))

    def scale(self, a) -> "RationalPolynomial":
        """Return ``p(a * h)``."""
        a = parse_rational(a)
        d = self.degree
        if d < 0:
            return self
        nums = [v * a.numerator**k * a.denominator ** (d - k) for k, v in enumerate(self._num)]
        return RationalPolynomial.from_integers(nums, self._den * a.denominator**d)

    def to_json(self) -> str:
        return json.dumps([format_rational(c) for c in self.coefficients])

    @classmethod
    def from_json(cls, text: str) -> "RationalPolynomial":
        return cls(json.loads(text))


# ---------------------------------------------------------------------------
# integer kernels

def _int_mul(a: Sequence[int], b: Sequence[int]) -> list:
    if not a or not b:
        return []
    if len(a) < len(b):
        a, b = b, a
    out = [0] * (len(a) + len(b) - 1)
    for j, y in enumerate(b):
        if y:
            for i, x in enumerate(a):
                out[i + j] += x * y
    return out


def _eval_scaled(nums: Sequence[int], x: Fraction) -> int:
    """Return ``b**d * p(a/b)`` for integer coefficients; sign equals sign of p(x)."""
    if not nums:
        return 0
    a, b = x.numerator, x.denominator
    if b == 1:
        v = 0
        for c in reversed(nums):
            v = v * a + c
        return v
    v = nums[-1]
    bp = 1
    for c in reversed(nums[:-1]):
        bp *= b
        v = v * a + c * bp
    return v


def _taylor_shift(nums: list, a: int, b: int) -> list:
    """Integer coefficients of ``b**d * p(h + a/b)``."""
    d = len(nums) - 1
    if d <= 0:
        return list(nums)
    # r(t) = b**d p(t/b); then b**d p(h + a/b) = r(a + b h)
    c = [v * b ** (d - k) for k, v in enumerate(nums)] if b != 1 else list(nums)
    if a:
        for i in range(d):
            for k in range(d - 1, i - 1, -1):
                c[k] += a * c[k + 1]
    if b != 1:
        bk = 1
        for k in range(1, d + 1):
            bk *= b
            c[k] *= bk
    return c


def _prem(a: list, b: list) -> list:
    """Pseudo-remainder ``lc(b)**(da-db+1) * a mod b`` for integer lists."""
    db = len(b) - 1
    lb = b[-1]
    if len(a) - 1 == db + 1 and db > 0:
        # normal step: prem = lb^2 a - (q1 h + q0) b
        q1 = lb * a[-1]
        q0 = lb * a[-2] - a[-1] * b[-2]
        l2 = lb * lb
        r = [l2 * a[0] - q0 * b[0]]
        r.extend(l2 * a[i] - q1 * b[i - 1] - q0 * b[i] for i in range(1, db))
        return _strip(r)
    r = list(a)
    for k in range(len(a) - 1 - db, -1, -1):
        c = r[db + k]
        top = db + k
        for i in range(top):
            r[i] *= lb
        r[top] = 0
        if c:
            for i in range(db):
                r[i + k] -= c * b[i]
    return _strip(r[:db] if db > 0 else [])


def _content_fast(c: list):
    """gcd of all entries: guess from a few, then confirm by divisibility."""
    if len(c) <= 3 or gmpy2 is None:
        return _content(c)
    g = gmpy2.gcd(c[0], c[-1], c[len(c) // 2])
    if g == 1:
        return g
    for v in c:
        if not gmpy2.is_divisible(v, g):
            g = gmpy2.gcd(g, v)
            if g == 1:
                break
    return g


def _divexact(c: list, g, sign: int = 1) -> list:
    if g == 1:
        return [sign * v for v in c] if sign != 1 else c
    if gmpy2 is not None:
        dx = gmpy2.divexact
        return [dx(v, g) for v in c] if sign == 1 else [-dx(v, g) for v in c]
    return [sign * (v // g) for v in c]


def _primitive_int(c: list) -> list:
    return _divexact(c, _content_fast(c))


def _int_derivative(c: Sequence) -> list:
    return [k * c[k] for k in range(1, len(c))]


def _to_mpz(nums: Iterable[int]) -> list:
    return [_mpz(v) for v in nums]


def _sturm_sequence(p: "RationalPolynomial") -> Iterator[list]:
    """Yield the primitive integer Sturm sequence of ``p``.

    Each yielded element is a positive multiple of the corresponding element
    of the classical sequence ``p, p', -rem(p, p'), ...``. The last element
    yielded is ``gcd(p, p')`` up to a nonzero scalar.
    """
    a = _primitive_int(_to_mpz(p.numerators))
    yield a
    if len(a) <= 1:
        return
    b = _primitive_int(_int_derivative(a))
    yield b
    while len(b) > 1:
        r = _prem(a, b)
        if not r:
            return
        delta = len(a) - len(b)
        # prem = lc(b)**(delta+1) * rem; Sturm wants -rem up to a positive factor
        flip = -1 if (b[-1] < 0 and delta % 2 == 0) else 1
        r = _divexact(r, _content_fast(r), -flip)
        yield r
        a, b = b, r


def _variations(signs: Iterable[int]) -> int:
    count = 0
    last = 0
    for s in signs:
        if s:
            if last and s != last:
                count += 1
            last = s
    return count


_PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563)


def _gcd_degree_mod(a: Sequence[int], b: Sequence[int], prime: int) -> int:
    """Degree of gcd(a, b) over GF(prime); inputs must keep their degree mod prime."""
    x = [int(v) % prime for v in a]
    y = [int(v) % prime for v in b]
    while y and y[-1] == 0:
        y.pop()
    while y:
        inv = pow(y[-1], -1, prime)
        dy = len(y) - 1
        while len(x) - 1 >= dy and x:
            c = x[-1] * inv % prime
            off = len(x) - 1 - dy
            if c:
                for i in range(dy):
                    x[off + i] = (x[off + i] - c * y[i]) % prime
            x.pop()
            while x and x[-1] == 0:
                x.pop()
        x, y = y, x
    return len(x) - 1


def _coprime_mod(a: Sequence[int], b: Sequence[int]) -> bool:
    """True only if a and b are certainly coprime over Q.

    The degree of the gcd can only go up modulo a prime that keeps both
    leading coefficients, so a constant modular gcd proves coprimality.
    """
    for prime in _PRIMES:
        if a[-1] % prime and b[-1] % prime:
            return _gcd_degree_mod(a, b, prime) == 0
    return False


def _is_squarefree(nums: Sequence[int]) -> bool:
    if len(nums) <= 2:
        return True
    if _coprime_mod(nums, _int_derivative(nums)):
        return True
    return len(list(_sturm_sequence(RationalPolynomial.from_integers(nums)))[-1]) == 1


# ---------------------------------------------------------------------------
# Descartes rule of signs on subintervals

def _descartes_transform(nums: Sequence[int], a: Fraction, b: Fraction) -> list:
    """Coefficients of ``(1 + x)**d * p((a + b x) / (1 + x))`` up to a positive factor.

    Positive roots x correspond one-to-one with roots of p in (a, b), so
    the coefficient sign variations bound the root count there (Descartes),
    and the bound is exact when it is 0 or 1.
    """
    d = len(nums) - 1
    c = _taylor_shift(list(nums), a.numerator, a.denominator)
    u, v = (b - a).numerator, (b - a).denominator
    if u != 1 or v != 1:
        up, vp = [1], [1]
        for _ in range(d):
            up.append(up[-1] * u)
            vp.append(vp[-1] * v)
        c = [c[k] * up[k] * vp[d - k] for k in range(d + 1)]
    c = _primitive_int(c[::-1])
    return _taylor_shift(c, 1, 1)


def _descartes_isolate(nums: list, lo: Fraction, hi: Fraction):
    """Isolate the roots of a square-free integer polynomial in the open (lo, hi).

    Returns ``(intervals, exact)`` where each open interval holds exactly one
    root and ``exact`` lists rational roots hit at bisection points.
    """
    intervals, exact = [], []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        v = _variations(_sign(c) for c in _descartes_transform(nums, a, b))
        if v == 0:
            continue
        if v == 1:
            intervals.append((a, b))
            continue
        m = (a + b) / 2
        if _eval_scaled(nums, m) == 0:
            exact.append(m)
        stack.append((m, b))
        stack.append((a, m))
    return intervals, exact


def _descartes_half_open(nums: list, lo: Fraction, hi: Fraction) -> list:
    """Half-open isolating intervals ``(a, b]`` for all roots in (lo, hi]."""
    intervals, exact = _descartes_isolate(nums, lo, hi)
    if _eval_scaled(nums, hi) == 0:
        exact.append(hi)
    roots = set(exact)
    items = [(a, b, False) for a, b in intervals] + [(r, r, True) for r in exact]
    items.sort(key=lambda t: (t[1], t[0]))
    out = []
    prev = lo
    for a, b, is_exact in items:
        if is_exact:
            out.append((prev, b))
            prev = b
            continue
        while b in roots:
            # the right end is another root: bisect until the root sits left of it
            m = (a + b) / 2
            if _eval_scaled(nums, m) == 0:
                roots.add(m)
                b = m
                break
            if _variations(_sign(c) for c in _descartes_transform(nums, a, m)) == 1:
                b = m
            else:
                a = m
        out.append((max(a, prev), b))
        prev = b
    return out


def _descartes_sign(nums: list, lo: Fraction, hi: Fraction) -> tuple[bool, Fraction | None]:
    """Decide whether a square-free integer polynomial is >= 0 on [lo, hi].

    Subdivides until every piece has a transformed coefficient list of one
    sign. Returns ``(holds, witness)`` with a point of negativity on failure.
    """
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        c = _descartes_transform(nums, a, b)
        if all(v >= 0 for v in c):
            continue
        m = (a + b) / 2
        if all(v <= 0 for v in c) or _eval_scaled(nums, m) < 0:
            return False, m
        stack.append((m, b))
        stack.append((a, m))
    return True, None


# ---------------------------------------------------------------------------
# public operations

def poly_add(p: RationalPolynomial, q: RationalPolynomial) -> RationalPolynomial:
    return p + q


def poly_derivative(p: RationalPolynomial) -> RationalPolynomial:
    return RationalPolynomial.from_integers(_int_derivative(p.numerators), p.denominator)


def poly_eval(p: RationalPolynomial, x) -> Fraction:
    """Exact value ``p(x)`` by integer Horner evaluation."""
    x = parse_rational(x)
    d = p.degree
    if d < 0:
        return Fraction(0)
    return Fraction(_eval_scaled(p.numerators, x), p.denominator * x.denominator**d)


def poly_compose(p: RationalPolynomial, q: RationalPolynomial) -> RationalPolynomial:
    """Return ``p(q(h))``.

    Linear ``q`` goes through a Taylor shift, monomial ``q`` through
    coefficient spreading; everything else uses Horner's scheme.
    """
    if p.degree <= 0:
        return p
    if q.degree <= 0:
        return RationalPolynomial.constant(poly_eval(p, q[0]))
    qc = q.coefficients
    if q.degree == 1:
        a0, a1 = qc
        return p.scale(a1).shift(a0 / a1)
    if all(c == 0 for c in qc[:-1]):
        k = q.degree
        lead = qc[-1]
        nums = [0] * (p.degree * k + 1)
        for i, v in enumerate(p.numerators):
            nums[i * k] = v
        spread = RationalPolynomial.from_integers(nums, p.denominator)
        return spread if lead == 1 else _scale_powers(spread, lead, k)
    # generic Horner over integers: scale q to integer coefficients
    qn, qd = q.numerators, q.denominator
    d = p.degree
    pn = p.numerators
    acc = [pn[-1]]
    dpow = 1
    for k in range(d - 1, -1, -1):
        dpow *= qd
        acc = _int_mul(acc, qn)
        if acc:
            acc[0] += pn[k] * dpow
        else:
            acc = [pn[k] * dpow]
    return RationalPolynomial.from_integers(acc, p.denominator * qd**d)


def _scale_powers(p: RationalPolynomial, lead: Fraction, k: int) -> RationalPolynomial:
    # p has nonzero coefficients only at multiples of k; coefficient at j*k gets lead**j
    coeffs = list(p.coefficients)
    for i in range(0, len(coeffs), k):
        coeffs[i] *= lead ** (i // k)
    return RationalPolynomial(coeffs)


def poly_divmod(p: RationalPolynomial, q: RationalPolynomial):
    """Exact Euclidean division over Q."""
    if q.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if p.degree < q.degree:
        return RationalPolynomial(), p
    r = list(p.coefficients)
    qc = q.coefficients
    lq = qc[-1]
    dq = q.degree
    quo = [Fraction(0)] * (p.degree - dq + 1)
    for k in range(p.degree - dq, -1, -1):
        c = r[dq + k] / lq
        quo[k] = c
        if c:
            for i in range(dq + 1):
                r[i + k] -= c * qc[i]
    return RationalPolynomial(quo), RationalPolynomial(r[:dq])


def _exact_quotient(p: RationalPolynomial, q: RationalPolynomial) -> RationalPolynomial:
    """Divide when ``q`` is known to divide ``p``.

    With ``q`` made primitive, Gauss's lemma keeps the quotient integral, so
    the long division runs on integers without scaling.
    """
    cq, qi = q.primitive()
    b = qi.numerators
    a = list(p.numerators)
    db = len(b) - 1
    lb = b[-1]
    quo = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c, rem = divmod(a[db + k], lb)
        if rem:
            raise ValueError("polynomial does not divide exactly")
        quo[k] = c
        if c:
            for i in range(db + 1):
                a[i + k] -= c * b[i]
    if any(a[:db]):
        raise ValueError("polynomial does not divide exactly")
    return RationalPolynomial.from_integers(quo, p.denominator) / cq


def poly_gcd(p: RationalPolynomial, q: RationalPolynomial) -> RationalPolynomial:
    """Monic gcd via a primitive pseudo-remainder sequence."""
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd of zero polynomials")
    if q.is_zero():
        return p.monic()
    if p.is_zero():
        return q.monic()
    a = _primitive_int(_to_mpz(p.numerators))
    b = _primitive_int(_to_mpz(q.numerators))
    if len(a) < len(b):
        a, b = b, a
    if len(b) > 1 and _coprime_mod(a, b):
        return RationalPolynomial.from_integers([1])
    while len(b) > 1:
        r = _prem(a, b)
        if not r:
            break
        a, b = b, _primitive_int(r)
    if len(b) == 1:
        return RationalPolynomial.from_integers([1])
    return RationalPolynomial.from_integers(b).monic()


def squarefree_part(p: RationalPolynomial) -> RationalPolynomial:
    if p.degree <= 0:
        return p
    g = poly_gcd(p, p.derivative())
    if g.degree == 0:
        return p
    return _exact_quotient(p, g)


def squarefree_decomposition(p: RationalPolynomial) -> list[tuple[RationalPolynomial, int]]:
    """Yun's algorithm: ``p = c * prod(f_i ** i)`` with square-free, coprime ``f_i``.

    Only factors of positive degree are returned, with their multiplicity.
    """
    if p.degree <= 0:
        return []
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = _exact_quotient(p, a)
    c = _exact_quotient(dp, a)
    d = c - b.derivative()
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        if a.degree > 0:
            out.append((a, i))
        b = _exact_quotient(b, a)
        c = _exact_quotient(d, a)
        d = c - b.derivative()
        i += 1
    return out


@dataclass(frozen=True)
class SturmChain:
    """Sturm sequence ``p, p', ...`` ending in a nonzero constant."""

    sequence: tuple[RationalPolynomial, ...]

    def __len__(self) -> int:
        return len(self.sequence)

    def variations(self, x) -> int:
        x = parse_rational(x)
        return _variations(_sign(_eval_scaled(s.numerators, x)) for s in self.sequence)

    def variations_at_infinity(self, positive: bool = True) -> int:
        signs = []
        for s in self.sequence:
            lead = _sign(s.numerators[-1])
            if not positive and s.degree % 2:
                lead = -lead
            signs.append(lead)
        return _variations(signs)

    def count(self, lo, hi) -> int:
        return self.variations(lo) - self.variations(hi)


def sturm_chain(p: RationalPolynomial) -> SturmChain:
    if p.is_zero():
        raise ValueError("Sturm chain of the zero polynomial")
    seq = list(_sturm_sequence(p))
    if len(seq[-1]) > 1:
        raise NotSquareFreeError(RationalPolynomial.from_integers(seq[-1]).monic())
    polys = [p]
    if p.degree > 0:
        polys.append(p.derivative())
        polys.extend(RationalPolynomial.from_integers(s) for s in seq[2:])
    return SturmChain(tuple(polys))


def _check_interval(lo, hi) -> tuple[Fraction, Fraction]:
    lo, hi = parse_rational(lo), parse_rational(hi)
    if not lo < hi:
        raise ValueError(f"empty interval: lo={lo} must be < hi={hi}")
    return lo, hi


def _count_squarefree(p: RationalPolynomial, lo: Fraction, hi: Fraction) -> tuple[int, list | None]:
    """Stream the Sturm sequence and count roots in (lo, hi].

    Returns ``(count, gcd)`` where ``gcd`` is the integer gcd(p, p') when it is
    nonconstant (the count is then not meaningful).
    """
    signs_lo, signs_hi = [], []
    last = None
    for s in _sturm_sequence(p):
        signs_lo.append(_sign(_eval_scaled(s, lo)))
        signs_hi.append(_sign(_eval_scaled(s, hi)))
        last = s
    if last is not None and len(last) > 1:
        return 0, last
    return _variations(signs_lo) - _variations(signs_hi), None


def count_roots(p: RationalPolynomial, lo, hi) -> int:
    """Number of distinct real roots of ``p`` in ``(lo, hi]``."""
    if p.is_zero():
        raise ValueError("cannot count roots of the zero polynomial")
    lo, hi = _check_interval(lo, hi)
    if p.degree == 0:
        return 0
    n, g = _count_squarefree(p, lo, hi)
    if g is None:
        return n
    sf = _exact_quotient(p, RationalPolynomial.from_integers(g))
    n, g = _count_squarefree(sf, lo, hi)
    assert g is None
    return n


@dataclass(frozen=True)
class IsolatingInterval:
    """Half-open interval ``(lo, hi]`` holding exactly one real root."""

    lo: Fraction
    hi: Fraction
    multiplicity_free: bool = True

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        x = parse_rational(x)
        return self.lo < x <= self.hi


STURM_DEGREE_LIMIT = 128
"""Above this degree the ``auto`` method switches from Sturm sequences to
Descartes subdivision, whose cost grows far more slowly with the degree."""


def _resolve_method(method: str, degree: int) -> str:
    if method == "auto":
        return "sturm" if degree <= STURM_DEGREE_LIMIT else "descartes"
    if method not in ("sturm", "descartes"):
        raise ValueError(f"unknown method {method!r}; use sturm, descartes or auto")
    return method


def isolate_roots(p: RationalPolynomial, lo, hi, method: str = "sturm") -> list[IsolatingInterval]:
    """Isolate every distinct real root in ``(lo, hi]``.

    ``method="sturm"`` bisects guided by Sturm counts; ``"descartes"`` bisects
    guided by sign variations of the transformed coefficients; ``"auto"``
    picks by degree. Both return half-open isolating intervals.
    """
    if p.is_zero():
        raise ValueError("cannot isolate roots of the zero polynomial")
    lo, hi = _check_interval(lo, hi)
    if p.degree == 0:
        return []
    sf = p if _is_squarefree(p.numerators) else squarefree_part(p)
    if _resolve_method(method, sf.degree) == "descartes":
        nums = _primitive_int(_to_mpz(sf.numerators))
        return [IsolatingInterval(a, b) for a, b in _descartes_half_open(nums, lo, hi)]
    chain = sturm_chain(sf)
    cache: dict[Fraction, int] = {}

    def v(x: Fraction) -> int:
        if x not in cache:
            cache[x] = chain.variations(x)
        return cache[x]

    out = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        n = v(a) - v(b)
        if n == 0:
            continue
        if n == 1:
            out.append(IsolatingInterval(a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b))
        stack.append((a, m))
    out.sort(key=lambda iv: iv.lo)
    return out


def refine_root(p: RationalPolynomial, iv: IsolatingInterval, eps) -> IsolatingInterval:
    """Shrink ``iv`` by bisection until its width is below ``eps``.

    ``p`` must change sign across ``iv`` (odd-multiplicity root). The root
    stays inside the half-open interval throughout.
    """
    eps = parse_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if iv.width < eps:
        return iv
    lo, hi = iv.lo, iv.hi
    s_hi = p.sign_at(hi)
    if s_hi == 0:
        return IsolatingInterval(max(lo, hi - eps / 2), hi)
    s_lo = p.sign_at(lo)
    if s_lo == s_hi:
        raise ValueError("interval does not bracket a sign change of p")
    while hi - lo >= eps:
        m = (lo + hi) / 2
        s = p.sign_at(m)
        if s == 0:
            return IsolatingInterval(max(lo, m - eps / 2), m)
        if s == s_hi:
            hi = m
        else:
            lo = m
    return IsolatingInterval(lo, hi)


@dataclass(frozen=True)
class NonnegativityCertificate:
    """Outcome of :func:`certify_nonnegative`; truthy iff ``p >= 0`` on ``[lo, hi]``."""

    holds: bool
    lo: Fraction
    hi: Fraction
    sign_lo: int
    sign_hi: int
    sign_changing_roots: int | None
    sample: Fraction | None
    sample_sign: int | None
    witness: Fraction | None = None
    symmetric_reduction: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "sign_lo": self.sign_lo,
            "sign_hi": self.sign_hi,
            "sign_changing_roots": self.sign_changing_roots,
            "sample": None if self.sample is None else format_rational(self.sample),
            "sample_sign": self.sample_sign,
            "witness": None if self.witness is None else format_rational(self.witness),
            "symmetric_reduction": self.symmetric_reduction,
        }


def symmetric_reduction(p: RationalPolynomial, lo, hi) -> RationalPolynomial | None:
    """Return ``P`` with ``p(x) = P((x - mid)**2)`` when ``p`` is symmetric
    about ``mid = (lo + hi) / 2``, else ``None``."""
    if p.degree <= 0:
        return p
    return _even_reduction(p, parse_rational(lo), parse_rational(hi))


def _even_reduction(p: RationalPolynomial, lo: Fraction, hi: Fraction):
    """If ``p`` is symmetric about the midpoint, return ``P`` with
    ``p(x) = P((x - mid)**2)``; otherwise ``None``."""
    if p.degree < 2 or p.degree % 2:
        return None
    mid = (lo + hi) / 2
    centered = p.shift(mid)
    nums = centered.numerators
    if any(nums[1::2]):
        return None
    return RationalPolynomial.from_integers(nums[0::2], centered.denominator)


def _odd_part(p: RationalPolynomial) -> RationalPolynomial:
    """Product of the square-free factors of odd multiplicity."""
    odd = RationalPolynomial.from_integers([1])
    for f, k in squarefree_decomposition(p):
        if k % 2:
            odd = odd * f
    return odd


def _interior_sample(p: RationalPolynomial, lo: Fraction, hi: Fraction) -> Fraction:
    x = (lo + hi) / 2
    step = (hi - lo) / 4
    while p.sign_at(x) == 0:
        x = x - step
        step /= 2
    return x


def certify_nonnegative(
    p: RationalPolynomial, lo, hi, method: str = "auto", samples: Iterable = ()
) -> NonnegativityCertificate:
    """Decide exactly whether ``p(x) >= 0`` for every ``x`` in ``[lo, hi]``.

    Endpoint signs are checked first (plus any caller ``samples``, which only
    speed up refutation). A polynomial symmetric about the midpoint is
    rewritten in the squared distance to the midpoint, halving its degree.
    Then, with ``method="sturm"``, sign-changing (odd multiplicity) roots
    in the open interval are counted and the sign at one interior point
    fixes the constant sign; with ``"descartes"`` the interval is split
    until every piece has transformed coefficients of one sign. Touching
    roots of even multiplicity never break nonnegativity because both
    routes work on the product of odd-multiplicity factors.
    """
    lo, hi = _check_interval(lo, hi)
    s_lo, s_hi = p.sign_at(lo), p.sign_at(hi)

    def result(holds, roots=None, sample=None, sample_sign=None, witness=None, sym=False, notes=()):
        return NonnegativityCertificate(
            holds, lo, hi, s_lo, s_hi, roots, sample, sample_sign, witness, sym, tuple(notes)
        )

    if p.is_zero():
        return result(True, 0)
    if s_lo < 0:
        return result(False, witness=lo)
    if s_hi < 0:
        return result(False, witness=hi)
    mid = (lo + hi) / 2
    s_mid = p.sign_at(mid)
    if s_mid < 0:
        return result(False, sample=mid, sample_sign=s_mid, witness=mid)
    for x in samples:
        x = parse_rational(x)
        if lo <= x <= hi and p.sign_at(x) < 0:
            return result(False, sample=x, sample_sign=-1, witness=x)
    if p.degree == 0:
        return result(True, 0, mid, s_mid)

    reduced = _even_reduction(p, lo, hi)
    if reduced is not None:
        inner_samples = [(parse_rational(x) - mid) ** 2 for x in samples]
        inner = certify_nonnegative(
            reduced, Fraction(0), ((hi - lo) / 2) ** 2, method, inner_samples
        )
        witness = None
        if inner.witness is not None:
            x = mid + _sqrt_floor(inner.witness)
            if p.sign_at(x) < 0:
                witness = x
        return NonnegativityCertificate(
            inner.holds, lo, hi, s_lo, s_hi, inner.sign_changing_roots,
            inner.sample, inner.sample_sign, witness, True, inner.notes,
        )

    nums = _primitive_int(_to_mpz(p.numerators))
    squarefree = _is_squarefree(nums)
    q = p
    if not squarefree:
        q = _odd_part(p)
        if q.degree <= 0:
            # every root has even multiplicity; the sign never changes
            x = _interior_sample(p, lo, hi)
            s = p.sign_at(x)
            return result(s > 0, 0, x, s, None if s > 0 else x, notes=["even multiplicities only"])
        q = q if p.numerators[-1] > 0 else -q
        nums = _primitive_int(_to_mpz(q.numerators))

    if _resolve_method(method, q.degree) == "descartes":
        holds, witness = _descartes_sign(nums, lo, hi)
        return result(holds, witness=witness, notes=["descartes subdivision"])

    n, _ = _count_squarefree(q, lo, hi)
    if q.sign_at(hi) == 0:
        n -= 1
    if n > 0:
        return result(False, n, notes=["sturm"])
    x = _interior_sample(p, lo, hi)
    s = p.sign_at(x)
    return result(s > 0, n, x, s, None if s > 0 else x, notes=["sturm"])


def _sqrt_floor(q: Fraction) -> Fraction:
    # rational point near sqrt(q), only used to report a witness location
    from math import isqrt

    scale = 1 << 64
    return Fraction(isqrt(q.numerator * scale * scale // q.denominator), scale)
