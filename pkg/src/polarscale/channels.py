"""Finite-output binary memoryless symmetric channels with exact probabilities.

A channel is a list of output classes ``(W(y|0), W(y|1))``. All classes
share one integer denominator internally, so the polarization transforms
are integer products followed by merging of outputs with equal
likelihood ratio. Merging is exact; there is no quantization, and an
alphabet that outgrows the cap raises :class:`ChannelCapError`.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exactpoly import format_rational, parse_rational

try:
    from gmpy2 import gcd as _gcd, isqrt as _isqrt, mpz as _mpz
except ImportError:  # pragma: no cover
    from math import gcd as _gcd, isqrt as _isqrt

    _mpz = int

__all__ = [
    "DEFAULT_CAP",
    "ChannelCapError",
    "BmsChannel",
    "ChannelStats",
    "PolarNode",
    "TreeDecayCheck",
    "make_bec",
    "make_bsc",
    "stats",
    "transform_minus",
    "transform_plus",
    "polarize_tree",
    "path_to_index",
    "index_to_path",
    "check_lemma2",
    "check_exminus_explus",
    "stat_bounds",
    "channel_to_json",
    "channel_from_json",
]

DEFAULT_CAP = 4096
# per-symbol error budget of the floating-point entropy terms
H_TERM_ERROR = 1e-15
_SQRT_BITS = 64


class ChannelCapError(RuntimeError):
    def __init__(self, cap: int, path: Sequence[int] | None = None):
        self.cap = cap
        self.path = tuple(path) if path is not None else None
        where = "" if path is None else f" at path {''.join(map(str, path)) or '(root)'}"
        super().__init__(f"output alphabet exceeds cap of {cap} likelihood-ratio classes{where}")


def _lr_key(a0: int, a1: int) -> tuple:
    g = _gcd(a0, a1)
    return (a0 // g, a1 // g)


def _lr_order(key: tuple) -> Fraction | float:
    x, y = key
    return Fraction(int(y), int(x)) if x else math.inf


class BmsChannel:
    """Canonical symmetric channel: classes merged by likelihood ratio
    ``W(y|1)/W(y|0)`` and sorted by it.

    ``nums`` holds integer pairs over the common denominator ``den``.
    """

    __slots__ = ("nums", "den")

    def __init__(self, nums: Sequence[tuple[int, int]], den: int, *, cap: int | None = None, check: bool = True):
        merged: dict = {}
        for a0, a1 in nums:
            if a0 < 0 or a1 < 0:
                raise ValueError("probabilities must be nonnegative")
            if a0 == 0 and a1 == 0:
                continue
            key = _lr_key(a0, a1)
            s = merged.get(key)
            merged[key] = (a0, a1) if s is None else (s[0] + a0, s[1] + a1)
            if cap is not None and len(merged) > cap:
                raise ChannelCapError(cap)
        items = sorted(merged.items(), key=lambda kv: _lr_order(kv[0]))
        pairs = [v for _, v in items]
        g = den
        for a0, a1 in pairs:
            g = _gcd(_gcd(g, a0), a1)
            if g == 1:
                break
        self.nums = tuple((_mpz(a0 // g), _mpz(a1 // g)) for a0, a1 in pairs)
        self.den = _mpz(den // g)
        if check:
            self._validate()

    def _validate(self) -> None:
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        s0 = sum(a0 for a0, _ in self.nums)
        s1 = sum(a1 for _, a1 in self.nums)
        if s0 != self.den or s1 != self.den:
            raise ValueError("each input row must sum to 1")
        keys = sorted((a0, a1) for a0, a1 in self.nums)
        if keys != sorted((a1, a0) for a0, a1 in self.nums):
            raise ValueError("channel is not symmetric")

    @classmethod
    def from_pairs(cls, pairs: Iterable, cap: int | None = None) -> "BmsChannel":
        fr = [(parse_rational(p0), parse_rational(p1)) for p0, p1 in pairs]
        den = 1
        for p0, p1 in fr:
            den = math.lcm(den, p0.denominator, p1.denominator)
        return cls([(int(p0 * den), int(p1 * den)) for p0, p1 in fr], den, cap=cap)

    @property
    def pairs(self) -> tuple[tuple[Fraction, Fraction], ...]:
        d = int(self.den)
        return tuple((Fraction(int(a0), d), Fraction(int(a1), d)) for a0, a1 in self.nums)

    def __len__(self) -> int:
        return len(self.nums)

    def __eq__(self, other) -> bool:
        return isinstance(other, BmsChannel) and self.den == other.den and self.nums == other.nums

    def __hash__(self) -> int:
        return hash((self.den, self.nums))

    def __repr__(self) -> str:
        body = ", ".join(f"({format_rational(p0)}, {format_rational(p1)})" for p0, p1 in self.pairs[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"BmsChannel([{body}{more}])"

    def __getstate__(self):
        return (tuple((int(a), int(b)) for a, b in self.nums), int(self.den))

    def __setstate__(self, state):
        nums, den = state
        self.nums = tuple((_mpz(a), _mpz(b)) for a, b in nums)
        self.den = _mpz(den)


def make_bec(h) -> BmsChannel:
    """Erasure channel: outputs 0, erasure and 1."""
    h = parse_rational(h)
    if not 0 <= h <= 1:
        raise ValueError(f"erasure probability must lie in [0, 1], got {h}")
    return BmsChannel.from_pairs([(1 - h, 0), (h, h), (0, 1 - h)])


def make_bsc(p) -> BmsChannel:
    p = parse_rational(p)
    if not 0 <= p <= Fraction(1, 2):
        raise ValueError(f"crossover probability must lie in [0, 1/2], got {p}")
    return BmsChannel.from_pairs([(1 - p, p), (p, 1 - p)])


# ---------------------------------------------------------------------------
# functionals

@dataclass(frozen=True)
class ChannelStats:
    """Entropy, Bhattacharyya parameter and ML error probability.

    ``H`` is an exact rational when every output is either perfectly
    informative or a full erasure, otherwise a double accurate to ``H_err``.
    ``Z`` is enclosed in ``[Z_lo, Z_hi]``; ``E`` and ``I = 1 - H`` follow.
    """

    H: Fraction | float
    H_err: float
    Z_lo: Fraction
    Z_hi: Fraction
    E: Fraction

    @property
    def Z(self) -> float:
        return float((self.Z_lo + self.Z_hi) / 2)

    @property
    def I(self) -> Fraction | float:  # noqa: E743
        return 1 - self.H

    @property
    def exact(self) -> bool:
        return isinstance(self.H, Fraction)

    def to_dict(self) -> dict:
        return {
            "H": format_rational(self.H) if self.exact else self.H,
            "H_err": self.H_err,
            "Z": self.Z,
            "Z_lo": format_rational(self.Z_lo),
            "Z_hi": format_rational(self.Z_hi),
            "E": format_rational(self.E),
            "I": format_rational(self.I) if self.exact else self.I,
        }


_LN2 = math.log(2)


def _entropy_term(a0: int, a1: int) -> float:
    """``log2((a0 + a1) / a1)`` computed without cancellation."""
    if a0 <= a1:
        return math.log1p(Fraction(int(a0), int(a1))) / _LN2 if a0 else 0.0
    return math.log2(Fraction(int(a0 + a1), int(a1)))


def stats(w: BmsChannel) -> ChannelStats:
    d = int(w.den)
    exact = all(a0 == 0 or a1 == 0 or a0 == a1 for a0, a1 in w.nums)
    if exact:
        H: Fraction | float = Fraction(int(sum(a1 for a0, a1 in w.nums if a0 == a1)), d)
        err = 0.0
    else:
        terms = [
            float(Fraction(int(a1), d)) * _entropy_term(a0, a1) for a0, a1 in w.nums if a1
        ]
        H = min(1.0, max(0.0, math.fsum(terms)))
        err = H_TERM_ERROR * len(terms)
    scale = 1 << _SQRT_BITS
    lo = hi = 0
    for a0, a1 in w.nums:
        r = int(_isqrt(a0 * a1 * scale * scale))
        lo += r
        hi += r if r * r == a0 * a1 * scale * scale else r + 1
    Z_lo, Z_hi = Fraction(lo, d * scale), Fraction(hi, d * scale)
    E = Fraction(int(sum(min(a0, a1) for a0, a1 in w.nums)), 2 * d)
    return ChannelStats(H, err, Z_lo, min(Z_hi, Fraction(1)), E)


def stat_bounds(st: ChannelStats, slack: float | None = None) -> dict[str, bool]:
    """Evaluate the three bound chains relating E, H and Z."""
    eps = st.H_err if slack is None else slack
    H, E = float(st.H), float(st.E)
    return {
        "2E<=H": 2 * E <= H + eps,
        "H<=Z": st.H <= st.Z_hi if st.exact else H <= float(st.Z_hi) + eps,
        "Z<=1": st.Z_lo <= 1,
        "H<=h2(E)": H <= _h2(E) + eps + 1e-15,
        "Z<=sqrt(1-(1-H)^2)": float(st.Z_lo) <= math.sqrt(max(0.0, 1 - (1 - H - eps) ** 2)) + 1e-15,
    }


def _h2(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


# ---------------------------------------------------------------------------
# transforms

def transform_minus(w: BmsChannel, cap: int | None = DEFAULT_CAP) -> BmsChannel:
    """``W^-(y1, y2 | x1) = 1/2 sum_x2 W(y1 | x1 + x2) W(y2 | x2)``."""
    nums = []
    for a0, a1 in w.nums:
        for b0, b1 in w.nums:
            nums.append((a0 * b0 + a1 * b1, a1 * b0 + a0 * b1))
    return BmsChannel(nums, 2 * w.den * w.den, cap=cap, check=False)


def transform_plus(w: BmsChannel, cap: int | None = DEFAULT_CAP) -> BmsChannel:
    """``W^+(y1, y2, x1 | x2) = 1/2 W(y1 | x1 + x2) W(y2 | x2)``."""
    nums = []
    for a0, a1 in w.nums:
        for b0, b1 in w.nums:
            nums.append((a0 * b0, a1 * b1))
            nums.append((a1 * b0, a0 * b1))
    return BmsChannel(nums, 2 * w.den * w.den, cap=cap, check=False)


# ---------------------------------------------------------------------------
# polarization tree

def path_to_index(path: Sequence[int]) -> int:
    """Index ``i`` whose ``i - 1`` has binary digits ``path``, first bit least significant."""
    return 1 + sum(b << k for k, b in enumerate(path))


def index_to_path(i: int, n: int) -> tuple[int, ...]:
    if not 1 <= i <= 1 << n:
        raise ValueError(f"index {i} outside 1..{1 << n}")
    return tuple(((i - 1) >> k) & 1 for k in range(n))


@dataclass(frozen=True)
class PolarNode:
    path: tuple[int, ...]
    index_i: int
    channel: BmsChannel
    stats: ChannelStats

    def to_dict(self, with_channel: bool = False) -> dict:
        out = {"index": self.index_i, "path": "".join(map(str, self.path)), "size": len(self.channel)}
        out.update(self.stats.to_dict())
        if with_channel:
            out["pairs"] = [[format_rational(a), format_rational(b)] for a, b in self.channel.pairs]
        return out


def _expand(w: BmsChannel, path: tuple, depth: int, cap: int | None) -> list[tuple[tuple, BmsChannel]]:
    level = [(path, w)]
    for _ in range(depth):
        nxt = []
        for p, c in level:
            try:
                nxt.append((p + (0,), transform_minus(c, cap)))
                nxt.append((p + (1,), transform_plus(c, cap)))
            except ChannelCapError as exc:
                raise ChannelCapError(exc.cap, p) from None
        level = nxt
    return level


def _subtree(args):
    w, path, depth, cap = args
    return [(p, c, stats(c)) for p, c in _expand(w, path, depth, cap)]


def polarize_tree(w: BmsChannel, n: int, cap: int | None = DEFAULT_CAP, threads: int = 1) -> list[PolarNode]:
    """All ``2**n`` synthetic channels, sorted by index."""
    if n < 0:
        raise ValueError("n must be >= 0")
    split = 0
    if threads > 1 and n > 1:
        split = min(n - 1, max(1, math.ceil(math.log2(threads))))
    tops = _expand(w, (), split, cap)
    jobs = [(c, p, n - split, cap) for p, c in tops]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_subtree, jobs))
    else:
        parts = [_subtree(job) for job in jobs]
    leaves = [PolarNode(p, path_to_index(p), c, st) for part in parts for p, c, st in part]
    leaves.sort(key=lambda node: node.index_i)
    return leaves


# ---------------------------------------------------------------------------
# enumeration checks

@dataclass(frozen=True)
class TreeDecayCheck:
    """``lhs = E[H_n(1 - H_n)]`` against ``rhs = a_lo**(n-m) f_m(H(W))``."""

    m: int
    n: int
    lhs: Fraction | float
    rhs: Fraction | float
    slack: float
    holds: bool

    def __bool__(self) -> bool:
        return self.holds


def leaf_mean_hh(leaves: Sequence[PolarNode]) -> tuple[Fraction | float, float]:
    """Uniform average of ``H(1 - H)`` over leaves with its error bound."""
    if all(node.stats.exact for node in leaves):
        total = sum((node.stats.H * (1 - node.stats.H) for node in leaves), Fraction(0))
        return total / len(leaves), 0.0
    vals = [float(node.stats.H) * (1 - float(node.stats.H)) for node in leaves]
    err = max(node.stats.H_err for node in leaves) + 1e-15
    return math.fsum(vals) / len(leaves), err


def check_lemma2(
    w: BmsChannel, m: int, n: int, slack: float = 1e-9, cap: int | None = DEFAULT_CAP, threads: int = 1
) -> TreeDecayCheck:
    from .scaling import _fn, check_suitable, compute_am

    if n < m:
        raise ValueError("need n >= m")
    if not check_suitable(m):
        raise ValueError(f"m={m} is not suitable")
    lhs, err = leaf_mean_hh(polarize_tree(w, n, cap, threads))
    st = stats(w)
    a = compute_am(m, with_suitability=False).a_lo
    H = st.H if st.exact else Fraction(st.H)
    rhs = a ** (n - m) * _fn(m)(H)
    if st.exact and isinstance(lhs, Fraction):
        return TreeDecayCheck(m, n, lhs, rhs, 0.0, lhs >= rhs)
    # |f_m'| <= 1 on [0, 1], so the entropy error moves rhs by at most H_err
    budget = slack + err + st.H_err
    return TreeDecayCheck(m, n, lhs, float(rhs), budget, float(lhs) + budget >= float(rhs))


def check_exminus_explus(w: BmsChannel, slack: float | None = None, cap: int | None = DEFAULT_CAP) -> bool:
    """``H <= H(W-) <= 1 - (1-H)^2`` and ``H^2 <= H(W+) <= H``."""
    s, sm, sp = stats(w), stats(transform_minus(w, cap)), stats(transform_plus(w, cap))
    eps = (s.H_err + sm.H_err + sp.H_err + 1e-15) if slack is None else slack
    if s.exact and sm.exact and sp.exact:
        eps = 0
        H, Hm, Hp = s.H, sm.H, sp.H
    else:
        H, Hm, Hp = float(s.H), float(sm.H), float(sp.H)
    return (
        H <= Hm + eps
        and Hm <= 1 - (1 - H) ** 2 + eps
        and H * H <= Hp + eps
        and Hp <= H + eps
    )


# ---------------------------------------------------------------------------
# serialization

def channel_to_json(w: BmsChannel) -> str:
    return json.dumps({"pairs": [[format_rational(a), format_rational(b)] for a, b in w.pairs]})


def channel_from_json(text: str, cap: int | None = DEFAULT_CAP) -> BmsChannel:
    data = json.loads(text)
    if not isinstance(data, dict) or "pairs" not in data:
        raise ValueError('channel JSON must be an object with a "pairs" list')
    return BmsChannel.from_pairs(data["pairs"], cap=cap)
