"""Numerical experiments on the erasure channel.

Scaling-exponent fits from gap-to-capacity sweeps, the decay of
``E[H_n (1 - H_n)]``, an enumeration check of the probability bound used
in the rate argument, and Monte-Carlo successive cancellation decoding.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .construct import BEC_FLOAT_MAX_N, bec_float_leaves, max_rate_for_epsilon, reliability, select_good_indices
from .exactpoly import format_rational, parse_rational
from .scaling import rate_bound

__all__ = [
    "ScalingFit",
    "DecayReport",
    "LowEntropyCheck",
    "ScSimResult",
    "fit_mu",
    "decay_rate_bec",
    "check_lemma3",
    "sc_simulate",
    "wilson_interval",
    "bit_reverse",
    "sc_erasure_rates",
]

ENUM_MAX_N = 22
SC_MAX_N = 20
SC_BATCH = 2048
# relative error bound of the float leaf recursion, generous for n <= 26
_LEAF_REL_ERR = 1e-12


# ---------------------------------------------------------------------------
# scaling fit

@dataclass(frozen=True)
class ScalingFit:
    h: float
    epsilon: float
    samples: tuple[tuple[int, int, Fraction, float], ...]  # (n, N, R_max, gap)
    fit_ns: tuple[int, ...]
    slope: float
    intercept: float
    mu_hat: float
    fit_residual: float

    def rows(self) -> list[list]:
        out = []
        for n, N, r, gap in self.samples:
            line = 2 ** (self.intercept + self.slope * n)
            out.append([n, N, format_rational(r), repr(float(gap)), repr(float(line)), int(n in self.fit_ns)])
        return out

    def to_dict(self) -> dict:
        return {
            "channel": f"BEC({self.h})",
            "epsilon": self.epsilon,
            "samples": [
                {"n": n, "N": N, "R_max": format_rational(r), "gap": gap} for n, N, r, gap in self.samples
            ],
            "fit_ns": list(self.fit_ns),
            "slope": self.slope,
            "intercept": self.intercept,
            "mu_hat": self.mu_hat,
            "fit_residual": self.fit_residual,
        }


def fit_mu(epsilon: float, n_range: tuple[int, int], h: float = 0.5) -> ScalingFit:
    """Fit ``log2(I - R_max(n)) = c + slope * n`` over the upper half of ``n_range``;
    ``mu_hat = -1/slope``."""
    n_lo, n_hi = n_range
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= n_lo < n_hi <= BEC_FLOAT_MAX_N:
        raise ValueError(f"n_range must satisfy 0 <= lo < hi <= {BEC_FLOAT_MAX_N}")
    capacity = Fraction(1) - parse_rational(h)
    samples = []
    for n in range(n_lo, n_hi + 1):
        r = max_rate_for_epsilon(h, n, epsilon, mode="bec-float")
        samples.append((n, 1 << n, r, float(capacity - r)))
    half = n_lo + (n_hi - n_lo) / 2
    fit = [(n, gap) for n, _, _, gap in samples if n >= half]
    if len(fit) < 4:
        raise ValueError("need at least 4 samples in the upper half of the n-range")
    if any(gap <= 0 for _, gap in fit):
        raise ValueError("gap to capacity vanished; use a larger epsilon")
    x = np.array([n for n, _ in fit], dtype=float)
    y = np.log2([gap for _, gap in fit])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    if slope >= 0:
        raise ValueError("gap does not decrease with n; use a larger epsilon")
    residual = float(math.sqrt(res[0] / len(fit))) if len(res) else 0.0
    return ScalingFit(
        float(h), float(epsilon), tuple(samples), tuple(n for n, _ in fit),
        float(slope), float(intercept), float(-1 / slope), residual,
    )


# ---------------------------------------------------------------------------
# decay of E[H_n (1 - H_n)]

@dataclass(frozen=True)
class DecayReport:
    h: float
    ns: tuple[int, ...]
    values: tuple[float, ...]  # f_n(h)
    ratios: tuple[float, ...]  # f_{n+1}(h) / f_n(h)
    fitted_ratio: float  # 2**slope of log2 f_n against n over the upper half

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "n": list(self.ns),
            "f_n": list(self.values),
            "ratios": list(self.ratios),
            "fitted_ratio": self.fitted_ratio,
        }


def decay_rate_bec(h: float, n_range: tuple[int, int]) -> DecayReport:
    """``f_n(h) = E[H_n(1 - H_n)]`` from the float leaf values, and its per-step ratio."""
    n_lo, n_hi = n_range
    if not 0 <= n_lo <= n_hi <= BEC_FLOAT_MAX_N:
        raise ValueError(f"n_range must satisfy 0 <= lo <= hi <= {BEC_FLOAT_MAX_N}")
    ns = tuple(range(n_lo, n_hi + 1))
    values = []
    for n in ns:
        z = bec_float_leaves(h, n)
        values.append(float(np.mean(z * (1 - z))))
    ratios = tuple(b / a if a > 0 else math.nan for a, b in zip(values, values[1:]))
    fitted = math.nan
    upper = [(n, v) for n, v in zip(ns, values) if n >= n_lo + (n_hi - n_lo) / 2 and v > 0]
    if len(upper) >= 2:
        slope = np.polyfit([n for n, _ in upper], np.log2([v for _, v in upper]), 1)[0]
        fitted = float(2**slope)
    return DecayReport(float(h), ns, tuple(values), ratios, fitted)


# ---------------------------------------------------------------------------
# probability bound

@dataclass(frozen=True)
class LowEntropyCheck:
    """``Pr(H_n <= alpha 2^{-n theta}) <= I(W) - beta 2^{-n theta}`` on BEC(h).

    The leaf count uses float leaves; leaves within the float error of the
    threshold are counted as below it, so ``probability`` can only be
    overstated and ``holds`` is conservative.
    """

    h: float
    m: int
    n: int
    threshold: Fraction
    bound: Fraction
    below: int
    borderline: int
    probability: Fraction
    holds: bool

    def __bool__(self) -> bool:
        return self.holds


def check_lemma3(h: float, m: int, n: int) -> LowEntropyCheck:
    if not m <= n <= ENUM_MAX_N:
        raise ValueError(f"need m <= n <= {ENUM_MAX_N}")
    rep = rate_bound(m, n, parse_rational(h))
    a_n = rep.a_lo**n  # 2^{-n theta}
    threshold = rep.alpha * a_n
    bound = (1 - rep.H_W) - rep.beta * a_n
    z = bec_float_leaves(float(h), n)
    t = float(threshold)
    below = int(np.count_nonzero(z <= t * (1 - _LEAF_REL_ERR)))
    counted = int(np.count_nonzero(z <= t * (1 + _LEAF_REL_ERR)))
    prob = Fraction(counted, 1 << n)
    return LowEntropyCheck(float(h), m, n, threshold, bound, below, counted - below, prob, prob <= bound)


# ---------------------------------------------------------------------------
# successive cancellation on the erasure channel

def bit_reverse(k: int, n: int) -> int:
    out = 0
    for _ in range(n):
        out = (out << 1) | (k & 1)
        k >>= 1
    return out


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class ScSimResult:
    N: int
    R: Fraction
    h: float
    trials: int
    block_errors: int
    p_hat: float
    wilson_interval: tuple[float, float]
    bound_lo: float
    bound_hi: float
    seed: int
    indices: tuple[int, ...] = field(repr=False, default=())

    def consistent(self, sigmas: float = 3.0) -> bool:
        """Interval neither entirely above ``sum_E`` nor entirely below ``max_E``,
        up to ``sigmas`` standard errors."""
        lo, hi = self.wilson_interval
        sd = math.sqrt(max(self.p_hat * (1 - self.p_hat), 1.0 / self.trials) / self.trials)
        return lo <= self.bound_hi + sigmas * sd and hi >= self.bound_lo - sigmas * sd

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "R": format_rational(self.R),
            "h": self.h,
            "trials": self.trials,
            "block_errors": self.block_errors,
            "p_hat": self.p_hat,
            "wilson_lo": self.wilson_interval[0],
            "wilson_hi": self.wilson_interval[1],
            "max_E": self.bound_lo,
            "sum_E": self.bound_hi,
            "seed": self.seed,
            "consistent": self.consistent(),
        }


def _encode(u: np.ndarray) -> np.ndarray:
    """``x = u F^{(x)n}`` with ``F = [[1, 0], [1, 1]]`` in natural order."""
    x = u.copy()
    B, N = x.shape
    step = 1
    while step < N:
        v = x.reshape(B, N // (2 * step), 2, step)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        step *= 2
    return x


def _sc_decode(msg: np.ndarray, info: np.ndarray, genie: np.ndarray | None = None):
    """Successive cancellation with messages +1 (bit 0), -1 (bit 1), 0 (erased).

    Returns ``(u_hat, x_hat, erased)``; an erased information bit is
    guessed as 0. With ``genie`` (the true u), decisions fed back are the
    true bits, which exposes each synthetic channel on its own.
    """
    B, L = msg.shape
    if L == 1:
        m = msg[:, 0]
        erased = m == 0
        if info[0]:
            u = (m < 0).astype(np.uint8)
        else:
            u = np.zeros(B, dtype=np.uint8)
        fed = u if genie is None else genie[:, 0]
        return u[:, None], fed[:, None].copy(), erased[:, None]
    half = L // 2
    a, b = msg[:, :half], msg[:, half:]
    g1 = None if genie is None else genie[:, :half]
    g2 = None if genie is None else genie[:, half:]
    u1, x1, e1 = _sc_decode(a * b, info[:half], g1)
    flipped = a * (1 - 2 * x1.astype(np.int8))
    u2, x2, e2 = _sc_decode(np.where(b != 0, b, flipped), info[half:], g2)
    return (
        np.concatenate([u1, u2], axis=1),
        np.concatenate([x1 ^ x2, x2], axis=1),
        np.concatenate([e1, e2], axis=1),
    )


def _positions(indices, n: int) -> np.ndarray:
    info = np.zeros(1 << n, dtype=bool)
    for i in indices:
        info[bit_reverse(i - 1, n)] = True
    return info


def _batch(h: float, n: int, info: np.ndarray, size: int, seed_seq: np.random.SeedSequence) -> int:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    N = 1 << n
    u = (rng.random((size, N)) < 0.5).astype(np.uint8) * info
    x = _encode(u)
    erased = rng.random((size, N)) < h
    msg = np.where(erased, 0, 1 - 2 * x.astype(np.int8)).astype(np.int8)
    u_hat, _, _ = _sc_decode(msg, info)
    return int(np.count_nonzero(np.any((u_hat != u) & info, axis=1)))


def sc_erasure_rates(h: float, n: int, trials: int, seed: int = 0) -> np.ndarray:
    """Genie-aided erasure frequency per natural position; position
    ``bit_reverse(i - 1)`` estimates the erasure probability of index ``i``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    N = 1 << n
    info = np.ones(N, dtype=bool)
    u = (rng.random((trials, N)) < 0.5).astype(np.uint8)
    x = _encode(u)
    msg = np.where(rng.random((trials, N)) < h, 0, 1 - 2 * x.astype(np.int8)).astype(np.int8)
    _, _, erased = _sc_decode(msg, info, genie=u)
    return erased.mean(axis=0)


def sc_simulate(
    h: float, n: int, R, trials: int, seed: int, *, threads: int = 1, batch: int = SC_BATCH
) -> ScSimResult:
    """Monte-Carlo block error rate of SC decoding on BEC(h).

    Trials are split into fixed batches, each with its own Philox stream
    spawned from ``SeedSequence(seed)``, so the result does not depend on
    ``threads``.
    """
    if not 0 <= n <= SC_MAX_N:
        raise ValueError(f"need 0 <= n <= {SC_MAX_N}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    idx = select_good_indices(h, n, R, mode="bec-float")
    rep = reliability(idx)
    info = _positions(idx.indices, n)
    sizes = [batch] * (trials // batch) + ([trials % batch] if trials % batch else [])
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seqs))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(lambda job: _batch(h, n, info, *job), jobs))
    else:
        counts = [_batch(h, n, info, *job) for job in jobs]
    errors = sum(counts)
    return ScSimResult(
        1 << n, idx.R, float(h), trials, errors, errors / trials, wilson_interval(errors, trials),
        rep.max_E, rep.sum_E, seed, idx.indices,
    )
