"""Choosing information positions of a polar code.

Two modes produce per-index error probabilities: ``exact`` enumerates
the polarization tree of any finite channel with rational arithmetic;
``bec-float`` follows the erasure probability of BEC(h) through the maps
``z -> 2z - z^2`` and ``z -> z^2`` in double precision, which reaches far
larger block lengths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import DEFAULT_CAP, BmsChannel, make_bec, polarize_tree
from .exactpoly import format_rational, parse_rational

__all__ = [
    "BEC_FLOAT_MAX_N",
    "IndexSet",
    "ReliabilityReport",
    "bec_float_leaves",
    "bec_parameter",
    "leaf_table",
    "select_good_indices",
    "reliability",
    "max_rate_for_epsilon",
]

# 2**26 doubles (512 MiB) per level is the practical ceiling for the float mode
BEC_FLOAT_MAX_N = 26


def bec_float_leaves(h: float, n: int) -> np.ndarray:
    """Erasure probabilities of all ``2**n`` synthetic channels; entry ``i - 1``
    belongs to index ``i``."""
    if not 0 <= n <= BEC_FLOAT_MAX_N:
        raise ValueError(f"float mode supports 0 <= n <= {BEC_FLOAT_MAX_N}, got {n}")
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {h}")
    z = np.array([float(h)])
    for _ in range(n):
        # the new path bit becomes the most significant one
        z = np.concatenate([2 * z - z * z, z * z])
    return z


def bec_parameter(w: BmsChannel) -> Fraction | None:
    """Erasure probability if ``w`` is an erasure channel, else ``None``."""
    pairs = w.pairs
    if all(p0 == 0 or p1 == 0 or p0 == p1 for p0, p1 in pairs):
        return sum((p1 for p0, p1 in pairs if p0 == p1), Fraction(0))
    return None


@dataclass(frozen=True)
class _Leaves:
    """Per-index E, Z, H in index order (entry k is index k + 1)."""

    E: list
    Z: list
    H: list
    exact: bool


def leaf_table(w: BmsChannel | float, n: int, mode: str = "exact", cap: int | None = DEFAULT_CAP) -> _Leaves:
    if mode == "bec-float":
        h = float(w) if not isinstance(w, BmsChannel) else bec_parameter(w)
        if h is None:
            raise ValueError("bec-float mode needs an erasure channel")
        z = bec_float_leaves(float(h), n)
        return _Leaves(list(z / 2), list(z), list(z), False)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}; use exact or bec-float")
    if not isinstance(w, BmsChannel):
        w = make_bec(w)
    leaves = polarize_tree(w, n, cap)
    return _Leaves(
        [node.stats.E for node in leaves],
        [(node.stats.Z_lo + node.stats.Z_hi) / 2 for node in leaves],
        [node.stats.H for node in leaves],
        True,
    )


@dataclass(frozen=True)
class IndexSet:
    N: int
    R: Fraction
    indices: tuple[int, ...]
    E: tuple
    Z: tuple
    H: tuple
    mode: str = "exact"
    rank_by: str = "E"

    @property
    def reliability_sum(self):
        if self.mode == "exact":
            return sum(self.E, Fraction(0))
        return math.fsum(self.E)

    def to_dict(self) -> dict:
        def fmt(v):
            return format_rational(v) if isinstance(v, Fraction) else float(v)

        rep = reliability(self)
        return {
            "N": self.N,
            "R": format_rational(self.R),
            "indices": list(self.indices),
            "sum_E": rep.sum_E,
            "max_E": rep.max_E,
            "mode": self.mode,
            "rank_by": self.rank_by,
            "stats": [
                {"index": i, "E": fmt(e), "Z": fmt(z), "H": fmt(h)}
                for i, e, z, h in zip(self.indices, self.E, self.Z, self.H)
            ],
        }


def _ranking(table: _Leaves, rank_by: str) -> list[int]:
    key = {"E": table.E, "Z": table.Z}.get(rank_by.upper())
    if key is None:
        raise ValueError(f"rank_by must be E or Z, got {rank_by!r}")
    return sorted(range(len(key)), key=lambda k: (key[k], k))


def select_good_indices(
    w: BmsChannel | float,
    n: int,
    R,
    *,
    mode: str = "exact",
    rank_by: str = "E",
    cap: int | None = DEFAULT_CAP,
) -> IndexSet:
    """The ``floor(N R)`` indices with least error probability, ties to the lower index."""
    R = parse_rational(R)
    if not 0 <= R <= 1:
        raise ValueError(f"rate must lie in [0, 1], got {R}")
    N = 1 << n
    k = math.floor(N * R)
    table = leaf_table(w, n, mode, cap)
    chosen = sorted(_ranking(table, rank_by)[:k])
    return IndexSet(
        N,
        Fraction(k, N),
        tuple(c + 1 for c in chosen),
        tuple(table.E[c] for c in chosen),
        tuple(table.Z[c] for c in chosen),
        tuple(table.H[c] for c in chosen),
        mode,
        rank_by.upper(),
    )


@dataclass(frozen=True)
class ReliabilityReport:
    """``max_E <= P_e <= sum_E`` for successive cancellation decoding."""

    sum_E: float
    max_E: float
    epsilon_target: float | None
    satisfied: bool | None
    sum_E_exact: Fraction | None = None

    def to_dict(self) -> dict:
        return {
            "sum_E": self.sum_E,
            "max_E": self.max_E,
            "epsilon": self.epsilon_target,
            "satisfied": self.satisfied,
            "sum_E_exact": None if self.sum_E_exact is None else format_rational(self.sum_E_exact),
        }


def reliability(idx: IndexSet, epsilon: float | None = None) -> ReliabilityReport:
    if not idx.E:
        return ReliabilityReport(0.0, 0.0, epsilon, None if epsilon is None else 0.0 <= epsilon,
                                 Fraction(0) if idx.mode == "exact" else None)
    exact = idx.mode == "exact"
    total = idx.reliability_sum
    worst = max(idx.E)
    satisfied = None
    if epsilon is not None:
        satisfied = total <= (parse_rational(epsilon) if exact else float(epsilon))
    return ReliabilityReport(float(total), float(worst), epsilon, satisfied, total if exact else None)


def max_rate_for_epsilon(
    w: BmsChannel | float,
    n: int,
    epsilon,
    *,
    mode: str = "exact",
    rank_by: str = "E",
    cap: int | None = DEFAULT_CAP,
) -> Fraction:
    """Largest ``k/N`` whose ``k`` best indices have total error probability ``<= epsilon``."""
    N = 1 << n
    if mode == "bec-float":
        h = float(w) if not isinstance(w, BmsChannel) else bec_parameter(w)
        if h is None:
            raise ValueError("bec-float mode needs an erasure channel")
        z = bec_float_leaves(float(h), n)
        # for the erasure channel E = Z/2, so both rankings give the same order
        e = np.sort(z / 2)
        prefix = np.cumsum(e)
        k = int(np.searchsorted(prefix, float(epsilon), side="right"))
        return Fraction(k, N)
    table = leaf_table(w, n, mode, cap)
    eps = parse_rational(epsilon)
    total = Fraction(0)
    k = 0
    for c in _ranking(table, rank_by):
        total += table.E[c]
        if total > eps:
            break
        k += 1
    return Fraction(k, N)
