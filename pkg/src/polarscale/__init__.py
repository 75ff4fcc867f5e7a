"""Certified scaling-exponent bounds and polarization experiments for polar codes."""
from __future__ import annotations

__version__ = "0.1.0"

from .channels import BmsChannel, ChannelCapError, make_bec, make_bsc, polarize_tree, stats
from .construct import max_rate_for_epsilon, reliability, select_good_indices
from .exactpoly import RationalPolynomial, certify_nonnegative, isolate_roots
from .scaling import (
    CertificationError,
    GuardError,
    build_fn_family,
    check_suitable,
    compute_am,
    compute_mu,
    compute_table,
    rate_bound,
)

__all__ = [
    "__version__",
    "BmsChannel",
    "ChannelCapError",
    "CertificationError",
    "GuardError",
    "RationalPolynomial",
    "build_fn_family",
    "certify_nonnegative",
    "check_suitable",
    "compute_am",
    "compute_mu",
    "compute_table",
    "isolate_roots",
    "make_bec",
    "make_bsc",
    "max_rate_for_epsilon",
    "polarize_tree",
    "rate_bound",
    "reliability",
    "select_good_indices",
    "stats",
]
