"""Command-line entry point: ``polarscale <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 usage error. Every run writes a
manifest: next to ``--output`` as ``<output>.manifest.json``, or as one
JSON line on stderr when results go to stdout.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

from . import __version__
from .channels import DEFAULT_CAP, ChannelCapError, channel_from_json, make_bec, make_bsc, polarize_tree, stats
from .construct import max_rate_for_epsilon, reliability, select_good_indices
from .exactpoly import format_rational, parse_rational
from .experiments import fit_mu, sc_simulate
from .scaling import (
    DEFAULT_PRECISION,
    MAX_M_GUARD,
    CertificationError,
    GuardError,
    build_fn_family,
    check_suitable,
    compute_am,
    compute_table,
)

__all__ = ["main", "build_parser", "load_schema", "RunManifest"]


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    flags: dict
    versions: dict
    started: str
    finished: str = ""
    input_hashes: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)


def load_schema(name: str) -> dict:
    """JSON schema shipped for an output kind, e.g. ``"table"`` or ``"sc_sim"``."""
    text = resources.files("polarscale").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def _versions() -> dict:
    import gmpy2
    import mpmath
    import numpy

    return {
        "polarscale": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "gmpy2": gmpy2.version(),
        "mpmath": mpmath.__version__,
    }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# argument helpers

def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _positive_rational(text: str) -> Fraction:
    q = _rational(text)
    if q <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return q


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _n_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if lo >= hi or lo < 0:
        raise argparse.ArgumentTypeError(f"need 0 <= LO < HI, got {text!r}")
    return lo, hi


def _add_channel_args(p: argparse.ArgumentParser, bec_only: bool = False) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--bec", type=_rational, metavar="H", help="erasure channel BEC(H)")
    if not bec_only:
        g.add_argument("--bsc", type=_rational, metavar="P", help="binary symmetric channel BSC(P)")
        g.add_argument("--channel", metavar="FILE", help='JSON file {"pairs": [["n/d", "n/d"], ...]}')
        p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max likelihood-ratio classes per channel")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", help="write results here instead of stdout")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: $POLARSCALE_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarscale", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"polarscale {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="certified a_m and mu_m rows for m = 0..max_m")
    p.add_argument("--max-m", type=_nonneg_int, required=True)
    p.add_argument("--precision", type=_positive_rational, default=DEFAULT_PRECISION)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-guard", action="store_true", help=f"allow m > {MAX_M_GUARD} (slow)")
    _add_common(p)

    p = sub.add_parser("certify", help="concavity and a_m certificates for one m")
    p.add_argument("-m", type=_nonneg_int, required=True)
    p.add_argument("--precision", type=_positive_rational, default=DEFAULT_PRECISION)
    p.add_argument("--no-guard", action="store_true")
    _add_common(p)

    p = sub.add_parser("fn", help="exact f_n polynomial")
    p.add_argument("-n", type=_nonneg_int, required=True)
    p.add_argument("--emit", action="store_true", help="print the coefficient JSON array only")
    p.add_argument("--eval", type=_rational, metavar="H", help="also evaluate f_n at H")
    p.add_argument("--no-guard", action="store_true")
    _add_common(p)

    p = sub.add_parser("polarize", help="all 2^n synthetic channels with their statistics")
    _add_channel_args(p)
    p.add_argument("-n", type=_nonneg_int, required=True)
    p.add_argument("--with-channels", action="store_true", help="include every leaf's output pairs")
    _add_common(p)

    p = sub.add_parser("construct", help="good-index set for a rate or a reliability budget")
    _add_channel_args(p)
    p.add_argument("-n", type=_nonneg_int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rate", type=_rational)
    g.add_argument("--epsilon", type=_positive_rational)
    p.add_argument("--rank-by", choices=("e", "z"), default="e")
    p.add_argument("--mode", choices=("exact", "bec-float"), default="exact")
    p.add_argument("--csv", metavar="FILE", help="per-index statistics as CSV")
    _add_common(p)

    p = sub.add_parser("scaling-fit", help="fit mu from gap to capacity on the erasure channel")
    _add_channel_args(p, bec_only=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", dest="n_range", type=_n_range, required=True, metavar="LO:HI")
    p.add_argument("--csv", metavar="FILE", help="plot-ready samples and fit line")
    _add_common(p)

    p = sub.add_parser("sc-sim", help="Monte-Carlo SC decoding on the erasure channel")
    _add_channel_args(p, bec_only=True)
    p.add_argument("-n", type=_nonneg_int, required=True)
    p.add_argument("--rate", type=_rational, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_common(p)
    return parser


# ---------------------------------------------------------------------------
# subcommands; each returns (text, extra manifest outputs)

def _channel(args, manifest: RunManifest):
    if getattr(args, "bec", None) is not None:
        return make_bec(args.bec), f"BEC({format_rational(args.bec)})"
    if getattr(args, "bsc", None) is not None:
        return make_bsc(args.bsc), f"BSC({format_rational(args.bsc)})"
    with open(args.channel, "rb") as fh:
        data = fh.read()
    manifest.input_hashes[args.channel] = _sha256(data)
    return channel_from_json(data.decode("utf-8"), cap=args.cap), args.channel


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_table(args, manifest) -> str:
    if args.no_guard and args.max_m > MAX_M_GUARD:
        print(f"warning: m up to {args.max_m} beyond the guard may take hours", file=sys.stderr)
    rows = compute_table(args.max_m, args.precision, threads=args.threads, no_guard=args.no_guard)
    if args.format == "json":
        return _dump({"precision": format_rational(args.precision), "rows": [r.to_json_dict() for r in rows]})
    return _csv_text(["m", "a_m", "mu_m", "suitable"], [r.csv_row() for r in rows])


def cmd_certify(args, manifest) -> str:
    suit = check_suitable(args.m, no_guard=args.no_guard)
    bound = compute_am(args.m, args.precision, no_guard=args.no_guard)
    out = bound.to_json_dict()
    out["precision"] = format_rational(args.precision)
    out["suitability"] = suit.to_dict()
    out["artifacts"] = bound.artifacts.to_dict()
    return _dump(out)


def cmd_fn(args, manifest) -> str:
    fam = build_fn_family(args.n, no_guard=args.no_guard)
    poly = fam[args.n]
    if args.emit:
        return poly.to_json() + "\n"
    out = {
        "n": args.n,
        "degree": poly.degree,
        "coefficients": [format_rational(c) for c in poly.coefficients],
    }
    if args.eval is not None:
        out["at"] = format_rational(args.eval)
        out["value"] = format_rational(poly(args.eval))
    return _dump(out)


def cmd_polarize(args, manifest) -> str:
    w, name = _channel(args, manifest)
    leaves = polarize_tree(w, args.n, cap=args.cap, threads=args.threads)
    return _dump({
        "channel": name,
        "n": args.n,
        "N": 1 << args.n,
        "stats": stats(w).to_dict(),
        "leaves": [node.to_dict(args.with_channels) for node in leaves],
    })


def cmd_construct(args, manifest) -> str:
    w, name = _channel(args, manifest)
    rank = args.rank_by.upper()
    rate = args.rate
    if args.epsilon is not None:
        rate = max_rate_for_epsilon(w, args.n, args.epsilon, mode=args.mode, rank_by=rank, cap=args.cap)
    idx = select_good_indices(w, args.n, rate, mode=args.mode, rank_by=rank, cap=args.cap)
    rep = reliability(idx, None if args.epsilon is None else float(args.epsilon))
    body = idx.to_dict()
    stats_rows = body.pop("stats")
    body["channel"] = name
    body["reliability"] = rep.to_dict()
    if args.csv:
        text = _csv_text(["index", "E", "Z", "H"], [[r["index"], r["E"], r["Z"], r["H"]] for r in stats_rows])
        _write(args.csv, text)
        manifest.outputs[args.csv] = _sha256(text.encode())
    return _dump(body)


def cmd_scaling_fit(args, manifest) -> str:
    fit = fit_mu(args.epsilon, args.n_range, float(args.bec))
    if args.csv:
        text = _csv_text(["n", "N", "R_max", "gap", "fit_gap", "in_fit"], fit.rows())
        _write(args.csv, text)
        manifest.outputs[args.csv] = _sha256(text.encode())
    return _dump(fit.to_dict())


def cmd_sc_sim(args, manifest) -> str:
    res = sc_simulate(float(args.bec), args.n, args.rate, args.trials, args.seed, threads=args.threads)
    return _dump(res.to_dict())


COMMANDS = {
    "table": cmd_table,
    "certify": cmd_certify,
    "fn": cmd_fn,
    "polarize": cmd_polarize,
    "construct": cmd_construct,
    "scaling-fit": cmd_scaling_fit,
    "sc-sim": cmd_sc_sim,
}


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _flags(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, Fraction):
            v = format_rational(v)
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        env = os.environ.get("POLARSCALE_THREADS", "1")
        try:
            args.threads = max(1, int(env))
        except ValueError:
            print(f"polarscale: error: POLARSCALE_THREADS must be an integer, got {env!r}", file=sys.stderr)
            return 2
    if args.threads < 1:
        print("polarscale: error: --threads must be >= 1", file=sys.stderr)
        return 2
    manifest = RunManifest(args.command, _flags(args), _versions(), _now())
    try:
        text = COMMANDS[args.command](args, manifest)
    except (ValueError, ChannelCapError, GuardError, CertificationError, ZeroDivisionError) as exc:
        print(f"polarscale: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"polarscale: error: {exc}", file=sys.stderr)
        return 1
    manifest.finished = _now()
    if args.output:
        _write(args.output, text)
        manifest.outputs[args.output] = _sha256(text.encode())
        _write(args.output + ".manifest.json", _dump(asdict(manifest)))
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
        manifest.outputs["<stdout>"] = _sha256(text.encode())
        print(json.dumps({"manifest": asdict(manifest)}, sort_keys=True), file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
