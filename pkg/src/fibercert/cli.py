"""Command-line surface.

Exit codes: 0 success, 1 validation error, 2 inconclusive certificate or
unverifiable-at-budget, 3 verification failure.  Diagnostics go to stderr,
artifacts to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from . import dataio
from .cones import estimate_dual_cone, fibered_cone_from_dual
from .errors import BudgetError, CapabilityError, SubconeError, ValidationError
from .lattice import FiberedClass
from .laurent import char_poly, mat_pow
from .pipeline import certify, sweep, verify_certificate
from .trackmap import (
    LiftedGraphMap,
    SupportPolytope,
    build_transition_matrix,
    oracle_iterate,
    support_of_power,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INCONCLUSIVE = 2
EXIT_VERIFY_FAIL = 3

CACHE_ENV = "FIBERCERT_CACHE_DIR"


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _parse_class(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def _load(path: str) -> tuple[LiftedGraphMap, str]:
    track = dataio.load_dataset(path)
    return track, dataio.dataset_hash(track)


def _cache_for(args) -> dataio.SupportCache | None:
    cache_dir = getattr(args, "cache_dir", None) or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return None
    return dataio.SupportCache(cache_dir)


def _wire_cache(track: LiftedGraphMap, ds_hash: str, cache, p_max: int, seed: int) -> None:
    """Preload cached supports and spot-check a seeded sample against a
    fresh recomputation."""
    loaded = []
    for p in range(0, p_max + 1):
        pts = cache.load(ds_hash, "fwd", p)
        if pts is not None:
            with track._lock:  # type: ignore[attr-defined]
                track._supports.setdefault(  # type: ignore[attr-defined]
                    p, SupportPolytope.from_points(track.rank, p, pts)
                )
            loaded.append(p)
    if loaded:
        rng = random.Random(seed)
        sample = rng.sample(loaded, min(2, len(loaded)))
        M = build_transition_matrix(track)
        for p in sample:
            fresh = frozenset(mat_pow(M, p).support())
            cached = frozenset(cache.load(ds_hash, "fwd", p))
            if fresh != cached:
                raise ValidationError(
                    f"cache corruption: stored support at power {p} disagrees "
                    "with a fresh recomputation"
                )


def _flush_cache(track: LiftedGraphMap, ds_hash: str, cache) -> None:
    with track._lock:  # type: ignore[attr-defined]
        items = dict(track._supports)  # type: ignore[attr-defined]
    for p, supp in items.items():
        cache.store(ds_hash, "fwd", p, supp.points)


def cmd_ingest(args) -> int:
    track, ds_hash = _load(args.dataset)
    print(f"dataset_hash: {ds_hash}")
    print(f"rank: {track.rank}")
    print(f"edges: {len(track.edges)}")
    print(f"k0: {track.k0 if track.k0 is not None else 'not primitive (warning)'}")
    print(f"inverse_data: {'yes' if track.inverse is not None else 'no'}")
    if track.k0 is None:
        print("warning: incidence matrix is not primitive; "
              "convergence-window checks are disabled", file=sys.stderr)
    return EXIT_OK


def cmd_charpoly(args) -> int:
    track, _ = _load(args.dataset)
    M = mat_pow(build_transition_matrix(track), args.p)
    F = char_poly(M)
    out = {
        "dim": F.dim,
        "rank": F.rank,
        "power": args.p,
        "coefficients": [
            [[list(e), c] for e, c in coeff.to_pairs()] for coeff in F.coeffs
        ],
    }
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _print_support(supp: SupportPolytope) -> None:
    out = {
        "p": supp.p,
        "mode": supp.mode,
        "points": sorted([list(pt) for pt in supp.points]),
        "hull": [list(v) for v in supp.hull],
    }
    print(json.dumps(out, sort_keys=True))


def cmd_omega(args) -> int:
    track, ds_hash = _load(args.dataset)
    cache = _cache_for(args)
    if cache:
        _wire_cache(track, ds_hash, cache, args.p, args.seed)
    supp = support_of_power(track, args.p)
    if cache:
        _flush_cache(track, ds_hash, cache)
    _print_support(supp)
    return EXIT_OK


def cmd_oracle(args) -> int:
    track, _ = _load(args.dataset)
    supp = oracle_iterate(track, args.p, step_budget=args.budget)
    _print_support(supp)
    return EXIT_OK


def cmd_cone(args) -> int:
    track, ds_hash = _load(args.dataset)
    cache = _cache_for(args)
    if cache:
        _wire_cache(track, ds_hash, cache, args.p_max, args.seed)
    dual = estimate_dual_cone(track, args.p_max)
    cone = fibered_cone_from_dual(dual)
    if cache:
        _flush_cache(track, ds_hash, cache)
    out = {
        "p_max": dual.p_max,
        "k0": dual.k0,
        "C": dual.C,
        "low_confidence": dual.low_confidence,
        "facets": [
            {"u": list(f.u), "slope": f"{f.slope.numerator}/{f.slope.denominator}",
             "c_window": f.c_window}
            for f in dual.facets
        ],
        "fibered_cone_generators": [list(g) for g in cone.generators],
    }
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _models(track: LiftedGraphMap, p_max: int, mu, slope_cap):
    dual = estimate_dual_cone(track, p_max)
    cone = fibered_cone_from_dual(dual)
    P = cone
    if mu is not None:
        P = P.subcone(mu)
    if slope_cap is not None:
        P = P.subcone_slope(slope_cap)
    return dual, cone, P


def cmd_bound(args) -> int:
    track, ds_hash = _load(args.dataset)
    cache = _cache_for(args)
    if cache:
        _wire_cache(track, ds_hash, cache, args.p_max, args.seed)
    dual, cone, P = _models(track, args.p_max, args.mu, args.slope_cap)
    alpha = FiberedClass(_parse_class(args.alpha))
    cert = certify(
        track, dual, cone, P, alpha, args.p_max, ds_hash,
        safety=args.safety, kappa=args.kappa, allow_mirror=args.mirror,
        box_radius=args.box_radius,
    )
    if cache:
        _flush_cache(track, ds_hash, cache)
    text = dataio.emit_certificate(cert)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    if cert.status != "ok":
        print("inconclusive: " + "; ".join(cert.diagnostics), file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if args.mode == "certified" and cert.mode != "certified":
        print("certificate degraded to asymptotic mode "
              "(cone-approximated far words)", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_sweep(args) -> int:
    track, ds_hash = _load(args.dataset)
    dual, cone, P = _models(track, args.p_max, args.mu, args.slope_cap)
    if args.classes:
        classes = [tuple(int(v) for v in c) for c in json.loads(args.classes)]
    else:
        base = _parse_class(args.base)
        direction = _parse_class(args.direction)
        if len(base) != len(direction):
            raise ValidationError("--base and --direction must have equal length")
        classes = [
            tuple(b + j * d for b, d in zip(base, direction))
            for j in range(args.start, args.stop)
        ]
    rows = sweep(
        track, dual, cone, P, classes, args.p_max, ds_hash,
        safety=args.safety, kappa=args.kappa, allow_mirror=args.mirror,
        threads=args.threads,
    )
    if args.format == "csv":
        print(dataio.sweep_to_csv(rows), end="")
    else:
        for row in rows:
            print(
                f"alpha={row.alpha} n={row.n} covol2={row.covol2} "
                f"systole2={row.systole2} K={row.K} "
                f"bound={row.bound} normalized={row.normalized} status={row.status}"
            )
    return EXIT_OK


def cmd_verify(args) -> int:
    track, ds_hash = _load(args.dataset)
    with open(args.certificate, "r", encoding="utf-8") as fh:
        cert = dataio.parse_certificate(fh.read())
    result = verify_certificate(cert, track, ds_hash, oracle_budget=args.budget)
    print(f"verification: {result.status}"
          + (f" ({result.reason})" if result.reason else ""))
    if result.status == "pass":
        return EXIT_OK
    if result.status == "unverifiable":
        return EXIT_INCONCLUSIVE
    return EXIT_VERIFY_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibercert",
        description="Fibered-cone reconstruction and curve-graph "
        "translation-length bound certificates from lifted train-track maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_cache=True):
        p.add_argument("dataset", help="dataset JSON file")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized spot checks")
        if with_cache:
            p.add_argument("--cache-dir", default=None,
                           help=f"support cache directory (default ${CACHE_ENV})")

    p = sub.add_parser("ingest", help="validate a dataset and print its hash")
    common(p, with_cache=False)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("charpoly", help="characteristic polynomial of the p-th power")
    common(p, with_cache=False)
    p.add_argument("--p", type=int, default=1)
    p.set_defaults(func=cmd_charpoly)

    p = sub.add_parser("omega", help="support polytope of the p-th power")
    common(p)
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("oracle", help="support polytope by literal path substitution")
    common(p, with_cache=False)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--budget", type=int, default=2_000_000,
                   help="step budget for the symbolic path")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("cone", help="reconstruct the dual and fibered cones")
    common(p)
    p.add_argument("--p-max", type=int, default=20)
    p.set_defaults(func=cmd_cone)

    def bound_opts(p):
        p.add_argument("--p-max", type=int, default=32)
        p.add_argument("--mu", type=_parse_fraction, default=None,
                       help="optional normalized-slack subcone shrinkage in (0,1)")
        p.add_argument("--slope-cap", type=_parse_fraction, default=Fraction(1, 2),
                       help="axis-centered subcone slope bound (default 1/2)")
        p.add_argument("--safety", type=int, default=1,
                       help="obstacle dilation margin")
        p.add_argument("--kappa", type=int, default=4,
                       help="box radius multiple of n^(1/r)")
        p.add_argument("--box-radius", type=int, default=None)
        p.add_argument("--mirror", action="store_true",
                       help="enable mirror mode for negative powers")
        p.add_argument("--mode", choices=["certified", "asymptotic"],
                       default="certified")

    p = sub.add_parser("bound", help="produce a bound certificate for one class")
    common(p)
    p.add_argument("--alpha", required=True, help="class, e.g. '1,9'")
    p.add_argument("--out", default=None, help="also write the certificate here")
    bound_opts(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="certify a sequence of classes")
    common(p, with_cache=False)
    p.add_argument("--base", help="base class, e.g. '1,5'")
    p.add_argument("--direction", help="direction, e.g. '0,2'")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--stop", type=int, default=10)
    p.add_argument("--classes", default=None,
                   help="explicit JSON list of classes (overrides base/direction)")
    p.add_argument("--format", choices=["text", "csv"], default="csv")
    p.add_argument("--threads", type=int, default=1)
    bound_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="independently re-check a certificate")
    p.add_argument("certificate", help="certificate JSON file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, SubconeError, CapabilityError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
