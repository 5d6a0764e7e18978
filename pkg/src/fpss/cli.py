"""Command-line interface: sampling, comparison, benchmarking, grid inspection.

Subcommands
-----------
- ``sample-chi``: draw from the normalized kernel at fixed (alpha, z) -> CSV.
- ``sample-fp``: simulate first passage across a barrier -> CSV.
- ``compare``: timed two-sampler comparison with KS columns -> CSV.
- ``bench``: raw kernel throughput per algorithm and backend -> CSV.
- ``grid-info``: structural summary of the proposal grid -> JSON.

CSV output has a header row, shortest round-trip float formatting, UTF-8
encoding, and LF line endings.  When ``--seed`` is omitted the ``FPSS_SEED``
environment variable is used, defaulting to 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("FPSS_SEED", "").strip()
    return int(env) if env else 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fpss",
        description=(
            "Exact first-passage sampling for stable subordinators: "
            "draw samples, compare algorithms, benchmark backends, "
            "and inspect proposal grids."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)

    sc = sub.add_parser(
        "sample-chi", help="draw from the normalized kernel at fixed (alpha, z)"
    )
    sc.add_argument("--alpha", type=float, required=True, help="index in (0, 1)")
    sc.add_argument("--z", type=float, required=True, help="scale parameter, > 0")
    sc.add_argument("--n", type=int, required=True, help="number of draws")
    sc.add_argument(
        "--alg", choices=("auto", "A", "B", "P"), default="auto",
        help="sampler override (default: automatic selection)",
    )
    sc.add_argument("--seed", type=int, default=None)
    sc.add_argument("--out", required=True, help="output CSV path")

    sf = sub.add_parser("sample-fp", help="simulate first passage across a barrier")
    sf.add_argument(
        "--barrier", required=True,
        help='barrier JSON, e.g. \'{"family":"constant","b0":10}\'',
    )
    sf.add_argument("--alpha", type=float, required=True)
    sf.add_argument("--n", type=int, required=True)
    sf.add_argument(
        "--alg", choices=("auto", "A", "B", "P"), default="auto",
        help="kernel sampler override for the non-creep branch",
    )
    sf.add_argument("--seed", type=int, default=None)
    sf.add_argument("--out", required=True)

    cp = sub.add_parser(
        "compare", help="timed two-sampler comparison with per-rep KS columns"
    )
    cp.add_argument("--alpha", type=float, required=True)
    cp.add_argument("--z", type=float, required=True)
    cp.add_argument("--n", type=int, required=True)
    cp.add_argument(
        "--algs", default="A,B", help="two of A,B,P separated by a comma"
    )
    cp.add_argument("--reps", type=int, default=1)
    cp.add_argument("--seed", type=int, default=None)
    cp.add_argument("--out", required=True)

    bn = sub.add_parser(
        "bench", help="raw kernel throughput per algorithm and backend"
    )
    bn.add_argument(
        "--spec", required=True,
        help="JSON file: {alphas, zs, n, algs, seed}",
    )
    bn.add_argument("--out", required=True)

    gi = sub.add_parser(
        "grid-info", help="structural summary of the proposal grid at (alpha, z)"
    )
    gi.add_argument("--alpha", type=float, required=True)
    gi.add_argument("--z", type=float, required=True)
    gi.add_argument("--out", default=None, help="optional JSON output path")

    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    from .harness import (
        ExperimentSpec,
        run_bench,
        run_compare,
        run_grid_info,
        run_sample,
        write_csv,
    )

    try:
        if args.command == "sample-chi":
            spec = ExperimentSpec(
                mode="sample-chi",
                alphas=(args.alpha,),
                zs=(args.z,),
                n=args.n,
                seed=_resolve_seed(args.seed),
                alg=args.alg,
                out=args.out,
            )
            fields, rows = run_sample(spec)
            write_csv(args.out, fields, rows)
            print(f"wrote {len(rows)} rows to {args.out}")
        elif args.command == "sample-fp":
            spec = ExperimentSpec(
                mode="sample-fp",
                alphas=(args.alpha,),
                n=args.n,
                seed=_resolve_seed(args.seed),
                alg=args.alg,
                barrier=json.loads(args.barrier),
                out=args.out,
            )
            fields, rows = run_sample(spec)
            write_csv(args.out, fields, rows)
            print(f"wrote {len(rows)} rows to {args.out}")
        elif args.command == "compare":
            algs = tuple(s.strip() for s in args.algs.split(",") if s.strip())
            spec = ExperimentSpec(
                mode="compare",
                alphas=(args.alpha,),
                zs=(args.z,),
                n=args.n,
                reps=args.reps,
                seed=_resolve_seed(args.seed),
                algs=algs,
                out=args.out,
            )
            fields, rows = run_compare(spec)
            write_csv(args.out, fields, rows)
            print(f"wrote {len(rows)} rows to {args.out}")
        elif args.command == "bench":
            with open(args.spec, encoding="utf-8") as fh:
                raw = json.load(fh)
            spec = ExperimentSpec(
                mode="bench",
                alphas=tuple(raw.get("alphas", ())),
                zs=tuple(raw.get("zs", ())),
                n=int(raw.get("n", 10_000)),
                algs=tuple(raw.get("algs", ("A", "B", "P"))),
                seed=int(raw.get("seed", _resolve_seed(None))),
                out=args.out,
            )
            fields, rows = run_bench(spec)
            write_csv(args.out, fields, rows)
            print(f"wrote {len(rows)} rows to {args.out}")
        elif args.command == "grid-info":
            spec = ExperimentSpec(
                mode="grid-info", alphas=(args.alpha,), zs=(args.z,)
            )
            info = run_grid_info(spec)
            text = json.dumps(info, indent=2, sort_keys=True)
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text + "\n")
            print(text)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"fpss: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
