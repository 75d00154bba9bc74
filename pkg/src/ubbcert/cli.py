"""Command-line entry point.

Exit status: 0 when every certificate passes, 1 on a certificate failure,
2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ubbcert import __version__
from ubbcert.acceptance import CRITERIA, run_criterion
from ubbcert.block_cube import COMPLETIONS, build_topb, occupancy_diagram
from ubbcert.reports import (
    CERTIFY_CLAIMS,
    OUT_ENV,
    VERIFY_CLAIMS,
    RunConfig,
    run_certify,
    run_construct,
    run_export,
    run_verify,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser, set_required: bool = False) -> None:
    p.add_argument("--d", type=int, default=3, help="local dimension (>= 3, default 3)")
    p.add_argument("--set", dest="set_kind", help="topb | upb | ubb-sym | ubb-asym", required=set_required)
    p.add_argument("--cut", help="A|BC | AC|B | AB|C (required for ubb-asym)")
    p.add_argument("--completion", default="standard", choices=COMPLETIONS,
                   help="ordering of seed vectors when completing each local family")
    p.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./ubbcert-out)")
    p.add_argument("--format", dest="fmt", default="text", choices=("text", "json"))


def _search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed (default 0)")
    p.add_argument("--restarts", type=int, default=200, help="seesaw restarts (default 200)")
    p.add_argument("--max-iters", type=int, default=500, help="seesaw sweeps per restart (default 500)")
    p.add_argument("--samples", type=int, default=None, help="random samples for sampled-exact checks")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for seesaw restarts")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ubbcert", description="Construct and certify UPBs and UBBs in C^d x C^d x C^d.")
    ap.add_argument("--version", action="version", version=f"ubbcert {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="write a state set and print its size")
    c.add_argument("kind", nargs="?", help="topb | upb | ubb-sym | ubb-asym (or use --set)")
    _common(c)
    c.add_argument("--diagram", action="store_true", help="print the block-occupancy diagram (topb)")

    v = sub.add_parser("verify", help="run exact claim checks for one set")
    v.add_argument("target", nargs="?", choices=("projector",), help="optional; the complement projector is the default")
    _common(v, set_required=True)
    _search(v)
    v.add_argument("--claim", default="all", choices=VERIFY_CLAIMS)

    ce = sub.add_parser("certify", help="structural and numerical certificates for one claim")
    _common(ce)
    _search(ce)
    ce.add_argument("--claim", required=True, choices=CERTIFY_CLAIMS)

    e = sub.add_parser("export", help="write exact matrices (.rmat)")
    _common(e, set_required=True)

    r = sub.add_parser("report", help="run acceptance criteria")
    r.add_argument("--criterion", default="all", help="criterion number 1-10 or 'all'")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--format", dest="fmt", default="text", choices=("text", "json"))
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    set_kind = ns.set_kind
    if ns.command == "construct" and ns.kind:
        if set_kind and set_kind != ns.kind:
            raise ValueError("give the set kind once, positionally or with --set")
        set_kind = ns.kind
    kw = dict(command=ns.command, d=ns.d, set_kind=set_kind, cut=ns.cut, fmt=ns.fmt, completion=ns.completion)
    if ns.out is not None:
        kw["out_dir"] = ns.out
    for name in ("claim", "seed", "restarts", "max_iters", "samples", "jobs"):
        if hasattr(ns, name):
            kw[name] = getattr(ns, name)
    return RunConfig(**kw).validate()


def _emit_report(rep, cfg: RunConfig, name: str) -> int:
    text = rep.render(cfg.fmt)
    sys.stdout.write(text)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    ext = "json" if cfg.fmt == "json" else "txt"
    (cfg.out_dir / f"{name}.{ext}").write_text(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _report(ns: argparse.Namespace) -> int:
    if ns.criterion == "all":
        numbers = sorted(CRITERIA)
    else:
        try:
            numbers = [int(ns.criterion)]
        except ValueError:
            raise ValueError(f"--criterion must be 1-{len(CRITERIA)} or 'all'") from None
        if numbers[0] not in CRITERIA:
            raise ValueError(f"--criterion must be 1-{len(CRITERIA)} or 'all'")
    results = []
    for n in numbers:
        kw = {}
        if n in (6, 7, 8, 10):
            kw["seed"] = ns.seed
        if n == 8:
            kw["jobs"] = ns.jobs
        res = run_criterion(n, **kw)
        results.append(res)
        if ns.fmt == "text":
            print(res.line(), flush=True)
    if ns.fmt == "json":
        print(json.dumps({"version": __version__, "criteria": [r.as_dict() for r in results]}, indent=2,
                         default=str))
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:  # argparse exits 2 on usage errors, 0 on --help
        return int(e.code or 0)
    try:
        if ns.command == "report":
            return _report(ns)
        cfg = _config(ns)
    except ValueError as e:
        print(f"ubbcert: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if cfg.command == "construct":
            path, b = run_construct(cfg)
            print(f"{b.kind} d={cfg.d}: {len(b)} states -> {path}")
            print(f"complement dim {b.complement_dim}")
            if getattr(ns, "diagram", False):
                print(occupancy_diagram(build_topb(cfg.d, cfg.completion)))
            return EXIT_OK
        if cfg.command == "export":
            for path in run_export(cfg):
                print(path)
            return EXIT_OK
        if cfg.command == "verify":
            return _emit_report(run_verify(cfg), cfg, f"verify_{cfg.stem}_{cfg.claim}")
        return _emit_report(run_certify(cfg), cfg, f"certify_{cfg.stem}_{cfg.claim}")
    except OSError as e:
        print(f"ubbcert: error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
