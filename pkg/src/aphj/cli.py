"""Command-line runner: ``aphj run``, ``aphj list``, ``aphj verify``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .errors import ConfigError, RuntimeFailure
from .persist import write_run
from .scenarios import REGISTRY, resolve_config, run_scenario

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def solver_threads() -> int:
    """Thread cap from ``APHJ_THREADS`` (default 1).

    The numpy stepping kernels run single-threaded, so any valid value
    currently yields one thread; the cap is validated so scripts fail early.
    """
    raw = os.environ.get("APHJ_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"APHJ_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"APHJ_THREADS must be a positive integer, got {raw!r}")
    return 1


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


def _print_verdict(name: str, result, elapsed: float) -> None:
    status = "PASS" if result.passed else "FAIL"
    detail = ", ".join(f"{k}={_fmt(v)}" for k, v in result.verdict.items() if k != "pass")
    print(f"{status} {name} ({elapsed:.1f}s): {detail}")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def cmd_run(args) -> int:
    raw = _load_config(args.config)
    cfg = resolve_config(raw, args.override)
    out_dir = args.out or cfg.output.get("dir") or os.path.join("runs", cfg.scenario)
    cfg.output["dir"] = out_dir
    solver_threads()
    t0 = time.perf_counter()
    result = run_scenario(cfg)
    write_run(out_dir, cfg.to_dict(), result, cfg.output["snapshots"])
    _print_verdict(cfg.scenario, result, time.perf_counter() - t0)
    print(f"wrote {out_dir}")
    return EXIT_PASS if result.passed else EXIT_FAIL


def cmd_list(args) -> int:
    rows = [{"name": s.name, "anchor": s.anchor, "summary": s.summary} for s in REGISTRY.values()]
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_PASS
    w = max(len(r["name"]) for r in rows)
    wa = max(len(r["anchor"]) for r in rows)
    for r in rows:
        print(f"{r['name']:<{w}}  {r['anchor']:<{wa}}  {r['summary']}")
    return EXIT_PASS


def cmd_verify(args) -> int:
    solver_threads()
    names = [args.scenario] if args.scenario else list(REGISTRY)
    if args.scenario and args.scenario not in REGISTRY:
        raise ConfigError(f"unknown scenario {args.scenario!r}; see 'aphj list'")
    failed = 0
    for name in names:
        cfg = resolve_config({"scenario": name}, args.override)
        t0 = time.perf_counter()
        try:
            result = run_scenario(cfg)
        except RuntimeFailure as exc:
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
            failed += 1
            continue
        if args.out:
            write_run(os.path.join(args.out, name), cfg.to_dict(), result, cfg.output["snapshots"])
        _print_verdict(name, result, time.perf_counter() - t0)
        failed += not result.passed
    print(f"{len(names) - failed}/{len(names)} scenarios passed")
    return EXIT_PASS if failed == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aphj", description="Almost-periodic Hamilton-Jacobi experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory")
    r.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted key with a JSON value, e.g. solve.grid_n=400")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list built-in scenarios")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(func=cmd_list)
    v = sub.add_parser("verify", help="run built-in scenarios with their defaults")
    v.add_argument("scenario", nargs="?")
    v.add_argument("--out", default=None, help="also write artifacts under this directory")
    v.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeFailure as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
