"""``heis-gmt`` command line.

Exit status: 0 when every check passes, 1 on a numerical failure, 2 on a
usage error (unknown scenario, flag or config key).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .exceptions import HeisError, InvalidArgument
from .scenarios import list_scenarios
from .suites import SUITES, RunOptions, run_suite, thread_cap

SCHEMA = 1
CSV_COLUMNS = ("s", "volume", "perimeter", "ratio", "seed")
CONFIG_KEYS = {"scenario", "n", "resolution", "s_levels", "seed", "out", "quick", "json", "csv"}

log = logging.getLogger("heisgmt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="heis-gmt", description="Numerical checks of coarea, excess and covering "
                "identities in the Heisenberg group.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("suite", choices=SUITES + ("all",))
    run.add_argument("--config", type=Path, help="YAML file; flags override its values")
    run.add_argument("--scenario")
    run.add_argument("--n", type=int)
    run.add_argument("--resolution", type=int)
    run.add_argument("--s-levels", type=int, dest="s_levels")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument("--quick", action="store_true", default=None,
                     help="halve resolutions and double tolerances (non-authoritative)")
    run.add_argument("--json", action="store_true", default=None, help="print the report to stdout")
    run.add_argument("--csv", action="store_true", default=None, help="also write CSV sweep tables")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list", help="list registered scenarios")
    return p


def load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"malformed config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def merge_options(args: argparse.Namespace) -> dict:
    cfg = load_config(args.config)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg.setdefault("out", Path("reports"))
    cfg["out"] = Path(cfg["out"])
    for k in ("quick", "json", "csv"):
        cfg[k] = bool(cfg.get(k, False))
    for k in ("n", "resolution", "s_levels", "seed"):
        if cfg.get(k) is not None and not isinstance(cfg[k], int):
            raise UsageError(f"{k} must be an integer")
    for k in ("n", "resolution", "s_levels"):
        if cfg.get(k) is not None and cfg[k] < 1:
            raise UsageError(f"{k} must be >= 1")
    return cfg


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    extra = [k for k in ("set",) if rows and k in rows[0]]
    w.writerow(extra + list(CSV_COLUMNS))
    for r in rows:
        w.writerow([r[k] for k in extra] + [repr(float(r[k])) if k != "seed" else r[k] for k in CSV_COLUMNS])
    return buf.getvalue()


def run(suite: str, cfg: dict) -> tuple[dict, int]:
    """Execute ``suite`` (or all suites) and return ``(report, exit status)``."""
    opt = RunOptions(cfg.get("n"), cfg.get("resolution"), cfg.get("s_levels"), cfg.get("seed"),
                     cfg["quick"], thread_cap())
    suites = SUITES if suite == "all" else (suite,)
    if suite == "all" and cfg.get("scenario"):
        raise InvalidArgument("--scenario cannot be combined with 'run all'")
    t0 = time.perf_counter()
    results = []
    for s in suites:
        log.info("running suite %s", s)
        results += run_suite(s, cfg.get("scenario"), opt)
    passed = all(r.passed for r in results)
    report = {
        "schema": SCHEMA,
        "suite": suite,
        "scenario": cfg.get("scenario"),
        "pass": passed,
        "environment": {"version": __version__, "numpy": np.__version__, "seed": cfg.get("seed"),
                        "resolution": cfg.get("resolution"), "s_levels": cfg.get("s_levels"),
                        "n": cfg.get("n"), "quick": cfg["quick"]},
        "results": [r.to_dict() for r in results],
        "wall_time": time.perf_counter() - t0,
    }
    return report, 0 if passed else 1


def _summary(report: dict) -> str:
    lines = []
    for r in report["results"]:
        for c in r["checks"]:
            res = "-" if c["residual"] is None else f"{c['residual']:.3e}"
            lines.append(f"{'PASS' if c['pass'] else 'FAIL'}  {r['suite']}/{r['scenario']}  "
                         f"{c['check_id']}  residual={res}")
    lines.append(f"overall: {'PASS' if report['pass'] else 'FAIL'}  ({report['wall_time']:.1f} s)")
    return "\n".join(lines)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"heis-gmt: error: {exc}", file=sys.stderr)
        return 2
    if args.command == "list":
        print(list_scenarios())
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = merge_options(args)
        report, status = run(args.suite, cfg)
    except (UsageError, InvalidArgument) as exc:
        print(f"heis-gmt: error: {exc}", file=sys.stderr)
        return 2
    except HeisError as exc:
        print(f"heis-gmt: numerical failure: {exc}", file=sys.stderr)
        return 1
    name = f"{args.suite}-{cfg.get('scenario') or 'all'}"
    text = dumps_report(report)
    atomic_write(cfg["out"] / f"{name}.json", text)
    if cfg["csv"]:
        for r in report["results"]:
            rows = r["tables"].get("isoperimetric")
            if rows:
                atomic_write(cfg["out"] / f"{name}-{r['scenario']}.csv", csv_text(rows))
    print(text if cfg["json"] else _summary(report), end="" if cfg["json"] else "\n")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
