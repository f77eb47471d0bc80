"""Command-line entry point: `nicoh run|sweep|check <config-file>`.

Every run writes a CSV (schema per scenario) plus a JSON manifest echoing
the parsed config, the defaults that were applied, wall time, and a short
invariant-check summary.  Exit codes: 0 success, 1 config error, 2 numeric
or invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, parse_config
from .core import IntegrationFailure, NoSteadyStateError
from .pathways import QuadratureError
from .scenarios import format_csv, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

_NUMERIC_FAILURES = (IntegrationFailure, NoSteadyStateError, QuadratureError,
                     FloatingPointError, np.linalg.LinAlgError)


def _json_safe(value):
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _write_manifest(path, config, status, wall_time, outputs, error=None,
                    invariants=None):
    manifest = {
        "artifact_version": __version__,
        "scenario": config.scenario if config else None,
        "config": {k: _json_safe(v) for k, v in config.values.items()} if config else {},
        "defaults_applied": {k: _json_safe(v) for k, v in
                             config.defaults_applied.items()} if config else {},
        "status": status,
        "wall_time_s": wall_time,
        "outputs": outputs,
        "invariant_checks": invariants or {},
    }
    if error is not None:
        manifest["error"] = str(error)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _invariant_summary(header, rows):
    checks = {}
    pops = [c for c in ("rho_gg", "rho_11", "rho_22") if c in header]
    if pops:
        idx = [header.index(c) for c in pops]
        worst = max(abs(sum(row[i] for i in idx) - 1.0) for row in rows)
        checks["max_population_trace_error"] = worst
    if "Y1" in header:
        col = header.index("Y1")
        vals = [row[col] for row in rows]
        checks["Y1_in_unit_interval"] = bool(
            min(vals) >= 0.0 and max(vals) <= 1.0)
    c_cols = [i for i, c in enumerate(header) if c.endswith("_C")]
    if c_cols:
        worst = max(row[i] for row in rows for i in c_cols)
        checks["max_coherence_ratio"] = worst
        checks["coherence_ratio_bounded"] = bool(worst <= 1.0 + 1e-9)
    return checks


def _load_config(path, seed_override=None):
    try:
        config = parse_config(path)
    except FileNotFoundError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    if seed_override is not None:
        values = dict(config.values)
        values["seed"] = seed_override
        config = ScenarioConfig(config.scenario, values,
                                config.defaults_applied)
    return config


def _stem(path):
    return Path(path).stem


def cmd_run(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / f"{_stem(args.config)}_manifest.json"
    started = time.perf_counter()
    try:
        config = _load_config(args.config, args.seed)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        _write_manifest(manifest_path, None, "config-error",
                        time.perf_counter() - started, [], error=exc)
        return EXIT_CONFIG
    csv_path = out_dir / f"{_stem(args.config)}.csv"
    try:
        header, rows, summary = run_scenario(config)
    except _NUMERIC_FAILURES as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        _write_manifest(manifest_path, config, "numeric-failure",
                        time.perf_counter() - started, [], error=exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"invalid physics input: {exc}", file=sys.stderr)
        _write_manifest(manifest_path, config, "numeric-failure",
                        time.perf_counter() - started, [], error=exc)
        return EXIT_NUMERIC
    csv_path.write_text(format_csv(header, rows), encoding="utf-8")
    invariants = _invariant_summary(header, rows)
    invariants.update({f"summary_{k}": _json_safe(v)
                       for k, v in summary.items()})
    _write_manifest(manifest_path, config, "ok",
                    time.perf_counter() - started, [csv_path.name],
                    invariants=invariants)
    print(f"wrote {csv_path}")
    if not invariants.get("coherence_ratio_bounded", True):
        print("invariant failure: coherence ratio out of bounds",
              file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_check(args):
    try:
        config = _load_config(args.config, None)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: scenario {config.scenario!r}, "
          f"{len(config.defaults_applied)} defaults applied")
    for key, value in sorted(config.defaults_applied.items()):
        print(f"  default {key} = {value}")
    return EXIT_OK


def cmd_sweep(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / f"{_stem(args.config)}_sweep_manifest.json"
    started = time.perf_counter()
    try:
        config = _load_config(args.config, args.seed)
        values = [float(tok) for tok in args.values.split(",") if tok.strip()]
        if args.key not in config.values:
            raise ConfigError([f"sweep key {args.key!r} not in scenario "
                               f"{config.scenario!r}"])
        if values and not isinstance(config.values[args.key], (int, float, bool)):
            raise ConfigError([f"sweep key {args.key!r} is not numeric"])
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        _write_manifest(manifest_path, None, "config-error",
                        time.perf_counter() - started, [], error=exc)
        return EXIT_CONFIG

    summary_rows = []
    summary_keys = []
    outputs = []
    any_failed = False
    for value in values:
        run_values = dict(config.values)
        run_values[args.key] = value
        run_config = ScenarioConfig(config.scenario, run_values,
                                    config.defaults_applied)
        tag = repr(value).replace("-", "m").replace(".", "p")
        csv_path = out_dir / f"{_stem(args.config)}_{args.key}_{tag}.csv"
        try:
            header, rows, summary = run_scenario(run_config)
        except (_NUMERIC_FAILURES, ValueError) as exc:
            print(f"sweep value {value}: failed: {exc}", file=sys.stderr)
            summary_rows.append((value, "failed", {}))
            any_failed = True
            continue
        csv_path.write_text(format_csv(header, rows), encoding="utf-8")
        outputs.append(csv_path.name)
        summary_rows.append((value, "ok", summary))
        for key in summary:
            if key not in summary_keys:
                summary_keys.append(key)

    summary_path = out_dir / f"{_stem(args.config)}_{args.key}_summary.csv"
    numeric_keys = [k for k in summary_keys
                    if all(isinstance(s.get(k, 0.0), (int, float))
                           for _, _, s in summary_rows)]
    lines = [",".join([args.key, "status"] + numeric_keys)]
    for value, status, summary in summary_rows:
        cells = [repr(float(value)), status]
        for key in numeric_keys:
            cells.append(repr(float(summary[key])) if key in summary else "")
        lines.append(",".join(cells))
    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    outputs.append(summary_path.name)
    _write_manifest(manifest_path, config,
                    "ok" if not any_failed else "partial-failure",
                    time.perf_counter() - started, outputs)
    print(f"wrote {summary_path}")
    return EXIT_OK if not any_failed else EXIT_NUMERIC


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nicoh",
        description="noise-induced coherence scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=".")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario over several values")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--key", required=True)
    p_sweep.add_argument("--values", required=True)
    p_sweep.add_argument("--out", default=".")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser("check", help="validate a config only")
    p_check.add_argument("config")
    p_check.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
