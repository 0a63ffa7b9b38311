"""Command-line front end: run experiments, sweeps, depth tables, oracles.

Subcommands write machine-readable artifacts into ``--out``:

* ``simulate``    -> summary.json, summary.csv
* ``depth-table`` -> depth_table.csv
* ``verify``      -> reports.json
* ``sweep``       -> sweep.csv

plus a manifest.json echoing the resolved configuration.  With a fixed
master seed every artifact is byte-identical across runs and worker
counts; only the manifest timestamps vary.

Exit codes: 0 success, 2 usage or config error, 3 invalid
parameterization, 4 oracle failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .model import (ParameterError, TradeoffParams, adjusted_params,
                    dispersion_condition, market_depth_from_z)
from .sim import (SUMMARY_FIELDS, ExperimentConfig, run_experiment, sweep)
from .stats import MASK64, make_generator, normal_cdf
from .verify import (TheoremId, check_beta_u2, check_counterexample,
                     check_pit_equivalence, check_theorem1, check_theorem2,
                     check_theorem3, truthfulness_suite)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_PARAMS = 3
EXIT_ORACLE_FAILED = 4

_FLOAT_KEYS = ("mu_v", "sigma_v", "mu_y", "sigma_y", "c", "theta")
_INT_KEYS = ("n_advertisers", "replications", "master_seed")
CONFIG_KEYS = _FLOAT_KEYS + _INT_KEYS

# documented column orders
SUMMARY_CSV_FIELDS = SUMMARY_FIELDS + (
    "mu_a", "sigma_a", "z_score", "bid_probability",
    "market_depth_estimate", "dispersion_holds")
DEPTH_CSV_FIELDS = ("z_score", "bid_probability", "n_required_real", "n_required_ceil")
SWEEP_CSV_FIELDS = ("axis_value", "metric", "estimate", "std_error")
SWEEP_METRICS = (
    "prob_as_gt_sp", "mean_p_sp", "mean_p_as", "mean_rev_sp", "mean_rev_as",
    "mean_viewer_cost_sp", "mean_viewer_cost_as")

# default oracle grids for `verify`; replications come from the config file
VERIFY_T1_GRID = (5, 10, 20, 50, 100)
VERIFY_T1_DELTA = 0.1
VERIFY_T2_GRID = (3, 6, 12, 18, 24, 36, 48)
VERIFY_T3_GRID = (3, 10, 50)
VERIFY_PIT_GRID = (2, 50)
VERIFY_BETA_GRID = (2, 3, 100)
VERIFY_TRUTHFULNESS_INSTANCES = 100


class ConfigError(ValueError):
    """Malformed config file; carries a line/field diagnostic."""


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse the flat ``key = value`` config format."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} "
                              f"(expected one of {', '.join(CONFIG_KEYS)})")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    missing = [k for k in CONFIG_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"{source}: missing keys: {', '.join(missing)}")
    resolved: dict = {}
    for key in _FLOAT_KEYS:
        try:
            resolved[key] = float(raw[key])
        except ValueError:
            raise ConfigError(f"{source}: field {key!r}: not a number: {raw[key]!r}")
    for key in _INT_KEYS:
        try:
            resolved[key] = int(raw[key])
        except ValueError:
            raise ConfigError(f"{source}: field {key!r}: not an integer: {raw[key]!r}")
    if not 0 <= resolved["master_seed"] <= MASK64:
        raise ConfigError(f"{source}: field 'master_seed': out of 64-bit range")
    return resolved


def load_experiment_config(path: str, seed_override: int | None = None
                           ) -> tuple[ExperimentConfig, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    fields = parse_config_text(text, source=path)
    if seed_override is not None:
        fields["master_seed"] = seed_override
    params = TradeoffParams(**{k: fields[k] for k in _FLOAT_KEYS})
    try:
        cfg = ExperimentConfig(params=params,
                               n_advertisers=fields["n_advertisers"],
                               replications=fields["replications"],
                               master_seed=fields["master_seed"])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")
    return cfg, fields


def _jsonify(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonify(payload), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(out_dir: Path, config_echo: dict, master_seed: int,
                    started: str, outputs: list[str]) -> None:
    manifest = {
        "tool_version": __version__,
        "master_seed": master_seed,
        "config_echo": config_echo,
        "started_at": started,
        "finished_at": _now(),
        "outputs": sorted(outputs),
    }
    _write_json(out_dir / "manifest.json", manifest)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model_block(params: TradeoffParams) -> dict:
    adj = adjusted_params(params)
    disp = dispersion_condition(params)
    return {
        "mu_a": adj.mu_a,
        "sigma_a": adj.sigma_a,
        "z_score": adj.z_score,
        "bid_probability": adj.bid_probability,
        "market_depth_estimate": market_depth_from_z(adj.z_score),
        "dispersion_holds": disp.holds,
        "sigma_y_threshold": disp.sigma_y_threshold,
    }


def cmd_simulate(args) -> int:
    started = _now()
    cfg, fields = load_experiment_config(args.config, args.seed)
    out = _out_dir(args)
    summary = run_experiment(cfg, workers=args.workers)
    model = _model_block(cfg.params)
    _write_json(out / "summary.json",
                {"config": fields, "model": model, "summary": summary.to_dict()})
    row = [summary.to_dict()[k] for k in SUMMARY_FIELDS]
    row += [model["mu_a"], model["sigma_a"], model["z_score"],
            model["bid_probability"], model["market_depth_estimate"],
            int(model["dispersion_holds"])]
    _write_csv(out / "summary.csv", SUMMARY_CSV_FIELDS, [row])
    _write_manifest(out, {"command": "simulate", **fields,
                          "workers": args.workers},
                    cfg.master_seed, started,
                    ["summary.json", "summary.csv", "manifest.json"])
    return EXIT_OK


def cmd_depth_table(args) -> int:
    started = _now()
    rows = []
    echo: dict = {"command": "depth-table"}
    master_seed = 0
    if args.z_scores:
        try:
            z_scores = [float(tok) for tok in args.z_scores.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"--z-scores: not numbers: {args.z_scores!r}")
        if not z_scores:
            raise ConfigError("--z-scores: empty list")
        echo["z_scores"] = z_scores
        for z in z_scores:
            rows.append(_depth_row(z))
    elif args.config:
        cfg, fields = load_experiment_config(args.config, args.seed)
        echo.update(fields)
        master_seed = cfg.master_seed
        if args.theta_values:
            thetas = [float(tok) for tok in args.theta_values.split(",") if tok.strip()]
            if not thetas:
                raise ConfigError("--theta-values: empty list")
            echo["theta_values"] = thetas
            header = DEPTH_CSV_FIELDS + ("theta",)
            for theta in thetas:
                adj = adjusted_params(replace(cfg.params, theta=theta))
                rows.append(_depth_row(adj.z_score) + [theta])
            out = _out_dir(args)
            _write_csv(out / "depth_table.csv", header, rows)
            _write_manifest(out, echo, master_seed, started,
                            ["depth_table.csv", "manifest.json"])
            return EXIT_OK
        adj = adjusted_params(cfg.params)
        rows.append(_depth_row(adj.z_score))
    else:
        raise ConfigError("depth-table needs --config or --z-scores")
    out = _out_dir(args)
    _write_csv(out / "depth_table.csv", DEPTH_CSV_FIELDS, rows)
    _write_manifest(out, echo, master_seed, started,
                    ["depth_table.csv", "manifest.json"])
    return EXIT_OK


def _depth_row(z: float) -> list:
    depth = market_depth_from_z(z)
    return [z, normal_cdf(z), depth, math.ceil(depth)]


def cmd_sweep(args) -> int:
    started = _now()
    cfg, fields = load_experiment_config(args.config, args.seed)
    tokens = [tok for tok in args.values.split(",") if tok.strip()]
    if not tokens:
        raise ConfigError("--values: empty list")
    try:
        values = [float(tok) for tok in tokens]
    except ValueError:
        raise ConfigError(f"--values: not numbers: {args.values!r}")
    try:
        results = sweep(cfg, args.axis, values, workers=args.workers)
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ConfigError(str(exc))
    rows = []
    for value, summary in results:
        stats = summary.to_dict()
        for metric in SWEEP_METRICS:
            rows.append([value, metric, stats[metric], stats[metric + "_se"]])
        if args.axis in ("theta", "c"):
            params_v = replace(cfg.params, **{args.axis: value})
        else:
            params_v = cfg.params
        rows.append([value, "dispersion_holds",
                     int(dispersion_condition(params_v).holds), 0.0])
    out = _out_dir(args)
    _write_csv(out / "sweep.csv", SWEEP_CSV_FIELDS, rows)
    _write_manifest(out, {"command": "sweep", **fields, "axis": args.axis,
                          "values": values, "workers": args.workers},
                    cfg.master_seed, started, ["sweep.csv", "manifest.json"])
    return EXIT_OK


def _run_oracle(tid: TheoremId, cfg: ExperimentConfig, rng, workers: int) -> list:
    reps = cfg.replications
    if tid is TheoremId.T1:
        return [check_theorem1(cfg.params, VERIFY_T1_GRID, reps, rng,
                               delta=VERIFY_T1_DELTA, workers=workers)]
    if tid is TheoremId.T2:
        return [check_theorem2(cfg.params, VERIFY_T2_GRID, reps, rng,
                               workers=workers)]
    if tid is TheoremId.T3:
        return [check_theorem3(cfg.params, VERIFY_T3_GRID, reps, rng,
                               workers=workers)]
    if tid is TheoremId.PIT:
        return [check_pit_equivalence(cfg.params, n, min(reps, 100_000), rng)
                for n in VERIFY_PIT_GRID]
    if tid is TheoremId.BETA_U2:
        return [check_beta_u2(n, reps, rng) for n in VERIFY_BETA_GRID]
    if tid is TheoremId.COUNTEREXAMPLE:
        return [check_counterexample(reps, rng, workers=workers)]
    if tid is TheoremId.TRUTHFULNESS:
        return [truthfulness_suite(cfg.params, rng,
                                   instances=VERIFY_TRUTHFULNESS_INSTANCES)]
    raise ConfigError(f"unknown theorem id {tid}")


def cmd_verify(args) -> int:
    started = _now()
    cfg, fields = load_experiment_config(args.config, args.seed)
    if args.theorems:
        names = [tok.strip() for tok in args.theorems.split(",") if tok.strip()]
        if not names:
            raise ConfigError("--theorems: empty list")
        try:
            requested = [TheoremId(name) for name in names]
        except ValueError:
            known = ", ".join(t.value for t in TheoremId)
            raise ConfigError(f"unknown theorem id in {args.theorems!r} "
                              f"(expected any of {known})")
    else:
        requested = list(TheoremId)

    rng = make_generator(cfg.master_seed, 0)
    entries = []
    precondition_violated = False
    for tid in requested:
        try:
            reports = _run_oracle(tid, cfg, rng, args.workers)
        except ValueError as exc:
            precondition_violated = True
            entries.append({"theorem_id": tid.value, "passed": False,
                            "skipped": False, "statistic": None,
                            "threshold": None,
                            "detail": f"precondition violated: {exc}"})
            print(f"{tid.value}: PRECONDITION VIOLATED ({exc})", file=sys.stderr)
            continue
        for report in reports:
            entries.append(report.to_dict())
            status = ("SKIP" if report.skipped
                      else "PASS" if report.passed else "FAIL")
            print(f"{tid.value}: {status} — {report.detail}", file=sys.stderr)

    out = _out_dir(args)
    _write_json(out / "reports.json", entries)
    _write_manifest(out, {"command": "verify", **fields,
                          "theorems": [t.value for t in requested],
                          "workers": args.workers},
                    cfg.master_seed, started, ["reports.json", "manifest.json"])
    if precondition_violated:
        return EXIT_USAGE
    if any(not e["passed"] and not e["skipped"] for e in entries):
        return EXIT_ORACLE_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adauction",
        description="Second-price vs hidden-cost-adjusted auction simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config master_seed")
        p.add_argument("--workers", type=int,
                       default=max(1, os.cpu_count() or 1),
                       help="worker processes (results are worker-count invariant)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("simulate", help="run one experiment")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("depth-table", help="market-depth table from Z-scores")
    common(p, config_required=False)
    p.add_argument("--z-scores", default=None,
                   help="comma-separated Z-scores (bypasses --config)")
    p.add_argument("--theta-values", default=None,
                   help="comma-separated theta values tabulated against --config")
    p.set_defaults(func=cmd_depth_table)

    p = sub.add_parser("verify", help="run the statistical oracles")
    common(p)
    p.add_argument("--theorems", default=None,
                   help="comma-separated ids (default: all): "
                        + ",".join(t.value for t in TheoremId))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="sweep one axis, long-format CSV")
    common(p)
    p.add_argument("--axis", required=True,
                   choices=("n_advertisers", "theta", "c"))
    p.add_argument("--values", required=True,
                   help="comma-separated axis values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"invalid parameterization: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


def console_entry() -> None:
    raise SystemExit(main())
