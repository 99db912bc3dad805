"""Command-line entry point: ``netspam {features,run,experiment,synth}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import DatasetError, DegenerateGroundTruth, InfeasibleConfig, NoLabels
from .experiments import SUITES, params_dict, run_suite
from .features import DevThreshold, assemble_feature_matrix
from .hin import NetworkSchema
from .ingest import apply_sampler, atomic_write_text, dumps_jsonl, load_reviews
from .model import ALL_FEATURES, FeatureParams
from .pipeline import Mode, run_netspam
from .synthetic import SyntheticConfig, generate_synthetic

log = logging.getLogger("netspam")

EXIT_INPUT, EXIT_LABELS, EXIT_METRICS, EXIT_INFEASIBLE = 2, 3, 4, 5

DEFAULTS = {
    "input": None,
    "format": None,
    "schema": ",".join(f.value for f in ALL_FEATURES),
    "mode": "unsup",
    "s": 20,
    "tau": 28.0,
    "delta": 7.0,
    "beta1": "entropy",
    "dev_formula": "corrected",
    "sampler": "none",
    "seed": 0,
    "out": ".",
    "metrics": False,
}


class InputError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser):
    # every default is None so that an explicit flag can be told apart from a config value
    p.add_argument("--input", help="review file (JSONL or CSV)")
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--schema", help="comma list of features, e.g. NR,ACS,PP1,ETF")
    p.add_argument("--mode", help="unsup or semi:<fraction>:<seed>")
    p.add_argument("--s", type=int, help="number of spam-certainty levels")
    p.add_argument("--tau", type=float, help="burstiness window in days")
    p.add_argument("--delta", type=float, help="early time frame in days")
    p.add_argument("--beta1", help="DEV threshold: a float or 'entropy'")
    p.add_argument("--dev-formula", dest="dev_formula", choices=["corrected", "paper"])
    p.add_argument("--sampler", help="none, review:<f>, item:<f> or user")
    p.add_argument("--seed", type=int, help="sampler and experiment seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON file of option values; flags win")
    p.add_argument("--dump-config", dest="dump_config", action="store_true",
                   help="print the effective configuration and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netspam", description="Review spam detection on a metapath network.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="compute the feature matrix CSV")
    _add_common(p)

    p = sub.add_parser("run", help="score reviews and learn feature weights")
    _add_common(p)
    p.add_argument("--metrics", action="store_true", default=None,
                   help="require AP/AUC (fails with exit 4 if one class is missing)")

    p = sub.add_parser("experiment", help="run an experiment suite")
    p.add_argument("suite", choices=SUITES)
    _add_common(p)

    p = sub.add_parser("synth", help="generate a labelled synthetic dataset")
    p.add_argument("cfg", nargs="?", help="SyntheticConfig JSON file (defaults if omitted)")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--seed", type=int, help="overrides rng_seed from the config")
    return parser


def effective_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise InputError(f"{args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: line {exc.lineno}: {exc.msg}") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise InputError(f"{args.config}: unknown keys {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if isinstance(cfg["schema"], list):
        cfg["schema"] = ",".join(cfg["schema"])
    return cfg


def parse_params(cfg) -> FeatureParams:
    beta1 = cfg["beta1"]
    if beta1 is None or beta1 == "entropy":
        beta1 = None
    else:
        try:
            beta1 = float(beta1)
        except ValueError:
            raise InputError(f"--beta1 must be a float or 'entropy', got {beta1!r}") from None
    try:
        return FeatureParams(tau=float(cfg["tau"]), delta=float(cfg["delta"]), beta1=beta1,
                             s=int(cfg["s"]), dev_formula=cfg["dev_formula"])
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _parse_or_fail(fn, text, flag):
    try:
        return fn(text)
    except ValueError as exc:
        raise InputError(f"{flag}: {exc}") from None


def load_input(cfg):
    path = cfg["input"]
    if not path:
        raise InputError("--input is required")
    if not Path(path).is_file():
        raise InputError(f"{path}: no such file")
    try:
        d = load_reviews(path, cfg["format"])
        d = apply_sampler(d, cfg["sampler"], int(cfg["seed"]))
    except DatasetError as exc:
        raise InputError(f"{path}: {exc}") from None
    except (ValueError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    log.info("loaded %d reviews from %s", len(d), path)
    return d


def _out_dir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_features(cfg) -> int:
    d = load_input(cfg)
    params = parse_params(cfg)
    th = DevThreshold(params.beta1, "fixed") if params.beta1 is not None else DevThreshold()
    fm = assemble_feature_matrix(d, params, th)
    path = _out_dir(cfg) / "features.csv"
    atomic_write_text(path, fm.to_csv_text())
    print(f"wrote {path} ({len(fm)} rows)")
    for f in ALL_FEATURES:
        col = fm.column(f)
        print(f"{f.value:>4}  mean={col.mean():.4f}  std={col.std():.4f}  "
              f"min={col.min():.4f}  max={col.max():.4f}  nonzero={int(np.count_nonzero(col))}")
    return 0


def scores_csv(d, result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["review_id", "prior", "score", "rank", "label"])
    pos = result.scores.rank_positions()
    for i, rid in enumerate(result.scores.review_ids):
        w.writerow([rid, f"{result.prior.y[i]:.6f}", f"{result.scores.pr[i]:.6f}", pos[rid],
                    d[rid].label.value])
    return buf.getvalue()


def cmd_run(cfg) -> int:
    d = load_input(cfg)
    params = parse_params(cfg)
    schema = _parse_or_fail(NetworkSchema.parse, cfg["schema"], "--schema")
    mode = _parse_or_fail(Mode.parse, cfg["mode"], "--mode")
    result = run_netspam(d, schema, params, mode, metrics=True if cfg["metrics"] else None)
    out = _out_dir(cfg)
    atomic_write_text(out / "scores.csv", scores_csv(d, result))
    atomic_write_text(out / "weights.json", _dump_json(
        {"weights": result.weights.as_dict(), "categories": result.categories}))
    report = {
        "config": _report_config(cfg, params),
        "n_reviews": len(d),
        "dev_threshold": {"beta1": result.threshold.beta1, "source": result.threshold.source},
        "weights": result.weights.as_dict(),
        "categories": result.categories,
        "metrics": result.metrics if result.metrics is not None else "unavailable",
    }
    atomic_write_text(out / "report.json", _dump_json(report))
    if result.metrics is not None:
        print(f"AP={result.metrics['ap']:.4f} AUC={result.metrics['auc']:.4f} "
              f"on {result.metrics['n_eval']} reviews")
    else:
        print("metrics unavailable (no labelled spam/genuine pair)")
    print(f"wrote {out / 'scores.csv'}, {out / 'weights.json'}, {out / 'report.json'}")
    return 0


def _report_config(cfg, params):
    return {"input": cfg["input"], "format": cfg["format"], "schema": cfg["schema"],
            "mode": cfg["mode"], "sampler": cfg["sampler"], "seed": cfg["seed"],
            "params": params_dict(params)}


def cmd_experiment(cfg, suite) -> int:
    d = load_input(cfg)
    params = parse_params(cfg)
    schema = _parse_or_fail(NetworkSchema.parse, cfg["schema"], "--schema")
    mode = _parse_or_fail(Mode.parse, cfg["mode"], "--mode")
    report = run_suite(suite, d, mode, schema, params, int(cfg["seed"]))
    report["config"].update(input=cfg["input"], sampler=cfg["sampler"])
    path = _out_dir(cfg) / f"{suite}.json"
    atomic_write_text(path, _dump_json(report))
    print(f"{suite}: AP={report['ap']:.4f} AUC={report['auc']:.4f}")
    if suite == "SupervisionSweep":
        print(f"AP spread across supervision levels: {report['detail']['ap_spread']:.4f}")
    print(f"wrote {path}")
    return 0


def cmd_synth(args) -> int:
    if args.cfg:
        try:
            cfg = SyntheticConfig.from_json(args.cfg)
        except OSError as exc:
            raise InputError(f"{args.cfg}: {exc.strerror}") from None
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            if isinstance(exc, InfeasibleConfig):
                raise
            raise InputError(f"{args.cfg}: {exc}") from None
    else:
        cfg = SyntheticConfig()
    if args.seed is not None:
        cfg = SyntheticConfig.from_dict({**cfg.to_dict(), "rng_seed": args.seed})
    d = generate_synthetic(cfg)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out, dumps_jsonl(d))
    print(f"wrote {out}: {len(d)} reviews, spam ratio {d.spam_ratio():.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args)
        cfg = effective_config(args)
        if args.dump_config:
            print(_dump_json(cfg), end="")
            return 0
        if args.command == "features":
            return cmd_features(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_experiment(cfg, args.suite)
    except InputError as exc:
        print(f"netspam: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoLabels as exc:
        print(f"netspam: no labels: {exc}", file=sys.stderr)
        return EXIT_LABELS
    except DegenerateGroundTruth as exc:
        print(f"netspam: cannot compute metrics: {exc}", file=sys.stderr)
        return EXIT_METRICS
    except InfeasibleConfig as exc:
        print(f"netspam: infeasible config: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
