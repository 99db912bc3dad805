"""Experiment suites over a labelled dataset.

Every suite returns a plain dict that serializes straight to JSON.
"""

from __future__ import annotations

import numpy as np

from .classify import category_report, prior_semi_supervised
from .features import assemble_feature_matrix
from .hin import as_schema
from .metrics import spearman
from .model import Category, Dataset, FeatureKind, FeatureMatrix, FeatureParams
from .pipeline import Mode, choose_threshold, run_netspam

SUITES = ("SupervisionSweep", "FeatureAddition", "CategoryAnalysis", "RandomBaseline",
          "UnsupervisedCorrelation")
SWEEP_FRACTIONS = (0.01, 0.025, 0.05)
BEHAVIOURAL = (Category.RB, Category.UB)
LINGUISTIC = (Category.RL, Category.UL)


def _features_for(d: Dataset, params: FeatureParams, mode: Mode) -> FeatureMatrix:
    prior = prior_semi_supervised(d, mode.fraction, mode.seed) if mode.kind == "semi" else None
    return assemble_feature_matrix(d, params, choose_threshold(d, params, prior))


def per_feature_accuracy(d: Dataset, fm: FeatureMatrix, feature: FeatureKind,
                         mode: Mode | None = None, params: FeatureParams | None = None):
    """(normalized AP, AUC) of a one-feature run, scored on non-train reviews."""
    r = run_netspam(d, schema=[feature], params=params, mode=mode, fm=fm, metrics=True)
    return r.metrics["ap"], r.metrics["auc"]


def behavioural_vs_linguistic(categories: dict) -> tuple[float | None, float | None]:
    def mean(cats):
        vals = [categories[c.value] for c in cats if categories.get(c.value) is not None]
        return float(np.mean(vals)) if vals else None

    return mean(BEHAVIOURAL), mean(LINGUISTIC)


def supervision_sweep(d: Dataset, seed: int = 0, fractions=SWEEP_FRACTIONS, schema=None,
                      params: FeatureParams | None = None) -> dict:
    rows = []
    for fr in fractions:
        r = run_netspam(d, schema=schema, params=params, mode=Mode.semi(fr, seed), metrics=True)
        rows.append({"fraction": fr, "ap": r.metrics["ap"], "auc": r.metrics["auc"],
                     "n_train": len(r.prior.train_ids)})
    aps = [row["ap"] for row in rows]
    return {"rows": rows, "ap_spread": max(aps) - min(aps)}


def feature_addition(d: Dataset, mode: Mode | None = None, params: FeatureParams | None = None,
                     fm: FeatureMatrix | None = None) -> dict:
    """Schemas of the k highest-weighted features, k = 1..8."""
    mode = mode or Mode.unsup()
    params = params or FeatureParams()
    fm = fm if fm is not None else _features_for(d, params, mode)
    full = run_netspam(d, params=params, mode=mode, fm=fm, metrics=True)
    order = full.weights.ranked()
    rows = []
    for k in range(1, len(order) + 1):
        r = run_netspam(d, schema=order[:k], params=params, mode=mode, fm=fm, metrics=True)
        rows.append({"k": k, "features": [f.value for f in order[:k]],
                     "ap": r.metrics["ap"], "auc": r.metrics["auc"]})
    return {"order": [f.value for f in order], "rows": rows}


def category_analysis(d: Dataset, mode: Mode | None = None, params: FeatureParams | None = None,
                      fm: FeatureMatrix | None = None) -> dict:
    r = run_netspam(d, params=params, mode=mode, fm=fm)
    cats = category_report(r.weights)
    beh, ling = behavioural_vs_linguistic(cats)
    return {"weights": r.weights.as_dict(), "categories": cats,
            "behavioural_mean": beh, "linguistic_mean": ling,
            "behavioural_wins": beh is not None and ling is not None and beh > ling}


def random_baseline(d: Dataset, seed: int = 0, mode: Mode | None = None, schema=None,
                    params: FeatureParams | None = None, fm: FeatureMatrix | None = None) -> dict:
    """The learned network and the shuffled-connection baseline on the same prior and features."""
    mode = mode or Mode.unsup()
    params = params or FeatureParams()
    fm = fm if fm is not None else _features_for(d, params, mode)
    real = run_netspam(d, schema=schema, params=params, mode=mode, fm=fm, metrics=True)
    rand = run_netspam(d, schema=schema, params=params, mode=mode, fm=fm,
                       randomize_seed=seed, metrics=True)
    return {"seed": seed,
            "netspam": {"ap": real.metrics["ap"], "auc": real.metrics["auc"]},
            "random": {"ap": rand.metrics["ap"], "auc": rand.metrics["auc"]}}


def unsupervised_correlation(d: Dataset, params: FeatureParams | None = None,
                             fm: FeatureMatrix | None = None, mode: Mode | None = None) -> dict:
    """Spearman correlation between learned weights and single-feature AP."""
    mode = mode or Mode.unsup()
    params = params or FeatureParams()
    fm = fm if fm is not None else _features_for(d, params, mode)
    full = run_netspam(d, params=params, mode=mode, fm=fm, metrics=True)
    feats = list(full.weights)
    per = {f: per_feature_accuracy(d, fm, f, mode, params) for f in feats}
    rho, p = spearman(full.weights.array(feats), [per[f][0] for f in feats])
    return {"weights": full.weights.as_dict(),
            "per_feature": {f.value: {"ap": a, "auc": u} for f, (a, u) in per.items()},
            "rho": rho, "p": p}


def run_suite(suite: str, d: Dataset, mode: Mode | None = None, schema=None,
              params: FeatureParams | None = None, seed: int = 0) -> dict:
    """Run one suite and wrap it in the common report layout."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    mode = mode or Mode.unsup()
    params = params or FeatureParams()
    schema = as_schema(schema)

    if suite == "SupervisionSweep":
        detail = supervision_sweep(d, seed, schema=schema, params=params)
        base = run_netspam(d, schema=schema, params=params, mode=Mode.semi(SWEEP_FRACTIONS[0], seed),
                           metrics=True)
        fm = None
    else:
        fm = _features_for(d, params, mode)
        base = run_netspam(d, schema=schema, params=params, mode=mode, fm=fm, metrics=True)
        if suite == "FeatureAddition":
            detail = feature_addition(d, mode, params, fm)
        elif suite == "CategoryAnalysis":
            detail = category_analysis(d, mode, params, fm)
        elif suite == "RandomBaseline":
            detail = random_baseline(d, seed, mode, schema, params, fm)
        else:
            detail = unsupervised_correlation(d, params, fm, mode)

    report = {
        "suite": suite,
        "config": {"mode": str(mode), "seed": seed, "schema": [f.value for f in schema.features],
                   "params": params_dict(params)},
        "weights": base.weights.as_dict(),
        "categories": base.categories,
        "ap": base.metrics["ap"],
        "auc": base.metrics["auc"],
        "per_feature": None,
        "spearman": None,
        "detail": detail,
    }
    if suite == "UnsupervisedCorrelation":
        report["per_feature"] = detail["per_feature"]
        report["spearman"] = {"rho": detail["rho"], "p": detail["p"]}
    return report


def params_dict(params: FeatureParams) -> dict:
    return {"tau": params.tau, "delta": params.delta, "beta1": params.beta1, "s": params.s,
            "dev_formula": params.dev_formula, "similarity_cap": params.similarity_cap}
