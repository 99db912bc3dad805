import json
from functools import lru_cache

import numpy as np
import pytest

from netspam.experiments import (
    SUITES,
    category_analysis,
    feature_addition,
    per_feature_accuracy,
    random_baseline,
    run_suite,
    supervision_sweep,
    unsupervised_correlation,
)
from netspam.features import assemble_feature_matrix
from netspam.model import ALL_FEATURES, FeatureKind as F, FeatureMatrix
from netspam.pipeline import Mode, run_netspam
from netspam.synthetic import generate_synthetic, planted_config


@lru_cache(maxsize=None)
def planted(seed=0, n=2000):
    d = generate_synthetic(planted_config(seed, n_reviews=n))
    return d, assemble_feature_matrix(d)


def test_only_dev_carries_signal():
    d, fm = planted(1)
    # destroy every other feature's link to the labels by shuffling its column
    rng = np.random.default_rng(0)
    vals = fm.values.copy()
    for f in ALL_FEATURES:
        if f is not F.DEV:
            vals[:, f.column] = rng.permutation(vals[:, f.column])
    only_dev = FeatureMatrix(fm.review_ids, vals)
    aps = {f: per_feature_accuracy(d, only_dev, f)[0] for f in ALL_FEATURES}
    assert all(aps[F.DEV] > aps[f] for f in ALL_FEATURES if f is not F.DEV), aps


def test_constant_feature_is_chance():
    aucs = []
    for seed in range(20):
        d = generate_synthetic(planted_config(seed, n_reviews=600))
        vals = np.zeros((len(d), 8))
        vals[:, F.RES.column] = 0.3
        fm = FeatureMatrix(tuple(r.review_id for r in d.reviews), vals)
        _, a = per_feature_accuracy(d, fm, F.RES)
        aucs.append(a)
        assert 0.4 <= a <= 0.6, (seed, a)
    assert abs(np.mean(aucs) - 0.5) < 0.05


def test_full_schema_beats_median_single_feature():
    d, fm = planted(2)
    full = run_netspam(d, fm=fm, metrics=True).metrics["ap"]
    single = [per_feature_accuracy(d, fm, f)[0] for f in ALL_FEATURES]
    assert full >= np.median(single)


def test_per_feature_excludes_train_reviews():
    d, fm = planted(0)
    mode = Mode.semi(0.05, 3)
    r = run_netspam(d, schema=[F.BST], mode=mode, fm=fm, metrics=True)
    assert r.metrics["n_eval"] == len(d) - 100
    assert per_feature_accuracy(d, fm, F.BST, mode) == (r.metrics["ap"], r.metrics["auc"])


def test_supervision_sweep_shape():
    d, _ = planted(0)
    out = supervision_sweep(d, seed=1)
    assert [row["fraction"] for row in out["rows"]] == [0.01, 0.025, 0.05]
    assert [row["n_train"] for row in out["rows"]] == [20, 50, 100]
    aps = [row["ap"] for row in out["rows"]]
    assert out["ap_spread"] == max(aps) - min(aps)


def test_feature_addition_rows():
    d, fm = planted(0)
    out = feature_addition(d, fm=fm)
    assert [row["k"] for row in out["rows"]] == list(range(1, 9))
    for row in out["rows"]:
        assert row["features"] == out["order"][: row["k"]]
        assert 0 < row["ap"] <= 1 and 0 <= row["auc"] <= 1


def test_category_analysis_behavioural_first():
    d, fm = planted(0)
    out = category_analysis(d, fm=fm)
    assert out["behavioural_wins"]
    assert set(out["categories"]) == {"RB", "UB", "RL", "UL"}


def test_random_baseline_pairing():
    d, fm = planted(0)
    a = random_baseline(d, seed=5, fm=fm)
    b = random_baseline(d, seed=5, fm=fm)
    assert a == b and a["seed"] == 5
    assert a["netspam"]["ap"] > a["random"]["ap"]


def test_unsupervised_correlation_report():
    d, fm = planted(0)
    out = unsupervised_correlation(d, fm=fm)
    assert set(out["per_feature"]) == {f.value for f in ALL_FEATURES}
    assert -1 <= out["rho"] <= 1 and 0 <= out["p"] <= 1


@pytest.mark.parametrize("suite", SUITES)
def test_run_suite_report_layout(suite):
    d, _ = planted(0, 1200)
    rep = run_suite(suite, d, seed=2)
    json.dumps(rep)
    for key in ("config", "weights", "categories", "ap", "auc", "per_feature", "spearman"):
        assert key in rep
    if suite == "UnsupervisedCorrelation":
        assert set(rep["spearman"]) == {"rho", "p"}


def test_unknown_suite():
    d, _ = planted(0, 1200)
    with pytest.raises(ValueError):
        run_suite("Bogus", d)
