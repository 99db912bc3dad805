import json

import numpy as np
import pytest
from scipy.stats import ks_2samp

from netspam.errors import InfeasibleConfig
from netspam.features import assemble_feature_matrix
from netspam.ingest import dumps_jsonl
from netspam.model import FeatureKind as F, Label
from netspam.synthetic import SyntheticConfig, generate_synthetic, planted_config


def spam_mask(d, fm):
    return np.array([d[r].label is Label.SPAM for r in fm.review_ids])


def test_zero_spam_ratio():
    d = generate_synthetic(SyntheticConfig(n_users=200, n_items=30, spam_ratio=0.0, rng_seed=1))
    assert all(r.label is Label.GENUINE for r in d.reviews)


@pytest.mark.parametrize("seed", range(3))
def test_default_ratio_within_one_percent(seed):
    d = generate_synthetic(SyntheticConfig(rng_seed=seed))
    assert abs(d.spam_ratio() - 0.13) <= 0.01


@pytest.mark.parametrize("ratio", [0.05, 0.3, 0.5])
def test_other_ratios(ratio):
    d = generate_synthetic(SyntheticConfig(n_users=400, n_items=40, spam_ratio=ratio, rng_seed=2))
    assert abs(d.spam_ratio() - ratio) <= 0.01


def test_infeasible():
    # two users with one review each cannot make 13% spam
    with pytest.raises(InfeasibleConfig):
        generate_synthetic(SyntheticConfig(n_users=2, n_items=2, n_reviews=2, spam_ratio=0.13))


def test_invalid_config():
    with pytest.raises(ValueError):
        SyntheticConfig(spam_ratio=1.2)
    with pytest.raises(ValueError):
        SyntheticConfig(camouflage_rate=-0.1)
    with pytest.raises(ValueError):
        SyntheticConfig(n_users=0)
    with pytest.raises(ValueError):
        SyntheticConfig.from_dict({"n_users": 10, "colour": "red"})


def test_deterministic_bytes():
    cfg = SyntheticConfig(n_users=300, n_items=30, rng_seed=9)
    assert dumps_jsonl(generate_synthetic(cfg)) == dumps_jsonl(generate_synthetic(cfg))
    other = SyntheticConfig(n_users=300, n_items=30, rng_seed=10)
    assert dumps_jsonl(generate_synthetic(cfg)) != dumps_jsonl(generate_synthetic(other))


def test_config_json_round_trip(tmp_path):
    cfg = planted_config(4, n_reviews=3000)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
    assert SyntheticConfig.from_json(p) == cfg


def test_exact_review_count_and_sorted_ids():
    d = generate_synthetic(planted_config(0, n_reviews=2400))
    assert len(d) == 2400
    ids = [r.review_id for r in d.reviews]
    assert ids == sorted(ids)
    assert all(1 <= r.rating <= 5 for r in d.reviews)


def test_camouflage_removes_behavioural_signal():
    d = generate_synthetic(SyntheticConfig(n_users=3500, n_items=250, n_reviews=10000,
                                           camouflage_rate=1.0, rng_seed=0))
    fm = assemble_feature_matrix(d)
    spam = spam_mask(d, fm)
    for f in (F.BST, F.ETF, F.DEV):
        stat = ks_2samp(fm.column(f)[spam], fm.column(f)[~spam]).statistic
        assert stat < 0.05, (f, stat)


def test_planted_signals_present():
    cfg = SyntheticConfig(n_users=900, n_items=80, camouflage_rate=0.0, rng_seed=3)
    d = generate_synthetic(cfg)
    fm = assemble_feature_matrix(d)
    spam = spam_mask(d, fm)
    for f in (F.BST, F.ETF, F.DEV, F.PP1, F.RES, F.ACS, F.MCS):
        assert fm.column(f)[spam].mean() > fm.column(f)[~spam].mean() + 0.02, f
    ratings = np.array([d[r].rating for r in fm.review_ids])
    assert np.isin(ratings[spam], [1, 5]).all()


def test_rating_bias():
    for bias, rating in (("promote", 5), ("demote", 1)):
        d = generate_synthetic(SyntheticConfig(n_users=300, n_items=30, spammer_rating_bias=bias,
                                               rng_seed=5))
        assert {r.rating for r in d.reviews if r.label is Label.SPAM} == {rating}


def test_spammer_reviews_bursty():
    d = generate_synthetic(SyntheticConfig(n_users=600, n_items=60, spammer_burst_window=10,
                                           rng_seed=1))
    for user, ids in d.user_index.items():
        labels = {d[r].label for r in ids}
        if labels == {Label.SPAM} and len(ids) > 1:
            span = (d[ids[-1]].date - d[ids[0]].date).days
            assert span <= 10
