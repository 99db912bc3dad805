"""End-to-end run: features, network, prior, weights, scores, metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import (
    PriorVector,
    SpamScoreTable,
    WeightVector,
    category_report,
    compute_weights,
    prior_semi_supervised,
    prior_unsupervised,
    randomize_index,
    score_all,
)
from .errors import DegenerateGroundTruth
from .features import DevThreshold, assemble_feature_matrix, dev_raw_values, entropy_partition_threshold
from .hin import BucketIndex, NetworkSchema, as_schema, build_bucket_index
from .metrics import RankedList, auc, average_precision
from .model import Dataset, FeatureMatrix, FeatureParams, Label


@dataclass(frozen=True)
class Mode:
    """Prior mode: ``Mode.unsup()`` or ``Mode.semi(fraction, seed)``."""

    kind: str = "unsup"
    fraction: float | None = None
    seed: int = 0

    @classmethod
    def unsup(cls) -> "Mode":
        return cls("unsup")

    @classmethod
    def semi(cls, fraction: float, seed: int = 0) -> "Mode":
        return cls("semi", fraction, seed)

    @classmethod
    def parse(cls, text: str) -> "Mode":
        parts = text.strip().split(":")
        if parts[0] in ("unsup", "unsupervised") and len(parts) == 1:
            return cls.unsup()
        if parts[0] == "semi" and len(parts) in (2, 3):
            seed = int(parts[2]) if len(parts) == 3 else 0
            return cls.semi(float(parts[1]), seed)
        raise ValueError(f"mode must be 'unsup' or 'semi:<fraction>:<seed>', got {text!r}")

    def __str__(self):
        return "unsup" if self.kind == "unsup" else f"semi:{self.fraction}:{self.seed}"


@dataclass
class NetSpamResult:
    features: FeatureMatrix
    threshold: DevThreshold
    index: BucketIndex
    prior: PriorVector
    weights: WeightVector
    scores: SpamScoreTable
    metrics: dict | None = field(default=None)

    @property
    def categories(self):
        return category_report(self.weights)


def choose_threshold(d: Dataset, params: FeatureParams, prior: PriorVector | None) -> DevThreshold:
    """Fixed beta1 if given, else entropy cut over the labelled training sample."""
    if params.beta1 is not None:
        return DevThreshold(params.beta1, "fixed")
    if prior is None or prior.mode != "semi":
        return DevThreshold()
    raw = dev_raw_values(d, params.dev_formula)
    vals, labs = [], []
    for rid, t in zip(prior.review_ids, prior.train):
        lab = d[rid].label
        if t and lab is not Label.UNKNOWN:
            vals.append(raw[rid])
            labs.append(int(lab is Label.SPAM))
    return entropy_partition_threshold(vals, labs)


def evaluate(d: Dataset, scores: SpamScoreTable, exclude=()) -> dict:
    ranked = RankedList.build(scores.rank, {r.review_id: r.label for r in d.reviews}, exclude)
    return {
        "ap": average_precision(ranked),
        "ap_raw": average_precision(ranked, normalized=False),
        "auc": auc(ranked),
        "n_eval": len(ranked.order),
        "n_spam": int(ranked.flags().sum()),
    }


def run_netspam(d: Dataset, schema=None, params: FeatureParams | None = None,
                mode: Mode | None = None, fm: FeatureMatrix | None = None,
                randomize_seed: int | None = None, max_neighbors: int = 0,
                metrics: bool | None = None) -> NetSpamResult:
    """Run the whole framework on ``d``.

    ``fm`` reuses a precomputed feature matrix. ``randomize_seed`` shuffles the
    bucket index before weighting (random-connection baseline). ``metrics``:
    True requires them (raises DegenerateGroundTruth), None computes them
    when both classes are present, False skips them.
    """
    schema = as_schema(schema)
    params = params or FeatureParams()
    mode = mode or Mode.unsup()

    semi = prior_semi_supervised(d, mode.fraction, mode.seed) if mode.kind == "semi" else None
    if fm is None:
        th = choose_threshold(d, params, semi)
        fm = assemble_feature_matrix(d, params, th)
    else:
        th = DevThreshold(params.beta1) if params.beta1 is not None else DevThreshold()
    prior = semi if semi is not None else prior_unsupervised(fm, schema)

    index = build_bucket_index(fm, schema, params.s)
    if randomize_seed is not None:
        index = randomize_index(index, randomize_seed)
    weights = compute_weights(index, prior)
    scores = score_all(index, weights, prior, max_neighbors=max_neighbors)

    result = NetSpamResult(fm, th, index, prior, weights, scores)
    if metrics is not False:
        try:
            result.metrics = evaluate(d, scores, prior.train_ids)
        except DegenerateGroundTruth:
            if metrics:
                raise
    return result
