"""Prior knowledge, metapath weights and final spam probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .errors import NoLabels
from .hin import BucketIndex, NetworkSchema, as_schema
from .model import Category, Dataset, FeatureKind, FeatureMatrix, Label


@dataclass(frozen=True, eq=False)
class PriorVector:
    """Initial spam probability per review, aligned with ascending review ids.

    ``train`` marks the labelled sample in semi-supervised mode (all False
    in unsupervised mode).
    """

    review_ids: tuple[str, ...]
    y: np.ndarray
    mode: str  # "semi" or "unsup"
    train: np.ndarray
    fraction: float | None = None
    seed: int | None = None

    def __getitem__(self, review_id: str) -> float:
        return float(self.y[self.review_ids.index(review_id)])

    @property
    def train_ids(self) -> set[str]:
        return {r for r, t in zip(self.review_ids, self.train) if t}


def prior_semi_supervised(d: Dataset, fraction: float, seed: int = 0) -> PriorVector:
    """Label a uniform sample of ``fraction`` of the reviews; everything else is 0."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    if not d.has_labels:
        raise NoLabels("semi-supervised prior needs labelled reviews")
    ids = tuple(sorted(r.review_id for r in d.reviews))
    n = len(ids)
    k = min(n, int(round(fraction * n)))
    rng = np.random.default_rng(seed)
    train = np.zeros(n, dtype=bool)
    train[rng.choice(n, size=k, replace=False)] = True
    spam = np.array([d[r].label is Label.SPAM for r in ids])
    y = (train & spam).astype(np.float64)
    return PriorVector(ids, y, "semi", train, fraction, seed)


def prior_unsupervised(fm: FeatureMatrix, schema=None) -> PriorVector:
    schema = as_schema(schema)
    cols = [f.column for f in schema.features]
    y = fm.values[:, cols].mean(axis=1)
    return PriorVector(fm.review_ids, y, "unsup", np.zeros(len(fm), dtype=bool))


@dataclass(frozen=True)
class WeightVector:
    weights: Mapping[FeatureKind, float]

    def __getitem__(self, feature) -> float:
        return self.weights[FeatureKind(feature)]

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def array(self, features) -> np.ndarray:
        return np.array([self.weights.get(FeatureKind(f), 0.0) for f in features])

    def as_dict(self) -> dict[str, float]:
        return {f.value: float(w) for f, w in self.weights.items()}

    def ranked(self) -> list[FeatureKind]:
        """Features by descending weight (ties keep schema order)."""
        feats = list(self.weights)
        return sorted(feats, key=lambda f: -self.weights[f])


def _check_alignment(b: BucketIndex, y: PriorVector):
    if b.review_ids != y.review_ids:
        raise ValueError("bucket index and prior cover different reviews")


def compute_weights(b: BucketIndex, y: PriorVector) -> WeightVector:
    """Per-feature weight: level-weighted mean of y_r * y_s over linked pairs.

    Sums run over ordered pairs r != s inside each positive-level bucket,
    aggregated per bucket as m * ((sum y)^2 - sum y^2) against m * (k^2 - k).
    """
    _check_alignment(b, y)
    out = {}
    yv = np.asarray(y.y, dtype=np.float64)
    levels_val = np.arange(b.s) / b.s
    for slot, f in enumerate(b.features):
        lv = b.levels[:, slot]
        sy = np.bincount(lv, weights=yv, minlength=b.s)
        syy = np.bincount(lv, weights=yv * yv, minlength=b.s)
        k = np.bincount(lv, minlength=b.s).astype(np.float64)
        num = float(np.sum(levels_val * (sy * sy - syy)))
        den = float(np.sum(levels_val * (k * k - k)))
        out[f] = min(1.0, max(0.0, num / den)) if den > 0 else 0.0
    return WeightVector(out)


def score_pair(shared: Mapping, w: WeightVector | Mapping) -> float:
    """1 - prod(1 - level * weight) over the features two reviews share."""
    p = 1.0
    for f, level in shared.items():
        p *= 1.0 - level * w[FeatureKind(f)]
    return 1.0 - p


@dataclass(frozen=True, eq=False)
class SpamScoreTable:
    review_ids: tuple[str, ...]
    pr: np.ndarray
    prior: np.ndarray
    rank: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.rank:
            order = np.argsort(-np.asarray(self.pr), kind="stable")
            object.__setattr__(self, "rank", tuple(self.review_ids[i] for i in order))

    def __getitem__(self, review_id: str) -> float:
        return float(self.pr[self.review_ids.index(review_id)])

    def as_dict(self) -> dict[str, float]:
        return {r: float(p) for r, p in zip(self.review_ids, self.pr)}

    def rank_positions(self) -> dict[str, int]:
        return {r: i + 1 for i, r in enumerate(self.rank)}


def score_all(b: BucketIndex, w: WeightVector, y: PriorVector, max_neighbors: int = 0,
              backend: str | None = None) -> SpamScoreTable:
    _check_alignment(b, y)
    pr = kernels.score_reviews(
        b.levels, b.order, b.offsets, w.array(b.features), b.s, y.y,
        cap=max_neighbors, backend=backend,
    )
    pr = np.clip(pr, 0.0, 1.0)
    pr.setflags(write=False)
    return SpamScoreTable(b.review_ids, pr, np.asarray(y.y))


def randomize_index(b: BucketIndex, seed: int = 0) -> BucketIndex:
    """Shuffle review-to-level assignment per feature, keeping bucket sizes."""
    rng = np.random.default_rng(seed)
    levels = np.array(b.levels)
    for slot in range(len(b.features)):
        levels[:, slot] = levels[rng.permutation(len(b)), slot]
    return BucketIndex.from_levels(b.review_ids, b.features, levels, b.s)


def category_report(w: WeightVector) -> dict[str, float | None]:
    """Mean weight per feature category; None for categories absent from ``w``."""
    out = {}
    for cat in Category:
        vals = [v for f, v in w.weights.items() if f.category is cat]
        out[cat.value] = float(np.mean(vals)) if vals else None
    return out
