"""Implicit review network.

Feature values are quantised into ``s`` spam-certainty levels. Reviews that
share a level on a feature are linked through that feature's metapath, so
each (feature, level) bucket is a clique. Only the buckets are stored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UnknownReview
from .model import ALL_FEATURES, FeatureKind, FeatureMatrix


@dataclass(frozen=True)
class NetworkSchema:
    features: tuple[FeatureKind, ...] = ALL_FEATURES

    def __post_init__(self):
        feats = tuple(FeatureKind(f) for f in self.features)
        if not feats:
            raise ValueError("network schema needs at least one feature")
        if len(set(feats)) != len(feats):
            raise ValueError("duplicate feature in schema")
        object.__setattr__(self, "features", feats)

    @classmethod
    def parse(cls, text: str) -> "NetworkSchema":
        return cls(FeatureKind.parse_list(text))

    def __iter__(self):
        return iter(self.features)

    def __len__(self):
        return len(self.features)


def as_schema(schema) -> NetworkSchema:
    if schema is None:
        return NetworkSchema()
    if isinstance(schema, NetworkSchema):
        return schema
    if isinstance(schema, str):
        return NetworkSchema.parse(schema)
    return NetworkSchema(tuple(schema))


def quantize_index(f, s: int):
    """Level index floor(s * f), with f = 1 folded into the top level s - 1."""
    k = np.floor(np.asarray(f, dtype=np.float64) * s).astype(np.int64)
    return np.clip(k, 0, s - 1)


def quantize(f: float, s: int = 20) -> float:
    if not 0 <= f <= 1:
        raise ValueError(f"feature value {f} outside [0, 1]")
    return min(math.floor(s * f), s - 1) / s


@dataclass(frozen=True, eq=False)
class BucketIndex:
    review_ids: tuple[str, ...]
    features: tuple[FeatureKind, ...]
    s: int
    levels: np.ndarray   # (n, L) level index per review / feature
    order: np.ndarray    # (L, n) rows sorted by (level, row)
    offsets: np.ndarray  # (L, s + 1) bucket boundaries into ``order``

    @classmethod
    def from_levels(cls, review_ids: Sequence[str], features: Iterable, levels, s: int):
        review_ids = tuple(review_ids)
        if list(review_ids) != sorted(review_ids) or len(set(review_ids)) != len(review_ids):
            raise ValueError("review_ids must be unique and sorted")
        features = tuple(FeatureKind(f) for f in features)
        levels = np.array(levels, dtype=np.int64).reshape(len(review_ids), len(features))
        if levels.size and (levels.min() < 0 or levels.max() >= s):
            raise ValueError("level index out of range")
        n, L = levels.shape
        order = np.empty((L, n), dtype=np.int64)
        offsets = np.zeros((L, s + 1), dtype=np.int64)
        for l in range(L):
            order[l] = np.argsort(levels[:, l], kind="stable")
            offsets[l, 1:] = np.cumsum(np.bincount(levels[:, l], minlength=s))
        for a in (levels, order, offsets):
            a.setflags(write=False)
        return cls(review_ids, features, s, levels, order, offsets)

    def __len__(self):
        return len(self.review_ids)

    def position(self, review_id: str) -> int:
        pos = self.__dict__.get("_pos")
        if pos is None:
            pos = {r: i for i, r in enumerate(self.review_ids)}
            object.__setattr__(self, "_pos", pos)
        try:
            return pos[review_id]
        except KeyError:
            raise UnknownReview(review_id) from None

    def feature_slot(self, feature) -> int:
        try:
            return self.features.index(FeatureKind(feature))
        except ValueError:
            raise KeyError(f"feature {feature} not in schema") from None

    def level(self, review_id: str, feature) -> float:
        return self.levels[self.position(review_id), self.feature_slot(feature)] / self.s

    def bucket_rows(self, slot: int, k: int) -> np.ndarray:
        return self.order[slot, self.offsets[slot, k]:self.offsets[slot, k + 1]]

    def buckets(self, feature) -> dict[float, list[str]]:
        """Non-empty buckets of one feature: level -> review ids (ascending)."""
        slot = self.feature_slot(feature)
        out = {}
        for k in range(self.s):
            rows = self.bucket_rows(slot, k)
            if rows.size:
                out[k / self.s] = [self.review_ids[i] for i in rows]
        return out

    def bucket_sizes(self, slot: int) -> np.ndarray:
        return np.diff(self.offsets[slot])

    def histogram(self) -> dict[str, dict[str, int]]:
        return {
            f.value: {
                f"{k / self.s:.2f}": int(c)
                for k, c in enumerate(self.bucket_sizes(slot)) if c
            }
            for slot, f in enumerate(self.features)
        }

    def histogram_json(self) -> str:
        return json.dumps(self.histogram(), indent=2, sort_keys=True)


def build_bucket_index(fm: FeatureMatrix, schema=None, s: int = 20) -> BucketIndex:
    schema = as_schema(schema)
    cols = [f.column for f in schema.features]
    levels = quantize_index(fm.values[:, cols], s)
    return BucketIndex.from_levels(fm.review_ids, schema.features, levels, s)


def metapath_value(b: BucketIndex, u: str, v: str, feature) -> float:
    if u == v:
        raise ValueError("metapath_value needs two distinct reviews")
    i, j = b.position(u), b.position(v)
    slot = b.feature_slot(feature)
    k = b.levels[i, slot]
    return k / b.s if k == b.levels[j, slot] else 0.0


def neighbors(b: BucketIndex, u: str) -> list[tuple[str, dict[FeatureKind, float]]]:
    """Reviews sharing a positive level with ``u`` on any schema feature."""
    i = b.position(u)
    shared: dict[int, dict[FeatureKind, float]] = {}
    for slot, f in enumerate(b.features):
        k = b.levels[i, slot]
        if k == 0:
            continue
        for j in b.bucket_rows(slot, k):
            if j != i:
                shared.setdefault(int(j), {})[f] = k / b.s
    return [(b.review_ids[j], shared[j]) for j in sorted(shared)]
