"""Per-review spam features.

Review-level features (DEV, ETF, RES, PP1) are computed for each review;
user-level features (NR, BST, ACS, MCS) are computed once per author and
copied onto every review that author wrote.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    ALL_FEATURES,
    DEFAULT_PRONOUNS,
    Dataset,
    FeatureKind,
    FeatureMatrix,
    FeatureParams,
)

FIXED_BETA1 = 0.5

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_RE = re.compile(r"([^.!?]+)([.!?]*)")


@dataclass(frozen=True)
class DevThreshold:
    beta1: float = FIXED_BETA1
    source: str = "fixed"  # "entropy" or "fixed"

    def __post_init__(self):
        if not 0 <= self.beta1 < 1:
            raise ValueError("beta1 must lie in [0, 1)")


# -- behavioural -----------------------------------------------------------


def _days(a, b) -> int:
    return (b - a).days


def burstiness_raw(dates: Sequence, tau: float = 28) -> float:
    if not dates:
        raise ValueError("burstiness needs at least one review date")
    span = _days(min(dates), max(dates))
    if not 0 < span < tau:
        return 0.0
    return 1.0 - span / tau


def burstiness(dates: Sequence, tau: float = 28) -> float:
    """Binarised burstiness of one user's reviews (1 when the raw value > 0.5)."""
    return 1.0 if burstiness_raw(dates, tau) > 0.5 else 0.0


def negative_ratio(ratings: Sequence[int]) -> float:
    if not ratings:
        raise ValueError("negative_ratio needs at least one rating")
    return 1.0 if sum(ratings) / len(ratings) <= 2 else 0.0


def early_time_frame_raw(review_date, first_date, delta: float = 7) -> float:
    gap = _days(first_date, review_date)
    if gap < 0:
        raise ValueError("review predates the item's first review")
    if gap == 0:
        # the item's opening review: limit of 1 - gap/delta as gap -> 0+
        return 1.0
    if gap >= delta:
        return 0.0
    return 1.0 - gap / delta


def early_time_frame(review_date, first_date, delta: float = 7) -> float:
    return 1.0 if early_time_frame_raw(review_date, first_date, delta) > 0.5 else 0.0


def rate_deviation(rating: int, item_mean: float, th: DevThreshold | float = FIXED_BETA1,
                   mode: str = "corrected") -> float:
    """Thresholded deviation of a rating from its item's mean rating.

    ``corrected`` scores |rating - mean| / 4; ``paper`` scores
    1 - (rating - mean) / 4 clamped to [0, 1]. Values not above beta1 become 0.
    """
    beta1 = th.beta1 if isinstance(th, DevThreshold) else float(th)
    if mode == "corrected":
        v = abs(rating - item_mean) / 4.0
    elif mode == "paper":
        v = 1.0 - (rating - item_mean) / 4.0
    else:
        raise ValueError(f"unknown dev formula {mode!r}")
    v = min(1.0, max(0.0, v))
    return v if v > beta1 else 0.0


# -- entropy-based threshold -----------------------------------------------


def _entropy(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _best_cut(values: np.ndarray, labels: np.ndarray):
    """Minimum weighted-entropy binary cut over sorted ``values``.

    Returns (cut, weighted_entropy, left_end) or None when all values are equal.
    Candidate cuts are midpoints between consecutive distinct values; the
    first (lowest) cut wins ties.
    """
    n = len(values)
    boundaries = np.nonzero(values[1:] != values[:-1])[0]  # last index of left part
    if boundaries.size == 0:
        return None
    pos = np.cumsum(labels)
    left_n = boundaries + 1
    left_pos = pos[boundaries]
    right_n = n - left_n
    right_pos = pos[-1] - left_pos

    def ent(k, m):
        with np.errstate(divide="ignore", invalid="ignore"):
            p = k / m
            q = 1 - p
            a = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1)), 0.0)
            b = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1)), 0.0)
        return a + b

    weighted = (left_n * ent(left_pos, left_n) + right_n * ent(right_pos, right_n)) / n
    best = int(np.argmin(weighted))
    j = int(boundaries[best])
    cut = (values[j] + values[j + 1]) / 2.0
    return float(cut), float(weighted[best]), j


def _mdl_accepts(labels: np.ndarray, j: int, weighted: float) -> bool:
    n = len(labels)
    left, right = labels[: j + 1], labels[j + 1:]

    def counts(x):
        return np.bincount(x, minlength=2)

    ent_s = _entropy(counts(labels))
    gain = ent_s - weighted
    k = int((counts(labels) > 0).sum())
    k1 = int((counts(left) > 0).sum())
    k2 = int((counts(right) > 0).sum())
    delta = math.log2(3 ** k - 2) - (
        k * ent_s - k1 * _entropy(counts(left)) - k2 * _entropy(counts(right))
    )
    return gain > (math.log2(n - 1) + delta) / n


def entropy_partition_cuts(values, labels) -> list[float]:
    """All cut points of recursive minimum-entropy partitioning with MDL stopping."""
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    order = np.argsort(values, kind="stable")
    values, labels = values[order], labels[order]
    cuts: list[float] = []

    def recurse(v, y):
        if len(v) < 2 or y.min() == y.max():
            return
        found = _best_cut(v, y)
        if found is None:
            return
        cut, weighted, j = found
        if not _mdl_accepts(y, j, weighted):
            return
        cuts.append(cut)
        recurse(v[: j + 1], y[: j + 1])
        recurse(v[j + 1:], y[j + 1:])

    recurse(values, labels)
    return cuts


def entropy_partition_threshold(values, labels) -> DevThreshold:
    """Top-level entropy cut over (value, label) pairs, used as the DEV threshold.

    Falls back to ``DevThreshold(0.5, "fixed")`` without labels, with a single
    class, or when the MDL criterion rejects every cut.
    """
    if labels is None or len(labels) == 0:
        return DevThreshold()
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(values) != len(labels):
        raise ValueError("values and labels differ in length")
    if len(values) < 2 or labels.min() == labels.max():
        return DevThreshold()
    cuts = entropy_partition_cuts(values, labels)
    if not cuts or not 0 <= cuts[0] < 1:
        return DevThreshold()
    return DevThreshold(cuts[0], "entropy")


# -- linguistic ------------------------------------------------------------


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def exclamation_ratio(text: str) -> float:
    total = 0
    excl = 0
    for body, terminator in _SENTENCE_RE.findall(text):
        if not body.strip():
            continue
        total += 1
        if "!" in terminator:
            excl += 1
    return excl / max(1, total)


def first_person_ratio(text: str, lexicon=DEFAULT_PRONOUNS) -> float:
    tokens = tokenize(text)
    hits = sum(1 for t in tokens if t in lexicon)
    return hits / max(1, len(tokens))


def content_similarity(texts: Sequence[str]) -> tuple[float, float]:
    """(mean, max) pairwise term-frequency cosine similarity among texts."""
    k = len(texts)
    if k < 2:
        return 0.0, 0.0
    counters = [Counter(tokenize(t)) for t in texts]
    vocab = {w: i for i, w in enumerate(sorted(set().union(*counters)))}
    if not vocab:
        return 0.0, 0.0
    m = np.zeros((k, len(vocab)), dtype=np.int64)
    for row, c in enumerate(counters):
        for w, n in c.items():
            m[row, vocab[w]] = n
    dots = m @ m.T
    sq = np.diag(dots).astype(np.float64)
    iu = np.triu_indices(k, 1)
    denom = np.sqrt(sq[iu[0]] * sq[iu[1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(denom > 0, dots[iu] / np.where(denom > 0, denom, 1.0), 0.0)
    cos = np.clip(cos, 0.0, 1.0)
    return float(cos.mean()), float(cos.max())


# -- assembly --------------------------------------------------------------


def dev_raw_values(d: Dataset, mode: str = "corrected") -> dict[str, float]:
    """Unthresholded DEV values per review (input to the entropy threshold)."""
    out = {}
    for item, rids in d.item_index.items():
        ratings = [d[r].rating for r in rids]
        mean = sum(ratings) / len(ratings)
        for rid in rids:
            out[rid] = rate_deviation(d[rid].rating, mean, 0.0, mode)
    return out


def assemble_feature_matrix(d: Dataset, params: FeatureParams | None = None,
                            th: DevThreshold | None = None) -> FeatureMatrix:
    """Compute all eight features for every review of ``d``."""
    params = params or FeatureParams()
    if th is None:
        th = DevThreshold(params.beta1) if params.beta1 is not None else DevThreshold()
    ids = sorted(r.review_id for r in d.reviews)
    pos = {r: i for i, r in enumerate(ids)}
    values = np.zeros((len(ids), len(ALL_FEATURES)))
    col = {k: k.column for k in ALL_FEATURES}

    for item, rids in d.item_index.items():
        reviews = [d[r] for r in rids]
        mean = sum(r.rating for r in reviews) / len(reviews)
        first = reviews[0].date
        for r in reviews:
            i = pos[r.review_id]
            values[i, col[FeatureKind.DEV]] = rate_deviation(r.rating, mean, th, params.dev_formula)
            values[i, col[FeatureKind.ETF]] = early_time_frame(r.date, first, params.delta)

    for r in d.reviews:
        i = pos[r.review_id]
        values[i, col[FeatureKind.RES]] = exclamation_ratio(r.text)
        values[i, col[FeatureKind.PP1]] = first_person_ratio(r.text, params.pronoun_lexicon)

    for user, rids in d.user_index.items():
        reviews = [d[r] for r in rids]
        nr = negative_ratio([r.rating for r in reviews])
        bst = burstiness([r.date for r in reviews], params.tau)
        recent = reviews[-params.similarity_cap:]
        acs, mcs = content_similarity([r.text for r in recent])
        rows = [pos[r] for r in rids]
        values[rows, col[FeatureKind.NR]] = nr
        values[rows, col[FeatureKind.BST]] = bst
        values[rows, col[FeatureKind.ACS]] = acs
        values[rows, col[FeatureKind.MCS]] = mcs

    return FeatureMatrix(tuple(ids), values)
