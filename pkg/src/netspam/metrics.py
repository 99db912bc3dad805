"""Rank-based evaluation and rank correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateGroundTruth, LengthMismatch, TooFewPoints
from .model import Label


@dataclass(frozen=True)
class RankedList:
    """Review ids in descending score order with their ground truth."""

    order: tuple[str, ...]
    truth: Mapping[str, bool]  # True = spam
    excluded: frozenset = frozenset()

    def __post_init__(self):
        bad = [r for r in self.order if r in self.excluded]
        if bad:
            raise ValueError(f"excluded review {bad[0]!r} present in ranking")
        missing = [r for r in self.order if r not in self.truth]
        if missing:
            raise ValueError(f"review {missing[0]!r} has no ground truth")

    @classmethod
    def build(cls, rank: Iterable[str], labels: Mapping[str, Label | bool],
              exclude: Iterable[str] = ()) -> "RankedList":
        """Drop excluded ids and ids without a known label, keep rank order."""
        exclude = frozenset(exclude)
        truth = {}
        for rid, lab in labels.items():
            if isinstance(lab, Label):
                if lab is Label.UNKNOWN:
                    continue
                truth[rid] = lab is Label.SPAM
            else:
                truth[rid] = bool(lab)
        order = tuple(r for r in rank if r not in exclude and r in truth)
        return cls(order, {r: truth[r] for r in order}, exclude)

    def flags(self) -> np.ndarray:
        return np.array([self.truth[r] for r in self.order], dtype=bool)


def _flags(r) -> np.ndarray:
    if isinstance(r, RankedList):
        return r.flags()
    return np.asarray(r, dtype=bool)


def auc(r) -> float:
    """Area under the ROC curve by the rectangle rule, walking the ranking top-down.

    ``r`` is a RankedList or a boolean spam-flag sequence in rank order.
    """
    flags = _flags(r)
    f = int(flags.sum())
    g = int(flags.size - f)
    if f == 0 or g == 0:
        raise DegenerateGroundTruth("AUC needs both spam and genuine reviews")
    tpr = np.cumsum(flags) / f
    fpr = np.cumsum(~flags) / g
    dfpr = np.diff(np.concatenate(([0.0], fpr)))
    return float(np.sum(dfpr * tpr))


def average_precision(r, normalized: bool = True) -> float:
    """Sum over spam hits of (hit count / rank position); divided by hits if normalized."""
    flags = _flags(r)
    positions = np.flatnonzero(flags) + 1
    if positions.size == 0:
        raise DegenerateGroundTruth("AP needs at least one spam review")
    # fsum keeps the result independent of summation order
    raw = math.fsum((np.arange(1, positions.size + 1) / positions).tolist())
    return raw / positions.size if normalized else raw


def spearman(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Spearman rho (average ranks for ties) with a two-sided t-approximation p-value."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise LengthMismatch(f"{xs.size} vs {ys.size} values")
    n = xs.size
    if n < 3:
        raise TooFewPoints("spearman needs at least 3 points")
    rx = stats.rankdata(xs)
    ry = stats.rankdata(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(np.sum(dx * dx) * np.sum(dy * dy)))
    if denom == 0:
        return 0.0, 1.0
    rho = float(np.sum(dx * dy) / denom)
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) >= 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return rho, p
