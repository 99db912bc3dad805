"""Domain types shared by every stage of the pipeline."""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DuplicateReviewId, InvalidDate, RatingOutOfRange


class Label(str, enum.Enum):
    SPAM = "spam"
    GENUINE = "genuine"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value) -> "Label":
        if value is None:
            return cls.UNKNOWN
        if isinstance(value, Label):
            return value
        text = str(value).strip().lower()
        if text in ("", "unknown", "none", "null"):
            return cls.UNKNOWN
        if text in ("spam", "1", "true", "fake", "y"):
            return cls.SPAM
        if text in ("genuine", "0", "false", "ham", "real", "n"):
            return cls.GENUINE
        raise ValueError(f"unrecognised label {value!r}")


class Category(str, enum.Enum):
    RB = "RB"
    UB = "UB"
    RL = "RL"
    UL = "UL"


class FeatureKind(str, enum.Enum):
    DEV = "DEV"
    NR = "NR"
    ETF = "ETF"
    BST = "BST"
    RES = "RES"
    PP1 = "PP1"
    ACS = "ACS"
    MCS = "MCS"

    @property
    def category(self) -> Category:
        return _CATEGORY[self]

    @property
    def user_based(self) -> bool:
        return self.category in (Category.UB, Category.UL)

    @property
    def column(self) -> int:
        return ALL_FEATURES.index(self)

    @classmethod
    def parse_list(cls, text: str) -> tuple["FeatureKind", ...]:
        names = [t.strip().upper() for t in text.split(",") if t.strip()]
        if not names:
            raise ValueError("feature list is empty")
        out = []
        for name in names:
            kind = cls(name)
            if kind in out:
                raise ValueError(f"feature {name} listed twice")
            out.append(kind)
        return tuple(out)


_CATEGORY = {
    FeatureKind.DEV: Category.RB,
    FeatureKind.ETF: Category.RB,
    FeatureKind.NR: Category.UB,
    FeatureKind.BST: Category.UB,
    FeatureKind.RES: Category.RL,
    FeatureKind.PP1: Category.RL,
    FeatureKind.ACS: Category.UL,
    FeatureKind.MCS: Category.UL,
}

ALL_FEATURES: tuple[FeatureKind, ...] = tuple(FeatureKind)

DEFAULT_PRONOUNS = frozenset(
    {"i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"}
)


@dataclass(frozen=True)
class Review:
    review_id: str
    user_id: str
    item_id: str
    rating: int
    date: dt.date
    text: str = ""
    label: Label = Label.UNKNOWN


@dataclass(frozen=True)
class Dataset:
    """Validated, indexed review collection.

    ``user_index``/``item_index`` map ids to review ids sorted by
    (date, review_id). Build with :func:`validate_dataset`.
    """

    reviews: tuple[Review, ...]
    user_index: Mapping[str, tuple[str, ...]]
    item_index: Mapping[str, tuple[str, ...]]
    by_id: Mapping[str, Review] = field(repr=False, compare=False)

    def __len__(self):
        return len(self.reviews)

    def __iter__(self):
        return iter(self.reviews)

    def __getitem__(self, review_id: str) -> Review:
        return self.by_id[review_id]

    def user_reviews(self, user_id: str) -> list[Review]:
        return [self.by_id[r] for r in self.user_index[user_id]]

    def item_reviews(self, item_id: str) -> list[Review]:
        return [self.by_id[r] for r in self.item_index[item_id]]

    @property
    def has_labels(self) -> bool:
        return any(r.label is not Label.UNKNOWN for r in self.reviews)

    def spam_ratio(self) -> float:
        known = [r for r in self.reviews if r.label is not Label.UNKNOWN]
        if not known:
            return float("nan")
        return sum(r.label is Label.SPAM for r in known) / len(known)

    def subset(self, review_ids: Iterable[str]) -> "Dataset":
        keep = set(review_ids)
        return validate_dataset([r for r in self.reviews if r.review_id in keep])


def _coerce_date(review_id, value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    if isinstance(value, str):
        try:
            return dt.date.fromisoformat(value.strip())
        except ValueError:
            raise InvalidDate(review_id, value) from None
    raise InvalidDate(review_id, value)


def _coerce_rating(review_id, value) -> int:
    if isinstance(value, bool):
        raise RatingOutOfRange(review_id, value)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, (int, np.integer)) or not 1 <= value <= 5:
        raise RatingOutOfRange(review_id, value)
    return int(value)


def validate_dataset(raw: Iterable[Review]) -> Dataset:
    """Check records, normalise dates/ratings and build the user/item indexes."""
    reviews = []
    by_id = {}
    for r in raw:
        if r.review_id in by_id:
            raise DuplicateReviewId(r.review_id)
        rating = _coerce_rating(r.review_id, r.rating)
        date = _coerce_date(r.review_id, r.date)
        label = Label.parse(r.label)
        if (rating, date, label) != (r.rating, r.date, r.label) or type(r.date) is not dt.date:
            r = dataclasses.replace(r, rating=rating, date=date, label=label)
        by_id[r.review_id] = r
        reviews.append(r)

    users: dict[str, list[Review]] = {}
    items: dict[str, list[Review]] = {}
    for r in reviews:
        users.setdefault(r.user_id, []).append(r)
        items.setdefault(r.item_id, []).append(r)

    def order(groups):
        return {
            key: tuple(x.review_id for x in sorted(rs, key=lambda x: (x.date, x.review_id)))
            for key, rs in groups.items()
        }

    return Dataset(tuple(reviews), order(users), order(items), by_id)


@dataclass(frozen=True)
class FeatureParams:
    tau: float = 28
    delta: float = 7
    beta1: float | None = None  # None: derive by entropy partitioning when labels allow
    s: int = 20
    dev_formula: str = "corrected"
    pronoun_lexicon: frozenset = DEFAULT_PRONOUNS
    similarity_cap: int = 50

    def __post_init__(self):
        if self.tau <= 0 or self.delta <= 0:
            raise ValueError("tau and delta must be positive")
        if self.s < 2:
            raise ValueError("s must be >= 2")
        if self.beta1 is not None and not 0 <= self.beta1 < 1:
            raise ValueError("beta1 must lie in [0, 1)")
        if self.dev_formula not in ("corrected", "paper"):
            raise ValueError("dev_formula must be 'corrected' or 'paper'")
        if self.similarity_cap < 2:
            raise ValueError("similarity_cap must be >= 2")


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-review feature values in [0, 1].

    Rows follow ``review_ids`` (ascending); columns follow ``ALL_FEATURES``.
    """

    review_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (len(self.review_ids), len(ALL_FEATURES)):
            raise ValueError(f"bad feature matrix shape {values.shape}")
        if not np.all((values >= 0) & (values <= 1)):
            raise ValueError("feature values must lie in [0, 1]")
        if list(self.review_ids) != sorted(self.review_ids):
            raise ValueError("review_ids must be sorted")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.review_ids)

    def column(self, kind: FeatureKind) -> np.ndarray:
        return self.values[:, FeatureKind(kind).column]

    def row(self, review_id: str) -> dict[FeatureKind, float]:
        i = self.position(review_id)
        return {k: float(self.values[i, k.column]) for k in ALL_FEATURES}

    def position(self, review_id: str) -> int:
        pos = getattr(self, "_pos", None)
        if pos is None:
            pos = {r: i for i, r in enumerate(self.review_ids)}
            object.__setattr__(self, "_pos", pos)
        return pos[review_id]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["review_id"] + [k.value for k in ALL_FEATURES])
        for rid, row in zip(self.review_ids, self.values):
            writer.writerow([rid] + [f"{v:.6f}" for v in row])
        return buf.getvalue()
