"""Reading/writing review files and the three dataset samplers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import DatasetError, MissingField, ParseError
from .model import Dataset, Label, Review, validate_dataset

REQUIRED_FIELDS = ("review_id", "user_id", "item_id", "rating", "date", "text")
COLUMNS = REQUIRED_FIELDS + ("label",)


def _record_to_review(rec: dict, line: int) -> Review:
    for name in REQUIRED_FIELDS:
        if name not in rec or rec[name] is None:
            raise MissingField(name, line)
    rating = rec["rating"]
    if isinstance(rating, str):
        try:
            rating = int(rating.strip())
        except ValueError:
            raise ParseError(line, f"rating {rating!r} is not an integer") from None
    try:
        label = Label.parse(rec.get("label"))
    except ValueError as exc:
        raise ParseError(line, str(exc)) from None
    return Review(
        review_id=str(rec["review_id"]),
        user_id=str(rec["user_id"]),
        item_id=str(rec["item_id"]),
        rating=rating,
        date=rec["date"],
        text=str(rec["text"]),
        label=label,
    )


def _read_jsonl(fh):
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, exc.msg) from None
        if not isinstance(rec, dict):
            raise ParseError(lineno, "expected a JSON object")
        yield _record_to_review(rec, lineno)


def _read_csv(fh):
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        raise ParseError(1, "missing header row")
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header
    for name in REQUIRED_FIELDS:
        if name not in header:
            raise MissingField(name, 1)
    for rec in reader:
        lineno = reader.line_num
        if None in rec:
            raise ParseError(lineno, "too many columns")
        yield _record_to_review(rec, lineno)


def detect_format(path) -> str:
    suffix = Path(path).suffix.lower()
    return "csv" if suffix == ".csv" else "jsonl"


def load_reviews(path, format: str | None = None) -> Dataset:
    """Load a JSON-lines or CSV review file into a validated Dataset."""
    fmt = (format or detect_format(path)).lower()
    with open(path, newline="", encoding="utf-8") as fh:
        if fmt in ("jsonl", "json", "jsonlines"):
            return validate_dataset(list(_read_jsonl(fh)))
        if fmt == "csv":
            return validate_dataset(list(_read_csv(fh)))
    raise ValueError(f"unknown format {format!r}")


def _record(r: Review) -> dict:
    rec = {
        "review_id": r.review_id,
        "user_id": r.user_id,
        "item_id": r.item_id,
        "rating": r.rating,
        "date": r.date.isoformat(),
        "text": r.text,
    }
    if r.label is not Label.UNKNOWN:
        rec["label"] = r.label.value
    return rec


def dumps_jsonl(d: Dataset) -> str:
    return "".join(json.dumps(_record(r), ensure_ascii=False) + "\n" for r in d.reviews)


def dumps_csv(d: Dataset) -> str:
    buf = io.StringIO()
    # CRLF rows: the writer then quotes any field holding a bare \r or \n
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\r\n")
    writer.writeheader()
    for r in d.reviews:
        rec = _record(r)
        rec.setdefault("label", "")
        writer.writerow(rec)
    return buf.getvalue()


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_reviews(d: Dataset, path, format: str | None = None) -> None:
    fmt = (format or detect_format(path)).lower()
    atomic_write_text(path, dumps_csv(d) if fmt == "csv" else dumps_jsonl(d))


# -- sampling --------------------------------------------------------------


def _check_fraction(fraction):
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")


def _keep(d: Dataset, keep: set) -> Dataset:
    return validate_dataset([r for r in d.reviews if r.review_id in keep])


def sample_review_based(d: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """Keep each review independently with probability ``fraction``."""
    _check_fraction(fraction)
    if fraction == 1:
        return d
    rng = np.random.default_rng(seed)
    mask = rng.random(len(d)) < fraction
    return _keep(d, {r.review_id for r, m in zip(d.reviews, mask) if m})


def sample_item_based(d: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """Per item, keep ceil(fraction * count) reviews drawn without replacement."""
    _check_fraction(fraction)
    rng = np.random.default_rng(seed)
    keep = set()
    for item in sorted(d.item_index):
        rids = d.item_index[item]
        k = max(1, math.ceil(fraction * len(rids) - 1e-9))
        keep.update(rids[i] for i in rng.choice(len(rids), size=k, replace=False))
    return _keep(d, keep)


def sample_user_based(d: Dataset, seed: int = 0, per: int = 10) -> Dataset:
    """Per user with k reviews, keep max(1, k // per) drawn without replacement."""
    rng = np.random.default_rng(seed)
    keep = set()
    for user in sorted(d.user_index):
        rids = d.user_index[user]
        k = max(1, len(rids) // per)
        keep.update(rids[i] for i in rng.choice(len(rids), size=k, replace=False))
    return _keep(d, keep)


def apply_sampler(d: Dataset, spec: str | None, seed: int = 0) -> Dataset:
    """Apply ``review:<f>``, ``item:<f>``, ``user`` or ``none``."""
    if not spec or spec == "none":
        return d
    kind, _, arg = spec.partition(":")
    if kind == "review":
        return sample_review_based(d, float(arg), seed)
    if kind == "item":
        return sample_item_based(d, float(arg), seed)
    if kind == "user" and not arg:
        return sample_user_based(d, seed)
    raise DatasetError(f"bad sampler spec {spec!r}")
