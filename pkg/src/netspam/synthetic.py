"""Labelled synthetic review data with planted spammer behaviour.

Spammers are a subset of users chosen so the review-level spam fraction
matches ``spam_ratio``. Their reviews are compressed into a burst window,
land early on items, carry extreme ratings against the item's consensus and
reuse a small pool of pronoun- and exclamation-heavy templates. A
camouflaged spam review is generated exactly like a genuine one but keeps
its spam label.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleConfig
from .model import Dataset, Label, Review, validate_dataset

_COMMON = (
    "the food service place staff menu table price time night dinner lunch "
    "room location order drink view wait music parking area bar owner dish "
    "was is were had got came went took found felt looked seemed "
    "good nice ok fine decent average slow busy quiet clean small large fresh "
    "and but so then also very quite really pretty rather just a an of to in on at "
    "with for from they it this that there he she you"
).split()

_PROMO = (
    "best amazing awesome perfect incredible fantastic excellent wonderful "
    "terrible awful worst horrible disgusting must definitely highly recommend "
    "ever totally absolutely love hate never again deal experience"
).split()

_PRONOUNS = ("i", "me", "my", "we", "our", "us")


def _pseudo_words(n: int) -> list[str]:
    onsets = "b d f g k l m n p r s t v z".split()
    vowels = "a e i o u".split()
    syll = [c + v for c, v in itertools.product(onsets, vowels)]
    words = ("".join(p) for p in itertools.product(syll, repeat=2))
    return list(itertools.islice(words, n))


VOCAB = tuple(_COMMON + _pseudo_words(800))
SPAM_VOCAB = tuple(_PROMO + _COMMON[:30])


@dataclass(frozen=True)
class SyntheticConfig:
    n_users: int = 1700
    n_items: int = 300
    reviews_per_user_mean: float = 3.0
    reviews_per_user_max: int = 40
    n_reviews: int | None = None  # exact total; per-user counts are nudged to hit it
    spam_ratio: float = 0.13
    spammer_burst_window: int = 10
    spammer_early_prob: float = 0.7
    spammer_rating_bias: str = "mixed"  # promote | demote | mixed
    template_pool_size: int = 20
    camouflage_rate: float = 0.0
    text_signal: float = 1.0  # 0 makes spam text genuine-style
    horizon_days: int = 730
    start_date: str = "2012-01-01"
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.spam_ratio <= 1:
            raise ValueError("spam_ratio must lie in [0, 1]")
        if not 0 <= self.camouflage_rate <= 1:
            raise ValueError("camouflage_rate must lie in [0, 1]")
        if not 0 <= self.spammer_early_prob <= 1:
            raise ValueError("spammer_early_prob must lie in [0, 1]")
        if not 0 <= self.text_signal <= 1:
            raise ValueError("text_signal must lie in [0, 1]")
        for name in ("n_users", "n_items", "reviews_per_user_max", "template_pool_size",
                     "spammer_burst_window", "horizon_days"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.reviews_per_user_mean < 1:
            raise ValueError("reviews_per_user_mean must be >= 1")
        if self.n_reviews is not None and not (
            self.n_users <= self.n_reviews <= self.n_users * self.reviews_per_user_max
        ):
            raise ValueError("n_reviews incompatible with n_users / reviews_per_user_max")
        if self.spammer_rating_bias not in ("promote", "demote", "mixed"):
            raise ValueError("spammer_rating_bias must be promote, demote or mixed")

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown synthetic config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "SyntheticConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def planted_config(seed: int = 0, n_reviews: int = 5000, **overrides) -> SyntheticConfig:
    """Strong behavioural signal, 13% spam, 10% camouflage.

    Demoting spammers make DEV, NR, BST and ETF fire together on spam, while
    the text signal stays weak.
    """
    base = dict(
        n_users=int(round(n_reviews / 3.0)),
        n_items=max(20, n_reviews // 40),
        n_reviews=n_reviews,
        spam_ratio=0.13,
        spammer_burst_window=10,
        spammer_early_prob=0.8,
        spammer_rating_bias="demote",
        template_pool_size=20,
        camouflage_rate=0.1,
        text_signal=0.25,
        rng_seed=seed,
    )
    base.update(overrides)
    return SyntheticConfig(**base)


class _Gen:
    def __init__(self, cfg: SyntheticConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.rng_seed)
        rng = self.rng
        m = cfg.n_items
        self.launch = rng.integers(0, max(1, int(cfg.horizon_days * 0.8)), size=m)
        self.quality = rng.choice(np.array([4.4, 3.5, 2.5]), size=m, p=[0.45, 0.35, 0.2])
        pop = 1.0 / (rng.permutation(m) + 5.0) ** 0.8
        self.pop = pop / pop.sum()
        self.high = np.flatnonzero(self.quality > 4)
        self.low = np.flatnonzero(self.quality < 3)
        vocab_w = 1.0 / (np.arange(len(VOCAB)) + 3.0)
        self.vocab_p = vocab_w / vocab_w.sum()
        sig = cfg.text_signal
        self.templates = [
            self._text(SPAM_VOCAB, None, 0.04 + 0.12 * sig, 0.08 + 0.5 * sig, (4, 5))
            for _ in range(cfg.template_pool_size)
        ]

    # text ---------------------------------------------------------------

    def _sentence_tokens(self, vocab, p, pron):
        rng = self.rng
        k = int(rng.integers(5, 12))
        idx = rng.choice(len(vocab), size=k, p=p)
        toks = [vocab[i] for i in idx]
        for j in range(k):
            if rng.random() < pron:
                toks[j] = _PRONOUNS[int(rng.integers(len(_PRONOUNS)))]
        return toks

    def _terminator(self, excl):
        u = self.rng.random()
        if u < excl:
            return "!"
        return "?" if u < excl + 0.04 else "."

    def _text(self, vocab, p, pron, excl, n_sent):
        sents = []
        for _ in range(int(self.rng.integers(n_sent[0], n_sent[1] + 1))):
            toks = self._sentence_tokens(vocab, p, pron)
            sents.append((toks, self._terminator(excl)))
        return sents

    @staticmethod
    def _render(sents):
        out = []
        for toks, term in sents:
            s = " ".join(toks)
            out.append(s[:1].upper() + s[1:] + term)
        return " ".join(out)

    def genuine_text(self):
        return self._render(self._text(VOCAB, self.vocab_p, 0.04, 0.03, (2, 6)))

    def spam_text(self, home):
        rng = self.rng
        sig = self.cfg.text_signal
        if rng.random() < sig:
            t = home if rng.random() < 0.7 else int(rng.integers(len(self.templates)))
            sents = []
            for toks, term in self.templates[t]:
                toks = [
                    VOCAB[int(rng.choice(len(VOCAB), p=self.vocab_p))]
                    if tok not in _PRONOUNS and rng.random() < 0.15 else tok
                    for tok in toks
                ]
                sents.append((toks, term))
            return self._render(sents)
        return self.genuine_text()

    # reviews ------------------------------------------------------------

    def genuine_review(self):
        rng = self.rng
        item = int(rng.choice(self.cfg.n_items, p=self.pop))
        day = int(self.launch[item] + np.floor(rng.exponential(90.0)))
        rating = int(np.clip(np.rint(rng.normal(self.quality[item], 0.7)), 1, 5))
        return item, day, rating, self.genuine_text()

    def _pick(self, candidates):
        p = self.pop[candidates]
        return int(candidates[int(self.rng.choice(len(candidates), p=p / p.sum()))])

    def burst_start(self, promote):
        """Open the burst just before a target item launches."""
        rng = self.rng
        w = self.cfg.spammer_burst_window
        target = self.low if promote else self.high
        if target.size == 0:
            target = np.arange(self.cfg.n_items)
        anchor = int(self.launch[target[int(rng.integers(target.size))]])
        return max(0, anchor - int(rng.integers(0, max(1, w // 3))))

    def spam_review(self, promote, burst, home):
        rng = self.rng
        w = self.cfg.spammer_burst_window
        target = self.low if promote else self.high
        if target.size == 0:
            target = np.arange(self.cfg.n_items)
        item = None
        if rng.random() < self.cfg.spammer_early_prob:
            lo, hi = burst, burst + w - 3
            window = np.flatnonzero((self.launch >= lo) & (self.launch <= hi))
            cand = np.intersect1d(window, target)
            if cand.size == 0:
                cand = window
            if cand.size:
                item = self._pick(cand)
                day = int(self.launch[item] + rng.integers(0, 3))
        if item is None:
            day = int(burst + rng.integers(0, w))
            cand = target[self.launch[target] <= day]
            if cand.size == 0:
                cand = np.flatnonzero(self.launch <= day)
            if cand.size == 0:
                cand = np.arange(self.cfg.n_items)
            item = self._pick(cand)
            day = max(day, int(self.launch[item]))
        rating = 5 if promote else 1
        return item, day, rating, self.spam_text(home)


def _user_counts(cfg: SyntheticConfig, rng) -> np.ndarray:
    counts = 1 + rng.poisson(cfg.reviews_per_user_mean - 1.0, size=cfg.n_users)
    counts = np.minimum(counts, cfg.reviews_per_user_max)
    if cfg.n_reviews is not None:
        while counts.sum() > cfg.n_reviews:
            movable = np.flatnonzero(counts > 1)
            counts[movable[int(rng.integers(movable.size))]] -= 1
        while counts.sum() < cfg.n_reviews:
            movable = np.flatnonzero(counts < cfg.reviews_per_user_max)
            counts[movable[int(rng.integers(movable.size))]] += 1
    return counts


def _choose_spammers(cfg: SyntheticConfig, counts, rng) -> np.ndarray:
    total = int(counts.sum())
    target = int(round(cfg.spam_ratio * total))
    spammer = np.zeros(cfg.n_users, dtype=bool)
    spam = 0
    for u in rng.permutation(cfg.n_users):
        if spam + counts[u] <= target:
            spammer[u] = True
            spam += int(counts[u])
        if spam == target:
            break
    if abs(spam / total - cfg.spam_ratio) > 0.01:
        raise InfeasibleConfig(
            f"cannot reach spam_ratio {cfg.spam_ratio} with {cfg.n_users} users "
            f"(best {spam}/{total})"
        )
    return spammer


def generate_synthetic(cfg: SyntheticConfig | None = None) -> Dataset:
    """Build a labelled Dataset from ``cfg``; deterministic in ``cfg.rng_seed``."""
    cfg = cfg or SyntheticConfig()
    g = _Gen(cfg)
    rng = g.rng
    counts = _user_counts(cfg, rng)
    spammer = _choose_spammers(cfg, counts, rng)
    start = dt.date.fromisoformat(cfg.start_date)

    rows = []
    for u in range(cfg.n_users):
        if spammer[u]:
            if cfg.spammer_rating_bias == "mixed":
                promote = bool(rng.random() < 0.5)
            else:
                promote = cfg.spammer_rating_bias == "promote"
            burst = g.burst_start(promote)
            home = int(rng.integers(len(g.templates)))
        for _ in range(int(counts[u])):
            if spammer[u] and rng.random() >= cfg.camouflage_rate:
                item, day, rating, text = g.spam_review(promote, burst, home)
            else:
                item, day, rating, text = g.genuine_review()
            rows.append((u, item, day, rating, text, bool(spammer[u])))

    perm = rng.permutation(len(rows))
    width = len(str(len(rows)))
    uw, iw = len(str(cfg.n_users)), len(str(cfg.n_items))
    reviews = []
    for new_id, j in enumerate(perm):
        u, item, day, rating, text, spam = rows[j]
        reviews.append(Review(
            review_id=f"r{new_id:0{width}d}",
            user_id=f"u{u:0{uw}d}",
            item_id=f"i{item:0{iw}d}",
            rating=rating,
            date=start + dt.timedelta(days=day),
            text=text,
            label=Label.SPAM if spam else Label.GENUINE,
        ))
    reviews.sort(key=lambda r: r.review_id)
    return validate_dataset(reviews)
