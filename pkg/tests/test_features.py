import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netspam.features import (
    DevThreshold,
    assemble_feature_matrix,
    burstiness,
    burstiness_raw,
    content_similarity,
    early_time_frame,
    early_time_frame_raw,
    entropy_partition_threshold,
    exclamation_ratio,
    first_person_ratio,
    negative_ratio,
    rate_deviation,
    tokenize,
)
from netspam.model import ALL_FEATURES, FeatureKind, FeatureParams, Label, Review, validate_dataset

from oracles import cosine_tf, exhaustive_min_entropy_cut

D0 = dt.date(2020, 1, 1)


def day(n):
    return D0 + dt.timedelta(days=n)


class TestBurstiness:
    def test_span_beyond_tau(self):
        assert burstiness_raw([day(0), day(30)], 28) == 0
        assert burstiness([day(0), day(30)], 28) == 0

    def test_short_span(self):
        # 1 - 7/28
        assert burstiness_raw([day(0), day(3), day(7)], 28) == 0.75
        assert burstiness([day(0), day(7)], 28) == 1

    def test_single_review(self):
        assert burstiness_raw([day(5)], 28) == 0
        assert burstiness([day(5)]) == 0

    def test_binarisation_boundary(self):
        # raw exactly 0.5 is not above 0.5
        assert burstiness_raw([day(0), day(14)], 28) == 0.5
        assert burstiness([day(0), day(14)], 28) == 0

    @given(st.integers(1, 26))
    def test_monotone_in_span(self, span):
        assert burstiness_raw([day(0), day(span)]) > burstiness_raw([day(0), day(span + 1)])


class TestNegativeRatio:
    def test_low_mean(self):
        assert negative_ratio([1, 2, 1]) == 1

    def test_high_mean(self):
        assert negative_ratio([5, 5]) == 0

    def test_exactly_two(self):
        assert negative_ratio([2, 2]) == 1


class TestEarlyTimeFrame:
    def test_gap_equals_delta(self):
        assert early_time_frame_raw(day(7), day(0), 7) == 0
        assert early_time_frame(day(7), day(0), 7) == 0

    def test_gap_two(self):
        assert early_time_frame_raw(day(2), day(0), 7) == pytest.approx(5 / 7, abs=1e-15)
        assert early_time_frame(day(2), day(0), 7) == 1

    def test_gap_four(self):
        assert early_time_frame_raw(day(4), day(0), 7) == pytest.approx(3 / 7, abs=1e-15)
        assert early_time_frame(day(4), day(0), 7) == 0

    def test_first_review_of_item(self):
        assert early_time_frame_raw(day(3), day(3)) == 1
        assert early_time_frame(day(3), day(3)) == 1

    def test_rejects_review_before_first(self):
        with pytest.raises(ValueError):
            early_time_frame(day(0), day(1))

    @given(st.integers(1, 5))
    def test_monotone_in_gap(self, gap):
        assert early_time_frame_raw(day(gap), day(0)) > early_time_frame_raw(day(gap + 1), day(0))


class TestRateDeviation:
    def test_maximal(self):
        assert rate_deviation(5, 1.0, DevThreshold(0.5)) == 1.0

    @pytest.mark.parametrize("beta1", [0.0, 0.1, 0.5])
    def test_zero_deviation(self, beta1):
        assert rate_deviation(3, 3.0, DevThreshold(beta1)) == 0

    def test_half(self):
        assert rate_deviation(5, 3.0, DevThreshold(0.3)) == 0.5

    def test_below_threshold(self):
        assert rate_deviation(5, 3.0, DevThreshold(0.5)) == 0

    def test_literal_formula_mode(self):
        # 1 - (1 - 3)/4 = 1.5 -> clamped to 1
        assert rate_deviation(1, 3.0, DevThreshold(0.3), mode="paper") == 1.0
        # 1 - (5 - 3)/4 = 0.5 not above 0.5
        assert rate_deviation(5, 3.0, DevThreshold(0.5), mode="paper") == 0
        assert rate_deviation(4, 3.0, DevThreshold(0.5), mode="paper") == 0.75

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            DevThreshold(1.0)


class TestEntropyThreshold:
    def test_perfect_split(self):
        values, labels = [0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]
        assert exhaustive_min_entropy_cut(values, labels) == pytest.approx(0.5)
        th = entropy_partition_threshold(values, labels)
        assert th.source == "entropy"
        assert 0.2 < th.beta1 < 0.8
        assert th.beta1 == pytest.approx(0.5)

    def test_single_class(self):
        assert entropy_partition_threshold([0.1, 0.5, 0.9], [1, 1, 1]) == DevThreshold(0.5, "fixed")

    def test_unsupervised(self):
        assert entropy_partition_threshold([0.1, 0.5], []) == DevThreshold(0.5, "fixed")
        assert entropy_partition_threshold([0.1, 0.5], None).beta1 == 0.5

    def test_all_values_equal(self):
        assert entropy_partition_threshold([0.3] * 6, [0, 1, 0, 1, 0, 1]).source == "fixed"

    def test_mdl_rejects_noise(self):
        # alternating labels carry no information about the value
        values = list(np.linspace(0, 0.9, 10))
        assert entropy_partition_threshold(values, [0, 1] * 5).source == "fixed"

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 1)), min_size=2, max_size=200))
    def test_matches_exhaustive_search(self, pairs):
        values = [v / 40 for v, _ in pairs]
        labels = [y for _, y in pairs]
        th = entropy_partition_threshold(values, labels)
        if th.source == "entropy":
            assert th.beta1 == pytest.approx(exhaustive_min_entropy_cut(values, labels), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 100), st.integers(0, 10_000))
    def test_separable_data_is_split_at_gap(self, n, seed):
        rng = np.random.default_rng(seed)
        lo = rng.uniform(0.0, 0.3, n)
        hi = rng.uniform(0.6, 0.95, n)
        values = np.concatenate([lo, hi])
        labels = [0] * n + [1] * n
        th = entropy_partition_threshold(values, labels)
        assert th.source == "entropy"
        assert lo.max() < th.beta1 < hi.min()


class TestLinguistic:
    def test_exclamation_ratio(self):
        assert exclamation_ratio("Great! Loved it. Wow!") == pytest.approx(2 / 3)
        assert exclamation_ratio("") == 0
        assert exclamation_ratio("Amazing!!!") == 1.0

    def test_exclamation_mixed_terminators(self):
        assert exclamation_ratio("Really?! No way. ok") == pytest.approx(1 / 3)
        assert exclamation_ratio("   !!! ...") == 0

    def test_first_person(self):
        assert first_person_ratio("I loved my stay") == 0.5
        assert first_person_ratio("") == 0
        assert first_person_ratio("they said it was fine") == 0

    def test_tokenizer(self):
        assert tokenize("Don't STOP-me_now, 2day!") == ["don", "t", "stop", "me", "now", "2day"]

    def test_custom_lexicon(self):
        assert first_person_ratio("you and you", frozenset({"you"})) == pytest.approx(2 / 3)

    def test_content_similarity_identical(self):
        assert content_similarity(["good food", "good food"]) == (1.0, 1.0)

    def test_content_similarity_single(self):
        assert content_similarity(["whatever"]) == (0.0, 0.0)
        assert content_similarity([]) == (0.0, 0.0)

    def test_content_similarity_hand_value(self):
        acs, mcs = content_similarity(["good food good", "good food bad"])
        expected = 3 / (math.sqrt(5) * math.sqrt(3))
        assert expected == pytest.approx(0.7746, abs=1e-4)
        assert acs == pytest.approx(expected, abs=1e-15)
        assert mcs == pytest.approx(expected, abs=1e-15)

    def test_content_similarity_empty_texts(self):
        assert content_similarity(["", ""]) == (0.0, 0.0)
        assert content_similarity(["", "a b"]) == (0.0, 0.0)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.text(alphabet="ab c!", max_size=12), min_size=2, max_size=6), st.randoms())
    def test_content_similarity_matches_oracle_and_is_order_free(self, texts, rnd):
        acs, mcs = content_similarity(texts)
        cos = [
            cosine_tf(tokenize(texts[i]), tokenize(texts[j]))
            for i in range(len(texts)) for j in range(i + 1, len(texts))
        ]
        assert acs == pytest.approx(sum(cos) / len(cos), abs=1e-12)
        assert mcs == pytest.approx(max(cos), abs=1e-12)
        shuffled = list(texts)
        rnd.shuffle(shuffled)
        acs2, mcs2 = content_similarity(shuffled)
        assert acs2 == pytest.approx(acs, abs=1e-12)
        assert mcs2 == mcs


def _review(rid, user, item, rating, d, text="", label=Label.UNKNOWN):
    return Review(rid, user, item, rating, d, text, label)


class TestAssemble:
    def test_single_review(self):
        d = validate_dataset([_review("r1", "u1", "i1", 4, day(0), "Nice place.")])
        fm = assemble_feature_matrix(d)
        assert fm.values.shape == (1, 8)
        row = fm.row("r1")
        assert row[FeatureKind.BST] == 0
        assert row[FeatureKind.ACS] == 0 and row[FeatureKind.MCS] == 0
        assert row[FeatureKind.ETF] == 1  # the item's first review

    def test_identical_ratings_zero_dev(self):
        rs = [_review(f"r{i}", f"u{i % 3}", f"i{i % 2}", 4, day(i)) for i in range(10)]
        fm = assemble_feature_matrix(validate_dataset(rs), FeatureParams(beta1=0.2))
        assert np.all(fm.column(FeatureKind.DEV) == 0)

    def test_hand_built_dataset(self):
        rs = [
            _review("a", "u1", "i1", 1, day(0), "I love it!"),
            _review("b", "u1", "i2", 1, day(3), "I love it!"),
            _review("c", "u2", "i1", 5, day(10), "they said fine."),
            _review("d", "u3", "i1", 5, day(2), "ok. fine."),
        ]
        fm = assemble_feature_matrix(validate_dataset(rs), FeatureParams(beta1=0.3))
        a, b, c, dd = (fm.row(x) for x in "abcd")
        # item i1 mean = 11/3; |1 - 11/3| / 4 = 2/3
        assert a[FeatureKind.DEV] == pytest.approx(2 / 3)
        assert c[FeatureKind.DEV] == pytest.approx(1 / 3)  # just above beta1 = 0.3
        assert b[FeatureKind.DEV] == 0  # sole review of i2
        assert a[FeatureKind.NR] == b[FeatureKind.NR] == 1
        assert a[FeatureKind.BST] == b[FeatureKind.BST] == 1  # span 3 -> 1 - 3/28
        assert a[FeatureKind.ETF] == 1 and dd[FeatureKind.ETF] == 1 and c[FeatureKind.ETF] == 0
        assert a[FeatureKind.MCS] == 1.0
        assert a[FeatureKind.PP1] == pytest.approx(1 / 3)
        assert dd[FeatureKind.RES] == 0 and a[FeatureKind.RES] == 1

    def test_csv_export(self):
        rs = [_review("r1", "u1", "i1", 4, day(0), "Hi!")]
        text = assemble_feature_matrix(validate_dataset(rs)).to_csv_text()
        lines = text.strip().split("\n")
        assert lines[0] == "review_id,DEV,NR,ETF,BST,RES,PP1,ACS,MCS"
        assert lines[1] == "r1,0.000000,0.000000,1.000000,0.000000,1.000000,0.000000,0.000000,0.000000"


reviews_strategy = st.lists(
    st.tuples(
        st.integers(0, 4),  # user
        st.integers(0, 3),  # item
        st.integers(1, 5),  # rating
        st.integers(0, 60),  # day
        st.text(max_size=40),
    ),
    min_size=1,
    max_size=25,
)


@settings(max_examples=80, deadline=None)
@given(reviews_strategy, st.sampled_from(["corrected", "paper"]), st.floats(0, 0.99))
def test_range_and_broadcast(rows, mode, beta1):
    rs = [_review(f"r{i:03d}", f"u{u}", f"i{it}", r, day(dd), t) for i, (u, it, r, dd, t) in enumerate(rows)]
    d = validate_dataset(rs)
    fm = assemble_feature_matrix(d, FeatureParams(beta1=beta1, dev_formula=mode))
    assert np.all((fm.values >= 0) & (fm.values <= 1))
    assert len(fm) == len(rs)
    for user, rids in d.user_index.items():
        rows_ = fm.values[[fm.position(r) for r in rids]]
        for kind in ALL_FEATURES:
            if kind.user_based:
                assert np.all(rows_[:, kind.column] == rows_[0, kind.column])
