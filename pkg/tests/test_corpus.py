from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from placeharvest.corpus import Advertisement, Corpus, GeoPoint, dedup, load_corpus, write_corpus
from placeharvest.exceptions import DataError

HEADER = "post_id,repost_id,post_time,longitude,latitude,text\n"
T0 = datetime(2017, 3, 1, tzinfo=timezone.utc)


def ad(pid, minutes, text, repost=None, lat=43.6, lon=-116.2):
    return Advertisement(pid, T0 + timedelta(minutes=minutes), GeoPoint(lat, lon), text, repost)


def test_load_skips_row_without_longitude(tmp_path):
    path = tmp_path / "ads.csv"
    path.write_text(
        HEADER
        + "p1,,2017-01-01T00:00:00Z,-116.2,43.6,nice place in Boise\n"
        + "p2,,2017-01-01T01:00:00Z,,43.6,no longitude here\n"
        + "p3,,2017-01-01T02:00:00+02:00,-116.3,43.7,\"quoted, with comma\"\n"
        + "p4,p1,2017-01-02T00:00:00,-116.1,43.5,repost text\n",
        encoding="utf-8",
    )
    corpus = load_corpus(path, "boise")
    assert [a.post_id for a in corpus.ads] == ["p1", "p3", "p4"]
    assert [row for row, _ in corpus.skipped] == [3]
    assert corpus.ads[1].text == "quoted, with comma"
    assert corpus.ads[1].post_time == datetime(2017, 1, 1, 0, 0, tzinfo=timezone.utc)
    assert corpus.ads[2].repost_id == "p1"


def test_load_header_only(tmp_path):
    path = tmp_path / "ads.csv"
    path.write_text(HEADER, encoding="utf-8")
    corpus = load_corpus(path, "r")
    assert len(corpus) == 0 and corpus.skipped == ()


def test_latitude_out_of_range_is_rejected(tmp_path):
    path = tmp_path / "ads.csv"
    path.write_text(
        HEADER + "p1,,2017-01-01T00:00:00Z,-116.2,91,bad latitude\n" + "p2,,2017-01-01T00:00:00Z,-116.2,43,ok\n",
        encoding="utf-8",
    )
    corpus = load_corpus(path, "r")
    assert len(corpus) == 1
    assert corpus.skipped[0][0] == 2 and "latitude" in corpus.skipped[0][1]


def test_all_rows_failing_is_fatal(tmp_path):
    path = tmp_path / "ads.csv"
    path.write_text(HEADER + "p1,,not-a-time,-116.2,43,x\n", encoding="utf-8")
    with pytest.raises(DataError, match="all 1 rows"):
        load_corpus(path, "r")


def test_bad_header_and_missing_file(tmp_path):
    path = tmp_path / "ads.csv"
    path.write_text("id,text\n1,x\n", encoding="utf-8")
    with pytest.raises(DataError, match="header"):
        load_corpus(path, "r")
    with pytest.raises(DataError, match="cannot read"):
        load_corpus(tmp_path / "missing.csv", "r")


def test_write_then_load_roundtrip(tmp_path):
    corpus = Corpus("r", (ad("a", 0, "first, with \"quotes\""), ad("b", 5, "second", repost="a", lat=-33.25, lon=151.5)))
    write_corpus(corpus, tmp_path / "x.csv")
    back = load_corpus(tmp_path / "x.csv", "r")
    assert back.ads == corpus.ads


def test_dedup_identical_text_keeps_earliest():
    text = "x" * 60
    corpus = Corpus("r", (ad("late", 10, text), ad("early", 1, text)))
    assert [a.post_id for a in dedup(corpus).ads] == ["early"]


def test_dedup_prefix_difference_keeps_both():
    a = "0123456789" + "a" * 50
    b = "012345678X" + "a" * 50
    assert len(dedup(Corpus("r", (ad("p1", 0, a), ad("p2", 1, b)))).ads) == 2


def test_dedup_only_first_fifty_characters_matter():
    a = "y" * 50 + " tail one"
    b = "y" * 50 + " a different tail"
    assert [x.post_id for x in dedup(Corpus("r", (ad("p1", 0, a), ad("p2", 1, b)))).ads] == ["p1"]


def test_dedup_is_case_sensitive():
    assert len(dedup(Corpus("r", (ad("p1", 0, "Sunny Loft"), ad("p2", 1, "sunny loft")))).ads) == 2


def test_dedup_drops_repost_and_chain():
    corpus = Corpus("r", (
        ad("A", 0, "original listing text"),
        ad("B", 1, "bumped listing, reworded", repost="A"),
        ad("C", 2, "bumped again, reworded twice", repost="B"),
        ad("D", 3, "reposted but the original is absent", repost="Z"),
    ))
    assert [a.post_id for a in dedup(corpus).ads] == ["A", "D"]


def test_dedup_time_ties_broken_by_post_id():
    corpus = Corpus("r", (ad("b", 0, "same text"), ad("a", 0, "same text")))
    assert [a.post_id for a in dedup(corpus).ads] == ["a"]


ads_strategy = st.lists(
    st.builds(
        ad,
        pid=st.sampled_from([f"p{i}" for i in range(8)]),
        minutes=st.integers(0, 5),
        text=st.sampled_from(["alpha", "beta", "alpha", "gamma " * 12, "gamma " * 9 + "x"]),
        repost=st.one_of(st.none(), st.sampled_from([f"p{i}" for i in range(8)])),
    ),
    max_size=12,
)


@settings(max_examples=200, deadline=None)
@given(ads_strategy, st.randoms())
def test_dedup_properties(ads, random):
    corpus = Corpus("r", tuple(ads))
    once = dedup(corpus)
    assert dedup(once).ads == once.ads
    assert len(once) <= len(corpus)
    assert all(a in corpus.ads for a in once.ads)
    shuffled = list(ads)
    random.shuffle(shuffled)
    assert dedup(Corpus("r", tuple(shuffled))).ads == once.ads
    ids = [a.post_id for a in once.ads]
    assert len(ids) == len(set(ids))
    prefixes = [a.text[:50] for a in once.ads]
    assert len(prefixes) == len(set(prefixes))
    assert not any(a.repost_id in ids and a.repost_id != a.post_id for a in once.ads)
