import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from placeharvest.exceptions import DataError
from placeharvest.gazetteer import (
    GazetteerEntry,
    GazetteerIndex,
    compare,
    direct_match,
    indirect_match,
    load_exclusions,
    load_gazetteer,
    write_match_report,
)


def entries(*names, source="fsq"):
    return [GazetteerEntry.create(n, source) for n in names]


def test_load_gazetteer(tmp_path):
    path = tmp_path / "fsq.csv"
    path.write_text(
        "name,latitude,longitude,feature_type\n"
        "Ann Morrison Park,43.61,-116.22,park\n"
        ",43.6,-116.2,park\n"
        "Boise State University (BSU) Education Building,,,college\n",
        encoding="utf-8",
    )
    gaz = load_gazetteer(path, "foursquare")
    assert [e.name_norm for e in gaz] == ["ann morrison park", "boise state university (bsu) education building"]
    assert gaz.rejected == 1
    assert gaz[0].location.lat_deg == 43.61 and gaz[0].feature_type == "park" and gaz[0].source == "foursquare"
    assert gaz[1].location is None
    assert gaz[1].name_tokens == ("boise", "state", "university", "bsu", "education", "building")


def test_load_gazetteer_empty_and_errors(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("", encoding="utf-8")
    assert load_gazetteer(empty) == []
    header_only = tmp_path / "h.csv"
    header_only.write_text("name,latitude,longitude,feature_type\n", encoding="utf-8")
    assert load_gazetteer(header_only) == []
    bad = tmp_path / "b.csv"
    bad.write_text("title,lat\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_gazetteer(bad)
    with pytest.raises(DataError):
        load_gazetteer(tmp_path / "missing.csv")


def test_direct_match_rules():
    gaz = entries("Ann Morrison Park", "Greenbelt", "Koreatown")
    assert [e.name for e in direct_match("ann morrison park", gaz)] == ["Ann Morrison Park"]
    assert [e.name for e in direct_match("green belt", gaz)] == ["Greenbelt"]
    assert direct_match("green belt", gaz, space_insensitive=False) == []
    assert direct_match("k-town", gaz) == []


def test_indirect_match_rules():
    gaz = entries("Boise State University (BSU) Education Building", "Ann Morrison Park", "Parkside Cafe")
    assert [e.name for e in indirect_match("bsu", gaz)] == ["Boise State University (BSU) Education Building"]
    assert [e.name for e in indirect_match("park", gaz)] == ["Ann Morrison Park"]
    assert [e.name for e in indirect_match("ann morrison", gaz)] == ["Ann Morrison Park"]
    assert indirect_match("morrison ann", gaz) == []
    assert indirect_match("ann park", gaz) == []


def test_compare_partitions_terms():
    gaz = entries("Ann Morrison Park", "Boise State University (BSU) Education Building")
    report = compare(["ann morrison park", "bsu", "silicon beach"], gaz)
    assert [t for t, _ in report.direct] == ["ann morrison park"]
    assert [t for t, _ in report.indirect] == ["bsu"]
    assert report.unmatched == ["silicon beach"]
    assert report.counts == {"direct": 1, "indirect": 1, "unmatched": 1}


def test_compare_empty_cases_and_exclusions(tmp_path):
    assert compare(["a", "b"], []).unmatched == ["a", "b"]
    empty = compare([], entries("X"))
    assert empty.counts == {"direct": 0, "indirect": 0, "unmatched": 0}
    excl = tmp_path / "excl.txt"
    excl.write_text("# apartment-complex streets\nMaple Loop\n\n", encoding="utf-8")
    report = compare(["maple loop", "k-town"], entries("Koreatown"), exclude=load_exclusions(excl))
    assert report.excluded == ["maple loop"] and report.unmatched == ["k-town"]


def test_match_report_csv(tmp_path):
    report = compare(["ann morrison park", "zzz"], entries("Ann Morrison Park", source="fsq"))
    path = tmp_path / "m.csv"
    write_match_report(report, path)
    assert path.read_text().splitlines() == [
        "term,category,matched_name,source",
        "ann morrison park,direct,Ann Morrison Park,fsq",
        "zzz,unmatched,,",
    ]


NAMES = ["Ann Morrison Park", "Greenbelt", "Boise State University (BSU)", "Hyde Park", "Park Ave", "Koreatown",
         "North End", "The North End Market", "BSU Stadium"]
TERMS = ["park", "bsu", "green belt", "north end", "hyde park", "k-town", "ann", "end market", "koreatown"]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.sampled_from(NAMES), unique=True), st.lists(st.sampled_from(TERMS), unique=True),
       st.sampled_from(NAMES), st.randoms())
def test_compare_properties(names, terms, extra, rnd):
    gaz = entries(*names)
    report = compare(terms, gaz)
    labelled = [t for t, _ in report.direct] + [t for t, _ in report.indirect] + report.unmatched
    assert sorted(labelled) == sorted(terms)
    shuffled_gaz, shuffled_terms = list(gaz), list(terms)
    rnd.shuffle(shuffled_gaz)
    rnd.shuffle(shuffled_terms)
    assert compare(shuffled_terms, shuffled_gaz).rows() == report.rows()
    bigger = compare(terms, gaz + entries(extra))
    assert set(bigger.unmatched) <= set(report.unmatched)
    index = GazetteerIndex(gaz)
    for term in terms:
        assert {e.name for e in index.direct(term)} == {e.name for e in direct_match(term, gaz)}
        assert {e.name for e in index.indirect(term)} == {e.name for e in indirect_match(term, gaz)}
