"""Data model, ingestion, temporal split, and frequency tally."""

from __future__ import annotations

import datetime as dt
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hs_assist.corpus import (
    CaseCollection,
    CaseOrigin,
    CodeLevel,
    DecisionCase,
    HsCode,
    heading_frequency,
    load_cases,
    load_knowledge_base,
    load_manual,
    save_cases,
    temporal_split,
)
from hs_assist.errors import (
    DuplicateHeadingError,
    EmptyEvidenceError,
    ParseError,
    SplitError,
    ValidationError,
)

from conftest import make_cases


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


class TestHsCode:
    def test_levels(self):
        assert HsCode("85").level == CodeLevel.CHAPTER
        assert HsCode("8543").level == CodeLevel.HEADING
        assert HsCode("854370").level == CodeLevel.SUBHEADING

    @pytest.mark.parametrize("bad", ["8", "854", "85437", "8543701", "85a3", "", "8543７0"])
    def test_rejects_bad_digits(self, bad):
        with pytest.raises(ValidationError):
            HsCode(bad)

    def test_prefixes(self):
        code = HsCode("854370")
        assert code.heading == HsCode("8543")
        assert code.chapter == HsCode("85")
        assert code.heading.chapter == HsCode("85")
        assert HsCode("85").is_prefix_of(code)
        assert HsCode("8543").is_prefix_of(code)
        with pytest.raises(ValidationError):
            HsCode("85").heading


class TestLoadCases:
    def test_sorts_shuffled_dates(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(
            f,
            [
                {"id": "b", "date": "2020-05-01", "description": "mid", "hs6": "854370"},
                {"id": "c", "date": "2021-05-01", "description": "new", "hs6": "854370"},
                {"id": "a", "date": "2019-05-01", "description": "old", "hs6": "854370"},
            ],
        )
        got = load_cases(f)
        assert [c.id for c in got] == ["a", "b", "c"]
        assert got[0].date == dt.date(2019, 5, 1)

    def test_empty_file(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        f.write_text("", encoding="utf-8")
        assert len(load_cases(f)) == 0

    def test_five_digit_label_rejected(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(f, [{"id": "a", "date": "2020-01-01", "description": "x", "hs6": "85437"}])
        with pytest.raises(ValidationError):
            load_cases(f)

    def test_empty_description_rejected(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(f, [{"id": "a", "date": "2020-01-01", "description": "  ", "hs6": "854370"}])
        with pytest.raises(ValidationError):
            load_cases(f)

    def test_duplicate_id_rejected(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(
            f,
            [
                {"id": "a", "date": "2020-01-01", "description": "x", "hs6": "854370"},
                {"id": "a", "date": "2020-01-02", "description": "y", "hs6": "854370"},
            ],
        )
        with pytest.raises(ValidationError):
            load_cases(f)

    def test_parse_error_carries_line(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        f.write_text(
            '{"id": "a", "date": "2020-01-01", "description": "x", "hs6": "854370"}\nnot json\n',
            encoding="utf-8",
        )
        with pytest.raises(ParseError) as exc:
            load_cases(f)
        assert exc.value.line == 2

    def test_missing_field_is_parse_error(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(f, [{"id": "a", "date": "2020-01-01", "hs6": "854370"}])
        with pytest.raises(ParseError):
            load_cases(f)

    def test_unknown_fields_ignored(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(
            f,
            [{"id": "a", "date": "2020-01-01", "description": "x", "hs6": "854370", "zzz": 1}],
        )
        assert len(load_cases(f)) == 1

    def test_round_trip(self, tmp_path):
        f = tmp_path / "cases.jsonl"
        write_jsonl(
            f,
            [
                {"id": "a", "date": "2019-01-01", "description": "Résistors, 10bar",
                 "hs6": "853310", "origin": "council"},
                {"id": "b", "date": "2020-06-15", "description": "coil assembly",
                 "hs6": "854370", "origin": "international"},
            ],
        )
        original = load_cases(f)
        out = tmp_path / "again.jsonl"
        save_cases(original, out)
        assert load_cases(out) == original


class TestLoadManual:
    def test_sids_follow_file_order(self, tmp_path):
        f = tmp_path / "manual.jsonl"
        texts = [f"sentence number {i}" for i in range(75)]
        write_jsonl(f, [{"heading": "8472", "title": "office machines", "sentences": texts}])
        manual = load_manual(f)
        hm = manual.get("8472")
        assert len(hm.sentences) == 75
        assert hm.sentences[0].sid == "8472:0"
        assert hm.sentences[74].sid == "8472:74"
        assert manual.sentence("8472:74").text == "sentence number 74"

    def test_zero_sentences_rejected(self, tmp_path):
        f = tmp_path / "manual.jsonl"
        write_jsonl(f, [{"heading": "8472", "title": "t", "sentences": []}])
        with pytest.raises(ValidationError):
            load_manual(f)

    def test_merge_disjoint_files(self, tmp_path):
        f1, f2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
        write_jsonl(f1, [{"heading": "8471", "title": "a", "sentences": ["x"]}])
        write_jsonl(f2, [{"heading": "8543", "title": "b", "sentences": ["y"]}])
        manual = load_manual(f1, f2)
        assert set(manual.headings) == {"8471", "8543"}

    def test_duplicate_heading_rejected(self, tmp_path):
        f1, f2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
        write_jsonl(f1, [{"heading": "8471", "title": "a", "sentences": ["x"]}])
        write_jsonl(f2, [{"heading": "8471", "title": "b", "sentences": ["y"]}])
        with pytest.raises(DuplicateHeadingError):
            load_manual(f1, f2)

    def test_subheading_oneliners_kept(self, tmp_path):
        f = tmp_path / "manual.jsonl"
        write_jsonl(
            f,
            [{"heading": "8543", "title": "t", "sentences": ["x"],
              "subheadings": {"854370": "other machines"}}],
        )
        assert load_manual(f).get("8543").subheading_oneliners["854370"] == "other machines"


def _manual_fixture(tmp_path):
    f = tmp_path / "manual.jsonl"
    write_jsonl(
        f,
        [
            {
                "heading": "8543",
                "title": "electrical machines",
                "sentences": [
                    "machines having individual functions",
                    "signal generators and particle accelerators",
                    # 10 distinct tokens: a 9-token subset sits exactly at 0.9
                    "this heading covers electrical appliances plus instruments not covered elsewhere",
                ],
            }
        ],
    )
    return load_manual(f)


class TestLoadKnowledgeBase:
    def test_exact_quote_resolves(self, tmp_path):
        manual = _manual_fixture(tmp_path)
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [
                {
                    "case_id": "k1",
                    "description": "signal generator",
                    "hs6": "854370",
                    "evidence": [
                        {"quote": "this heading covers electrical appliances plus instruments "
                                  "not covered elsewhere"}
                    ],
                }
            ],
        )
        kb = load_knowledge_base(f, manual)
        assert kb.entries[0].evidence == frozenset({"8543:2"})
        assert kb.dropped_quote_count == 0

    def test_whitespace_and_case_normalization(self, tmp_path):
        manual = _manual_fixture(tmp_path)
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [
                {
                    "case_id": "k1",
                    "description": "d",
                    "hs6": "854370",
                    "evidence": [{"quote": "  Machines   having INDIVIDUAL functions "}],
                }
            ],
        )
        kb = load_knowledge_base(f, manual)
        assert kb.entries[0].evidence == frozenset({"8543:0"})

    def test_near_match_resolves_at_threshold(self, tmp_path):
        manual = _manual_fixture(tmp_path)
        # sentence 8543:2 has 10 distinct tokens; dropping "plus" leaves a
        # 9-token subset: Jaccard 9/10 = 0.9, exactly at the threshold
        quote = "this heading covers electrical appliances instruments not covered elsewhere"
        sentence = "this heading covers electrical appliances plus instruments not covered elsewhere"
        ta, tb = set(quote.split()), set(sentence.split())
        assert len(ta & tb) / len(ta | tb) == 0.9  # oracle
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [{"case_id": "k1", "description": "d", "hs6": "854370",
              "evidence": [{"quote": quote}]}],
        )
        kb = load_knowledge_base(f, manual)
        assert kb.entries[0].evidence == frozenset({"8543:2"})
        assert kb.dropped_quote_count == 0

    def test_low_overlap_quote_dropped_with_warning(self, tmp_path):
        manual = _manual_fixture(tmp_path)

        def jaccard(a, b):  # independent token-set oracle
            ta, tb = set(a.split()), set(b.split())
            return len(ta & tb) / len(ta | tb)

        quote = "completely unrelated text about agricultural produce"
        for hm in manual.headings.values():
            for s in hm.sentences:
                assert jaccard(quote.lower(), s.text.lower()) < 0.9
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [{"case_id": "k1", "description": "d", "hs6": "854370",
              "evidence": [{"quote": quote}, {"sid": "8543:1"}]}],
        )
        kb = load_knowledge_base(f, manual)
        assert kb.entries[0].evidence == frozenset({"8543:1"})
        assert kb.entries[0].dropped_quotes == 1
        assert kb.dropped_quote_count == 1

    def test_all_quotes_dropped_is_error(self, tmp_path):
        manual = _manual_fixture(tmp_path)
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [{"case_id": "k1", "description": "d", "hs6": "854370",
              "evidence": [{"quote": "totally different words entirely"}]}],
        )
        with pytest.raises(EmptyEvidenceError):
            load_knowledge_base(f, manual)

    def test_unknown_sid_rejected(self, tmp_path):
        manual = _manual_fixture(tmp_path)
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [{"case_id": "k1", "description": "d", "hs6": "854370",
              "evidence": [{"sid": "9999:0"}]}],
        )
        with pytest.raises(ValidationError):
            load_knowledge_base(f, manual)

    def test_duplicate_case_id_rejected(self, tmp_path):
        manual = _manual_fixture(tmp_path)
        f = tmp_path / "kb.jsonl"
        write_jsonl(
            f,
            [
                {"case_id": "k1", "description": "d", "hs6": "854370",
                 "evidence": [{"sid": "8543:0"}]},
                {"case_id": "k1", "description": "e", "hs6": "854370",
                 "evidence": [{"sid": "8543:1"}]},
            ],
        )
        with pytest.raises(ValidationError):
            load_knowledge_base(f, manual)


class TestTemporalSplit:
    def test_basic_split(self):
        cases = make_cases([f"text {i}" for i in range(10)])
        train, val, test = temporal_split(cases, n_val=2, n_test=2)
        assert [c.id for c in train] == [f"c{i:04d}" for i in range(6)]
        assert [c.id for c in val] == ["c0006", "c0007"]
        assert [c.id for c in test] == ["c0008", "c0009"]

    def test_production_scale_shape(self):
        # 211,435 cases split 5000/5000 leaves 201,435 for training
        total, n_val, n_test = 211_435, 5_000, 5_000
        cases = make_cases([f"t {i}" for i in range(total)])
        train, val, test = temporal_split(cases, n_val=n_val, n_test=n_test)
        assert (len(train), len(val), len(test)) == (201_435, 5_000, 5_000)

    def test_all_test_boundary(self):
        cases = make_cases(["a", "b", "c"])
        train, val, test = temporal_split(cases, n_val=0, n_test=3)
        assert len(train) == 0 and len(val) == 0 and len(test) == 3

    def test_oversized_split_rejected(self):
        cases = make_cases(["a", "b"])
        with pytest.raises(SplitError):
            temporal_split(cases, n_val=2, n_test=1)

    @given(
        n=st.integers(min_value=0, max_value=40),
        n_val=st.integers(min_value=0, max_value=40),
        n_test=st.integers(min_value=0, max_value=40),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_property(self, n, n_val, n_test):
        cases = make_cases([f"text {i}" for i in range(n)]) if n else CaseCollection(())
        if n_val + n_test > n:
            with pytest.raises(SplitError):
                temporal_split(cases, n_val, n_test)
            return
        train, val, test = temporal_split(cases, n_val, n_test)
        ids = [c.id for c in train] + [c.id for c in val] + [c.id for c in test]
        assert ids == [c.id for c in cases]  # disjoint union in order
        parts = [p for p in (train, val, test) if len(p)]
        for earlier, later in zip(parts, parts[1:]):
            assert max(c.date for c in earlier) <= min(c.date for c in later)


class TestHeadingFrequency:
    def test_empty(self):
        assert heading_frequency(CaseCollection(())) == {}

    def test_prefix_grouping(self):
        cases = make_cases(["a", "b", "c"], labels=["847110", "847149", "854370"])
        assert heading_frequency(cases) == {"8471": 2, "8543": 1}

    def test_matches_direct_tally_oracle(self):
        import random

        rng = random.Random(13)
        headings = ["8471", "8543", "9010", "8414"]
        labels = [rng.choice(headings) + f"{rng.randrange(10, 99)}" for _ in range(100)]
        cases = make_cases([f"text {i}" for i in range(100)], labels=labels)

        oracle: dict[str, int] = {}
        for label in labels:  # independent counting pass
            oracle[label[:4]] = oracle.get(label[:4], 0) + 1
        got = heading_frequency(cases)
        assert got == oracle
        assert sum(got.values()) == len(cases)


class TestCaseCollectionInvariants:
    def test_out_of_order_rejected(self):
        a = DecisionCase("a", dt.date(2021, 1, 1), "x", HsCode("854370"))
        b = DecisionCase("b", dt.date(2020, 1, 1), "y", HsCode("854370"))
        with pytest.raises(ValidationError):
            CaseCollection((a, b))
        assert [c.id for c in CaseCollection.from_cases([a, b])] == ["b", "a"]

    def test_origin_flags(self):
        assert CaseOrigin.COUNCIL.contentious
        assert CaseOrigin.COMMITTEE.contentious
        assert not CaseOrigin.GENERAL.contentious
        assert not CaseOrigin.INTERNATIONAL.contentious
