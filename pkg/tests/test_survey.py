"""Data model, ingestion, validation and aggregation tests."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from civicpulse import (
    Axis,
    CountTable,
    DataError,
    SchemaConfig,
    dump_survey,
    load_survey,
    mean_satisfaction,
    merge_qol_classes,
    proposal_counts,
)
from conftest import NEIGHBORHOODS, SECTORS, make_dataset, make_response


class TestMergeQolClasses:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Bad", 1),
            ("I don't know", 1),
            ("Insufficient", 1),
            ("Enough", 2),
            ("Good", 3),
            ("Very Good", 4),
        ],
    )
    def test_mapping(self, raw, expected):
        assert merge_qol_classes(raw) == expected

    def test_tolerates_case_and_curly_apostrophe(self):
        assert merge_qol_classes("very good") == 4
        assert merge_qol_classes("I don’t know") == 1

    def test_unknown_label_rejected(self):
        with pytest.raises(DataError):
            merge_qol_classes("Superb")


def _write_schema(path, column_map=None):
    payload = {
        "neighborhoods": list(NEIGHBORHOODS),
        "sectors": list(SECTORS),
        "column_map": column_map or {},
    }
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def _canonical_header():
    cols = ["respondent_id", "q01"]
    cols += [f"q{i:02d}" for i in range(2, 13)]
    cols += [f"q{i}" for i in range(13, 19)]
    cols += ["q19", "q21", "q23", "q24", "q25", "q26"]
    return cols


def _row(rid="r1", qol="Good", sat_codes=None, neighborhood="Midtown", q21="",
         proposals="", participation=("2", "3", "1", "2", "0", "1")):
    sat = sat_codes if sat_codes is not None else ["3"] * 11
    return [rid, qol, *sat, *participation, neighborhood, q21, "2", "3", "3", proposals]


def _write_csv(path, rows, header=None):
    header = header or _canonical_header()
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadSurvey:
    def test_loads_valid_rows(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        csv_path = _write_csv(
            tmp_path / "data.csv",
            [_row("a"), _row("b", qol="Very Good"), _row("c", neighborhood="Westend")],
        )
        dataset, report = load_survey(csv_path, schema)
        assert len(dataset) == 3
        assert report.accepted == 3
        assert report.rejected == []

    def test_out_of_range_satisfaction_rejected_with_reason(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        bad = ["7"] + ["3"] * 10
        csv_path = _write_csv(tmp_path / "data.csv", [_row("a"), _row("b", sat_codes=bad)])
        dataset, report = load_survey(csv_path, schema)
        assert len(dataset) == 1
        assert len(report.rejected) == 1
        assert report.rejected[0]["row"] == 2
        assert "out of range {0..5}" in report.rejected[0]["reason"]

    def test_empty_file_is_an_error(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        csv_path = _write_csv(tmp_path / "data.csv", [])
        with pytest.raises(DataError, match="no data rows"):
            load_survey(csv_path, schema)

    def test_missing_file_is_an_error(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        with pytest.raises(DataError, match="not found"):
            load_survey(tmp_path / "nope.csv", schema)

    def test_missing_column_is_an_error(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        header = [c for c in _canonical_header() if c != "q19"]
        path = tmp_path / "data.csv"
        path.write_text(",".join(header) + "\n" + ",".join(["x"] * len(header)) + "\n")
        with pytest.raises(DataError, match="q19"):
            load_survey(path, schema)

    def test_unknown_neighborhood_rejected(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        csv_path = _write_csv(
            tmp_path / "data.csv", [_row("a"), _row("b", neighborhood="Atlantis")]
        )
        dataset, report = load_survey(csv_path, schema)
        assert len(dataset) == 1
        assert "Atlantis" in report.rejected[0]["reason"]

    def test_unknown_proposal_tag_rejected(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        csv_path = _write_csv(tmp_path / "data.csv", [_row("a", proposals="Moon Base")])
        dataset, report = load_survey(csv_path, schema)
        assert len(dataset) == 0
        assert "Moon Base" in report.rejected[0]["reason"]

    def test_duplicate_respondent_id_rejected(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        csv_path = _write_csv(tmp_path / "data.csv", [_row("a"), _row("a")])
        dataset, report = load_survey(csv_path, schema)
        assert len(dataset) == 1
        assert "duplicate" in report.rejected[0]["reason"]

    def test_self_relocation_flagged_not_rejected(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        csv_path = _write_csv(
            tmp_path / "data.csv", [_row("a", neighborhood="Midtown", q21="Midtown")]
        )
        dataset, report = load_survey(csv_path, schema)
        assert len(dataset) == 1
        assert report.flagged == [{"row": 1, "flag": "self-relocation"}]
        assert not dataset.responses[0].relocated

    def test_column_map_renames_source_headers(self, tmp_path):
        header = _canonical_header()
        header[header.index("q01")] = "quality_of_life"
        schema = SchemaConfig.from_file(
            _write_schema(tmp_path / "schema.json", column_map={"quality_of_life": "q01"})
        )
        csv_path = _write_csv(tmp_path / "data.csv", [_row("a")], header=header)
        dataset, _ = load_survey(csv_path, schema)
        assert dataset.responses[0].qol_raw == "Good"

    def test_missing_cells_allowed_for_optional_answers(self, tmp_path):
        schema = SchemaConfig.from_file(_write_schema(tmp_path / "schema.json"))
        sat = ["", "3", "", "4", "3", "3", "3", "3", "3", "3", "3"]
        csv_path = _write_csv(tmp_path / "data.csv", [_row("a", sat_codes=sat)])
        dataset, report = load_survey(csv_path, schema)
        assert report.accepted == 1
        r = dataset.responses[0]
        assert SECTORS[0] not in r.satisfaction
        assert r.satisfaction[SECTORS[1]] == 3


class TestRoundTrip:
    def test_export_load_export_is_identical(self, tmp_path):
        responses = [
            make_response("a", "Midtown", proposals=("Security", "Playing Facilities")),
            make_response(
                "b",
                "Westend",
                qol="I don't know",
                previous="Midtown",
                satisfaction={"Security": 5, "Public Transport": 0},
                participation={"q13": 4},
                household=None,
                education=None,
                employment=0,
            ),
        ]
        dataset = make_dataset(responses)
        first_dump = dump_survey(dataset)
        path = tmp_path / "export.csv"
        path.write_text(first_dump, encoding="utf-8")
        schema = SchemaConfig.canonical(NEIGHBORHOODS, SECTORS)
        reloaded, report = load_survey(path, schema)
        assert report.rejected == []
        assert reloaded == dataset
        assert dump_survey(reloaded) == first_dump


class TestProposalCounts:
    def test_hand_tally(self):
        # Hand tally for Midtown: Playing Facilities x3, Security x1.
        responses = [
            make_response("a", "Midtown", proposals=("Playing Facilities", "Security")),
            make_response("b", "Midtown", proposals=("Playing Facilities",)),
            make_response("c", "Midtown", proposals=("Playing Facilities",)),
            make_response("d", "Westend", proposals=("Security",)),
        ]
        table = proposal_counts(
            make_dataset(responses), Axis.SECTORS_WITHIN_NEIGHBORHOOD, "Midtown"
        )
        assert table.entries == (("Playing Facilities", 3), ("Security", 1))

    def test_neighborhoods_within_sector_axis(self):
        responses = [
            make_response("a", "Midtown", proposals=("Security", "Security")),
            make_response("b", "Westend", proposals=("Security",)),
        ]
        table = proposal_counts(
            make_dataset(responses), Axis.NEIGHBORHOODS_WITHIN_SECTOR, "Security"
        )
        assert table.entries == (("Midtown", 2), ("Westend", 1))

    def test_zero_proposals_gives_empty_table(self):
        dataset = make_dataset([make_response("a", "Midtown")])
        table = proposal_counts(dataset, Axis.SECTORS_WITHIN_NEIGHBORHOOD, "Midtown")
        assert len(table) == 0

    def test_ties_break_lexicographically(self):
        responses = [
            make_response("a", "Midtown", proposals=("Security", "Playing Facilities")),
            make_response("b", "Midtown", proposals=("Security", "Playing Facilities")),
        ]
        table = proposal_counts(
            make_dataset(responses), Axis.SECTORS_WITHIN_NEIGHBORHOOD, "Midtown"
        )
        assert table.labels == ("Playing Facilities", "Security")

    def test_unknown_scope_is_an_error(self):
        dataset = make_dataset([make_response("a", "Midtown")])
        with pytest.raises(DataError):
            proposal_counts(dataset, Axis.SECTORS_WITHIN_NEIGHBORHOOD, "Atlantis")

    @given(
        tags_a=st.lists(st.sampled_from(SECTORS[:4]), max_size=6),
        tags_b=st.lists(st.sampled_from(SECTORS[:4]), max_size=6),
    )
    @settings(max_examples=50, deadline=None)
    def test_disjoint_union_additivity(self, tags_a, tags_b):
        ds_a = make_dataset([make_response("a", "Midtown", proposals=tuple(tags_a))])
        ds_b = make_dataset([make_response("b", "Midtown", proposals=tuple(tags_b))])
        ds_union = make_dataset(
            [
                make_response("a", "Midtown", proposals=tuple(tags_a)),
                make_response("b", "Midtown", proposals=tuple(tags_b)),
            ]
        )
        count = lambda ds: dict(
            proposal_counts(ds, Axis.SECTORS_WITHIN_NEIGHBORHOOD, "Midtown").entries
        )
        merged = count(ds_a)
        for label, value in count(ds_b).items():
            merged[label] = merged.get(label, 0) + value
        assert merged == count(ds_union)


class TestMeanSatisfaction:
    def test_hand_average_excluding_idk(self):
        sector = "Security"
        responses = [
            make_response("a", "Midtown", satisfaction={sector: 4}),
            make_response("b", "Midtown", satisfaction={sector: 4}),
            make_response("c", "Midtown", satisfaction={sector: 0}),
            make_response("d", "Midtown", satisfaction={sector: 2}),
        ]
        matrix = mean_satisfaction(make_dataset(responses))
        assert matrix.mean_of(sector, "Midtown") == pytest.approx(10 / 3)
        assert matrix.support_of(sector, "Midtown") == 3

    def test_all_idk_cell_is_absent(self):
        responses = [make_response("a", "Midtown", satisfaction={"Security": 0})]
        matrix = mean_satisfaction(make_dataset(responses))
        assert matrix.mean_of("Security", "Midtown") is None
        assert matrix.support_of("Security", "Midtown") == 0

    def test_singleton(self):
        responses = [make_response("a", "Midtown", satisfaction={"Security": 5})]
        matrix = mean_satisfaction(make_dataset(responses))
        assert matrix.mean_of("Security", "Midtown") == 5.0
        assert matrix.support_of("Security", "Midtown") == 1

    @given(codes=st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=20))
    @settings(max_examples=80, deadline=None)
    def test_mean_stays_within_contributing_codes(self, codes):
        responses = [
            make_response(f"r{i}", "Midtown", satisfaction={"Security": code})
            for i, code in enumerate(codes)
        ]
        matrix = mean_satisfaction(make_dataset(responses))
        valid = [c for c in codes if c != 0]
        cell = matrix.mean_of("Security", "Midtown")
        if not valid:
            assert cell is None
        else:
            assert min(valid) <= cell <= max(valid)
            assert matrix.support_of("Security", "Midtown") == len(valid)


class TestCountTable:
    def test_negative_counts_rejected(self):
        with pytest.raises(DataError):
            CountTable.from_tallies(Axis.SECTORS_WITHIN_NEIGHBORHOOD, "x", {"a": -1})

    def test_validation_of_response_codes_in_dataset(self):
        with pytest.raises(DataError, match="out of range"):
            make_dataset([make_response("a", "Midtown", satisfaction={"Security": 9})])
        with pytest.raises(DataError, match="participation"):
            make_dataset([make_response("a", "Midtown", participation={"q13": 9})])
