import json
import math
import os

import pytest

from welfare_resilience.exceptions import DuplicateObservation, NonContiguousSeries, ParseError
from welfare_resilience.io import format_number, ingest, to_csv, to_json, write_atomic


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def long_panel(units, years, value=lambda u, t: 100.0 + t):
    rows = ["unit,time,value"]
    rows += [f"{u},{t},{value(u, t)}" for u in units for t in years]
    return "\n".join(rows) + "\n"


class TestIngest:
    def test_happy_path(self, tmp_path):
        f = write(tmp_path / "p.csv", long_panel("ABC", range(2000, 2005)))
        panel = ingest(f)
        assert panel.unit_ids == ["A", "B", "C"]
        assert all(len(s) == 5 for s in panel.series.values())
        assert panel.series["B"].times.tolist() == list(range(2000, 2005))

    def test_rows_sorted_by_time(self, tmp_path):
        f = write(tmp_path / "p.csv", "unit,time,value\nA,3,3\nA,1,1\nA,2,2\n")
        assert ingest(f).series["A"].values.tolist() == [1.0, 2.0, 3.0]

    def test_crlf_and_bom(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_bytes("﻿unit,time,value\r\nA,1,1.5\r\nA,2,2.5\r\n".encode("utf-8"))
        assert ingest(str(p)).series["A"].values.tolist() == [1.5, 2.5]

    def test_alias_splice(self, tmp_path):
        text = long_panel(["BLX"], range(1961, 2000)) + "".join(f"BEL,{t},{t}\n" for t in range(2000, 2012))
        f = write(tmp_path / "p.csv", text)
        a = write(tmp_path / "a.csv", "source_unit,target_unit,time_from,time_to\nBLX,BEL,1961,1999\n")
        panel = ingest(f, a)
        bel = panel.series["BEL"]
        assert bel.times[0] == 1961 and bel.times[-1] == 2011 and len(bel) == 51
        assert "BLX" not in panel.series
        assert "BLX" in ingest(f, a, keep_alias_sources=True).series

    def test_alias_overlap(self, tmp_path):
        f = write(tmp_path / "p.csv", long_panel(["X", "Y"], range(1, 4)))
        a = write(tmp_path / "a.csv", "source_unit,target_unit,time_from,time_to\nX,Y,1,2\n")
        with pytest.raises(DuplicateObservation):
            ingest(f, a)

    def test_gap_names_unit(self, tmp_path):
        f = write(tmp_path / "p.csv", "unit,time,value\nA,1,1\nA,2,2\nB,1,1\nB,4,4\n")
        with pytest.raises(NonContiguousSeries, match="'B'.*between 1 and 4"):
            ingest(f)

    def test_interpolation(self, tmp_path):
        f = write(tmp_path / "p.csv", "unit,time,value\nA,1,1\nA,4,4\nA,5,\nA,6,6\n")
        panel = ingest(f, interpolate=True)
        assert panel.series["A"].values.tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        assert panel.interpolated["A"] == (2, 3, 5)

    def test_long_gap_always_errors(self, tmp_path):
        f = write(tmp_path / "p.csv", "unit,time,value\nA,1,1\nA,5,5\n")
        with pytest.raises(NonContiguousSeries):
            ingest(f, interpolate=True)

    def test_duplicate(self, tmp_path):
        f = write(tmp_path / "p.csv", "unit,time,value\nA,1,1\nA,1,2\n")
        with pytest.raises(DuplicateObservation):
            ingest(f)

    @pytest.mark.parametrize(
        "text,line,column",
        [
            ("unit,year,value\nA,1,1\n", 1, None),
            ("unit,time,value\nA,1,1\nA,x,2\n", 3, "time"),
            ("unit,time,value\nA,1,abc\n", 2, "value"),
            ("unit,time,value\nA,1\n", 2, None),
            ("", 1, None),
        ],
    )
    def test_parse_errors_report_location(self, tmp_path, text, line, column):
        f = write(tmp_path / "p.csv", text)
        with pytest.raises(ParseError) as info:
            ingest(f)
        assert info.value.line == line
        assert info.value.column == column

    def test_single_observation_unit_is_recorded(self, tmp_path):
        f = write(tmp_path / "p.csv", "unit,time,value\nA,1,1\nB,1,1\nB,2,2\n")
        panel = ingest(f)
        assert panel.unit_ids == ["A", "B"]
        assert "A" in panel.invalid and "A" not in panel.series

    def test_covariates(self, tmp_path):
        f = write(tmp_path / "p.csv", long_panel("AB", range(3)))
        c = write(tmp_path / "c.csv", "unit,name,value\nA,oil,0.5\nA,gdp,\nB,oil,1.5\n")
        assert ingest(f, covariate_file=c).covariates == {"A": {"oil": 0.5}, "B": {"oil": 1.5}}


class TestOutput:
    def test_format_number(self):
        assert format_number(1 / 3) == "0.3333333333"
        assert format_number(12345678901.0) == "1.23456789e+10"
        assert format_number(math.inf) == "inf"
        assert format_number(-math.inf) == "-inf"
        assert format_number(math.nan) == "nan"
        assert format_number(True) == "true"
        assert format_number(7) == "7"
        assert format_number(None) == ""

    def test_csv_quoting(self):
        text = to_csv(("a", "b"), [{"a": "x,y", "b": 1.5}])
        assert text == 'a,b\n"x,y",1.5\n'

    def test_json(self):
        rows = json.loads(to_json(("a", "b", "c"), [{"a": math.inf, "b": math.nan, "c": 0.1 + 0.2}]))
        assert rows == [{"a": "inf", "b": None, "c": 0.3}]

    def test_write_atomic(self, tmp_path):
        out = tmp_path / "out"
        write_atomic(str(out), {"a.csv": "1\n", "b.csv": "2\n"})
        assert sorted(os.listdir(out)) == ["a.csv", "b.csv"]
        assert (out / "b.csv").read_text() == "2\n"
