import json
from fractions import Fraction

import numpy as np
import pytest

from isopair import __version__
from isopair.isotopic import Combo
from isopair.kernel import H, N
from isopair.lab import DeviationCurve
from isopair.report import Report, dumps, emit_report


def test_empty_report():
    text = emit_report(Report("verify-pair")).decode()
    assert '"checks":[],"summary":{"pass":0,"fail":0}' in text
    doc = json.loads(text)
    assert doc["tool"] == "isopair" and doc["version"] == __version__
    assert doc["command"] == "verify-pair" and doc["parameters"] == {}
    assert "platform" not in doc


def test_defect_uses_canonical_text():
    r = Report("rmatrix")
    r.add("identity 1 0 0", {"i": 1}, {"defect": Combo.gen("e", 1), "coefficient": (2 * H - 1) / (N + 2 * H)}, False)
    text = emit_report(r).decode()
    assert '"coefficient":"(2*h-1)/(n+2*h)"' in text
    assert '"defect":[["e",1,"1"]]' in text
    assert json.loads(text)["summary"] == {"pass": 0, "fail": 1}
    assert not r.ok


def test_keys_sorted_inside_results():
    assert dumps({"b": 1, "a": [Fraction(1, 2), Fraction(3)]}) == '{"a":["1/2","3"],"b":1}'


def test_floats_have_seventeen_digits():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps(3.0) == "3.0"
    assert dumps(np.float64(1e-20)) == "9.9999999999999995e-21"
    assert dumps(1 + 2j) == "[1.0,2.0]"
    with pytest.raises(TypeError):
        dumps(object())


def test_csv_curve_has_two_columns():
    r = Report("lab", floating=True)
    r.curve = DeviationCurve([(64, 1e-9), (128, 2.5e-10)], "w")
    lines = emit_report(r, "csv").decode().splitlines()
    assert lines[0] == "N,value"
    assert [len(line.split(",")) for line in lines] == [2, 2, 2]
    assert "platform" in json.loads(emit_report(r))


def test_csv_rows_and_text():
    r = Report("rmatrix")
    r.add("a", {}, 0, True, {"i": 1, "defect": "0"})
    r.add("b", {}, 1, False, {"i": -2, "defect": "e(1)"})
    assert emit_report(r, "csv").decode().splitlines() == ["i,defect,pass", "1,0,true", "-2,e(1),false"]
    text = emit_report(r, "text").decode()
    assert "FAIL b: 1" in text and text.endswith("summary: 1 pass, 1 fail\n")
    with pytest.raises(ValueError):
        emit_report(r, "xml")


def test_emission_is_deterministic():
    def build():
        r = Report("x", {"K": 3})
        for k in range(5):
            r.add(f"c{k}", {"k": k}, {"z": Fraction(k, 3), "a": {"y": k, "x": -k}}, True)
        return emit_report(r)

    assert build() == build()
