import json
import math
import tempfile
import unittest
from pathlib import Path

import pandas as pd

from src.engine.problem import validate_against_schema
from src.core.session import REPO_ROOT
from src.verify.report import Report, ReportEntry


def sample_report():
    report = Report(seeds={"word": 0, "verify": 0}, arithmetic={"mode": "exact"})
    report.add("jet_match[0]", 0.0, 0.0, {"order": 2})
    report.add("approx_deviation", 2e-3, 1e-3)
    report.fail("axis_fixed[0]", "factor 3 (overshear): exp requested in exact mode")
    return report


class TestReport(unittest.TestCase):
    def test_pass_is_conjunction(self):
        report = Report()
        self.assertTrue(report.passed)
        report.add("a", 1e-30, 1e-20)
        self.assertTrue(report.passed)
        report.add("b", 1.0, 0.5)
        self.assertFalse(report.passed)
        self.assertEqual([e.id for e in report.failures()], ["b"])

    def test_nan_residual_fails(self):
        entry = Report().add("x", float("nan"), 1.0)
        self.assertFalse(entry.passed)
        self.assertTrue(math.isinf(entry.residual))

    def test_fail_serializes_infinity(self):
        data = sample_report().to_dict()
        failed = [e for e in data["entries"] if e["id"] == "axis_fixed[0]"][0]
        self.assertEqual(failed["residual"], "inf")
        self.assertFalse(failed["pass"])
        self.assertIn("error", failed["detail"])

    def test_round_trip(self):
        report = sample_report()
        again = Report.from_dict(json.loads(report.to_json()))
        self.assertEqual(again.to_dict(), report.to_dict())

    def test_merge_with_tag(self):
        outer = Report()
        inner = sample_report()
        inner.grids["K"] = {"resolution": 17}
        outer.merge(inner, tag="T[1]")
        self.assertEqual(outer.entries[0].id, "T[1]:jet_match[0]")
        self.assertIn("T[1]:K", outer.grids)

    def test_matches_schema(self):
        with open(REPO_ROOT / "templates" / "report.schema.json", "r") as f:
            schema = json.load(f)
        self.assertEqual(validate_against_schema(sample_report().to_dict(), schema), [])

    def test_write_json_and_csv(self):
        report = sample_report()
        with tempfile.TemporaryDirectory() as tmp:
            json_path = Path(tmp) / "nested" / "report.json"
            csv_path = Path(tmp) / "nested" / "report.csv"
            report.write(str(json_path), str(csv_path))
            with open(json_path, "r") as f:
                self.assertEqual(json.load(f)["pass"], False)
            frame = pd.read_csv(csv_path)
            self.assertEqual(list(frame.columns), ["id", "residual", "tolerance", "pass"])
            self.assertEqual(len(frame), 3)
            self.assertEqual(frame["pass"].tolist(), [True, False, False])

    def test_summary(self):
        self.assertEqual(sample_report().summary(),
                         "3 requirement(s), 2 failing: approx_deviation, axis_fixed[0]")

    def test_entry_from_dict(self):
        entry = ReportEntry.from_dict({"id": "x", "residual": "inf", "tolerance": 0, "pass": False})
        self.assertTrue(math.isinf(entry.residual))


if __name__ == '__main__':
    unittest.main()
