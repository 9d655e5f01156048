from __future__ import annotations

import json

from literate_bench.core import EvalReport, Task
from literate_bench.ocr_metrics import summarize
from literate_bench.report import format_cell, render_table, report_to_json


def test_format_cell():
    assert format_cell({"f1": 0.8123, "iou": None, "ned": 1.0}, ("f1", "iou", "ned")) == "81.2 / - / 100.0"


def _report():
    rows = [
        {"category": "web", "f1": 1.0, "iou": None, "ned": 1.0},
        {"category": "web", "f1": 1.0, "iou": None, "ned": 1.0},
        {"category": "web", "f1": 1.0, "iou": None, "ned": 1.0},
        {"category": "receipt", "f1": 0.0, "iou": None, "ned": 0.0},
    ]
    per_cat, overall, macro, counts = summarize(rows, ("f1", "iou", "ned"), ["receipt", "web"])
    return EvalReport(Task.OCR, ("f1", "iou", "ned"), per_cat, overall, macro, counts, tuple(rows), ())


def test_overall_is_sample_mean_and_macro_is_category_mean():
    report = _report()
    assert report.overall == {"f1": 0.75, "iou": None, "ned": 0.75}
    assert report.overall_macro == {"f1": 0.5, "iou": None, "ned": 0.5}


def test_table_and_json_shape():
    report = _report()
    table = render_table(report)
    assert "75.0 / - / 75.0" in table and "50.0 / - / 50.0" in table
    data = json.loads(report_to_json(report, {"seed": 1}))
    assert data["sample_count"] == {"receipt": 1, "web": 3}
    assert data["config"] == {"seed": 1}
    assert report_to_json(report, {"seed": 1}) == report_to_json(report, {"seed": 1})
