"""Report serialization: ``report.json`` and a fixed-width text table."""

from __future__ import annotations

import json
from typing import Any, Mapping

from . import __version__
from .core import EvalReport, Task
from .markdown_metrics import AGGREGATION_RULES as MD_RULES
from .ocr_metrics import AGGREGATION_RULES as OCR_RULES


def _round(v: float | None) -> float | None:
    # fixed precision keeps the JSON stable across platforms
    return None if v is None else round(v, 10)


def report_to_dict(report: EvalReport, config: Mapping[str, Any]) -> dict[str, Any]:
    rules = OCR_RULES if report.task is Task.OCR else MD_RULES
    return {
        "tool": "literate-bench",
        "version": __version__,
        "config": dict(config),
        "task": report.task.value,
        "metrics": list(report.metrics),
        "aggregation": rules,
        "sample_count": dict(report.sample_count),
        "per_category": {
            cat: {m: _round(v) for m, v in vals.items()} for cat, vals in report.per_category.items()
        },
        "overall": {m: _round(v) for m, v in report.overall.items()},
        "overall_macro": {m: _round(v) for m, v in report.overall_macro.items()},
        "diagnostics": list(report.diagnostics),
        "samples": [
            {k: (_round(v) if isinstance(v, float) else v) for k, v in row.items()}
            for row in report.per_sample
        ],
    }


def report_to_json(report: EvalReport, config: Mapping[str, Any]) -> str:
    return json.dumps(report_to_dict(report, config), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def format_cell(values: Mapping[str, float | None], metrics: tuple[str, ...]) -> str:
    return " / ".join("-" if values.get(m) is None else f"{100 * values[m]:.1f}" for m in metrics)


def render_table(report: EvalReport) -> str:
    """Render one score row per category, laid out like the benchmark tables.

    Cells read ``F1 / IOU / NED`` (OCR) or ``NED / NTED`` (markdown), scaled
    by 100 with one decimal; a missing IoU column shows ``-``.
    """
    metrics = report.metrics
    header = " / ".join(m.upper() for m in metrics)
    cols = [(cat, report.per_category[cat]) for cat in report.per_category]
    cols.append(("Overall Score (Avg)", report.overall))
    cols.append(("Category Macro (Avg)", report.overall_macro))
    cells = [(name, format_cell(vals, metrics)) for name, vals in cols]
    counts = [str(report.sample_count.get(name, sum(report.sample_count.values()))) for name, _ in cols]
    widths = [max(len(n), len(c), len(k)) for (n, c), k in zip(cells, counts)]
    label_w = max(len("Samples"), len("Score"), len("Category"))
    lines = [
        f"# {report.task.value} evaluation; cells are {header} (x100)",
        "# Overall = mean over samples; Category Macro = mean over categories",
        " | ".join(["Category".ljust(label_w)] + [n.ljust(w) for (n, _), w in zip(cells, widths)]),
        " | ".join(["Samples".ljust(label_w)] + [k.ljust(w) for k, w in zip(counts, widths)]),
        " | ".join(["Score".ljust(label_w)] + [c.ljust(w) for (_, c), w in zip(cells, widths)]),
    ]
    return "\n".join(line.rstrip() for line in lines) + "\n"
