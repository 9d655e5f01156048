"""Image-to-markdown scoring: string NED and tree NTED per sample."""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import CATEGORY_ORDER, EvalReport, MarkdownDocument, Sample, Task
from .markdown import parse_markdown
from .ocr_metrics import summarize
from .parallel import OrphanPredictionError, parallel_map
from .textdist import ned_pair
from .treedist import nted_pair

AGGREGATION_RULES = {
    "ned": "1 - lev(pred, gt) / max(len) on raw markdown source, mean over samples",
    "nted": "1 - ZSS(pred, gt) / max(node count), unit costs, mean over samples",
    "overall": "mean over all samples (micro); overall_macro = mean of category means",
}


def score_markdown(pred: str, gt: str) -> tuple[float, float]:
    return ned_pair(pred, gt).similarity, nted_pair(parse_markdown(pred), parse_markdown(gt))


def _score_job(job: tuple[str | None, str]) -> tuple[float, float]:
    pred, gt = job
    if pred is None:
        return 0.0, 0.0
    return score_markdown(pred, gt)


def evaluate_markdown(
    samples: Sequence[Sample],
    predictions: Mapping[str, MarkdownDocument],
    jobs: int = 1,
    diagnostics: Sequence[str] = (),
) -> EvalReport:
    orphans = sorted(set(predictions) - {s.id for s in samples})
    if orphans:
        raise OrphanPredictionError(orphans)
    notes = list(diagnostics)
    missing = [s.id for s in samples if s.id not in predictions]
    if missing:
        notes.append(f"{len(missing)} sample(s) without prediction scored 0: {', '.join(missing)}")
    jobs_in = []
    for s in samples:
        if not isinstance(s.ground_truth, MarkdownDocument):
            raise ValueError(f"sample {s.id!r} is not a markdown sample")
        pred = predictions.get(s.id)
        jobs_in.append((None if pred is None else pred.source, s.ground_truth.source))
    scores = parallel_map(_score_job, jobs_in, jobs)
    rows = [
        {"id": s.id, "category": s.category.value, "ned": ned, "nted": nted}
        for s, (ned, nted) in zip(samples, scores)
    ]
    metrics = ("ned", "nted")
    per_category, overall, macro, counts = summarize(rows, metrics, CATEGORY_ORDER)
    return EvalReport(
        task=Task.MARKDOWN,
        metrics=metrics,
        per_category=per_category,
        overall=overall,
        overall_macro=macro,
        sample_count=counts,
        per_sample=tuple(rows),
        diagnostics=tuple(notes),
    )
