"""Document-level OCR scoring: word F1, line-box IoU and page NED.

Aggregation rules (recorded verbatim in every report):

* word F1 is order-free multiset matching of whitespace tokens per page,
  averaged over pages
* page IoU is the optimal one-to-one line assignment's IoU sum divided by
  ``max(n_pred, n_gt)``
* page NED compares the newline-joined line texts in stored order
* the overall column is the mean over all samples; the category-macro mean
  is reported next to it
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import CATEGORY_ORDER, BoundingBox, EvalReport, PageDocument, Sample, Task
from .parallel import OrphanPredictionError, parallel_map
from .textdist import ned_pair


AGGREGATION_RULES = {
    "f1": "per-sample word F1 (multiset, whitespace tokens, case-sensitive), mean over samples",
    "iou": "optimal one-to-one line assignment, sum(IoU) / max(n_pred, n_gt), mean over samples",
    "ned": "1 - lev(pred, gt) / max(len) over newline-joined lines, mean over samples",
    "overall": "mean over all samples (micro); overall_macro = mean of category means",
}


@dataclass(frozen=True)
class OcrScores:
    f1: float
    iou: float | None
    ned: float


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int, float], ...]
    unmatched_pred: tuple[int, ...]
    unmatched_gt: tuple[int, ...]

    @property
    def total_iou(self) -> float:
        return math.fsum(p[2] for p in self.pairs)


def box_iou(a: BoundingBox, b: BoundingBox) -> float:
    if a == b:
        return 1.0
    iw = min(a.x_br, b.x_br) - max(a.x_tl, b.x_tl)
    ih = min(a.y_br, b.y_br) - max(a.y_tl, b.y_tl)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def iou_matrix(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox]) -> np.ndarray:
    if not pred or not gt:
        return np.zeros((len(pred), len(gt)))
    p = np.array([b.as_tuple() for b in pred], dtype=np.float64)
    g = np.array([b.as_tuple() for b in gt], dtype=np.float64)
    iw = np.minimum(p[:, None, 2], g[None, :, 2]) - np.maximum(p[:, None, 0], g[None, :, 0])
    ih = np.minimum(p[:, None, 3], g[None, :, 3]) - np.maximum(p[:, None, 1], g[None, :, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    area_p = (p[:, 2] - p[:, 0]) * (p[:, 3] - p[:, 1])
    area_g = (g[:, 2] - g[:, 0]) * (g[:, 3] - g[:, 1])
    union = area_p[:, None] + area_g[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0, inter / union, 0.0)
    # identical boxes score 1 even when degenerate
    same = (p[:, None, :] == g[None, :, :]).all(axis=2)
    out[same] = 1.0
    return out


def match_lines(pred: PageDocument, gt: PageDocument) -> Matching:
    """Optimal one-to-one assignment of boxed lines maximizing total IoU.

    Lines without a box take no part in the assignment and count as
    unmatched.
    """
    p_idx = [i for i, ln in enumerate(pred.lines) if ln.bbox is not None]
    g_idx = [i for i, ln in enumerate(gt.lines) if ln.bbox is not None]
    m = iou_matrix([pred.lines[i].bbox for i in p_idx], [gt.lines[i].bbox for i in g_idx])
    pairs = []
    if m.size:
        rows, cols = linear_sum_assignment(m, maximize=True)
        for r, c in zip(rows, cols):
            if m[r, c] > 0:
                pairs.append((p_idx[r], g_idx[c], float(m[r, c])))
    used_p = {p for p, _, _ in pairs}
    used_g = {g for _, g, _ in pairs}
    return Matching(
        tuple(sorted(pairs)),
        tuple(i for i in range(len(pred.lines)) if i not in used_p),
        tuple(i for i in range(len(gt.lines)) if i not in used_g),
    )


def page_iou(matching: Matching, n_pred: int, n_gt: int) -> float:
    denom = max(n_pred, n_gt)
    if denom == 0:
        return 1.0
    return matching.total_iou / denom


def word_f1(pred_text: str, gt_text: str) -> tuple[float, float, float]:
    """Return ``(precision, recall, f1)`` over whitespace-separated words."""
    pred, gt = Counter(pred_text.split()), Counter(gt_text.split())
    n_pred, n_gt = sum(pred.values()), sum(gt.values())
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0, 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0, 0.0, 0.0
    tp = sum((pred & gt).values())
    if tp == 0:
        return 0.0, 0.0, 0.0
    precision, recall = tp / n_pred, tp / n_gt
    return precision, recall, 2 * precision * recall / (precision + recall)


def page_ned(pred: PageDocument, gt: PageDocument) -> float:
    return ned_pair(pred.text, gt.text).similarity


def score_page(pred: PageDocument, gt: PageDocument) -> OcrScores:
    """All three metrics for one page; IoU is None when either side has no boxes."""
    f1 = word_f1(pred.text, gt.text)[2]
    iou = None
    if pred.has_boxes and gt.has_boxes:
        n_pred = sum(1 for ln in pred.lines if ln.bbox is not None)
        n_gt = sum(1 for ln in gt.lines if ln.bbox is not None)
        iou = page_iou(match_lines(pred, gt), n_pred, n_gt)
    return OcrScores(f1, iou, page_ned(pred, gt))


def _score_job(job: tuple[PageDocument | None, PageDocument]) -> OcrScores:
    pred, gt = job
    if pred is None:
        return OcrScores(0.0, 0.0, 0.0)
    return score_page(pred, gt)


def evaluate_ocr(
    samples: Sequence[Sample],
    predictions: Mapping[str, PageDocument],
    jobs: int = 1,
    diagnostics: Sequence[str] = (),
) -> EvalReport:
    """Score every OCR sample and aggregate per category.

    Samples without a prediction score 0 on every metric.  The IoU column is
    dropped (``None``) when no prediction carried a single box; otherwise a
    box-less prediction scores IoU 0 on any page whose ground truth has boxes.
    """
    ids = {s.id for s in samples}
    orphans = sorted(set(predictions) - ids)
    if orphans:
        raise OrphanPredictionError(orphans)
    notes = list(diagnostics)
    missing = [s.id for s in samples if s.id not in predictions]
    if missing:
        notes.append(f"{len(missing)} sample(s) without prediction scored 0: {', '.join(missing)}")
    for s in samples:
        if not isinstance(s.ground_truth, PageDocument):
            raise ValueError(f"sample {s.id!r} is not an OCR sample")
    scores = parallel_map(
        _score_job, [(predictions.get(s.id), s.ground_truth) for s in samples], jobs
    )
    with_boxes = any(p.has_boxes for p in predictions.values())
    rows = []
    for s, sc in zip(samples, scores):
        iou = sc.iou
        if not with_boxes:
            iou = None
        elif iou is None and s.ground_truth.has_boxes:  # type: ignore[union-attr]
            iou = 0.0
        rows.append({"id": s.id, "category": s.category.value, "f1": sc.f1, "iou": iou, "ned": sc.ned})
    metrics = ("f1", "iou", "ned")
    per_category, overall, macro, counts = summarize(rows, metrics, CATEGORY_ORDER)
    return EvalReport(
        task=Task.OCR,
        metrics=metrics,
        per_category=per_category,
        overall=overall,
        overall_macro=macro,
        sample_count=counts,
        per_sample=tuple(rows),
        diagnostics=tuple(notes),
    )


def mean_or_none(values: Sequence[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def summarize(
    rows: Sequence[Mapping[str, object]], metrics: Sequence[str], categories: Sequence[str]
) -> tuple[dict[str, dict[str, float | None]], dict[str, float | None], dict[str, float | None], dict[str, int]]:
    """Per-category means, sample-mean overall and category-macro overall."""
    per_category: dict[str, dict[str, float | None]] = {}
    counts: dict[str, int] = {}
    for cat in categories:
        members = [r for r in rows if r["category"] == cat]
        if not members:
            continue
        counts[cat] = len(members)
        per_category[cat] = {m: mean_or_none([r[m] for r in members]) for m in metrics}  # type: ignore[misc]
    overall = {m: mean_or_none([r[m] for r in rows]) for m in metrics}  # type: ignore[misc]
    macro = {m: mean_or_none([v[m] for v in per_category.values()]) for m in metrics}
    return per_category, overall, macro, counts
