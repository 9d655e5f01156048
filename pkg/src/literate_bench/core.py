"""Shared domain types and the JSONL manifest model.

Every value object here is a frozen dataclass.  Construction validates the
invariants and raises :class:`ValidationError`, so a partially valid page or
box is never observable downstream.  Raw (still unvalidated) page payloads can
be inspected with :func:`validate_page` first.
"""

from __future__ import annotations

import enum
import json
import math
import unicodedata
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Iterator, Mapping, Sequence, Union


class ValidationError(ValueError):
    """A domain invariant was violated during construction."""

    def __init__(self, message: str, violations: Sequence["Violation"] = ()):
        super().__init__(message)
        self.violations = list(violations)


class ManifestError(ValueError):
    """A manifest line could not be ingested."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _pixel(value: Any, name: str) -> int:
    # sub-pixel coordinates from upstream tools are floored once, here
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")
        return math.floor(value)
    return value


@dataclass(frozen=True)
class BoundingBox:
    x_tl: int
    y_tl: int
    x_br: int
    y_br: int

    def __post_init__(self) -> None:
        for name in ("x_tl", "y_tl", "x_br", "y_br"):
            object.__setattr__(self, name, _pixel(getattr(self, name), name))
        problems = _box_problems(self.as_tuple())
        if problems:
            raise ValidationError("invalid bounding box: " + "; ".join(problems))

    @classmethod
    def from_seq(cls, seq: Sequence[Any]) -> "BoundingBox":
        if len(seq) != 4:
            raise ValidationError(f"bbox needs 4 coordinates, got {len(seq)}")
        return cls(*seq)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x_tl, self.y_tl, self.x_br, self.y_br)

    @property
    def width(self) -> int:
        return self.x_br - self.x_tl

    @property
    def height(self) -> int:
        return self.y_br - self.y_tl

    @property
    def area(self) -> int:
        return self.width * self.height


def _box_problems(box: Sequence[float]) -> list[str]:
    x_tl, y_tl, x_br, y_br = box
    out = []
    if min(box) < 0:
        out.append("negative coordinate")
    if x_tl > x_br:
        out.append("x_tl > x_br")
    if y_tl > y_br:
        out.append("y_tl > y_br")
    return out


@dataclass(frozen=True)
class TextLine:
    text: str
    bbox: BoundingBox | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.text, str):
            raise ValidationError(f"line text must be a string, got {type(self.text).__name__}")
        if "\n" in self.text or "\r" in self.text:
            raise ValidationError("line text must not contain newlines")
        object.__setattr__(self, "text", nfc(self.text))

    @property
    def words(self) -> list[str]:
        return self.text.split()


@dataclass(frozen=True)
class Violation:
    line: int | None
    rule: str

    def __str__(self) -> str:
        where = "page" if self.line is None else f"line {self.line}"
        return f"{self.rule} at {where}"


def validate_page(doc: "PageDocument | Mapping[str, Any]") -> list[Violation]:
    """Return every invariant violation of a page; empty means valid.

    Accepts either a constructed :class:`PageDocument` or the raw manifest
    mapping (``{"width", "height", "lines": [{"text", "bbox"}]}``), which is
    how invalid pages can be inspected at all.
    """
    if isinstance(doc, PageDocument):
        raw: Mapping[str, Any] = doc.to_dict()
    else:
        raw = doc
    out: list[Violation] = []
    width, height = raw.get("width"), raw.get("height")
    for name, dim in (("width", width), ("height", height)):
        if isinstance(dim, bool) or not isinstance(dim, (int, float)) or not dim > 0:
            out.append(Violation(None, f"{name} must be > 0"))
    lines = raw.get("lines", [])
    if not isinstance(lines, list):
        return out + [Violation(None, "lines must be a list")]
    for i, line in enumerate(lines):
        if not isinstance(line, Mapping):
            out.append(Violation(i, "line must be an object"))
            continue
        text = line.get("text")
        if not isinstance(text, str):
            out.append(Violation(i, "text must be a string"))
        elif "\n" in text or "\r" in text:
            out.append(Violation(i, "text contains newline"))
        bbox = line.get("bbox")
        if bbox is None:
            continue
        if (
            not isinstance(bbox, (list, tuple))
            or len(bbox) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox)
        ):
            out.append(Violation(i, "bbox must be 4 numbers"))
            continue
        out.extend(Violation(i, p) for p in _box_problems(bbox))
        if isinstance(width, (int, float)) and bbox[2] > width:
            out.append(Violation(i, "x_br > width"))
        if isinstance(height, (int, float)) and bbox[3] > height:
            out.append(Violation(i, "y_br > height"))
    return out


@dataclass(frozen=True)
class PageDocument:
    width: int
    height: int
    lines: tuple[TextLine, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "width", _pixel(self.width, "width"))
        object.__setattr__(self, "height", _pixel(self.height, "height"))
        object.__setattr__(self, "lines", tuple(self.lines))
        violations = validate_page(self)
        if violations:
            raise ValidationError(
                "invalid page: " + "; ".join(map(str, violations)), violations
            )

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "PageDocument":
        if not isinstance(raw, Mapping):
            raise ValidationError("page must be an object")
        violations = validate_page(raw)
        if violations:
            raise ValidationError(
                "invalid page: " + "; ".join(map(str, violations)), violations
            )
        lines = []
        for line in raw.get("lines", []):
            bbox = line.get("bbox")
            lines.append(
                TextLine(line["text"], None if bbox is None else BoundingBox.from_seq(bbox))
            )
        return cls(raw["width"], raw["height"], tuple(lines))

    def to_dict(self) -> dict[str, Any]:
        return {
            "width": self.width,
            "height": self.height,
            "lines": [
                {"text": ln.text, "bbox": None if ln.bbox is None else list(ln.bbox.as_tuple())}
                for ln in self.lines
            ],
        }

    @property
    def text(self) -> str:
        """Line texts joined with newlines, in stored reading order."""
        return "\n".join(ln.text for ln in self.lines)

    @property
    def has_boxes(self) -> bool:
        return any(ln.bbox is not None for ln in self.lines)


@dataclass(frozen=True)
class MarkdownDocument:
    source: str

    def __post_init__(self) -> None:
        if not isinstance(self.source, str):
            raise ValidationError("markdown source must be a string")
        try:
            self.source.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise ValidationError(f"markdown is not valid UTF-8: {exc}") from None
        object.__setattr__(self, "source", nfc(self.source))


class Task(str, enum.Enum):
    OCR = "ocr"
    MARKDOWN = "markdown"


class Category(str, enum.Enum):
    HANDWRITTEN = "handwritten"
    DESIGN = "design"
    RECEIPT = "receipt"
    GENERAL = "general"
    ACADEMIC = "academic"
    WEB = "web"
    MATH = "math"
    TABLE = "table"
    README = "readme"
    DOCX = "docx"
    ARXIV = "arxiv"


CATEGORY_ORDER = [c.value for c in Category]

GroundTruth = Union[PageDocument, MarkdownDocument]


@dataclass(frozen=True)
class Sample:
    id: str
    category: Category
    task: Task
    ground_truth: GroundTruth
    extra: Mapping[str, Any] = field(default_factory=dict, compare=True)

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("sample id must be a non-empty string")
        try:
            object.__setattr__(self, "category", Category(self.category))
            object.__setattr__(self, "task", Task(self.task))
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        expected = PageDocument if self.task is Task.OCR else MarkdownDocument
        if not isinstance(self.ground_truth, expected):
            raise ValidationError(
                f"task {self.task.value!r} needs a {expected.__name__} ground truth"
            )

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Sample":
        if not isinstance(raw, Mapping):
            raise ValidationError("record must be a JSON object")
        missing = [k for k in ("id", "category", "task") if k not in raw]
        if missing:
            raise ValidationError(f"missing field(s): {', '.join(missing)}")
        task = raw["task"]
        if task == Task.OCR.value:
            if "page" not in raw:
                raise ValidationError("ocr record needs a 'page'")
            gt: GroundTruth = PageDocument.from_dict(raw["page"])
        elif task == Task.MARKDOWN.value:
            if not isinstance(raw.get("markdown"), str):
                raise ValidationError("markdown record needs a 'markdown' string")
            gt = MarkdownDocument(raw["markdown"])
        else:
            raise ValidationError(f"unknown task {task!r}")
        known = {"id", "category", "task", "page", "markdown"}
        extra = {k: v for k, v in raw.items() if k not in known}
        return cls(raw["id"], raw["category"], task, gt, extra)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "category": self.category.value,
            "task": self.task.value,
        }
        if isinstance(self.ground_truth, PageDocument):
            out["page"] = self.ground_truth.to_dict()
        else:
            out["markdown"] = self.ground_truth.source
        out.update(self.extra)
        return out


def iter_jsonl(stream: Iterable[str]) -> Iterator[tuple[int, Any]]:
    """Yield ``(line_number, decoded_object)``, skipping blank lines."""
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON: {exc.msg}", lineno) from None


def read_manifest(stream: Iterable[str]) -> list[Sample]:
    samples: list[Sample] = []
    seen: dict[str, int] = {}
    for lineno, raw in iter_jsonl(stream):
        try:
            sample = Sample.from_dict(raw)
        except ValidationError as exc:
            raise ManifestError(str(exc), lineno) from None
        if sample.id in seen:
            raise ManifestError(
                f"duplicate id {sample.id!r} (first seen on line {seen[sample.id]})", lineno
            )
        seen[sample.id] = lineno
        samples.append(sample)
    return samples


# characters str.splitlines treats as line breaks; JSON leaves them raw
_LINE_BREAKS = {c: f"\\u{ord(c):04x}" for c in "\x0b\x0c\x1c\x1d\x1e\x85\u2028\u2029"}
_ESCAPE_BREAKS = str.maketrans(_LINE_BREAKS)


def dumps_record(obj: Any) -> str:
    """One JSONL line, UTF-8 friendly, safe for any line splitter."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).translate(_ESCAPE_BREAKS)


def write_manifest(samples: Iterable[Sample], stream: IO[str]) -> None:
    for sample in samples:
        stream.write(dumps_record(sample.to_dict()) + "\n")


@dataclass(frozen=True)
class EvalReport:
    """Aggregated scores for one benchmark run.

    ``overall`` is the mean over all per-sample scores; ``overall_macro`` is
    the unweighted mean of the per-category means.  Metric values live in
    [0, 1] and are only scaled by 100 when rendered.
    """

    task: Task
    metrics: tuple[str, ...]
    per_category: Mapping[str, Mapping[str, float | None]]
    overall: Mapping[str, float | None]
    overall_macro: Mapping[str, float | None]
    sample_count: Mapping[str, int]
    per_sample: tuple[Mapping[str, Any], ...] = ()
    diagnostics: tuple[str, ...] = ()
