"""Location-token codec for text-line bounding boxes.

A box is quantized into ``L`` bins per axis and written as the special
tokens ``<bbox><x_i><y_j><x_k><y_l></bbox>`` followed by the line text.  The
same information has a human-readable form, one line per text line::

    [x_52] [y_113] [x_756] [y_145]: NYC Department of Education

x bins scale with page width and y bins with page height, independently.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Iterable, Sequence, Union

from .core import BoundingBox, PageDocument, Task, TextLine, ValidationError

DEFAULT_BINS = 4096
IMAGE_PLACEHOLDER = "<placeholder>"

STRUCTURAL_SPECIALS = ("s", "/s", "image", "/image", "ocr", "md", "bbox", "/bbox")


@dataclass(frozen=True)
class CodecConfig:
    bins: int = DEFAULT_BINS

    def __post_init__(self) -> None:
        if isinstance(self.bins, bool) or not isinstance(self.bins, int) or self.bins < 1:
            raise ValueError(f"bin count must be a positive integer, got {self.bins!r}")


DEFAULT_CONFIG = CodecConfig()


@dataclass(frozen=True)
class QuantizedBox:
    x_tl_bin: int
    y_tl_bin: int
    x_br_bin: int
    y_br_bin: int

    def __post_init__(self) -> None:
        if min(self.as_tuple()) < 0:
            raise ValidationError("bin indices must be >= 0")
        if self.x_tl_bin > self.x_br_bin or self.y_tl_bin > self.y_br_bin:
            raise ValidationError("quantized box corners out of order")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x_tl_bin, self.y_tl_bin, self.x_br_bin, self.y_br_bin)

    def check(self, cfg: CodecConfig) -> None:
        if max(self.as_tuple()) >= cfg.bins:
            raise ValidationError(f"bin index >= {cfg.bins}")


_LOCATION_NAME = re.compile(r"[xy]_(0|[1-9]\d*)\Z")


@dataclass(frozen=True)
class Special:
    name: str

    def __post_init__(self) -> None:
        if self.name not in STRUCTURAL_SPECIALS and not _LOCATION_NAME.match(self.name):
            raise ValueError(f"unknown special token <{self.name}>")


@dataclass(frozen=True)
class Text:
    value: str


Token = Union[Special, Text]
TokenStream = tuple  # tuple[Token, ...]


def location_vocabulary(cfg: CodecConfig = DEFAULT_CONFIG) -> list[str]:
    """Coordinate and box-marker specials: ``2L + 2`` names."""
    L = cfg.bins
    return [f"x_{i}" for i in range(L)] + [f"y_{i}" for i in range(L)] + ["bbox", "/bbox"]


def special_vocabulary(cfg: CodecConfig = DEFAULT_CONFIG) -> list[str]:
    extra = [s for s in STRUCTURAL_SPECIALS if s not in ("bbox", "/bbox")]
    return extra + location_vocabulary(cfg)


# ---------------------------------------------------------------------------
# quantization


def quantize_coord(value: int, dim: int, bins: int) -> int:
    # floor(v * L / dim), with the far page edge clamped into the last bin
    return min(value * bins // dim, bins - 1)


def dequantize_coord(bin_index: int, dim: int, bins: int) -> int:
    # middle pixel of the bin (lower middle on ties); bins holding no pixel
    # (dim < L) fall back to the next pixel up
    lo = -(-bin_index * dim // bins)
    hi = dim if bin_index == bins - 1 else -(-(bin_index + 1) * dim // bins) - 1
    if lo > hi:
        return min(lo, dim)
    return (lo + hi) // 2


def quantize(
    bbox: BoundingBox, page_w: int, page_h: int, cfg: CodecConfig = DEFAULT_CONFIG
) -> QuantizedBox:
    if page_w <= 0 or page_h <= 0:
        raise ValueError("page dimensions must be positive")
    if bbox.x_br > page_w or bbox.y_br > page_h:
        raise ValueError(f"bbox {bbox.as_tuple()} outside page {page_w}x{page_h}")
    L = cfg.bins
    return QuantizedBox(
        quantize_coord(bbox.x_tl, page_w, L),
        quantize_coord(bbox.y_tl, page_h, L),
        quantize_coord(bbox.x_br, page_w, L),
        quantize_coord(bbox.y_br, page_h, L),
    )


def dequantize(
    qbox: QuantizedBox, page_w: int, page_h: int, cfg: CodecConfig = DEFAULT_CONFIG
) -> BoundingBox:
    qbox.check(cfg)
    L = cfg.bins
    return BoundingBox(
        dequantize_coord(qbox.x_tl_bin, page_w, L),
        dequantize_coord(qbox.y_tl_bin, page_h, L),
        dequantize_coord(qbox.x_br_bin, page_w, L),
        dequantize_coord(qbox.y_br_bin, page_h, L),
    )


def quantize_page(doc: PageDocument, cfg: CodecConfig = DEFAULT_CONFIG) -> PageDocument:
    """Snap every box to the representative pixel of its bin."""
    lines = []
    for line in doc.lines:
        bbox = line.bbox
        if bbox is not None:
            bbox = dequantize(quantize(bbox, doc.width, doc.height, cfg), doc.width, doc.height, cfg)
        lines.append(TextLine(line.text, bbox))
    return PageDocument(doc.width, doc.height, tuple(lines))


# ---------------------------------------------------------------------------
# token streams


class LayoutParseError(ValueError):
    """Malformed layout token stream; ``offset`` is the offending token index."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"token {offset}: {message}")
        self.offset = offset


class UnbalancedBoxError(LayoutParseError):
    pass


class CoordinateRangeError(LayoutParseError):
    pass


class OrphanTextError(LayoutParseError):
    pass


class MissingBoxError(ValueError):
    def __init__(self, line: int):
        super().__init__(f"line {line} has no bounding box")
        self.line = line


def _bbox_tokens(q: QuantizedBox) -> list[Token]:
    return [
        Special("bbox"),
        Special(f"x_{q.x_tl_bin}"),
        Special(f"y_{q.y_tl_bin}"),
        Special(f"x_{q.x_br_bin}"),
        Special(f"y_{q.y_br_bin}"),
        Special("/bbox"),
    ]


def encode_layout(doc: PageDocument, cfg: CodecConfig = DEFAULT_CONFIG) -> TokenStream:
    out: list[Token] = []
    for i, line in enumerate(doc.lines):
        if line.bbox is None:
            raise MissingBoxError(i)
        out.extend(_bbox_tokens(quantize(line.bbox, doc.width, doc.height, cfg)))
        out.append(Text(line.text))
    out.append(Special("/s"))
    return tuple(out)


_COORD = re.compile(r"([xy])_(\d+)\Z")


def _coord(tok: Token, axis: str, offset: int, cfg: CodecConfig) -> int:
    if not isinstance(tok, Special):
        raise UnbalancedBoxError(f"expected <{axis}_*>, got text", offset)
    m = _COORD.match(tok.name)
    if m is None or m.group(1) != axis:
        if tok.name in ("bbox", "/bbox", "/s") or m is not None:
            raise UnbalancedBoxError(f"expected <{axis}_*>, got <{tok.name}>", offset)
        raise LayoutParseError(f"unknown special <{tok.name}>", offset)
    value = int(m.group(2))
    if value >= cfg.bins:
        raise CoordinateRangeError(f"<{tok.name}> outside [0, {cfg.bins})", offset)
    return value


def _parse_block(stream: Sequence[Token], i: int, cfg: CodecConfig) -> tuple[QuantizedBox, str, int]:
    """Parse one ``<bbox>...</bbox> text`` block starting at ``stream[i]``."""
    n = len(stream)
    bins = []
    for k, axis in enumerate("xyxy", start=1):
        if i + k >= n:
            raise UnbalancedBoxError("stream ends inside <bbox> block", n)
        bins.append(_coord(stream[i + k], axis, i + k, cfg))
        if k > 2 and bins[k - 3] > bins[k - 1]:
            raise CoordinateRangeError(f"<{axis}_{bins[k - 1]}> precedes top-left corner", i + k)
    if i + 5 >= n:
        raise UnbalancedBoxError("stream ends inside <bbox> block", n)
    if stream[i + 5] != Special("/bbox"):
        raise UnbalancedBoxError("expected </bbox>", i + 5)
    j = i + 6
    parts = []
    while j < n and isinstance(stream[j], Text):
        parts.append(stream[j].value)
        j += 1
    return QuantizedBox(*bins), "".join(parts), j


@dataclass(frozen=True)
class ParseProblem:
    offset: int
    message: str


def _decode(
    stream: Sequence[Token], page_w: int, page_h: int, cfg: CodecConfig, strict: bool
) -> tuple[PageDocument, list[ParseProblem]]:
    lines: list[TextLine] = []
    problems: list[ParseProblem] = []
    i, n = 0, len(stream)
    terminated = False
    while i < n:
        tok = stream[i]
        try:
            if tok == Special("/s"):
                terminated = True
                if i != n - 1:
                    raise LayoutParseError("tokens after </s>", i + 1)
                break
            if isinstance(tok, Text):
                raise OrphanTextError("text outside a <bbox> block", i)
            if tok != Special("bbox"):
                if tok == Special("/bbox"):
                    raise UnbalancedBoxError("</bbox> without <bbox>", i)
                raise LayoutParseError(f"unexpected <{tok.name}>", i)
            qbox, text, i = _parse_block(stream, i, cfg)
            if "\n" in text or "\r" in text:
                raise LayoutParseError("line text contains a newline", i - 1)
            lines.append(TextLine(text, dequantize(qbox, page_w, page_h, cfg)))
        except LayoutParseError as exc:
            if strict:
                raise
            problems.append(ParseProblem(exc.offset, str(exc)))
            if terminated:
                break
            # resync on the next block start
            i += 1
            while i < n and stream[i] not in (Special("bbox"), Special("/s")):
                i += 1
    if not terminated:
        if strict:
            raise LayoutParseError("missing </s>", n)
        problems.append(ParseProblem(n, "missing </s>"))
    return PageDocument(page_w, page_h, tuple(lines)), problems


def decode_layout(
    stream: Sequence[Token], page_w: int, page_h: int, cfg: CodecConfig = DEFAULT_CONFIG
) -> PageDocument:
    """Strict inverse of :func:`encode_layout`; raises on any malformed block."""
    return _decode(stream, page_w, page_h, cfg, strict=True)[0]


def decode_layout_lenient(
    stream: Sequence[Token], page_w: int, page_h: int, cfg: CodecConfig = DEFAULT_CONFIG
) -> tuple[PageDocument, list[ParseProblem]]:
    """Like :func:`decode_layout` but skips unparseable blocks and reports them."""
    return _decode(stream, page_w, page_h, cfg, strict=False)


def build_prompt(task: Task | str) -> TokenStream:
    task = Task(task)
    marker = "ocr" if task is Task.OCR else "md"
    return (
        Special("s"),
        Special("image"),
        Text(IMAGE_PLACEHOLDER),
        Special("/image"),
        Special(marker),
    )


def stream_to_json(stream: Iterable[Token]) -> str:
    return json.dumps(
        [
            {"t": "special", "v": tok.name} if isinstance(tok, Special) else {"t": "text", "v": tok.value}
            for tok in stream
        ],
        ensure_ascii=False,
    )


def stream_from_json(payload: str | list[Any]) -> TokenStream:
    items = json.loads(payload) if isinstance(payload, str) else payload
    if not isinstance(items, list):
        raise LayoutParseError("token JSON must be an array", 0)
    out: list[Token] = []
    for i, item in enumerate(items):
        if not isinstance(item, dict) or not isinstance(item.get("v"), str):
            raise LayoutParseError("token must be {'t': ..., 'v': string}", i)
        if item.get("t") == "special":
            try:
                out.append(Special(item["v"]))
            except ValueError as exc:
                raise LayoutParseError(str(exc), i) from None
        elif item.get("t") == "text":
            out.append(Text(item["v"]))
        else:
            raise LayoutParseError(f"unknown token kind {item.get('t')!r}", i)
    return tuple(out)


# ---------------------------------------------------------------------------
# bracketed text format


class BracketedParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_BRACKETED = re.compile(r"\[x_(\d+)\] \[y_(\d+)\] \[x_(\d+)\] \[y_(\d+)\]: (.*)\Z", re.DOTALL)


def encode_bracketed(doc: PageDocument, cfg: CodecConfig = DEFAULT_CONFIG) -> str:
    out = []
    for i, line in enumerate(doc.lines):
        if line.bbox is None:
            raise MissingBoxError(i)
        q = quantize(line.bbox, doc.width, doc.height, cfg)
        out.append(
            f"[x_{q.x_tl_bin}] [y_{q.y_tl_bin}] [x_{q.x_br_bin}] [y_{q.y_br_bin}]: {line.text}\n"
        )
    return "".join(out)


def parse_bracketed(
    text: str, cfg: CodecConfig = DEFAULT_CONFIG, strict: bool = True
) -> tuple[list[tuple[QuantizedBox, str]], list[BracketedParseError]]:
    """Split bracketed text into ``(QuantizedBox, text)`` pairs.

    In strict mode the first malformed line raises; otherwise malformed lines
    are skipped and returned as errors.
    """
    items: list[tuple[QuantizedBox, str]] = []
    errors: list[BracketedParseError] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw == "" and lineno == text.count("\n") + 1:
            break  # trailing newline
        try:
            m = _BRACKETED.match(raw.rstrip("\r"))
            if m is None:
                raise BracketedParseError("expected '[x_A] [y_B] [x_C] [y_D]: text'", lineno)
            bins = [int(g) for g in m.groups()[:4]]
            if max(bins) >= cfg.bins:
                raise BracketedParseError(f"bin index >= {cfg.bins}", lineno)
            if bins[0] > bins[2] or bins[1] > bins[3]:
                raise BracketedParseError("box corners out of order", lineno)
            items.append((QuantizedBox(*bins), m.group(5)))
        except BracketedParseError as exc:
            if strict:
                raise
            errors.append(exc)
    return items, errors


def _bracketed_page(
    items: list[tuple[QuantizedBox, str]], page_w: int | None, page_h: int | None, cfg: CodecConfig
) -> PageDocument:
    # without page dimensions, decode onto an L x L canvas where bins are pixels
    w = cfg.bins if page_w is None else page_w
    h = cfg.bins if page_h is None else page_h
    return PageDocument(w, h, tuple(TextLine(t, dequantize(q, w, h, cfg)) for q, t in items))


def decode_bracketed(
    text: str,
    page_w: int | None = None,
    page_h: int | None = None,
    cfg: CodecConfig = DEFAULT_CONFIG,
) -> PageDocument:
    items, _ = parse_bracketed(text, cfg, strict=True)
    return _bracketed_page(items, page_w, page_h, cfg)


def decode_bracketed_lenient(
    text: str,
    page_w: int | None = None,
    page_h: int | None = None,
    cfg: CodecConfig = DEFAULT_CONFIG,
) -> tuple[PageDocument, list[BracketedParseError]]:
    items, errors = parse_bracketed(text, cfg, strict=False)
    return _bracketed_page(items, page_w, page_h, cfg), errors
