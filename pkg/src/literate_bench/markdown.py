"""Markdown to labeled ordered tree, for tree edit distance scoring.

Only a pinned subset of markdown is recognized, so scores do not drift with
a third-party parser's version:

* ATX headings (``#`` .. ``######``), paragraphs split on blank lines
* bullet (``-``, ``*``, ``+``) and ordered (``1.`` / ``1)``) lists, nested by
  indentation; loose lists wrap item content in ``p``
* pipe tables with a ``---`` separator row (the separator yields no node)
* fenced code blocks, horizontal rules
* inline code, ``**strong**``, ``*em*`` / ``_em_``, ``[links](url)``,
  ``<sup>``/``<sub>``/``<br>`` tags

Anything else is paragraph text.  Text leaves are labeled ``text:<content>``
with whitespace collapsed and trimmed.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Iterator

from .core import MarkdownDocument

log = logging.getLogger(__name__)

MAX_DEPTH = 64

TAG_LABELS = frozenset(
    ["root", "h1", "h2", "h3", "h4", "h5", "h6", "p", "ul", "ol", "li", "table", "tr",
     "th", "td", "strong", "em", "code", "pre", "sup", "sub", "a", "br", "hr"]
)


@dataclass(frozen=True)
class Node:
    label: str
    children: tuple["Node", ...] = ()

    def __iter__(self) -> Iterator["Node"]:
        """Preorder traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self)

    def to_json(self) -> dict[str, Any]:
        return {"label": self.label, "children": [c.to_json() for c in self.children]}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "Node":
        return cls(obj["label"], tuple(cls.from_json(c) for c in obj.get("children", [])))

    def to_text(self) -> str:
        out: list[str] = []
        stack: list[tuple[Node, int]] = [(self, 0)]
        while stack:
            node, depth = stack.pop()
            out.append("  " * depth + node.label)
            stack.extend((c, depth + 1) for c in reversed(node.children))
        return "\n".join(out)


DocTree = Node


def text_node(content: str) -> Node | None:
    content = " ".join(content.split())
    return Node("text:" + content) if content else None


# ---------------------------------------------------------------------------
# inline


_PUNCT = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")
_TAG = re.compile(r"<(/?)(sup|sub|br)\s*(/?)>", re.IGNORECASE)


class _Ctx:
    def __init__(self, diagnostics: list[str] | None):
        self.diagnostics = diagnostics if diagnostics is not None else []

    def too_deep(self, depth: int, what: str) -> bool:
        if depth <= MAX_DEPTH:
            return False
        msg = f"{what} nested deeper than {MAX_DEPTH}; flattened to text"
        if msg not in self.diagnostics:
            self.diagnostics.append(msg)
            log.warning(msg)
        return True


def _find_closing_tag(s: str, start: int, tag: str) -> tuple[int, int] | None:
    depth = 1
    for m in _TAG.finditer(s, start):
        if m.group(2).lower() != tag:
            continue
        if m.group(1):
            depth -= 1
            if depth == 0:
                return m.start(), m.end()
        elif not m.group(3):
            depth += 1
    return None


def _find_emphasis_close(s: str, start: int, delim: str) -> int:
    n, k = len(s), len(delim)
    j = start
    while True:
        j = s.find(delim, j)
        if j < 0:
            return -1
        if j == start or s[j - 1].isspace():
            j += 1
            continue
        if k == 1:
            # a single delimiter must not be half of a double one
            if (j + 1 < n and s[j + 1] == delim) or s[j - 1] == delim:
                j += 2
                continue
            if delim == "_" and j + 1 < n and s[j + 1].isalnum():
                j += 1
                continue
        return j


def _find_bracket(s: str, start: int, open_: str, close: str) -> int:
    depth = 0
    i = start
    while i < len(s):
        c = s[i]
        if c == "\\":
            i += 2
            continue
        if c == open_:
            depth += 1
        elif c == close:
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return -1


def parse_inline(s: str, ctx: _Ctx, depth: int = 0) -> list[Node]:
    if ctx.too_deep(depth, "inline markup"):
        node = text_node(s)
        return [node] if node else []
    out: list[Node] = []
    buf: list[str] = []

    def flush() -> None:
        node = text_node("".join(buf))
        if node:
            out.append(node)
        buf.clear()

    i, n = 0, len(s)
    while i < n:
        c = s[i]
        if c == "\\" and i + 1 < n and s[i + 1] in _PUNCT:
            buf.append(s[i + 1])
            i += 2
            continue
        if c == "\n":
            if "".join(buf).endswith("  "):
                flush()
                out.append(Node("br"))
            else:
                buf.append(" ")
            i += 1
            continue
        if c == "`":
            run = 0
            while i + run < n and s[i + run] == "`":
                run += 1
            fence = "`" * run
            j = s.find(fence, i + run)
            while j >= 0 and j + run < n and s[j + run] == "`":
                j = s.find(fence, j + run + 1)
            if j >= 0:
                flush()
                inner = text_node(s[i + run : j])
                out.append(Node("code", (inner,) if inner else ()))
                i = j + run
            else:
                buf.append(fence)
                i += run
            continue
        if c == "<":
            m = _TAG.match(s, i)
            if m:
                tag = m.group(2).lower()
                if tag == "br" and not m.group(1):
                    flush()
                    out.append(Node("br"))
                    i = m.end()
                    continue
                if not m.group(1) and not m.group(3):
                    close = _find_closing_tag(s, m.end(), tag)
                    if close:
                        flush()
                        kids = parse_inline(s[m.end() : close[0]], ctx, depth + 1)
                        out.append(Node(tag, tuple(kids)))
                        i = close[1]
                        continue
        if c in "*_":
            double = s.startswith(c * 2, i)
            delim = c * 2 if double else c
            body = i + len(delim)
            opens = body < n and not s[body].isspace()
            if c == "_" and i > 0 and s[i - 1].isalnum():
                opens = False
            if opens:
                j = _find_emphasis_close(s, body, delim)
                if j > body:
                    flush()
                    kids = parse_inline(s[body:j], ctx, depth + 1)
                    out.append(Node("strong" if double else "em", tuple(kids)))
                    i = j + len(delim)
                    continue
            buf.append(delim)
            i = body
            continue
        if c == "[":
            close = _find_bracket(s, i, "[", "]")
            if close > 0 and close + 1 < n and s[close + 1] == "(":
                end = _find_bracket(s, close + 1, "(", ")")
                if end > 0:
                    flush()
                    kids = parse_inline(s[i + 1 : close], ctx, depth + 1)
                    out.append(Node("a", tuple(kids)))
                    i = end + 1
                    continue
        buf.append(c)
        i += 1
    flush()
    return out


# ---------------------------------------------------------------------------
# blocks


_ATX = re.compile(r" {0,3}(#{1,6})(?:[ \t]+(.*?))?[ \t]*\Z")
_HR = re.compile(r" {0,3}([-*_])(?:[ \t]*\1){2,}[ \t]*\Z")
_FENCE = re.compile(r"( {0,3})(`{3,}|~{3,})(.*)\Z")
_ITEM = re.compile(r"( *)([-*+]|\d{1,9}[.)])([ \t]+|\Z)(.*)\Z")
_TABLE_SEP = re.compile(r"\s*\|?\s*:?-+:?\s*(\|\s*:?-+:?\s*)*\|?\s*\Z")


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip(" "))


def _is_blank(line: str) -> bool:
    return not line.strip()


def _is_table_start(lines: list[str], i: int) -> bool:
    return (
        "|" in lines[i]
        and i + 1 < len(lines)
        and "-" in lines[i + 1]
        and _TABLE_SEP.match(lines[i + 1]) is not None
    )


def _starts_block(lines: list[str], i: int) -> bool:
    line = lines[i]
    return bool(
        _ATX.match(line)
        or _HR.match(line)
        or _FENCE.match(line)
        or _ITEM.match(line)
        or _is_table_start(lines, i)
    )


def _split_cells(row: str) -> list[str]:
    row = row.strip()
    if row.startswith("|"):
        row = row[1:]
    if row.endswith("|") and not row.endswith("\\|"):
        row = row[:-1]
    cells, buf, i = [], [], 0
    while i < len(row):
        if row[i] == "\\" and i + 1 < len(row) and row[i + 1] == "|":
            buf.append("|")
            i += 2
            continue
        if row[i] == "|":
            cells.append("".join(buf))
            buf = []
        else:
            buf.append(row[i])
        i += 1
    cells.append("".join(buf))
    return cells


def _list_kind(marker: str) -> str:
    return "ul" if marker in "-*+" else "ol"


def _marker_char(marker: str) -> str:
    return marker if marker in "-*+" else marker[-1]


def _parse_list(lines: list[str], i: int, ctx: _Ctx, depth: int) -> tuple[Node, int]:
    first = _ITEM.match(lines[i])
    assert first is not None
    kind = _list_kind(first.group(2))
    marker_char = _marker_char(first.group(2))
    base = len(first.group(1))
    items: list[list[str]] = []
    loose = False
    n = len(lines)
    while i < n:
        m = _ITEM.match(lines[i])
        if (
            m is None
            or len(m.group(1)) > base + 3
            or len(m.group(1)) < base
            or _marker_char(m.group(2)) != marker_char
            or _HR.match(lines[i])
        ):
            break
        pad = len(m.group(3))
        if pad == 0 or pad > 4:
            pad = 1
        content_col = len(m.group(1)) + len(m.group(2)) + pad
        body = [m.group(4)]
        i += 1
        saw_blank = False
        while i < n:
            line = lines[i]
            if _is_blank(line):
                saw_blank = True
                body.append("")
                i += 1
                continue
            if _indent(line) >= content_col:
                if saw_blank and any(b.strip() for b in body):
                    loose = True
                body.append(line[content_col:])
                saw_blank = False
                i += 1
                continue
            if not saw_blank and not _starts_block(lines, i):
                body.append(line.strip())  # lazy paragraph continuation
                i += 1
                continue
            break
        while body and not body[-1].strip():
            body.pop()
        items.append(body)
        if saw_blank and i < n:
            nxt = _ITEM.match(lines[i])
            if nxt and len(nxt.group(1)) >= base and _marker_char(nxt.group(2)) == marker_char:
                loose = True
            else:
                break
    children = []
    for body in items:
        kids = _parse_blocks(body, ctx, depth + 1)
        if not loose:
            flat: list[Node] = []
            for k in kids:
                flat.extend(k.children if k.label == "p" else (k,))
            kids = flat
        children.append(Node("li", tuple(kids)))
    return Node(kind, tuple(children)), i


def _parse_blocks(lines: list[str], ctx: _Ctx, depth: int) -> list[Node]:
    if ctx.too_deep(depth, "block structure"):
        node = text_node(" ".join(lines))
        return [Node("p", (node,))] if node else []
    out: list[Node] = []
    i, n = 0, len(lines)
    while i < n:
        line = lines[i]
        if _is_blank(line):
            i += 1
            continue
        fence = _FENCE.match(line)
        if fence and not (fence.group(2)[0] == "`" and "`" in fence.group(3)):
            mark = fence.group(2)
            body = []
            i += 1
            while i < n:
                close = lines[i].strip()
                if close.startswith(mark[0] * len(mark)) and not close.strip(mark[0]):
                    i += 1
                    break
                body.append(lines[i])
                i += 1
            inner = text_node("\n".join(body))
            out.append(Node("pre", (Node("code", (inner,) if inner else ()),)))
            continue
        atx = _ATX.match(line)
        if atx:
            content = re.sub(r"(?:^|[ \t]+)#+[ \t]*\Z", "", atx.group(2) or "")
            level = len(atx.group(1))
            out.append(Node(f"h{level}", tuple(parse_inline(content, ctx, depth + 1))))
            i += 1
            continue
        if _HR.match(line):
            out.append(Node("hr"))
            i += 1
            continue
        if _ITEM.match(line):
            node, i = _parse_list(lines, i, ctx, depth)
            out.append(node)
            continue
        if _is_table_start(lines, i):
            rows = [Node("tr", tuple(
                Node("th", tuple(parse_inline(c.strip(), ctx, depth + 1)))
                for c in _split_cells(line)
            ))]
            i += 2
            while i < n and not _is_blank(lines[i]) and "|" in lines[i]:
                if not _TABLE_SEP.match(lines[i]):
                    rows.append(Node("tr", tuple(
                        Node("td", tuple(parse_inline(c.strip(), ctx, depth + 1)))
                        for c in _split_cells(lines[i])
                    )))
                i += 1
            out.append(Node("table", tuple(rows)))
            continue
        para = [line.lstrip()]
        i += 1
        while i < n and not _is_blank(lines[i]) and not _starts_block(lines, i):
            para.append(lines[i].lstrip())
            i += 1
        out.append(Node("p", tuple(parse_inline("\n".join(para).strip(), ctx, depth + 1))))
    return out


def parse_markdown(doc: MarkdownDocument | str, diagnostics: list[str] | None = None) -> Node:
    """Parse markdown into a tree rooted at a ``root`` node.

    Total: every string parses.  Nesting beyond 64 levels is flattened to
    text and a message is appended to ``diagnostics`` (and logged).
    """
    source = doc.source if isinstance(doc, MarkdownDocument) else MarkdownDocument(doc).source
    lines = source.replace("\r\n", "\n").replace("\r", "\n").expandtabs(4).split("\n")
    ctx = _Ctx(diagnostics)
    return Node("root", tuple(_parse_blocks(lines, ctx, 0)))


def tree_to_json(tree: Node) -> str:
    return json.dumps(tree.to_json(), ensure_ascii=False, indent=2)
