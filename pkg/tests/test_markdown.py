from __future__ import annotations

from pathlib import Path

from hypothesis import given
from hypothesis import strategies as st

from literate_bench.markdown import TAG_LABELS, Node, parse_markdown, tree_to_json

FIXTURES = Path(__file__).parent / "fixtures"


def T(text):
    return Node(f"text:{text}")


def labels(tree):
    return [n.label for n in tree]


def test_heading():
    assert parse_markdown("# Title") == Node("root", (Node("h1", (T("Title"),)),))
    assert parse_markdown("###### six").children[0].label == "h6"


def test_superscript_fixture():
    (p,) = parse_markdown("e<sup>2</sup>").children
    assert p == Node("p", (T("e"), Node("sup", (T("2"),))))


def test_inline_constructs():
    (p,) = parse_markdown("a **b** *c* `d` [e](f) H<sub>2</sub>O x<br>y").children
    assert [c.label for c in p.children] == [
        "text:a", "strong", "em", "code", "a", "text:H", "sub", "text:O x", "br", "text:y",
    ]


def test_table_separator_produces_no_nodes():
    (table,) = parse_markdown("| a | b |\n|---|---|\n| 1 | **2** |").children
    assert [r.label for r in table.children] == ["tr", "tr"]
    assert [c.label for c in table.children[0].children] == ["th", "th"]
    assert table.children[1].children[1] == Node("td", (Node("strong", (T("2"),)),))


def test_lists_and_rules():
    tree = parse_markdown("- a\n  - nested\n- b\n\n1. x\n2. y\n\n---")
    assert [c.label for c in tree.children] == ["ul", "ol", "hr"]
    assert labels(tree.children[0]) == ["ul", "li", "text:a", "ul", "li", "text:nested", "li", "text:b"]


def test_code_fence_is_literal():
    (pre,) = parse_markdown("```\n**not bold**\n```").children
    assert pre == Node("pre", (Node("code", (T("**not bold**"),)),))


def test_paragraph_text_is_collapsed():
    tree = parse_markdown("para  one\nline two\n\npara two")
    assert tree.children == (Node("p", (T("para one line two"),)), Node("p", (T("para two"),)))


def test_listing_structure():
    tree = parse_markdown((FIXTURES / "calendar.md").read_text(encoding="utf-8"))
    assert [c.label for c in tree.children] == ["h1", "p", "ul", "table"]
    assert sum(1 for n in tree if n.label == "p") == 4
    ul, table = tree.children[2], tree.children[3]
    assert [c.label for c in ul.children] == ["li"] * 3
    assert all(li.children[0].label == "p" for li in ul.children)
    assert [c.label for c in table.children] == ["tr"] * 16
    assert table.children[0].children[0] == Node("th", (T("DATE"),))


def test_deep_nesting_is_flattened_with_diagnostic():
    diagnostics: list[str] = []
    tree = parse_markdown("- " * 100 + "deep", diagnostics)
    assert diagnostics
    depth = 0
    node = tree
    while node.children:
        node = node.children[0]
        depth += 1
    # ul/li pairs up to the limit, then a single flattened paragraph
    assert depth <= 2 * 64 + 3


def test_labels_come_from_closed_set():
    tree = parse_markdown((FIXTURES / "calendar.md").read_text(encoding="utf-8"))
    assert all(n.label in TAG_LABELS or n.label.startswith("text:") for n in tree)


def test_json_form_round_trips():
    tree = parse_markdown((FIXTURES / "calendar.md").read_text(encoding="utf-8"))
    assert Node.from_json(tree.to_json()) == tree
    assert tree_to_json(tree) == tree_to_json(parse_markdown((FIXTURES / "calendar.md").read_text(encoding="utf-8")))


markdownish = st.text(alphabet="ab #*|-`[]()<>/sup\n ", max_size=80)


@given(markdownish)
def test_parse_is_deterministic_and_total(src):
    first = parse_markdown(src)
    assert first.label == "root"
    assert first == parse_markdown(src)
    assert hash(first) == hash(parse_markdown(src))
