from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from literate_bench.textdist import corpus_ned, levenshtein, levenshtein_rows, ned_pair
from oracles import levenshtein_matrix

short = st.text(alphabet="abcxyzé ", max_size=25)


@pytest.mark.parametrize(
    "a, b, expected",
    [("", "abc", 3), ("kitten", "sitting", 3), ("flaw", "lawn", 2), ("same", "same", 0), ("", "", 0)],
)
def test_levenshtein_examples(a, b, expected):
    assert levenshtein(a, b) == expected
    assert levenshtein_rows(a, b) == expected


def test_levenshtein_counts_code_points_not_bytes():
    assert levenshtein("é", "e") == 1
    assert levenshtein("日本", "日本語") == 1
    assert levenshtein("\U0001f600", "") == 1


def test_both_implementations_agree_on_long_inputs():
    rng = random.Random(0)
    for n in (63, 64, 65, 130, 700):
        a = "".join(rng.choice("abcd") for _ in range(n))
        b = "".join(rng.choice("abcd") for _ in range(n + rng.randint(-5, 5)))
        assert levenshtein(a, b) == levenshtein_rows(a, b) == levenshtein_matrix(a, b)


@given(short, short)
def test_levenshtein_symmetric_and_bounded(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein(b, a)
    assert d <= len(a) + len(b)


@given(short, short, short)
def test_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def test_ned_examples():
    assert ned_pair("kitten", "sitting").similarity == pytest.approx(1 - 3 / 7)
    assert ned_pair("kitten", "sitting").distance == 3
    assert ned_pair("abc", "abc").similarity == 1.0
    assert ned_pair("", "ab").similarity == 0.0
    assert ned_pair("", "").similarity == 1.0


@given(short, short)
def test_ned_range_and_identity(a, b):
    s = ned_pair(a, b).similarity
    assert 0.0 <= s <= 1.0
    assert (s == 1.0) == (a == b)


def test_corpus_ned_examples():
    assert corpus_ned([("x", "x")] * 5) == 1.0
    assert corpus_ned([("kitten", "sitting"), ("s", "s")]) == pytest.approx(0.7857, abs=1e-4)
    assert corpus_ned([("", "ab")]) == 0.0
    with pytest.raises(ValueError):
        corpus_ned([])


def test_corpus_ned_permutation_invariant():
    rng = random.Random(3)
    pairs = [("".join(rng.choice("ab") for _ in range(rng.randint(0, 9))), "abba") for _ in range(30)]
    shuffled = pairs[:]
    rng.shuffle(shuffled)
    assert corpus_ned(pairs) == pytest.approx(corpus_ned(shuffled), abs=1e-12)
