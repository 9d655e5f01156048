from __future__ import annotations

import random

import pytest

from literate_bench.markdown import Node, parse_markdown
from literate_bench.treedist import (
    MAX_NODES,
    EditCosts,
    TreeTooLargeError,
    corpus_nted,
    nted_pair,
    zss_distance,
)
from oracles import random_tree, tree_distance_bruteforce


def test_trivial_distances():
    t = parse_markdown("# x\n\n- a\n- b")
    assert zss_distance(t, t) == 0
    assert zss_distance(Node("a"), Node("b")) == 1
    assert nted_pair(t, t) == 1.0
    assert nted_pair(Node("a"), Node("b")) == 0.0


def test_classic_example():
    # f(d(a c(b)) e) vs f(c(d(a b)) e): one delete and one insert
    t1 = Node("f", (Node("d", (Node("a"), Node("c", (Node("b"),)))), Node("e")))
    t2 = Node("f", (Node("c", (Node("d", (Node("a"), Node("b"))),)), Node("e")))
    assert zss_distance(t1, t2) == 2 == tree_distance_bruteforce(t1, t2)


def test_superscript_pair_matches_oracle():
    pred, gt = parse_markdown("e2"), parse_markdown("e<sup>2</sup>")
    assert zss_distance(pred, gt) == tree_distance_bruteforce(pred, gt) == 3
    assert nted_pair(pred, gt) == pytest.approx(1 - 3 / 5)
    assert nted_pair(pred, gt) < 1.0


def test_symmetry_and_bound_on_random_trees():
    rng = random.Random(99)
    for _ in range(500):
        a, b = random_tree(rng, 12), random_tree(rng, 12)
        d = zss_distance(a, b)
        assert d == zss_distance(b, a)
        assert d <= a.size() + b.size()


def test_custom_costs():
    costs = EditCosts(insert=2, delete=3, relabel=10)
    assert zss_distance(Node("a"), Node("b"), costs) == 5
    assert zss_distance(Node("r"), Node("r", (Node("x"),)), costs) == 2


def test_guard_rejects_huge_trees():
    wide = Node("root", tuple(Node("text:x") for _ in range(MAX_NODES)))
    with pytest.raises(TreeTooLargeError):
        zss_distance(wide, Node("root"))


def test_deep_tree_does_not_recurse():
    chain = Node("x")
    for _ in range(3000):
        chain = Node("x", (chain,))
    assert zss_distance(chain, chain) == 0


def test_corpus_nted():
    a, b = Node("a"), Node("b")
    assert corpus_nted([(a, a)] * 3) == 1.0
    assert corpus_nted([(a, a), (a, b)]) == 0.5
    assert corpus_nted([(a, b), (a, a)]) == 0.5
    with pytest.raises(ValueError):
        corpus_nted([])
