"""Zhang-Shasha ordered tree edit distance and normalized tree similarity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .markdown import Node

MAX_NODES = 20_000


@dataclass(frozen=True)
class EditCosts:
    insert: int = 1
    delete: int = 1
    relabel: int = 1

    def rename(self, a: str, b: str) -> int:
        return 0 if a == b else self.relabel


UNIT_COSTS = EditCosts()


class TreeTooLargeError(ValueError):
    pass


class _Annotated:
    """Postorder labels, leftmost-leaf indices and keyroots of a tree."""

    __slots__ = ("labels", "lml", "keyroots")

    def __init__(self, root: Node):
        labels: list[str] = []
        lml: list[int] = []
        # iterative postorder; each entry is (node, leftmost leaf index of its first child)
        stack: list[tuple[Node, int, int]] = [(root, 0, -1)]
        while stack:
            node, child_i, first_leaf = stack.pop()
            if child_i < len(node.children):
                stack.append((node, child_i + 1, first_leaf))
                stack.append((node.children[child_i], 0, -1))
                continue
            idx = len(labels)
            labels.append(node.label)
            lml.append(idx if not node.children else first_leaf)
            if stack:
                parent, pci, pleaf = stack[-1]
                if pci == 1:  # this node was the parent's first child
                    stack[-1] = (parent, pci, lml[idx])
            if len(labels) > MAX_NODES:
                raise TreeTooLargeError(f"tree exceeds {MAX_NODES} nodes")
        self.labels = labels
        self.lml = lml
        last_with: dict[int, int] = {}
        for i, leaf in enumerate(lml):
            last_with[leaf] = i
        self.keyroots = sorted(last_with.values())


def zss_distance(t1: Node, t2: Node, costs: EditCosts = UNIT_COSTS) -> int:
    """Edit distance between two ordered labeled trees."""
    a, b = _Annotated(t1), _Annotated(t2)
    la, lb = a.labels, b.labels
    al, bl = a.lml, b.lml
    ins, dele = costs.insert, costs.delete
    td = [[0] * len(lb) for _ in range(len(la))]

    for i in a.keyroots:
        li = al[i]
        m = i - li + 2
        for j in b.keyroots:
            lj = bl[j]
            n = j - lj + 2
            fd = [[0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + dele
            row0 = fd[0]
            for y in range(1, n):
                row0[y] = row0[y - 1] + ins
            for x in range(1, m):
                ax = x + li - 1
                ax_leaf = al[ax]
                prev, cur = fd[x - 1], fd[x]
                td_row = td[ax]
                lab = la[ax]
                for y in range(1, n):
                    by = y + lj - 1
                    best = prev[y] + dele
                    alt = cur[y - 1] + ins
                    if alt < best:
                        best = alt
                    if ax_leaf == li and bl[by] == lj:
                        alt = prev[y - 1] + (0 if lab == lb[by] else costs.relabel)
                        if alt < best:
                            best = alt
                        cur[y] = best
                        td_row[by] = best
                    else:
                        alt = fd[ax_leaf - li][bl[by] - lj] + td_row[by]
                        cur[y] = best if best < alt else alt
    return td[-1][-1]


def nted_pair(pred: Node, gt: Node, costs: EditCosts = UNIT_COSTS) -> float:
    """``1 - TD / max(node counts)``; 1.0 iff the trees are identical."""
    return 1.0 - zss_distance(pred, gt, costs) / max(pred.size(), gt.size())


def corpus_nted(pairs: Iterable[tuple[Node, Node]]) -> float:
    scores = [nted_pair(p, g) for p, g in pairs]
    if not scores:
        raise ValueError("corpus_nted needs at least one pair")
    return sum(scores) / len(scores)
