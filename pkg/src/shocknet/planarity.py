"""Left-right planarity test (Brandes' formulation of de Fraysseix-Rosenstiehl).

Linear time, testing only: no embedding is constructed. The algorithm runs
two depth-first searches. The first orients the graph into a DFS tree plus
back edges and records lowpoints; the second processes the outgoing edges of
every vertex in order of nesting depth while maintaining a stack of conflict
pairs of intervals of return edges. The graph is planar iff the two sides of
every conflict pair can be kept consistent.
"""

from __future__ import annotations

import sys
from collections import defaultdict
from typing import Iterable

from .errors import GraphError


class _Interval:
    __slots__ = ("low", "high")

    def __init__(self, low=None, high=None):
        self.low = low
        self.high = high

    def empty(self) -> bool:
        return self.low is None and self.high is None

    def copy(self) -> "_Interval":
        return _Interval(self.low, self.high)

    def conflicting(self, b, lowpt) -> bool:
        return not self.empty() and lowpt[self.high] > lowpt[b]


class _ConflictPair:
    __slots__ = ("left", "right")

    def __init__(self, left=None, right=None):
        self.left = left if left is not None else _Interval()
        self.right = right if right is not None else _Interval()

    def swap(self) -> None:
        self.left, self.right = self.right, self.left

    def lowest(self, lowpt):
        if self.left.empty():
            return lowpt[self.right.low]
        if self.right.empty():
            return lowpt[self.left.low]
        return min(lowpt[self.left.low], lowpt[self.right.low])


def _validate(edges, n: int) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise GraphError(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        out.append((u, v))
    return out


class _LRState:
    def __init__(self, n, edges):
        self.adj = defaultdict(list)
        for u, v in edges:
            self.adj[u].append(v)
            self.adj[v].append(u)
        self.n = n
        self.height = [None] * n
        self.parent_edge = [None] * n
        self.oriented = set()
        self.out_edges = defaultdict(list)
        self.lowpt = {}
        self.lowpt2 = {}
        self.nesting_depth = {}
        self.ref = defaultdict(lambda: None)
        self.lowpt_edge = {}
        self.stack_bottom = {}
        self.S: list[_ConflictPair] = []

    def top(self):
        return self.S[-1] if self.S else None

    def orient(self, v) -> None:
        e = self.parent_edge[v]
        for w in self.adj[v]:
            if frozenset((v, w)) in self.oriented:
                continue
            self.oriented.add(frozenset((v, w)))
            vw = (v, w)
            self.out_edges[v].append(vw)
            self.lowpt[vw] = self.height[v]
            self.lowpt2[vw] = self.height[v]
            if self.height[w] is None:
                self.parent_edge[w] = vw
                self.height[w] = self.height[v] + 1
                self.orient(w)
            else:
                self.lowpt[vw] = self.height[w]
            self.nesting_depth[vw] = 2 * self.lowpt[vw]
            if self.lowpt2[vw] < self.height[v]:
                self.nesting_depth[vw] += 1
            if e is not None:
                if self.lowpt[vw] < self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt[e], self.lowpt2[vw])
                    self.lowpt[e] = self.lowpt[vw]
                elif self.lowpt[vw] > self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt[vw])
                else:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt2[vw])

    def test(self, v) -> bool:
        e = self.parent_edge[v]
        ordered = sorted(self.out_edges[v], key=lambda x: self.nesting_depth[x])
        for idx, ei in enumerate(ordered):
            w = ei[1]
            self.stack_bottom[ei] = self.top()
            if ei == self.parent_edge[w]:
                if not self.test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                self.S.append(_ConflictPair(right=_Interval(ei, ei)))
            if self.lowpt[ei] < self.height[v]:
                if idx == 0:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self.add_constraints(ei, e):
                    return False
        if e is not None:
            self.remove_back_edges(e)
        return True

    def add_constraints(self, ei, e) -> bool:
        lowpt = self.lowpt
        P = _ConflictPair()
        # merge return edges of ei into P.right
        while True:
            Q = self.S.pop()
            if not Q.left.empty():
                Q.swap()
            if not Q.left.empty():
                return False
            if lowpt[Q.right.low] > lowpt[e]:
                if P.right.empty():
                    P.right = Q.right.copy()
                else:
                    self.ref[P.right.low] = Q.right.high
                P.right.low = Q.right.low
            else:
                self.ref[Q.right.low] = self.lowpt_edge[e]
            if self.top() is self.stack_bottom[ei]:
                break
        # merge conflicting return edges of earlier siblings into P.left
        while self.S and (
            self.top().left.conflicting(ei, lowpt) or self.top().right.conflicting(ei, lowpt)
        ):
            Q = self.S.pop()
            if Q.right.conflicting(ei, lowpt):
                Q.swap()
            if Q.right.conflicting(ei, lowpt):
                return False
            self.ref[P.right.low] = Q.right.high
            if Q.right.low is not None:
                P.right.low = Q.right.low
            if P.left.empty():
                P.left.high = Q.left.high
            else:
                self.ref[P.left.low] = Q.left.high
            P.left.low = Q.left.low
        if not (P.left.empty() and P.right.empty()):
            self.S.append(P)
        return True

    def remove_back_edges(self, e) -> None:
        u = e[0]
        lowpt = self.lowpt
        while self.S and self.top().lowest(lowpt) == self.height[u]:
            self.S.pop()
        if self.S:
            P = self.S.pop()
            while P.left.high is not None and P.left.high[1] == u:
                P.left.high = self.ref[P.left.high]
            if P.left.high is None and P.left.low is not None:
                self.ref[P.left.low] = P.right.low
                P.left.low = None
            while P.right.high is not None and P.right.high[1] == u:
                P.right.high = self.ref[P.right.high]
            if P.right.high is None and P.right.low is not None:
                self.ref[P.right.low] = P.left.low
                P.right.low = None
            self.S.append(P)
        if lowpt[e] < self.height[u] and self.S:
            hl = self.top().left.high
            hr = self.top().right.high
            if hl is not None and (hr is None or lowpt[hl] > lowpt[hr]):
                self.ref[e] = hl
            else:
                self.ref[e] = hr


def is_planar(edges: Iterable[tuple[int, int]], n: int) -> bool:
    """Return True iff the simple undirected graph on nodes ``0..n-1`` is planar.

    Raises
    ------
    GraphError
        On self-loops, duplicate edges (in either orientation) or node
        indices outside ``0..n-1``.
    """
    edges = _validate(edges, n)
    if n <= 4:
        return True
    if len(edges) > 3 * n - 6:
        return False
    state = _LRState(n, edges)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 1000))
    try:
        roots = []
        for v in range(n):
            if state.height[v] is None:
                state.height[v] = 0
                roots.append(v)
                state.orient(v)
        for root in roots:
            if not state.test(root):
                return False
        return True
    finally:
        sys.setrecursionlimit(limit)
