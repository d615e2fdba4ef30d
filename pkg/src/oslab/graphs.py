"""Marked metric graphs: points of rank-n outer space.

A marked graph is a finite graph with positive rational edge lengths, a
chosen spanning tree and a basepoint.  Every edge carries a word of F_n:
identity on spanning-tree edges, and on the remaining edges the words of the
loops (basepoint -> tree path -> edge -> tree path -> basepoint), which must
form a basis of F_n.  Edge paths are lists of darts (edge_id, +1/-1), +1
meaning src -> dst.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .words import (
    Automorphism,
    BasisRewriter,
    BasisTuple,
    NotABasisError,
    Word,
    random_elementary,
)

Dart = tuple[int, int]  # (edge id, +1 forward / -1 backward)


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int
    length: Fraction
    tree: bool
    word: Word


def _parse_length(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    if isinstance(x, Fraction):
        return x
    raise TypeError(f"bad length {x!r}")


def reduce_path(darts: Sequence[Dart]) -> list[Dart]:
    """Free reduction of an edge path (cancel dart followed by its reverse)."""
    out: list[Dart] = []
    for d in darts:
        if out and out[-1][0] == d[0] and out[-1][1] == -d[1]:
            out.pop()
        else:
            out.append(d)
    return out


def cyclic_reduce_path(darts: Sequence[Dart]) -> list[Dart]:
    """Reduce an edge loop as a cyclic path."""
    out = reduce_path(darts)
    while len(out) >= 2 and out[0][0] == out[-1][0] and out[0][1] == -out[-1][1]:
        out = out[1:-1]
    return out


class MarkedGraph:
    """Immutable marked metric graph."""

    def __init__(self, rank: int, vertices: Sequence[int], edges: Sequence[Edge],
                 basepoint: int):
        self.rank = rank
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.basepoint = basepoint
        self._edge_by_id = {e.id: e for e in self.edges}
        if len(self._edge_by_id) != len(self.edges):
            raise ValueError("duplicate edge ids")

    # -- basic structure ---------------------------------------------------

    def edge(self, eid: int) -> Edge:
        return self._edge_by_id[eid]

    def dart_endpoints(self, d: Dart) -> tuple[int, int]:
        e = self.edge(d[0])
        return (e.src, e.dst) if d[1] > 0 else (e.dst, e.src)

    def dart_word(self, d: Dart) -> Word:
        e = self.edge(d[0])
        return e.word if d[1] > 0 else e.word.inverse()

    @cached_property
    def darts_at(self) -> dict[int, list[Dart]]:
        out: dict[int, list[Dart]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append((e.id, 1))
            out[e.dst].append((e.id, -1))
        return out

    def valence(self, v: int) -> int:
        return len(self.darts_at[v])

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def total_length(self) -> Fraction:
        return sum((e.length for e in self.edges), Fraction(0))

    @cached_property
    def nontree_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if not e.tree)

    @cached_property
    def basis(self) -> BasisTuple:
        return BasisTuple(self.rank, tuple(e.word for e in self.nontree_edges))

    @cached_property
    def rewriter(self) -> BasisRewriter:
        return self.basis.rewriter()

    def eletter_for_edge(self, eid: int) -> int:
        """Basis letter (1-based) of a non-tree edge."""
        for k, e in enumerate(self.nontree_edges, start=1):
            if e.id == eid:
                return k
        raise KeyError(f"edge {eid} is not a non-tree edge")

    def edge_for_eletter(self, k: int) -> Edge:
        return self.nontree_edges[abs(k) - 1]

    # -- spanning tree paths -----------------------------------------------

    @cached_property
    def _tree_parent(self) -> dict[int, Dart | None]:
        """BFS tree rooted at the basepoint, using tree edges only."""
        parent: dict[int, Dart | None] = {self.basepoint: None}
        queue = [self.basepoint]
        while queue:
            v = queue.pop(0)
            for d in self.darts_at[v]:
                e = self.edge(d[0])
                if not e.tree:
                    continue
                u = self.dart_endpoints(d)[1]
                if u not in parent:
                    parent[u] = d  # dart leading from v to u
                    queue.append(u)
        return parent

    @cached_property
    def _tree_paths(self) -> dict[tuple[int, int], tuple[Dart, ...]]:
        parent = self._tree_parent
        if set(parent) != set(self.vertices):
            raise ValueError("spanning tree does not cover the graph")

        def to_root(x: int) -> list[Dart]:
            path = []
            while parent[x] is not None:
                d = parent[x]
                path.append((d[0], -d[1]))  # from x toward the root
                x = self.dart_endpoints((d[0], -d[1]))[1]
            return path

        roots = {v: to_root(v) for v in self.vertices}
        out = {}
        for u in self.vertices:
            for v in self.vertices:
                up, down = roots[u], roots[v]
                out[(u, v)] = tuple(reduce_path(
                    up + [(d[0], -d[1]) for d in reversed(down)]))
        return out

    def tree_path(self, u: int, v: int) -> list[Dart]:
        """The reduced path from u to v inside the spanning tree."""
        return list(self._tree_paths[(u, v)])

    def tree_dist(self, u: int, v: int) -> int:
        return len(self._tree_paths[(u, v)])

    def path_length(self, darts: Iterable[Dart]) -> Fraction:
        return sum((self.edge(d[0]).length for d in darts), Fraction(0))

    def path_word(self, darts: Iterable[Dart]) -> Word:
        w = Word()
        for d in darts:
            w = w * self.dart_word(d)
        return w

    def realize_loop(self, w: Word) -> list[Dart]:
        """A based edge loop at the basepoint whose word is w (reduced path)."""
        expr = self.rewriter.rewrite(w)
        darts: list[Dart] = []
        cur = self.basepoint
        for k in expr:
            e = self.edge_for_eletter(k)
            if k > 0:
                darts += self.tree_path(cur, e.src)
                darts.append((e.id, 1))
                cur = e.dst
            else:
                darts += self.tree_path(cur, e.dst)
                darts.append((e.id, -1))
                cur = e.src
        darts += self.tree_path(cur, self.basepoint)
        return reduce_path(darts)

    # -- the contracts -----------------------------------------------------

    def validate(self) -> list[str]:
        """Report-style invariant check; empty list means a valid point."""
        problems: list[str] = []
        for v in self.vertices:
            if self.valence(v) < 3:
                problems.append(f"vertex {v} has valence {self.valence(v)} < 3")
        if self.betti != self.rank:
            problems.append(f"first Betti number {self.betti} != rank {self.rank}")
        for e in self.edges:
            if e.length <= 0:
                problems.append(f"edge {e.id} has non-positive length")
            if e.tree and not e.word.is_identity:
                problems.append(f"tree edge {e.id} carries a non-identity word")
            if e.tree and e.src == e.dst:
                problems.append(f"tree edge {e.id} is a loop")
        if self.total_length != 1:
            problems.append(f"total length {self.total_length} != 1")
        tree_edges = [e for e in self.edges if e.tree]
        if len(tree_edges) != len(self.vertices) - 1:
            problems.append("spanning tree edge count is wrong")
        else:
            try:
                covered = set(self._tree_parent)
            except Exception:
                covered = set()
            if covered != set(self.vertices):
                problems.append("tree edges do not span the graph")
        if len(self.nontree_edges) == self.rank:
            try:
                self.rewriter
            except NotABasisError:
                problems.append("marking words do not form a basis")
        else:
            problems.append("wrong number of non-tree edges")
        return problems

    def normalized(self) -> "MarkedGraph":
        """Scale all lengths by one factor so that the total is 1."""
        total = self.total_length
        if total <= 0:
            raise ValueError("cannot normalize: non-positive total length")
        if total == 1:
            return self
        edges = tuple(replace(e, length=e.length / total) for e in self.edges)
        return MarkedGraph(self.rank, self.vertices, edges, self.basepoint)

    def embedded_cycles(self) -> list[list[Dart]]:
        """All embedded circles (no repeated vertex), up to rotation/reversal."""
        cycles: dict[tuple, list[Dart]] = {}

        def canon(path: list[Dart]) -> tuple:
            seqs = []
            for p in (path, [(d[0], -d[1]) for d in reversed(path)]):
                for r in range(len(p)):
                    seqs.append(tuple(p[r:] + p[:r]))
            return min(seqs)

        for e in self.edges:
            if e.src == e.dst:
                cycles.setdefault(canon([(e.id, 1)]), [(e.id, 1)])

        def extend(start: int, cur: int, path: list[Dart], visited: set[int]):
            for d in self.darts_at[cur]:
                e = self.edge(d[0])
                if e.src == e.dst:
                    continue
                if path and d[0] == path[-1][0]:
                    continue
                nxt = self.dart_endpoints(d)[1]
                if nxt == start and len(path) >= 1:
                    cyc = path + [d]
                    if len(cyc) >= 2:
                        cycles.setdefault(canon(cyc), cyc)
                    continue
                if nxt in visited or nxt < start:
                    continue
                extend(start, nxt, path + [d], visited | {nxt})

        for v in self.vertices:
            extend(v, v, [], {v})
        return list(cycles.values())

    def systole(self) -> Fraction:
        """Length of the shortest immersed loop (= shortest embedded circle)."""
        cycles = self.embedded_cycles()
        if not cycles:
            raise ValueError("graph has no cycles")
        return min(self.path_length(c) for c in cycles)

    def act(self, phi: Automorphism) -> "MarkedGraph":
        """Precompose the marking: every marking word is pushed through phi."""
        edges = tuple(e if e.tree else replace(e, word=phi.apply(e.word))
                      for e in self.edges)
        return MarkedGraph(self.rank, self.vertices, edges, self.basepoint)

    def collapse_to_rose(self) -> tuple["MarkedGraph", dict[int, int]]:
        """Collapse the spanning tree; petals keep the non-tree loop words.

        Returns the rose (petals of length 1/n) and the map
        petal edge id -> original edge id.
        """
        n = self.rank
        words = [e.word for e in self.nontree_edges]
        rose_g = rose(words, [Fraction(1, n)] * n)
        corr = {k: e.id for k, e in enumerate(self.nontree_edges)}
        return rose_g, corr

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "src": e.src, "dst": e.dst,
                 "length": str(e.length), "tree": e.tree,
                 "word": e.word.to_json()}
                for e in self.edges
            ],
            "basepoint": self.basepoint,
        }

    @staticmethod
    def from_json(data: dict) -> "MarkedGraph":
        edges = tuple(
            Edge(d["id"], d["src"], d["dst"], _parse_length(d["length"]),
                 bool(d["tree"]), Word.from_json(d["word"]))
            for d in data["edges"]
        )
        return MarkedGraph(int(data["rank"]), [int(v) for v in data["vertices"]],
                           edges, int(data["basepoint"]))

    def __repr__(self) -> str:
        return (f"MarkedGraph(rank={self.rank}, V={len(self.vertices)}, "
                f"E={len(self.edges)})")


# ---------------------------------------------------------------------------
# constructors and instance generation
# ---------------------------------------------------------------------------

def rose(words: Sequence[Word], lengths: Sequence[Fraction] | None = None,
         ) -> MarkedGraph:
    """One-vertex graph whose petals carry the given words."""
    n = len(words)
    if lengths is None:
        lengths = [Fraction(1, n)] * n
    edges = tuple(Edge(i, 0, 0, Fraction(lengths[i]), False, words[i])
                  for i in range(n))
    return MarkedGraph(n, [0], edges, 0)


def standard_rose(n: int) -> MarkedGraph:
    return rose([Word.of(i) for i in range(1, n + 1)])


def maximal_graph(n: int, words: Sequence[Word] | None = None,
                  lengths: Sequence[Fraction] | None = None) -> MarkedGraph:
    """A trivalent marked graph (dual of a maximal sphere system).

    Chain of 2n-2 vertices with loops at both ends and parallel rungs in the
    middle; 3n-3 edges.  Non-tree edge k carries words[k] (default standard).
    """
    if n < 2:
        raise ValueError("rank must be >= 2")
    if words is None:
        words = [Word.of(i) for i in range(1, n + 1)]
    nv = 2 * n - 2
    edges: list[Edge] = []
    eid = 0
    for i in range(nv - 1):  # path = spanning tree
        edges.append(Edge(eid, i, i + 1, Fraction(1), True, Word()))
        eid += 1
    nontree: list[tuple[int, int, Word]] = [(0, 0, words[0])]
    for i in range(1, n - 1):
        nontree.append((2 * i - 1, 2 * i, words[i]))
    nontree.append((nv - 1, nv - 1, words[n - 1]))
    for src, dst, w in nontree:
        edges.append(Edge(eid, src, dst, Fraction(1), False, w))
        eid += 1
    if lengths is not None:
        edges = [replace(e, length=Fraction(lengths[k])) for k, e in enumerate(edges)]
    g = MarkedGraph(n, range(nv), edges, 0)
    return g.normalized()


def random_automorphism(rng: random.Random, n: int, move_count: int,
                        max_word_len: int = 24) -> Automorphism:
    """Random chain of elementary moves, resampled while any image is too long."""
    while True:
        moves = [random_elementary(rng, n) for _ in range(move_count)]
        phi = Automorphism.from_moves(n, moves)
        if max(len(w) for w in phi.images) <= max_word_len:
            return phi


def random_lengths(rng: random.Random, count: int, eps: Fraction) -> list[Fraction]:
    """Normalized positive rational lengths, each >= eps after normalization."""
    eps = Fraction(eps)
    while True:
        raw = [Fraction(rng.randrange(1, 1000), 1000) for _ in range(count)]
        total = sum(raw)
        if total == 0:
            continue
        out = [x / total for x in raw]
        if min(out) >= eps:
            return out


def random_point(rng: random.Random, n: int, move_count: int,
                 eps: Fraction = Fraction(1, 50), maximal: bool = False,
                 randomize_lengths: bool = True) -> MarkedGraph:
    """Random thick point: a marked rose (or trivalent blow-up) moved by a
    random automorphism, with randomized normalized lengths."""
    phi = random_automorphism(rng, n, move_count)
    if maximal:
        g = maximal_graph(n, words=list(phi.images))
        if randomize_lengths:
            g = maximal_graph(n, words=list(phi.images),
                              lengths=random_lengths(rng, 3 * n - 3, eps))
        while g.systole() < eps:
            g = maximal_graph(n, words=list(phi.images),
                              lengths=random_lengths(rng, 3 * n - 3, eps))
        return g
    lengths = (random_lengths(rng, n, eps) if randomize_lengths
               else [Fraction(1, n)] * n)
    return rose(list(phi.images), lengths)


def random_instance(seed: int, n: int, move_count: int,
                    eps: Fraction = Fraction(1, 50),
                    maximal_a: bool = True,
                    randomize_lengths: bool = True) -> tuple[MarkedGraph, MarkedGraph]:
    """Deterministic instance pair (A, B) for experiments.

    A is the fixed system: a trivalent graph with standard marking (or the
    standard rose), equal edge lengths.  B is a marked rose obtained from the
    standard rose by move_count random elementary automorphisms, with
    randomized lengths, systole >= eps.
    """
    rng = random.Random(seed)
    a = maximal_graph(n) if maximal_a else standard_rose(n)
    b = random_point(rng, n, move_count, eps=eps,
                     randomize_lengths=randomize_lengths)
    return a, b
