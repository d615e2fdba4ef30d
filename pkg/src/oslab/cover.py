"""Finite presentations of universal covers of marked graphs.

The cover of a marked graph is an infinite simplicial tree presented lazily.
Vertices are pairs (u, v): u a group element (Word) indexing the spanning
tree copy, v a vertex of the graph.  The lift of edge e based at copy u is
(u, e); it joins (u, src e) to (u * w_e, dst e), where w_e is the marking
word (identity on tree edges).  F_n acts freely on addresses by left
multiplication; all distances here are combinatorial (every edge counts 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .graphs import MarkedGraph
from .words import Word, reduce_letters

Vertex = tuple[Word, int]
EdgeAddr = tuple[Word, int]


class CoverTree:
    def __init__(self, graph: MarkedGraph):
        self.graph = graph
        self.base: Vertex = (Word(), graph.basepoint)
        self._dist_cache: dict[tuple, int] = {}
        self._axis_cache: dict[tuple, tuple[int, Vertex]] = {}

    # -- addressing ---------------------------------------------------------

    def endpoints(self, e: EdgeAddr) -> tuple[Vertex, Vertex]:
        u, eid = e
        edge = self.graph.edge(eid)
        return (u, edge.src), (u * edge.word, edge.dst)

    def translate(self, g: Word, obj):
        u, x = obj
        return (g * u, x)

    def neighbors(self, v: Vertex) -> list[tuple[EdgeAddr, Vertex]]:
        u, x = v
        out = []
        for eid, sign in self.graph.darts_at[x]:
            edge = self.graph.edge(eid)
            if sign > 0:  # v is the src endpoint of lift (u, eid)
                out.append(((u, eid), (u * edge.word, edge.dst)))
            else:  # v is the dst endpoint of lift (u * w^-1, eid)
                u2 = u * edge.word.inverse()
                out.append(((u2, eid), (u2, edge.src)))
        return out

    def eword(self, g: Word) -> tuple[int, ...]:
        """Copy address of g in basis letters of the graph."""
        return self.graph.rewriter.rewrite(g)

    def element(self, eletters: Iterable[int]) -> Word:
        """Group element spelled by basis letters."""
        w = Word()
        for k in eletters:
            b = self.graph.edge_for_eletter(k).word
            w = w * (b if k > 0 else b.inverse())
        return w

    # -- geodesics ------------------------------------------------------;---

    def _segments(self, a: Vertex, b: Vertex):
        """Copy-by-copy description of the geodesic from a to b.

        Yields (copy element, from vertex, to vertex) for tree segments and
        the crossed non-tree lifts in between as ('cross', EdgeAddr, Vertex).
        """
        (u1, x1), (u2, x2) = a, b
        rel = u1.inverse() * u2
        w = self.eword(rel)
        cur_copy, cur_v = u1, x1
        for k in w:
            edge = self.graph.edge_for_eletter(k)
            if k > 0:
                yield ("tree", cur_copy, cur_v, edge.src)
                yield ("cross", (cur_copy, edge.id))
                cur_copy, cur_v = cur_copy * edge.word, edge.dst
            else:
                yield ("tree", cur_copy, cur_v, edge.dst)
                next_copy = cur_copy * edge.word.inverse()
                yield ("cross", (next_copy, edge.id))
                cur_copy, cur_v = next_copy, edge.src
        yield ("tree", cur_copy, cur_v, x2)

    def dist(self, a: Vertex, b: Vertex) -> int:
        key = (a[0].letters, a[1], b[0].letters, b[1])
        hit = self._dist_cache.get(key)
        if hit is not None:
            return hit
        rel = a[0].inverse() * b[0]
        w = self.eword(rel)
        total = len(w)
        cur = a[1]
        tree_dist = self.graph.tree_dist
        for k in w:
            edge = self.graph.edge_for_eletter(k)
            if k > 0:
                total += tree_dist(cur, edge.src)
                cur = edge.dst
            else:
                total += tree_dist(cur, edge.dst)
                cur = edge.src
        total += tree_dist(cur, b[1])
        self._dist_cache[key] = total
        return total

    def geodesic_vertices(self, a: Vertex, b: Vertex) -> list[Vertex]:
        out: list[Vertex] = [a]
        for seg in self._segments(a, b):
            if seg[0] == "tree":
                _, copy, vfrom, vto = seg
                cur = vfrom
                for eid, sign in self.graph.tree_path(vfrom, vto):
                    cur = self.graph.dart_endpoints((eid, sign))[1]
                    out.append((copy, cur))
            else:
                v1, v2 = self.endpoints(seg[1])
                out.append(v2 if out[-1] == v1 else v1)
        # crossing already appends its far endpoint; dedupe consecutive repeats
        dedup = [out[0]]
        for v in out[1:]:
            if v != dedup[-1]:
                dedup.append(v)
        return dedup

    def geodesic_edges(self, a: Vertex, b: Vertex) -> list[EdgeAddr]:
        out: list[EdgeAddr] = []
        for seg in self._segments(a, b):
            if seg[0] == "tree":
                _, copy, vfrom, vto = seg
                out.extend((copy, eid) for eid, _ in self.graph.tree_path(vfrom, vto))
            else:
                out.append(seg[1])
        return out

    def ball(self, radius: int) -> tuple[set, set]:
        """Explicit ball around the base vertex: oracle for the addressing."""
        seen = {self._vkey(self.base)}
        verts = [self.base]
        edges: set = set()
        frontier = [self.base]
        for _ in range(radius):
            nxt = []
            for v in frontier:
                for eaddr, w in self.neighbors(v):
                    edges.add((eaddr[0].letters, eaddr[1]))
                    if self._vkey(w) not in seen:
                        seen.add(self._vkey(w))
                        verts.append(w)
                        nxt.append(w)
            frontier = nxt
        return set(map(self._vkey, verts)), edges

    @staticmethod
    def _vkey(v: Vertex):
        return (v[0].letters, v[1])

    @staticmethod
    def _ekey(e: EdgeAddr):
        return (e[0].letters, e[1])

    # -- isometries -----------------------------------------------------------

    def axis(self, g: Word) -> tuple[int, Vertex]:
        """Translation length and a vertex on the axis of g (g non-identity)."""
        if g.is_identity:
            raise ValueError("identity element has no axis")
        hit = self._axis_cache.get(g.letters)
        if hit is not None:
            return hit
        x = self.base
        gx = self.translate(g, x)
        ggx = self.translate(g, gx)
        d1 = self.dist(x, gx)
        ell = self.dist(x, ggx) - d1
        if ell < 1:
            raise AssertionError(f"free action violated for {g!r}")
        t = (d1 - ell) // 2
        if (d1 - ell) % 2 != 0:
            raise AssertionError("parity violation locating the axis")
        p = self.geodesic_vertices(x, gx)[t]
        if self.dist(p, self.translate(g, p)) != ell:
            raise AssertionError("axis point verification failed")
        self._axis_cache[g.letters] = (ell, p)
        return ell, p

    def side_of_edge(self, v: Vertex, e: EdgeAddr) -> int:
        """0 or 1: the endpoint of e on whose side v lies."""
        p0, p1 = self.endpoints(e)
        d0, d1 = self.dist(v, p0), self.dist(v, p1)
        if abs(d0 - d1) != 1:
            raise AssertionError("edge endpoints must differ by one")
        return 0 if d0 < d1 else 1

    def forward_end_side(self, g: Word, e: EdgeAddr, max_steps: int = 1000) -> int:
        """Side of e (0 or 1) holding the attracting end of g, exactly.

        Walks the axis forward until strictly past the projection of e (both
        endpoint distances grow by exactly the translation length), where the
        side is locked.
        """
        ell, p = self.axis(g)
        p0, p1 = self.endpoints(e)
        cur = p
        prev = (self.dist(cur, p0), self.dist(cur, p1))
        streak = 0
        for _ in range(max_steps):
            cur = self.translate(g, cur)
            d = (self.dist(cur, p0), self.dist(cur, p1))
            if d[0] == prev[0] + ell and d[1] == prev[1] + ell:
                streak += 1
                if streak >= 2:
                    return 0 if d[0] < d[1] else 1
            else:
                streak = 0
            prev = d
        raise RuntimeError("axis walk did not pass the edge projection")

    def certify_forward_end(self, g: Word, e: EdgeAddr, side: int,
                            max_steps: int = 1000) -> bool:
        """Exact check: the attracting end of g lies beyond e on the given side."""
        return self.forward_end_side(g, e, max_steps) == side

    # -- end cylinders -------------------------------------------------------

    def cylinder_stems(self, e: EdgeAddr, side: int) -> list[tuple[int, ...]]:
        """Basis-letter stems whose cylinders partition the ends beyond e.

        An end of the cover corresponds to an infinite reduced word in basis
        letters (its copy itinerary).  The returned stems are reduced words
        such that the ends beyond (e, side) are exactly those extending one
        of the stems.
        """
        u, eid = e
        edge = self.graph.edge(eid)
        big_u = self.eword(u)

        def divergences(p: tuple[int, ...]) -> list[tuple[int, ...]]:
            out = []
            for j in range(len(p)):
                for letter in self._letters():
                    if letter == p[j]:
                        continue
                    if j > 0 and letter == -p[j - 1]:
                        continue
                    out.append(p[:j] + (letter,))
            return out

        if not edge.tree:
            k = self.graph.eletter_for_edge(eid)
            p = reduce_letters(big_u + (k,))
            child_prefix, child_side = (p, 1) if len(p) > len(big_u) else (big_u, 0)
            # child_side: endpoint index living in the deeper copy
            if side == child_side:
                return [child_prefix]
            return divergences(child_prefix)

        # tree edge: split the graph spanning tree at eid
        v_side = self._tree_side_sets(eid)[side == 1]
        stems = []
        for letter in self._letters():
            f = self.graph.edge_for_eletter(letter)
            exit_vertex = f.src if letter > 0 else f.dst
            if exit_vertex not in v_side:
                continue
            if big_u and letter == -big_u[-1]:
                continue  # the parent direction, handled below
            stems.append(big_u + (letter,))
        if big_u:
            t = big_u[-1]
            f = self.graph.edge_for_eletter(abs(t))
            v_par = f.dst if t > 0 else f.src
            if v_par in v_side:
                stems.extend(divergences(big_u))
        return stems

    def _letters(self) -> list[int]:
        n = self.graph.rank
        return [s * k for k in range(1, n + 1) for s in (1, -1)]

    @lru_cache(maxsize=None)
    def _tree_side_sets_cached(self, eid: int):
        return self._tree_side_sets_impl(eid)

    def _tree_side_sets(self, eid: int) -> tuple[frozenset, frozenset]:
        return self._tree_side_sets_cached(eid)

    def _tree_side_sets_impl(self, eid: int) -> tuple[frozenset, frozenset]:
        edge = self.graph.edge(eid)
        if not edge.tree:
            raise ValueError("not a tree edge")
        sides = []
        for start in (edge.src, edge.dst):
            comp = {start}
            queue = [start]
            while queue:
                v = queue.pop()
                for did, sign in self.graph.darts_at[v]:
                    d_edge = self.graph.edge(did)
                    if not d_edge.tree or did == eid:
                        continue
                    w = self.graph.dart_endpoints((did, sign))[1]
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            sides.append(frozenset(comp))
        return sides[0], sides[1]
