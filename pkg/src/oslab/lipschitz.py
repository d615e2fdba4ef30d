"""The asymmetric Lipschitz metric on outer space.

The stretch factor from G to H is computed exactly, as a Fraction, by
maximizing loop-length ratios over candidate loops of G (immersed cyclic
paths crossing every edge at most twice); the distance is its logarithm.
An exhaustive loop oracle is provided as the correctness gate for the
candidate restriction on small graphs.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .graphs import Dart, MarkedGraph, cyclic_reduce_path, reduce_path
from .words import BasisTuple, Word, canonical_cyclic_key, reduce_letters

_conj_cache: "weakref.WeakKeyDictionary[MarkedGraph, dict]" = weakref.WeakKeyDictionary()
_cand_cache: "weakref.WeakKeyDictionary[MarkedGraph, list]" = weakref.WeakKeyDictionary()


def conjugacy_length(g: MarkedGraph, w: Word) -> Fraction:
    """Length of the shortest loop of g freely homotopic to w."""
    if w.is_identity:
        raise ValueError("conjugacy_length of the identity is undefined")
    cache = _conj_cache.setdefault(g, {})
    key = w.cyclically_reduced().letters
    if key not in cache:
        loop = g.realize_loop(Word(key))
        cache[key] = g.path_length(cyclic_reduce_path(loop))
    return cache[key]


def _canon_cycle(path: Sequence[Dart]) -> tuple:
    seqs = []
    for p in (list(path), [(d[0], -d[1]) for d in reversed(path)]):
        for r in range(len(p)):
            seqs.append(tuple(p[r:] + p[:r]))
    return min(seqs)


def candidate_loops(g: MarkedGraph) -> list[tuple[tuple[Dart, ...], Word]]:
    """Immersed cyclic loops crossing each edge at most twice, deduplicated
    up to rotation and reversal, with their conjugacy words."""
    if g in _cand_cache:
        return _cand_cache[g]
    found: dict[tuple, tuple[Dart, ...]] = {}

    def walk(start: int, cur: int, path: list[Dart], used: dict[int, int]):
        if path and cur == start:
            cyc = cyclic_reduce_path(path)
            if len(cyc) == len(path):
                found.setdefault(_canon_cycle(path), tuple(path))
            # longer loops through start are explored further
        for d in g.darts_at[cur]:
            if used.get(d[0], 0) >= 2:
                continue
            if path and d[0] == path[-1][0] and d[1] == -path[-1][1]:
                continue
            used[d[0]] = used.get(d[0], 0) + 1
            path.append(d)
            walk(start, g.dart_endpoints(d)[1], path, used)
            path.pop()
            used[d[0]] -= 1

    for v in g.vertices:
        walk(v, v, [], {})
    out = [(p, g.path_word(p)) for p in found.values()]
    _cand_cache[g] = out
    return out


def stretch_factor(g: MarkedGraph, h: MarkedGraph,
                   with_witness: bool = False):
    """Exact stretch factor from g to h; optionally the witness loop word.

    Ties among witness loops are broken by the lexicographically smallest
    canonical conjugacy word.
    """
    best: Fraction | None = None
    witness: Word | None = None
    for path, w in candidate_loops(g):
        ratio = conjugacy_length(h, w) / g.path_length(path)
        if best is None or ratio > best:
            best, witness = ratio, w
        elif ratio == best and witness is not None:
            if canonical_cyclic_key(w) < canonical_cyclic_key(witness):
                witness = w
    if best is None:
        raise ValueError("graph has no candidate loops")
    if with_witness:
        return best, witness
    return best


def stretch_factor_exhaustive(g: MarkedGraph, h: MarkedGraph,
                              bound: int | None = None) -> Fraction:
    """Oracle: maximize over all cyclically reduced loops of combinatorial
    length <= bound (default 2 * number of edges of g)."""
    if bound is None:
        bound = 2 * len(g.edges)
    best: Fraction | None = None

    def walk(start: int, cur: int, path: list[Dart]):
        nonlocal best
        if path and cur == start:
            cyc = cyclic_reduce_path(path)
            if len(cyc) == len(path):
                w = g.path_word(path)
                ratio = conjugacy_length(h, w) / g.path_length(path)
                if best is None or ratio > best:
                    best = ratio
        if len(path) >= bound:
            return
        for d in g.darts_at[cur]:
            if path and d[0] == path[-1][0] and d[1] == -path[-1][1]:
                continue
            path.append(d)
            walk(start, g.dart_endpoints(d)[1], path)
            path.pop()

    for v in g.vertices:
        walk(v, v, [])
    if best is None:
        raise ValueError("graph has no loops")
    return best


def distance(g: MarkedGraph, h: MarkedGraph) -> float:
    """The asymmetric Lipschitz distance log stretch_factor(g, h)."""
    lam = stretch_factor(g, h)
    return math.log(lam.numerator) - math.log(lam.denominator)


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

@dataclass
class Morphism:
    """A map sending each edge of the source to a tight edge path of the
    target (empty path = collapsed edge), vertices landing on the target
    basepoint for the maps built here."""

    source: MarkedGraph
    target: MarkedGraph
    edge_paths: dict[int, tuple[Dart, ...]]
    lipschitz: Fraction
    associated_basis: BasisTuple | None = None

    def path_image(self, darts: Sequence[Dart]) -> list[Dart]:
        out: list[Dart] = []
        for eid, sign in darts:
            img = self.edge_paths[eid]
            if sign < 0:
                img = tuple((e, -s) for e, s in reversed(img))
            out.extend(img)
        return reduce_path(out)


def collapse_morphism(source: MarkedGraph, target: MarkedGraph) -> Morphism:
    """The difference of markings collapsing the source spanning tree:
    tree edges map to the target basepoint, every other edge to the based
    loop realizing its marking word."""
    paths: dict[int, tuple[Dart, ...]] = {}
    lip = Fraction(0)
    for e in source.edges:
        if e.tree:
            paths[e.id] = ()
        else:
            img = tuple(target.realize_loop(e.word))
            paths[e.id] = img
            lip = max(lip, target.path_length(img) / e.length)
    return Morphism(source, target, paths, lip)


def _conj_len(z_inv: tuple[int, ...], w: tuple[int, ...], z: tuple[int, ...]) -> int:
    return len(reduce_letters(z_inv + w + z))


def quasi_optimal_morphism(g: MarkedGraph, h: MarkedGraph) -> Morphism:
    """A vertex-to-vertex morphism between roses with Lipschitz constant at
    most twice the stretch factor.

    The conjugating element placing the images is found by steepest descent
    of max_i |z^-1 W_i z| over the Cayley tree of the target basis; the
    objective is convex along tree geodesics, so the local minimum found is
    global.
    """
    for graph in (g, h):
        if len(graph.vertices) != 1:
            raise ValueError("quasi-optimal morphisms are defined for roses")
        n = graph.rank
        if any(e.length != Fraction(1, n) for e in graph.edges):
            raise ValueError("rose petals must all have length 1/n")
    n = g.rank
    images = [h.rewriter.rewrite(e.word) for e in g.nontree_edges]

    def score(z: tuple[int, ...]) -> int:
        z_inv = tuple(-a for a in reversed(z))
        return max(_conj_len(z_inv, w, z) for w in images)

    z: tuple[int, ...] = ()
    cur = score(z)
    while True:
        best_z, best_s = None, cur
        for letter in sorted(range(-n, n + 1), key=lambda a: (abs(a), a < 0)):
            if letter == 0:
                continue
            cand = reduce_letters(z + (letter,))
            s = score(cand)
            if s < best_s:
                best_z, best_s = cand, s
        if best_z is None:
            break
        z, cur = best_z, best_s

    z_inv = tuple(-a for a in reversed(z))
    paths: dict[int, tuple[Dart, ...]] = {}
    y_words: list[Word] = []
    for e, w in zip(g.nontree_edges, images):
        conj = reduce_letters(z_inv + w + z)
        paths[e.id] = tuple((h.nontree_edges[abs(k) - 1].id, 1 if k > 0 else -1)
                            for k in conj)
        y = Word()
        for k in conj:
            b = h.nontree_edges[abs(k) - 1].word
            y = y * (b if k > 0 else b.inverse())
        y_words.append(y)
    lip = Fraction(max(len(p) for p in paths.values()))
    z_elt = Word()
    for k in z:
        b = h.nontree_edges[abs(k) - 1].word
        z_elt = z_elt * (b if k > 0 else b.inverse())
    prov = None
    if g.basis.provenance is not None:
        prov = BasisTuple(n, g.basis.elements, g.basis.provenance) \
            .conjugated_by(z_elt.inverse()).provenance
    basis = BasisTuple(n, tuple(y_words), prov)
    return Morphism(g, h, paths, lip, associated_basis=basis)


# ---------------------------------------------------------------------------
# quasi-symmetry experiment
# ---------------------------------------------------------------------------

@dataclass
class QuasiSymmetryReport:
    epsilon: Fraction
    pair_count: int
    fitted_c: float
    max_d_forward: float
    max_d_backward: float
    rows: list[dict] = field(default_factory=list)


def quasi_symmetry_report(pairs: Sequence[tuple[MarkedGraph, MarkedGraph]],
                          eps: Fraction) -> QuasiSymmetryReport:
    """Fit the smallest C with d(Y,X) <= C d(X,Y) over a sample of thick pairs."""
    if not pairs:
        raise ValueError("empty sample")
    fitted = 1.0
    rows = []
    max_f = max_b = 0.0
    for x, y in pairs:
        if x.systole() < eps or y.systole() < eps:
            raise ValueError("sample contains a thin point")
        d_xy, d_yx = distance(x, y), distance(y, x)
        rows.append({"d_xy": d_xy, "d_yx": d_yx})
        max_f, max_b = max(max_f, d_xy), max(max_b, d_yx)
        if d_xy > 0:
            fitted = max(fitted, d_yx / d_xy)
    return QuasiSymmetryReport(Fraction(eps), len(pairs), fitted, max_f, max_b, rows)
