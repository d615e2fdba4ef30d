"""Core intersection numbers of pairs of free actions on trees.

For two marked graphs the covers T1, T2 carry free F_n-actions.  A quadrant
(a pair of edge-sides, one in each tree) is heavy when some element's
attracting end lies beyond both sides; an unordered edge pair is a core cell
when all four of its quadrants are heavy.  The intersection number is the
number of cell orbits, computed slice by slice: candidates for the slice
over an edge e of the first graph are confined to a finite bounding subtree
of T2 built from a homotopy inverse of the difference of markings.

Heaviness is semi-decided: a budgeted certificate search whose positive
verdicts are verified exactly by axis-ray geometry, with the budget growing
monotonically in the letter bound L.  Negative verdicts are presumed and are
gated by recomputation at doubled bounds and by cross-direction symmetry.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .cover import CoverTree, EdgeAddr, Vertex
from .graphs import Dart, MarkedGraph, reduce_path
from .lipschitz import Morphism, collapse_morphism, distance
from .words import Word, reduce_letters


@dataclass(frozen=True)
class Heavy:
    certificate: Word


@dataclass(frozen=True)
class PresumedLight:
    bound: int


@dataclass(frozen=True)
class Quadrant:
    e1: EdgeAddr
    side1: int
    e2: EdgeAddr
    side2: int


def default_cert_bound(x: MarkedGraph, y: MarkedGraph) -> int:
    longest = max(len(e.word) for e in x.edges + y.edges)
    return max(8, 4 * longest)


class PairSearch:
    """Shared certificate-search state for one ordered tree pair (T1, T2)."""

    def __init__(self, t1: CoverTree, t2: CoverTree):
        self.t1, self.t2 = t1, t2
        self.hits: list[Word] = []
        self._side_cache: dict[tuple, int] = {}
        self._guide_cache: dict[tuple, tuple] = {}
        self._stem_cache: dict[tuple, list] = {}
        self._letter_elts = {
            id(t): {k: t.element((k,)) for k in t._letters()}
            for t in (t1, t2)
        }
        self._seeds = self._build_seeds()
        self.verify_calls = 0

    def _build_seeds(self) -> list[Word]:
        gens: list[Word] = []
        for g in (self.t1.graph, self.t2.graph):
            gens.extend(e.word for e in g.nontree_edges)
        seeds: list[Word] = []
        seen = set()
        for w in gens:
            for cand in (w, w.inverse()):
                if cand.letters not in seen and not cand.is_identity:
                    seen.add(cand.letters)
                    seeds.append(cand)
        singles = list(seeds)
        for a, b in itertools.product(singles, repeat=2):
            if len(seeds) >= 40:
                break
            cand = (a * b).cyclically_reduced()
            if not cand.is_identity and cand.letters not in seen:
                seen.add(cand.letters)
                seeds.append(cand)
        return seeds

    def side(self, tree_idx: int, g: Word, e: EdgeAddr) -> int:
        tree = self.t1 if tree_idx == 1 else self.t2
        key = (tree_idx, g.letters, e[0].letters, e[1])
        hit = self._side_cache.get(key)
        if hit is None:
            self.verify_calls += 1
            hit = tree.forward_end_side(g, e)
            self._side_cache[key] = hit
        return hit

    def signature(self, g: Word, e1: EdgeAddr, e2: EdgeAddr) -> tuple[int, int]:
        return self.side(1, g, e1), self.side(2, g, e2)

    def _record_hit(self, g: Word) -> None:
        if g in self.hits:
            self.hits.remove(g)
        self.hits.insert(0, g)
        del self.hits[60:]

    # -- the cell decision -------------------------------------------------

    def check_cell(self, e1: EdgeAddr, e2: EdgeAddr, bound: int,
                   ) -> dict[tuple[int, int], Heavy | PresumedLight]:
        """Decide heaviness of all four quadrants of the cell e1 x e2."""
        found: dict[tuple[int, int], Heavy | PresumedLight] = {}

        def note(g: Word) -> bool:
            sig = self.signature(g, e1, e2)
            if sig not in found:
                found[sig] = Heavy(g)
                self._record_hit(g)
            return len(found) == 4

        for g in list(self.hits[:30]):
            if note(g):
                break
        if len(found) < 4:
            for g in self._seeds:
                if note(g):
                    break
        if len(found) < 4:
            for sig in [(0, 0), (0, 1), (1, 0), (1, 1)]:
                if sig in found:
                    continue
                g = self._directed_search(e1, sig[0], e2, sig[1], bound, note)
        for sig in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            found.setdefault(sig, PresumedLight(bound))
        return found

    def _directed_search(self, e1: EdgeAddr, s1: int, e2: EdgeAddr, s2: int,
                         bound: int, note) -> None:
        """Grow ends inside one cylinder, steering toward the other condition."""
        budget = [20 + 2 * bound]
        for (ta, ea, sa, tb, eb, sb, b_idx) in (
                (self.t2, e2, s2, self.t1, e1, s1, 1),
                (self.t1, e1, s1, self.t2, e2, s2, 2)):
            if self._grow(ta, ea, sa, tb, eb, sb, b_idx, bound, budget, note):
                return

    def _grow(self, ta: CoverTree, ea, sa, tb: CoverTree, eb, sb, b_idx: int,
              bound: int, budget: list[int], note) -> bool:
        import heapq

        letters_a = ta._letters()
        letter_elts = self._letter_elts[id(ta)]
        pb0, pb1 = tb.endpoints(eb)
        eb_key = (b_idx, eb[0].letters, eb[1])
        guide_cache = self._guide_cache
        base_b = tb.graph.basepoint

        def guide(z: Word, sb=sb) -> tuple:
            key = eb_key + (z.letters,)
            hit = guide_cache.get(key)
            if hit is None:
                v = (z, base_b)
                hit = (tb.dist(v, pb0), tb.dist(v, pb1))
                guide_cache[key] = hit
            d0, d1 = hit
            side = 0 if d0 < d1 else 1
            depth = min(d0, d1)
            return (0, -depth) if side == sb else (1, depth)

        stem_key = (id(ta), ea[0].letters, ea[1], sa)
        stems = self._stem_cache.get(stem_key)
        if stems is None:
            stems = ta.cylinder_stems(ea, sa)
            self._stem_cache[stem_key] = stems
        heap: list = []
        counter = itertools.count()
        for stem in stems:
            z = ta.element(stem)
            heapq.heappush(heap, (guide(z) + (len(stem),), next(counter), stem, z))
        max_depth = min(bound, 40)
        expansions = 6 * bound
        while heap and budget[0] > 0 and expansions > 0:
            prio, _, stem, z = heapq.heappop(heap)
            expansions -= 1
            matched = prio[0] == 0
            if matched or len(stem) <= 2:
                tried = 0
                for closer in letters_a:
                    if stem and closer == -stem[-1]:
                        continue
                    g = z * letter_elts[closer] * z.inverse()
                    if g.is_identity:
                        continue
                    budget[0] -= 1
                    tried += 1
                    if note(g):
                        return True
                    if budget[0] <= 0 or tried >= 4:
                        break
            if len(stem) >= max_depth:
                continue
            for letter in letters_a:
                if stem and letter == -stem[-1]:
                    continue
                child = stem + (letter,)
                zc = z * letter_elts[letter]
                heapq.heappush(heap, (guide(zc) + (len(child),),
                                      next(counter), child, zc))
        return False


def is_heavy(t1: CoverTree, t2: CoverTree, q: Quadrant, bound: int,
             search: PairSearch | None = None) -> Heavy | PresumedLight:
    """Budgeted certificate search for one quadrant (exact when Heavy)."""
    search = search or PairSearch(t1, t2)
    cell = search.check_cell(q.e1, q.e2, bound)
    return cell[(q.side1, q.side2)]


def brute_force_heavy(t1: CoverTree, t2: CoverTree, q: Quadrant,
                      max_len: int) -> Heavy | PresumedLight:
    """Test oracle: enumerate all cyclically reduced words up to max_len."""
    n = t1.graph.rank
    letters = [s * k for k in range(1, n + 1) for s in (1, -1)]

    def words(prefix: tuple[int, ...]):
        if prefix:
            yield prefix
        if len(prefix) >= max_len:
            return
        for a in letters:
            if prefix and a == -prefix[-1]:
                continue
            yield from words(prefix + (a,))

    for ls in words(()):
        if ls[0] == -ls[-1]:
            continue
        g = Word(ls)
        if t1.forward_end_side(g, q.e1) == q.side1 and \
                t2.forward_end_side(g, q.e2) == q.side2:
            return Heavy(g)
    return PresumedLight(max_len)


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------

@dataclass
class SliceRecord:
    edge_id: int                      # edge orbit of the first graph
    anchor: EdgeAddr                  # chosen lift of that edge in T1
    bounding_tree: list[EdgeAddr]     # logged T_e candidates (in T2)
    members: list[EdgeAddr]           # cells: lifts of second-graph edges
    statuses: dict                    # candidate -> quadrant signature map
    presumed: bool                    # some exclusion rests on a presumed verdict
    connected: bool                   # diagnostic: members form a subtree


def alpha_path(g: MarkedGraph, eid: int, orientation: int) -> list[Dart]:
    """A tight based path whose final dart crosses edge eid with the given
    orientation (the path then stops at the midpoint)."""
    e = g.edge(eid)
    entry = e.src if orientation > 0 else e.dst
    final: Dart = (eid, orientation)
    p = g.tree_path(g.basepoint, entry)
    if not (p and p[-1][0] == eid):
        return p + [final]
    # the tree geodesic arrives through eid itself: reroute via a petal
    for f in g.nontree_edges:
        for sign in (1, -1):
            start, stop = (f.src, f.dst) if sign > 0 else (f.dst, f.src)
            cand = reduce_path(g.tree_path(g.basepoint, start) + [(f.id, sign)]
                               + g.tree_path(stop, entry) + [final])
            if cand and cand[-1] == final and (len(cand) < 2 or
                                               cand[-2][0] != eid):
                return cand[:-1] + [final]
    raise AssertionError(f"no tight approach to edge {eid}")


def slice_candidates(g1: MarkedGraph, t2: CoverTree, sigma: Morphism,
                     eid: int) -> tuple[EdgeAddr, list[EdgeAddr]]:
    """Anchor lift of edge eid and the bounding-tree candidate edges in T2.

    sigma maps the second graph to the first and realizes the inverse
    difference of markings; preimages of the midpoint of eid pull back to
    marked lifts in T2 whose spanned subtree bounds the slice.
    """
    g2 = sigma.source
    marked: list[EdgeAddr] = []
    anchor = None
    orientations = []
    for o in (1, -1):
        a = alpha_path(g1, eid, o)
        prefix_word = g1.path_word(a[:-1])
        lift = ((prefix_word, eid) if o > 0
                else (prefix_word * g1.edge(eid).word.inverse(), eid))
        orientations.append((o, a, prefix_word, lift))
    anchor = orientations[0][3]
    for o, a, prefix_word, lift in orientations:
        shift = anchor[0] * lift[0].inverse() if lift != anchor else Word()
        for f in g2.edges:
            img = sigma.edge_paths[f.id]
            for idx, (xid, s) in enumerate(img):
                if xid != eid:
                    continue
                img_prefix_word = g1.path_word(img[:idx])
                lam = g1.path_word(a[:-1])
                if s != o:
                    w_mid = g1.edge(eid).word
                    lam = lam * (w_mid if o > 0 else w_mid.inverse())
                lam = lam * img_prefix_word.inverse()
                marked.append(((shift * lam), f.id))
    if not marked:
        return anchor, []
    edges: dict = {}
    a0 = t2.endpoints(marked[0])[0]
    for m in marked:
        edges[t2._ekey(m)] = m
        for ep in t2.endpoints(m):
            for e in t2.geodesic_edges(a0, ep):
                edges[t2._ekey(e)] = e
    cands = sorted(edges.values(), key=lambda e: (len(e[0]), e[0].letters, e[1]))
    return anchor, cands


def compute_slice(g1: MarkedGraph, t1: CoverTree, t2: CoverTree,
                  sigma: Morphism, eid: int, bound: int,
                  search: PairSearch) -> SliceRecord:
    anchor, cands = slice_candidates(g1, t2, sigma, eid)
    members: list[EdgeAddr] = []
    statuses: dict = {}
    presumed = False
    for e2 in cands:
        cell = search.check_cell(anchor, e2, bound)
        statuses[t2._ekey(e2)] = {sig: (st.certificate.to_json()
                                        if isinstance(st, Heavy) else None)
                                  for sig, st in cell.items()}
        if all(isinstance(st, Heavy) for st in cell.values()):
            members.append(e2)
        else:
            presumed = True
    connected = _edges_connected(t2, members)
    return SliceRecord(eid, anchor, cands, members, statuses, presumed, connected)


def _edges_connected(tree: CoverTree, edges: Sequence[EdgeAddr]) -> bool:
    if len(edges) <= 1:
        return True
    verts: dict = {}
    for idx, e in enumerate(edges):
        for v in tree.endpoints(e):
            verts.setdefault(tree._vkey(v), []).append(idx)
    parent = list(range(len(edges)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for group in verts.values():
        for a, b in zip(group, group[1:]):
            parent[find(a)] = find(b)
    return len({find(i) for i in range(len(edges))}) == 1


# ---------------------------------------------------------------------------
# intersection numbers
# ---------------------------------------------------------------------------

CellKey = tuple[int, int, tuple[int, ...]]  # (edge of X, edge of Y, relative elt)


@dataclass
class IntersectionResult:
    value: int
    stable: bool
    bound: int
    slices: list[SliceRecord]
    cells: set[CellKey]
    cells_by_bound: dict[int, set[CellKey]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "i": self.value,
            "stable": self.stable,
            "cert_length": self.bound,
            "slices": [
                {"edge": s.edge_id,
                 "anchor": [s.anchor[0].to_json(), s.anchor[1]],
                 "bounding_tree": [[e[0].to_json(), e[1]] for e in s.bounding_tree],
                 "members": [[e[0].to_json(), e[1]] for e in s.members],
                 "connected": s.connected,
                 "presumed_light_exclusions": s.presumed}
                for s in self.slices
            ],
            "certificates": sorted({tuple(c) for s in self.slices
                                    for cand in s.statuses.values()
                                    for c in cand.values() if c is not None}),
        }


def _cells_of_slices(slices: Iterable[SliceRecord]) -> set[CellKey]:
    cells = set()
    for s in slices:
        u1 = s.anchor[0]
        for (u2, f) in s.members:
            rel = u1.inverse() * u2
            cells.add((s.edge_id, f, rel.letters))
    return cells


def intersection_number(x: MarkedGraph, y: MarkedGraph,
                        bound: int | None = None,
                        stability_doublings: int = 2) -> IntersectionResult:
    """Sum of slice cardinalities over the edge orbits of x, with a stability
    flag: stable iff the cell set is unchanged when the certificate bound is
    doubled twice."""
    if bound is None:
        bound = default_cert_bound(x, y)
    t1, t2 = CoverTree(x), CoverTree(y)
    sigma = collapse_morphism(y, x)
    search = PairSearch(t1, t2)
    slices = [compute_slice(x, t1, t2, sigma, e.id, bound, search)
              for e in x.edges]
    cells = _cells_of_slices(slices)
    by_bound = {bound: cells}
    stable = True
    b = bound
    for _ in range(stability_doublings):
        b *= 2
        re_slices = [compute_slice(x, t1, t2, sigma, e.id, b, search)
                     for e in x.edges]
        re_cells = _cells_of_slices(re_slices)
        by_bound[b] = re_cells
        if not cells <= re_cells:
            raise AssertionError("heavy verdicts must be monotone in the bound")
        if re_cells != cells:
            stable = False
            cells = re_cells
            slices = re_slices
    return IntersectionResult(len(cells), stable, bound, slices, cells, by_bound)


def transposed_cells(cells: set[CellKey]) -> set[CellKey]:
    """Re-index cells of (X over Y) as cells of (Y over X)."""
    out = set()
    for (e, f, rel) in cells:
        out.add((f, e, Word(rel).inverse().letters))
    return out


@dataclass
class CorePair:
    """Both-direction core computation with a coherence check."""

    x: MarkedGraph
    y: MarkedGraph
    forward: IntersectionResult
    backward: IntersectionResult
    consistent: bool

    @property
    def stable(self) -> bool:
        return self.forward.stable and self.backward.stable and self.consistent


def core_pair(x: MarkedGraph, y: MarkedGraph,
              bound: int | None = None) -> CorePair:
    fwd = intersection_number(x, y, bound)
    bwd = intersection_number(y, x, bound)
    consistent = fwd.cells == transposed_cells(bwd.cells)
    return CorePair(x, y, fwd, bwd, consistent)


def compare_metrics(x: MarkedGraph, y: MarkedGraph, eps: Fraction,
                    bound: int | None = None) -> dict:
    """The regression tuple (d(X,Y), d(Y,X), i(X,Y), log i) for one pair."""
    thin = x.systole() < eps or y.systole() < eps
    res = intersection_number(x, y, bound)
    log_i = math.log(res.value) if res.value > 0 else 0.0
    return {
        "d_xy": distance(x, y),
        "d_yx": distance(y, x),
        "i": res.value,
        "log_i": log_i,
        "stable": res.stable,
        "thin": thin,
    }
