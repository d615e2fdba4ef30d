import json
import random
from fractions import Fraction

import pytest

from oslab.graphs import (
    Edge,
    MarkedGraph,
    cyclic_reduce_path,
    maximal_graph,
    random_instance,
    rose,
    standard_rose,
)
from oslab.words import Automorphism, ElementaryAutomorphism, Word


def theta_graph(lengths=(Fraction(1, 2), Fraction(3, 10), Fraction(1, 5))):
    # two vertices, three parallel edges; words chosen so loops are x1, x2
    edges = (
        Edge(0, 0, 1, lengths[0], True, Word()),
        Edge(1, 0, 1, lengths[1], False, Word.of(1)),
        Edge(2, 0, 1, lengths[2], False, Word.of(2)),
    )
    return MarkedGraph(2, [0, 1], edges, 0)


def brute_systole(g):
    """Oracle: min length over all cyclically reduced edge loops of
    combinatorial length <= 2E (enumerated dart walks)."""
    best = None
    bound = 2 * len(g.edges)

    def walk(path, cur):
        nonlocal best
        if len(path) > bound:
            return
        if path and cur == g.dart_endpoints(path[0])[0]:
            cyc = cyclic_reduce_path(path)
            if cyc and len(cyc) == len(path):
                ln = g.path_length(path)
                if best is None or ln < best:
                    best = ln
        for d in g.darts_at[cur]:
            if path and d[0] == path[-1][0] and d[1] == -path[-1][1]:
                continue
            walk(path + [d], g.dart_endpoints(d)[1])

    for v in g.vertices:
        walk([], v)
    return best


def test_validate_standard_rose():
    g = standard_rose(2)
    assert g.validate() == []


def test_validate_flags_valence_and_normalization():
    # a valence-2 vertex: subdivide one petal of the rose
    edges = (
        Edge(0, 0, 1, Fraction(1, 4), True, Word()),
        Edge(1, 1, 0, Fraction(1, 4), False, Word.of(1)),
        Edge(2, 0, 0, Fraction(1, 2), False, Word.of(2)),
    )
    g = MarkedGraph(2, [0, 1], edges, 0)
    assert any("valence" in p for p in g.validate())
    g2 = rose([Word.of(1), Word.of(2)], [Fraction(1), Fraction(1)])
    assert any("total length" in p for p in g2.validate())


def test_normalized():
    g = rose([Word.of(1), Word.of(2)], [Fraction(1), Fraction(1)])
    gn = g.normalized()
    assert gn.total_length == 1
    assert [e.length for e in gn.edges] == [Fraction(1, 2), Fraction(1, 2)]
    assert gn.normalized() is gn
    g3 = rose([Word.of(1), Word.of(2)], [Fraction(3), Fraction(1)]).normalized()
    assert [e.length for e in g3.edges] == [Fraction(3, 4), Fraction(1, 4)]


def test_systole_roses():
    assert standard_rose(2).systole() == Fraction(1, 2)
    assert standard_rose(3).systole() == Fraction(1, 3)


def test_systole_theta_matches_brute_force():
    g = theta_graph()
    expected = brute_systole(g)
    assert expected == Fraction(1, 2)  # 0.3 + 0.2, the two short strands
    assert g.systole() == expected


def test_systole_ignores_separating_edges():
    g = maximal_graph(2)  # dumbbell: bar is not on any immersed loop
    assert g.systole() == Fraction(1, 3)
    assert brute_systole(g) == Fraction(1, 3)


def test_act_identity_and_lengths():
    g, b = random_instance(5, 2, 4)
    ident = Automorphism.identity(2)
    assert b.act(ident).to_json() == b.to_json()
    phi = Automorphism.from_moves(2, [ElementaryAutomorphism("mult", 1, 2)])
    moved = b.act(phi)
    assert [e.length for e in moved.edges] == [e.length for e in b.edges]
    assert moved.systole() == b.systole()


def test_act_example_and_composition_order():
    g = standard_rose(2)
    phi = Automorphism.from_moves(2, [ElementaryAutomorphism("mult", 1, 2)])
    acted = g.act(phi)
    assert [e.word for e in acted.edges] == [Word.of(1, 2), Word.of(2)]
    psi = Automorphism.from_moves(2, [ElementaryAutomorphism("invert", 2)])
    twice = g.act(phi).act(psi)
    composed = g.act(phi.then(psi))
    assert [e.word for e in twice.edges] == [e.word for e in composed.edges]


def test_collapse_tree_to_rose():
    r = standard_rose(2)
    collapsed, corr = r.collapse_to_rose()
    assert [e.word for e in collapsed.edges] == [e.word for e in r.edges]

    g = theta_graph()
    rose_g, corr = g.collapse_to_rose()
    assert [e.word for e in rose_g.edges] == [Word.of(1), Word.of(2)]
    assert corr == {0: 1, 1: 2}

    barbell = maximal_graph(2)
    rb, _ = barbell.collapse_to_rose()
    assert [e.word for e in rb.edges] == [Word.of(1), Word.of(2)]


def test_maximal_graph_is_valid_and_trivalent():
    for n in (2, 3, 4):
        g = maximal_graph(n)
        assert g.validate() == []
        assert all(g.valence(v) == 3 for v in g.vertices)
        assert len(g.edges) == 3 * n - 3


def test_random_instance_deterministic_and_valid():
    for seed in (0, 1, 2):
        a1, b1 = random_instance(seed, 2, 5)
        a2, b2 = random_instance(seed, 2, 5)
        assert json.dumps(a1.to_json()) == json.dumps(a2.to_json())
        assert json.dumps(b1.to_json()) == json.dumps(b2.to_json())
        assert a1.validate() == []
        assert b1.validate() == []
        assert b1.systole() >= Fraction(1, 50)
    a_x, b_x = random_instance(0, 2, 5)
    a_y, b_y = random_instance(1, 2, 5)
    assert json.dumps(b_x.to_json()) != json.dumps(b_y.to_json())


def test_json_roundtrip_lossless():
    _, b = random_instance(9, 3, 6)
    blob = json.dumps(b.to_json())
    back = MarkedGraph.from_json(json.loads(blob))
    assert back.to_json() == b.to_json()
    assert [e.length for e in back.edges] == [e.length for e in b.edges]


def test_tree_path_and_realize_loop():
    g = maximal_graph(3)
    # tree path between the two chain ends crosses all tree edges
    p = g.tree_path(0, 3)
    assert [d[0] for d in p] == [0, 1, 2]
    w = Word.of(2, -3, 1)
    loop = g.realize_loop(w)
    assert g.path_word(loop) == w
    assert g.dart_endpoints(loop[0])[0] == g.basepoint
    assert g.dart_endpoints(loop[-1])[1] == g.basepoint
