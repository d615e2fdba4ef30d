"""Reduced words, bases and automorphisms of the rank-n free group.

Letters are nonzero signed integers: ``i`` stands for the generator x_i and
``-i`` for its inverse.  Words are always stored freely reduced; the empty
word is the identity.  A basis is an n-tuple of words that freely generates,
normally obtained by applying a chain of elementary (Nielsen) automorphisms
to the standard basis, so basis-hood holds by construction.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence


def reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    """Freely reduce a letter sequence (cancel adjacent inverse pairs)."""
    out: list[int] = []
    for a in letters:
        if a == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word in F_n."""

    letters: tuple[int, ...] = ()

    @staticmethod
    def of(*letters: int) -> "Word":
        return Word(reduce_letters(letters))

    @staticmethod
    def from_letters(letters: Iterable[int]) -> "Word":
        return Word(reduce_letters(letters))

    @classmethod
    def _reduced(cls, letters: tuple[int, ...]) -> "Word":
        """Internal fast path: letters are known to be freely reduced."""
        w = object.__new__(cls)
        object.__setattr__(w, "letters", letters)
        return w

    def __post_init__(self):
        # guard against unreduced construction from raw tuples
        ls = self.letters
        for a, b in zip(ls, ls[1:]):
            if a == -b:
                raise ValueError(f"word {ls} is not freely reduced")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word._reduced(reduce_letters(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word._reduced(tuple(-a for a in reversed(self.letters)))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        w = IDENTITY
        for _ in range(k):
            w = w * self
        return w

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def conjugated_by(self, u: "Word") -> "Word":
        """u * self * u^-1."""
        return u * self * u.inverse()

    def cyclic_split(self) -> tuple["Word", "Word"]:
        """Return (p, c) with self == p * c * p^-1 and c cyclically reduced."""
        ls = self.letters
        i, j = 0, len(ls)
        while j - i >= 2 and ls[i] == -ls[j - 1]:
            i += 1
            j -= 1
        return Word._reduced(ls[:i]), Word._reduced(ls[i:j])

    def cyclically_reduced(self) -> "Word":
        return self.cyclic_split()[1]

    @property
    def is_cyclically_reduced(self) -> bool:
        ls = self.letters
        return not ls or ls[0] != -ls[-1]

    def to_json(self) -> list[int]:
        return list(self.letters)

    @staticmethod
    def from_json(data: Sequence[int]) -> "Word":
        return Word.from_letters(int(a) for a in data)

    def __repr__(self) -> str:
        return f"Word{self.letters!r}" if self.letters else "Word()"


IDENTITY = Word()


def canonical_cyclic_key(w: Word) -> tuple:
    """Deterministic key for a conjugacy class (and its inverse class).

    Minimum over all rotations of the cyclic reduction of w and of w^-1,
    ordered by (length, letter tuple).  Used for witness tie-breaking.
    """
    c = w.cyclically_reduced()
    best = None
    for base in (c.letters, c.inverse().letters):
        n = len(base)
        for r in range(max(n, 1)):
            rot = base[r:] + base[:r]
            if best is None or rot < best:
                best = rot
    return (len(best or ()), best or ())


# ---------------------------------------------------------------------------
# elementary automorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementaryAutomorphism:
    """One Nielsen move on the standard generators.

    kind 'swap':    x_i <-> x_j
    kind 'invert':  x_i -> x_i^-1
    kind 'mult':    x_i -> x_i x_j^sign (side='right') or x_j^sign x_i (side='left')
    """

    kind: str
    i: int
    j: int = 0
    sign: int = 1
    side: str = "right"

    def __post_init__(self):
        if self.kind not in ("swap", "invert", "mult"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.i <= 0 or (self.kind != "invert" and self.j <= 0):
            raise ValueError("generator indices must be positive")
        if self.kind in ("swap", "mult") and self.i == self.j:
            raise ValueError("indices must be distinct")
        if self.sign not in (1, -1) or self.side not in ("left", "right"):
            raise ValueError("bad sign/side")

    def image(self, letter: int) -> tuple[int, ...]:
        """Image of a single signed letter."""
        g, s = abs(letter), 1 if letter > 0 else -1
        if self.kind == "swap":
            out = (self.j if g == self.i else self.i if g == self.j else g,)
        elif self.kind == "invert":
            out = (-g,) if g == self.i else (g,)
        else:
            if g != self.i:
                out = (g,)
            elif self.side == "right":
                out = (self.i, self.sign * self.j)
            else:
                out = (self.sign * self.j, self.i)
        if s < 0:
            out = tuple(-a for a in reversed(out))
        return out

    def apply(self, w: Word) -> Word:
        return Word.from_letters(itertools.chain.from_iterable(self.image(a) for a in w))

    def inverse(self) -> "ElementaryAutomorphism":
        if self.kind in ("swap", "invert"):
            return self
        return ElementaryAutomorphism("mult", self.i, self.j, -self.sign, self.side)

    def to_json(self) -> dict:
        return {"kind": self.kind, "i": self.i, "j": self.j,
                "sign": self.sign, "side": self.side}

    @staticmethod
    def from_json(d: dict) -> "ElementaryAutomorphism":
        return ElementaryAutomorphism(d["kind"], d["i"], d.get("j", 0),
                                      d.get("sign", 1), d.get("side", "right"))


def random_elementary(rng: random.Random, n: int) -> ElementaryAutomorphism:
    """Uniform-ish elementary move on n generators (n >= 2)."""
    kind = rng.choice(["swap", "invert", "mult", "mult", "mult", "mult"])
    i = rng.randrange(1, n + 1)
    if kind == "invert":
        return ElementaryAutomorphism("invert", i)
    j = rng.choice([k for k in range(1, n + 1) if k != i])
    if kind == "swap":
        return ElementaryAutomorphism("swap", i, j)
    return ElementaryAutomorphism("mult", i, j, rng.choice([1, -1]),
                                  rng.choice(["left", "right"]))


@dataclass(frozen=True)
class Automorphism:
    """An automorphism of F_n given by generator images, with its move log.

    ``moves`` is the chain of elementary automorphisms whose composite (first
    element applied first) equals this automorphism; it certifies that the
    images form a basis.
    """

    rank: int
    images: tuple[Word, ...]
    moves: tuple[ElementaryAutomorphism, ...] = ()

    @staticmethod
    def identity(n: int) -> "Automorphism":
        return Automorphism(n, tuple(Word.of(i) for i in range(1, n + 1)))

    @staticmethod
    def from_moves(n: int, moves: Sequence[ElementaryAutomorphism]) -> "Automorphism":
        imgs = [Word.of(i) for i in range(1, n + 1)]
        # composite applied to x_i: run the chain on each image
        for mv in moves:
            imgs = [mv.apply(w) for w in imgs]
        return Automorphism(n, tuple(imgs), tuple(moves))

    def apply(self, w: Word) -> Word:
        out: list[int] = []
        for a in w:
            img = self.images[abs(a) - 1]
            ls = img.letters if a > 0 else img.inverse().letters
            for b in ls:
                if out and out[-1] == -b:
                    out.pop()
                else:
                    out.append(b)
        return Word(tuple(out))

    def then(self, other: "Automorphism") -> "Automorphism":
        """Composite 'apply self first, then other'."""
        return Automorphism(self.rank,
                            tuple(other.apply(w) for w in self.images),
                            self.moves + other.moves)

    def inverse(self) -> "Automorphism":
        inv_moves = tuple(mv.inverse() for mv in reversed(self.moves))
        if self.moves:
            return Automorphism.from_moves(self.rank, inv_moves)
        # no move log: invert through the rewriter
        rw = BasisRewriter(self.rank, self.images)
        imgs = tuple(Word(rw.rewrite(Word.of(i))) for i in range(1, self.rank + 1))
        return Automorphism(self.rank, imgs)


def conjugation_moves(n: int, u: Word) -> tuple[ElementaryAutomorphism, ...]:
    """Elementary chain realizing w -> u^-1 w u on every generator."""
    moves: list[ElementaryAutomorphism] = []
    # conjugation by one letter a: x_k -> a^-1 x_k a for all k; identity on |a|
    for a in u.letters:
        g, s = abs(a), 1 if a > 0 else -1
        for k in range(1, n + 1):
            if k == g:
                continue
            moves.append(ElementaryAutomorphism("mult", k, g, s, "right"))
            moves.append(ElementaryAutomorphism("mult", k, g, -s, "left"))
    return tuple(moves)


# ---------------------------------------------------------------------------
# basis tuples and rewriting
# ---------------------------------------------------------------------------

class NotABasisError(ValueError):
    pass


class BasisRewriter:
    """Rewrites arbitrary words of F_n in a given basis, by Stallings folding.

    Folds the wedge of the basis loops while tracking, for every surviving
    edge, its expression in basis letters.  For a true basis the fold ends at
    the standard rose, yielding an expression of every generator x_i in basis
    letters; rewriting is then letterwise substitution.  A non-basis input
    raises NotABasisError.
    """

    def __init__(self, rank: int, basis: Sequence[Word]):
        if len(basis) != rank:
            raise NotABasisError(f"need {rank} words, got {len(basis)}")
        self.rank = rank
        self._expr = self._fold(rank, [w.letters for w in basis])

    @staticmethod
    def _fold(rank: int, loops: list[tuple[int, ...]]) -> dict[int, tuple[int, ...]]:
        parent: dict[int, int] = {}

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        # edges[eid] = [u, v, letter, origin(tuple of basis letters)] or None
        edges: list[list | None] = []
        incidence: dict[int, set[int]] = {}
        BASE = 0
        parent[BASE] = BASE
        incidence[BASE] = set()
        nxt = 1
        for k, ls in enumerate(loops, start=1):
            if not ls:
                raise NotABasisError("identity word in basis")
            prev = BASE
            for idx, letter in enumerate(ls):
                last = idx == len(ls) - 1
                cur = BASE if last else nxt
                if not last:
                    parent[cur] = cur
                    incidence[cur] = set()
                    nxt += 1
                origin = (k,) if last else ()
                eid = len(edges)
                edges.append([prev, cur, letter, origin])
                incidence[prev].add(eid)
                incidence[cur].add(eid)
                prev = cur

        def regauge(vclass: int, gamma: tuple[int, ...]) -> None:
            # entering vclass: origin -> origin * gamma ; leaving: gamma^-1 * origin
            ginv = tuple(-a for a in reversed(gamma))
            for eid in incidence[vclass]:
                e = edges[eid]
                u, v = find(e[0]), find(e[1])
                if u == vclass and v == vclass:
                    e[3] = reduce_letters(ginv + e[3] + gamma)
                elif v == vclass:
                    e[3] = reduce_letters(e[3] + gamma)
                elif u == vclass:
                    e[3] = reduce_letters(ginv + e[3])

        work = set(parent)
        while work:
            v = find(work.pop())
            # group live darts at v by outgoing signed letter
            darts: dict[int, list[tuple[int, int, tuple[int, ...]]]] = {}
            for eid in list(incidence[v]):
                e = edges[eid]
                if e is None:
                    incidence[v].discard(eid)
                    continue
                u, w = find(e[0]), find(e[1])
                if u == v:
                    darts.setdefault(e[2], []).append((eid, w, e[3]))
                if w == v:
                    inv = tuple(-a for a in reversed(e[3]))
                    darts.setdefault(-e[2], []).append((eid, u, inv))
            folded_here = False
            for letter, group in darts.items():
                if len(group) < 2:
                    continue
                (e1, v1, a1), (e2, v2, a2) = group[0], group[1]
                if v1 == v2:
                    if a1 == a2:
                        # duplicate edge: drop e2
                        e = edges[e2]
                        incidence[find(e[0])].discard(e2)
                        incidence[find(e[1])].discard(e2)
                        edges[e2] = None
                    else:
                        raise NotABasisError("words satisfy a relation; not a basis")
                else:
                    if v2 == find(BASE):
                        # never regauge the basepoint: loop expressions anchor there
                        (e1, v1, a1), (e2, v2, a2) = (e2, v2, a2), (e1, v1, a1)
                    gamma = reduce_letters(tuple(-a for a in reversed(a2)) + a1)
                    regauge(v2, gamma)
                    # merge v2 into v1
                    parent[v2] = v1
                    incidence[v1] |= incidence[v2]
                    incidence[v2] = set()
                    work.add(v1)
                folded_here = True
                break
            if folded_here:
                work.add(v)

        # collect the surviving rose
        expr: dict[int, tuple[int, ...]] = {}
        base = find(BASE)
        for e in edges:
            if e is None:
                continue
            u, v = find(e[0]), find(e[1])
            if u != base or v != base:
                raise NotABasisError("folded graph is not a rose; not a basis")
            letter = e[2]
            g = abs(letter)
            origin = e[3] if letter > 0 else tuple(-a for a in reversed(e[3]))
            if g in expr:
                raise NotABasisError("duplicate petal after folding; not a basis")
            expr[g] = origin
        if set(expr) != set(range(1, rank + 1)):
            raise NotABasisError("missing generators after folding; not a basis")
        return expr

    def rewrite(self, w: Word) -> tuple[int, ...]:
        """Expression of w in basis letters (reduced)."""
        out: list[int] = []
        for a in w:
            ls = self._expr[abs(a)]
            if a < 0:
                ls = tuple(-b for b in reversed(ls))
            for b in ls:
                if out and out[-1] == -b:
                    out.pop()
                else:
                    out.append(b)
        return tuple(out)


@dataclass(frozen=True)
class BasisTuple:
    """An ordered basis of F_n, normally with its construction log."""

    rank: int
    elements: tuple[Word, ...]
    provenance: tuple[ElementaryAutomorphism, ...] | None = None

    @staticmethod
    def standard(n: int) -> "BasisTuple":
        return BasisTuple(n, tuple(Word.of(i) for i in range(1, n + 1)), ())

    @staticmethod
    def from_moves(n: int, moves: Sequence[ElementaryAutomorphism]) -> "BasisTuple":
        aut = Automorphism.from_moves(n, moves)
        return BasisTuple(n, aut.images, tuple(moves))

    def __post_init__(self):
        if len(self.elements) != self.rank:
            raise ValueError("basis must have exactly rank elements")

    def rewriter(self) -> BasisRewriter:
        return BasisRewriter(self.rank, self.elements)

    def conjugated_by(self, v: Word) -> "BasisTuple":
        """Basis (v b_i v^-1) with provenance extended when available."""
        els = tuple(b.conjugated_by(v) for b in self.elements)
        prov = None
        if self.provenance is not None:
            prov = self.provenance + conjugation_moves(self.rank, v.inverse())
        return BasisTuple(self.rank, els, prov)


def word_length(w: Word, basis: BasisTuple) -> int:
    """Length of w written in the given basis (0 for the identity)."""
    if w.is_identity:
        return 0
    return len(basis.rewriter().rewrite(w))


def word_length_bfs(w: Word, basis: BasisTuple, max_radius: int = 20) -> int:
    """Independent oracle: breadth-first search in the Cayley graph of the basis.

    Expands radius until w is found (guaranteed for a genuine basis); the
    radius cap only guards against non-bases in tests.
    """
    if w.is_identity:
        return 0
    gens = [(b, b.inverse()) for b in basis.elements]
    frontier = {IDENTITY.letters: IDENTITY}
    seen = {IDENTITY.letters}
    for radius in range(1, max_radius + 1):
        nxt: dict[tuple, Word] = {}
        for _, u in frontier.items():
            for b, binv in gens:
                for g in (b, binv):
                    v = u * g
                    if v.letters in seen:
                        continue
                    seen.add(v.letters)
                    nxt[v.letters] = v
                    if v.letters == w.letters:
                        return radius
        frontier = nxt
        if not frontier:
            break
    raise RuntimeError(f"BFS radius {max_radius} exhausted; not reached")


def basis_norm(y: BasisTuple, x: BasisTuple) -> int:
    """max_i |y_i|_x, the norm of basis y measured in basis x."""
    return max(word_length(w, x) for w in y.elements)


def check_conjugate_basis_bound(x: BasisTuple, y: BasisTuple, w: BasisTuple,
                                v: Word) -> bool:
    """Check |v|_y <= |w|_y^2 * |y|_x for conjugate bases x_i = v w_i v^-1.

    Raises ValueError when the conjugacy precondition fails.
    """
    for xi, wi in zip(x.elements, w.elements):
        if xi.letters != wi.conjugated_by(v).letters:
            raise ValueError("precondition x_i = v w_i v^-1 violated")
    lhs = word_length(v, y)
    bound = basis_norm(w, y) ** 2 * basis_norm(y, x)
    return lhs <= bound
