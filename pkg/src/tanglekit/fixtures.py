"""Desk-scale fixture builders: named posets, graph paths, random universes.

The random universes are sublattices of the bipartition universe on a ground
set of size <= 4 (so never more than 8 unoriented separations), closed under
complement, union and intersection.  Their orders are weighted cut functions,
which keeps them submodular and exactly rational.  Everything is driven by an
explicit seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import SeparationSystem
from .forbidden import ForbiddenFamily, eclipse_flags
from .orderfn import OrderFunction
from .universe import Universe, graph_universe


def ptriv_system() -> SeparationSystem:
    """The 4-element poset with r->, r<- < s->: s-> trivial, s<- co-trivial."""
    # handles: 0 = r->, 1 = r<-, 2 = s->, 3 = s<-
    leq = [(0, 2), (1, 2), (3, 1), (3, 0), (3, 2)]
    return SeparationSystem.from_relation(
        [1, 0, 3, 2], leq, labels=["r>", "r<", "s>", "s<"])


def chain2_system() -> SeparationSystem:
    """Two regular separations with r-> < s-> (and so s<- < r<-)."""
    # handles: 0 = r->, 1 = r<-, 2 = s->, 3 = s<-
    return SeparationSystem.from_relation(
        [1, 0, 3, 2], [(0, 2), (3, 1)], labels=["r>", "r<", "s>", "s<"])


def single_sep_system(small=False) -> SeparationSystem:
    leq = [(0, 1)] if small else []
    return SeparationSystem.from_relation([1, 0], leq, labels=["s>", "s<"])


def chain_universe(seps: int) -> Universe:
    """A totally ordered universe of ``seps`` regular separations.

    Handles 0 < 1 < ... < 2*seps-1 with the order-reversing involution
    h -> 2*seps-1-h; join/meet are max/min.
    """
    n = 2 * seps
    inv = [n - 1 - h for h in range(n)]
    leq = [(a, b) for a in range(n) for b in range(a + 1, n)]
    join = [[max(a, b) for b in range(n)] for a in range(n)]
    meet = [[min(a, b) for b in range(n)] for a in range(n)]
    labels = [f"c{h}" for h in range(n)]
    base = SeparationSystem.from_relation(inv, leq, labels)
    return Universe(base._inv, base._up, labels,
                    tuple(map(tuple, join)), tuple(map(tuple, meet)))


def p3_universe():
    """The path a-b-c with the standard |A n B| order."""
    return graph_universe("abc", [("a", "b"), ("b", "c")])


def p4_universe():
    return graph_universe("abcd", [("a", "b"), ("b", "c"), ("c", "d")])


def graph_tangle_stars(uni, order, vertices, edges, k) -> ForbiddenFamily:
    """Stars of up to three separations of order < k whose A-sides cover the graph.

    Forbidding these in orientations of S_k gives the classical graph
    tangles of order k.
    """
    verts = sorted(vertices, key=str)
    vi = {x: i for i, x in enumerate(verts)}
    full_v = (1 << len(verts)) - 1
    all_e = frozenset(frozenset((vi[a], vi[b])) for a, b in edges)

    def a_side(h):
        # graph_universe labels are "{a,b}|{b,c}"; recover the A-side mask.
        left = uni.label(h).split("|")[0].strip("{}")
        names = [x for x in left.split(",") if x]
        return sum(1 << vi[x] for x in names)

    sk = [h for h in uni.elements() if order.of(h) < k]
    masks = {h: a_side(h) for h in sk}

    def covers(sel):
        vcov = 0
        ecov = set()
        for h in sel:
            a = masks[h]
            vcov |= a
            for e in all_e:
                u, w = tuple(e)
                if (a >> u) & 1 and (a >> w) & 1:
                    ecov.add(e)
        return vcov == full_v and ecov == all_e

    out = set()
    n = len(sk)
    for i in range(n):
        for j in range(i, n):
            for l in range(j, n):
                sel = frozenset({sk[i], sk[j], sk[l]})
                if covers(sel) and uni.is_star(sel):
                    out.add(sel)
    return ForbiddenFamily(out)


def eclipse_closure(system, family, order) -> ForbiddenFamily:
    """Close a family under weak-eclipse replacement inside consistent sets.

    A replacement sigma - {x} + {y} is added whenever y weakly eclipses x and
    the enlarged set sigma + {y} is consistent with no co-trivial element
    (exactly the sets that extend to a consistent orientation).  The result
    is closed under eclipsing in every consistent orientation, hence rich.
    """
    sets = set(family.sets)
    frontier = list(sets)
    while frontier:
        sigma = frontier.pop()
        for x in sorted(sigma):
            for y in system.elements():
                if y == x:
                    continue
                _, weak = eclipse_flags(system, order, y, x)
                if not weak:
                    continue
                probe = sigma | {y}
                if not system.is_consistent(probe):
                    continue
                if any(system.is_cotrivial(h) for h in probe):
                    continue
                new = (sigma - {x}) | {y}
                if new not in sets:
                    sets.add(new)
                    frontier.append(new)
    return family.extended(sets, "generated:eclipse-closure")


def singleton_family(system) -> ForbiddenFamily:
    """All singletons: rich, closed under eclipsing, and admits no tangles."""
    return ForbiddenFamily([{h} for h in system.elements()])


def _cut_order(uni, weights, nv) -> OrderFunction:
    vals = {}
    for s in uni.seps():
        a = s  # bipartition handle encodes the A-side bitmask
        total = Fraction(0)
        for (u, w), wt in weights.items():
            if ((a >> u) & 1) != ((a >> w) & 1):
                total += wt
        vals[s] = total
    return OrderFunction(uni, vals)


def _subset_universe(sides, nv) -> Universe:
    """A standalone universe over a complement/union/intersection-closed family."""
    full = (1 << nv) - 1
    sides = sorted(sides)
    index = {a: i for i, a in enumerate(sides)}
    n = len(sides)

    def name(mask):
        return "{" + ",".join(str(i + 1) for i in range(nv) if (mask >> i) & 1) + "}"

    inv = [index[full ^ a] for a in sides]
    labels = [name(a) + "|" + name(full ^ a) for a in sides]
    up = [0] * n
    for i, a in enumerate(sides):
        for j, b in enumerate(sides):
            if a & ~b == 0:
                up[i] |= 1 << j
    join = [[index[a | b] for b in sides] for a in sides]
    meet = [[index[a & b] for b in sides] for a in sides]
    return Universe(inv, up, labels, tuple(map(tuple, join)), tuple(map(tuple, meet)))


def random_universes(count=100, seed=2024, ground_size=4):
    """Seeded random sub-universes of the bipartition lattice with cut orders.

    Each is a standalone universe (at most 2^(ground_size-1) separations)
    whose sides form a complement/union/intersection-closed family, with a
    random non-negative rational edge-cut order, which keeps it submodular.
    """
    rng = random.Random(seed)
    nv = ground_size
    full = (1 << nv) - 1
    out = []
    while len(out) < count:
        sides = {0, full}
        for _ in range(rng.randint(1, 5)):
            a = rng.randrange(1 << nv)
            sides.add(a)
            sides.add(full ^ a)
        changed = True
        while changed:
            changed = False
            for a in list(sides):
                for b in list(sides):
                    for c in (a | b, a & b):
                        if c not in sides:
                            sides.add(c)
                            sides.add(full ^ c)
                            changed = True
        uni = _subset_universe(sides, nv)
        weights = {}
        for u in range(nv):
            for w in range(u + 1, nv):
                weights[(u, w)] = Fraction(rng.randint(0, 4))
        vals = {}
        sides_sorted = sorted(sides)
        for s in uni.seps():
            a = sides_sorted[s]
            total = Fraction(0)
            for (u, w), wt in weights.items():
                if ((a >> u) & 1) != ((a >> w) & 1):
                    total += wt
            vals[s] = total
        out.append((uni, OrderFunction(uni, vals)))
    return out


def random_star_family(system, order, rng, tries=30) -> ForbiddenFamily:
    """A few random stars, eclipse-closed so the family is rich."""
    els = system.elements()
    stars = set()
    for _ in range(tries):
        size = rng.choice((1, 1, 2, 3))
        cand = frozenset(rng.sample(els, min(size, len(els))))
        if system.is_star(cand) and cand:
            stars.add(cand)
        if len(stars) >= 3:
            break
    fam = ForbiddenFamily(stars)
    return eclipse_closure(system, fam, order)
