"""Universes: lattice-equipped separation systems, and concrete generators.

Two fixture conventions coexist (both are valid separation systems):

* bipartition universes order by first-side inclusion, (A,B) <= (C,D) iff
  A is a subset of C, with join/meet = union/intersection of first sides;
* graph universes order by (A,B) <= (C,D) iff A contains C and B is contained
  in D, making the (V,A) separations the small ones, with the standard order
  function |A n B|.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import SeparationSystem, iter_mask, mask_of
from .errors import BoundExceeded, SystemValidationError, UnknownHandle

UNIVERSE_SCHEMA = "tanglekit/universe-v1"


class Universe(SeparationSystem):
    """A separation system whose poset is a lattice (total join/meet tables)."""

    def __init__(self, inv, up, labels, join, meet, members=None, ground=None):
        super().__init__(inv, up, labels, members=members, ground=ground)
        self._join = join
        self._meet = meet

    @classmethod
    def from_tables(cls, inv, leq_pairs, join, meet, labels=None, validate=True):
        base = SeparationSystem.from_relation(inv, leq_pairs, labels)
        uni = cls(base._inv, base._up, base.labels, tuple(map(tuple, join)),
                  tuple(map(tuple, meet)))
        if validate:
            rep = validate_lattice(uni)
            if not rep.ok:
                axiom, witness = rep.failures[0]
                raise SystemValidationError(axiom, witness=witness)
        return uni

    def join(self, a: int, b: int) -> int:
        return self._join[a][b]

    def meet(self, a: int, b: int) -> int:
        return self._meet[a][b]

    def to_json(self) -> dict:
        obj = super().to_json()
        obj["schema"] = UNIVERSE_SCHEMA
        n = self.n_ground
        obj["join"] = [[a, b, self._join[a][b]] for a in range(n) for b in range(a, n)]
        obj["meet"] = [[a, b, self._meet[a][b]] for a in range(n) for b in range(a, n)]
        return obj

    @classmethod
    def from_json(cls, obj) -> "Universe":
        base = SeparationSystem.from_json({k: v for k, v in obj.items()
                                           if k not in ("join", "meet", "members")})
        n = base.n_ground
        join = [[-1] * n for _ in range(n)]
        meet = [[-1] * n for _ in range(n)]
        for name, tab in (("join", join), ("meet", meet)):
            for a, b, c in obj.get(name, []):
                tab[a][b] = tab[b][a] = c
        if any(-1 in row for row in join) or any(-1 in row for row in meet):
            raise SystemValidationError("lattice-tables-total", witness=None)
        uni = cls.from_tables(base._inv,
                              [(a, b) for a in range(n) for b in iter_mask(base._up[a])],
                              join, meet, base.labels)
        if "members" in obj:
            return uni.restrict(mask_of(obj["members"]))
        return uni


@dataclass(frozen=True)
class LatticeReport:
    ok: bool
    failures: list  # (axiom, witness) pairs


def validate_lattice(uni: Universe) -> LatticeReport:
    """Exhaustive lattice axioms plus the two couplings everything downstream uses:

    r <= s iff r v s = s iff r ^ s = r, and (r v s)* = r* ^ s*.
    """
    failures = []
    els = list(range(uni.n_ground))

    def chk(cond, axiom, witness):
        if not cond and len(failures) < 20:
            failures.append((axiom, witness))

    for a in els:
        for b in els:
            j, m = uni.join(a, b), uni.meet(a, b)
            chk(j == uni.join(b, a), "join-commutative", (a, b))
            chk(m == uni.meet(b, a), "meet-commutative", (a, b))
            chk(uni.join(a, m) == a, "absorption", (a, b))
            chk(uni.meet(a, j) == a, "absorption", (a, b))
            chk(uni.leq(a, j) and uni.leq(b, j), "join-upper-bound", (a, b))
            chk(uni.leq(m, a) and uni.leq(m, b), "meet-lower-bound", (a, b))
            chk((uni.leq(a, b)) == (j == b), "leq-join-coupling", (a, b))
            chk((uni.leq(a, b)) == (m == a), "leq-meet-coupling", (a, b))
            chk(uni.inv(j) == uni.meet(uni.inv(a), uni.inv(b)),
                "involution-de-morgan", (a, b))
    for a in els:
        for b in els:
            for c in els:
                if uni.join(uni.join(a, b), c) != uni.join(a, uni.join(b, c)):
                    chk(False, "join-associative", (a, b, c))
                if uni.meet(uni.meet(a, b), c) != uni.meet(a, uni.meet(b, c)):
                    chk(False, "meet-associative", (a, b, c))
    return LatticeReport(ok=not failures, failures=failures)


# -- generators --------------------------------------------------------------


def bipartition_universe(ground_set, bound: int = 6) -> Universe:
    """All oriented bipartitions (A, V \\ A) of a finite set.

    Handle i encodes A as the subset with membership bits i; (A,B) <= (C,D)
    iff A is a subset of C; join/meet are union/intersection of first sides.
    """
    v = sorted(ground_set, key=str)
    if len(v) > bound:
        raise BoundExceeded(f"ground set of {len(v)} exceeds bound {bound}")
    n = 1 << len(v)
    full = n - 1

    def side(mask):
        return "{" + ",".join(str(v[i]) for i in range(len(v)) if (mask >> i) & 1) + "}"

    inv = [full ^ a for a in range(n)]
    labels = [side(a) + "|" + side(full ^ a) for a in range(n)]
    up = [0] * n
    for a in range(n):
        for b in range(n):
            if a & ~b == 0:
                up[a] |= 1 << b
    join = [[a | b for b in range(n)] for a in range(n)]
    meet = [[a & b for b in range(n)] for a in range(n)]
    return Universe(inv, up, labels, tuple(map(tuple, join)), tuple(map(tuple, meet)))


def graph_universe(vertices, edges, bound: int = 8):
    """All separations (A,B) of a graph, with the standard order |A n B|.

    A separation is a pair with A u B = V and no edge between A \\ B and
    B \\ A.  Returns (universe, order).  Includes the small (V,A) separations
    and the degenerate (V,V).
    """
    from .orderfn import OrderFunction

    verts = sorted(vertices, key=str)
    if len(verts) > bound:
        raise BoundExceeded(f"{len(verts)} vertices exceed bound {bound}")
    vi = {x: i for i, x in enumerate(verts)}
    emasks = [(1 << vi[a], 1 << vi[b]) for a, b in edges]
    sides = []
    for assign in product((0, 1, 2), repeat=len(verts)):
        a_mask = sum(1 << i for i, t in enumerate(assign) if t != 2)
        b_mask = sum(1 << i for i, t in enumerate(assign) if t != 0)
        only_a, only_b = a_mask & ~b_mask, b_mask & ~a_mask
        if any((ea & only_a and eb & only_b) or (ea & only_b and eb & only_a)
               for ea, eb in emasks):
            continue
        sides.append((a_mask, b_mask))
    sides.sort()
    index = {ab: i for i, ab in enumerate(sides)}
    n = len(sides)

    def name(mask):
        return "{" + ",".join(str(verts[i]) for i in range(len(verts)) if (mask >> i) & 1) + "}"

    inv = [index[(b, a)] for a, b in sides]
    labels = [name(a) + "|" + name(b) for a, b in sides]
    up = [0] * n
    for i, (a1, b1) in enumerate(sides):
        for j, (a2, b2) in enumerate(sides):
            if a2 & ~a1 == 0 and b1 & ~b2 == 0:
                up[i] |= 1 << j
    join = [[index[(sides[i][0] & sides[j][0], sides[i][1] | sides[j][1])]
             for j in range(n)] for i in range(n)]
    meet = [[index[(sides[i][0] | sides[j][0], sides[i][1] & sides[j][1])]
             for j in range(n)] for i in range(n)]
    uni = Universe(inv, up, labels, tuple(map(tuple, join)), tuple(map(tuple, meet)))
    order = OrderFunction.from_values(
        uni, {uni.sep(i): Fraction(bin(a & b).count("1"))
              for i, (a, b) in enumerate(sides) if i <= inv[i]})
    return uni, order


def restrict_Sk(system: SeparationSystem, order, k) -> SeparationSystem:
    """The subsystem of separations of order < k (k=None means everything)."""
    if k is None:
        return system.restrict(system.members)
    m = 0
    for h in system.elements():
        if order.of(h) < k:
            m |= 1 << h
    return system.restrict(m)


# -- submodularity -----------------------------------------------------------


def _universe_of(system):
    g = system.ground
    if not isinstance(g, Universe):
        raise SystemValidationError("not-a-universe", witness=type(g).__name__)
    return g


def is_submodular(uni, fn):
    """u(r v s) + u(r ^ s) <= u(r) + u(s) over all oriented pairs; witness on failure."""
    g = _universe_of(uni)
    els = uni.elements()
    val = fn.of if hasattr(fn, "of") else fn
    for i, a in enumerate(els):
        for b in els[i:]:
            if val(g.join(a, b)) + val(g.meet(a, b)) > val(a) + val(b):
                return False, (a, b)
    return True, None


def is_structurally_submodular(uni, fn):
    """u(r v s) <= u(r) or u(r ^ s) <= u(s), over all ordered oriented pairs."""
    g = _universe_of(uni)
    els = uni.elements()
    val = fn.of if hasattr(fn, "of") else fn
    for a in els:
        for b in els:
            if not (val(g.join(a, b)) <= val(a) or val(g.meet(a, b)) <= val(b)):
                return False, (a, b)
    return True, None


def is_submodular_subsystem(system) -> bool:
    """Subsystem submodularity: every member pair keeps its join or meet a member."""
    g = _universe_of(system)
    els = system.elements()
    for a in els:
        for b in els:
            if not (system.contains(g.join(a, b)) or system.contains(g.meet(a, b))):
                return False
    return True


# -- corners -----------------------------------------------------------------


@dataclass(frozen=True)
class CornerReport:
    """The four corners of two separations, keyed by the orientation pair used.

    slots maps (rk, sk) in {+,-}^2 to the oriented corner handle
    r_orientation ^ s_orientation; corners is the set of underlying
    separations; same_side_r / same_side_s group slot keys by side;
    opposite_pairs are the two non-adjacent slot pairs.
    """

    slots: dict
    corners: frozenset
    same_side_r: tuple
    same_side_s: tuple
    opposite_pairs: tuple


def corners(uni, r: int, s: int) -> CornerReport:
    """Corners of two separations, given by reference orientations r, s.

    Identical underlying separations collapse: every slot is then the
    matching orientation of r itself.
    """
    g = _universe_of(uni)
    if not (uni.contains(r) and uni.contains(s)):
        raise UnknownHandle(r if not uni.contains(r) else s)
    ri, si = uni.inv(r), uni.inv(s)
    if uni.sep(r) == uni.sep(s):
        slots = {("+", "+"): r, ("+", "-"): r, ("-", "+"): ri, ("-", "-"): ri}
    else:
        slots = {
            ("+", "+"): g.meet(r, s),
            ("+", "-"): g.meet(r, si),
            ("-", "+"): g.meet(ri, s),
            ("-", "-"): g.meet(ri, si),
        }
    return CornerReport(
        slots=slots,
        corners=frozenset(uni.sep(h) for h in slots.values()),
        same_side_r=((("+", "+"), ("+", "-")), (("-", "+"), ("-", "-"))),
        same_side_s=((("+", "+"), ("-", "+")), (("+", "-"), ("-", "-"))),
        opposite_pairs=((("+", "+"), ("-", "-")), (("+", "-"), ("-", "+"))),
    )
