"""Forbidden families, their structural predicates, and tangle enumeration.

A family is stored extensionally: a finite set of finite subsets of oriented
handles, each tagged with its provenance (explicit, or which generator made
it).  Everything here is written against the brute-force oracles: richness,
eclipsing-closure and efficiency are all exhaustive checks at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import mask_of
from .errors import BoundExceeded
from .universe import restrict_Sk

FAMILY_SCHEMA = "tanglekit/forbidden-v1"

PROVENANCE_EXPLICIT = "explicit"
PROVENANCE_R = "generated:R"
PROVENANCE_PROFILE = "generated:profile"
PROVENANCE_STANDARDIZE = "generated:standardize"


class ForbiddenFamily:
    """An immutable collection of forbidden subsets with provenance tags."""

    def __init__(self, sets=(), provenance=None):
        self.sets = frozenset(frozenset(s) for s in sets)
        prov = {s: PROVENANCE_EXPLICIT for s in self.sets}
        if provenance:
            for s, tag in provenance.items():
                fs = frozenset(s)
                if fs in prov:
                    prov[fs] = tag
        self.provenance = prov

    def __iter__(self):
        return iter(sorted(self.sets, key=lambda s: (len(s), sorted(s))))

    def __len__(self):
        return len(self.sets)

    def __contains__(self, s):
        return frozenset(s) in self.sets

    def __eq__(self, other):
        return isinstance(other, ForbiddenFamily) and self.sets == other.sets

    def __hash__(self):
        return hash(self.sets)

    def tag(self, s) -> str:
        return self.provenance[frozenset(s)]

    def extended(self, new_sets, tag) -> "ForbiddenFamily":
        prov = dict(self.provenance)
        for s in new_sets:
            prov.setdefault(frozenset(s), tag)
        return ForbiddenFamily(prov.keys(), prov)

    def to_json(self) -> dict:
        return {
            "schema": FAMILY_SCHEMA,
            "sets": sorted((sorted(s) for s in self.sets), key=lambda s: (len(s), s)),
            "provenance": {",".join(map(str, sorted(s))): t
                           for s, t in sorted(self.provenance.items(),
                                              key=lambda kv: sorted(kv[0]))},
        }

    @classmethod
    def from_json(cls, obj) -> "ForbiddenFamily":
        sets = [frozenset(s) for s in obj.get("sets", [])]
        prov = {frozenset(int(x) for x in k.split(",") if k): t
                for k, t in obj.get("provenance", {}).items()}
        return cls(sets, prov)

    def __repr__(self):
        return f"<ForbiddenFamily of {len(self.sets)} sets>"


def avoids(tau, family: ForbiddenFamily) -> bool:
    """True iff no member of the family is a subset of tau."""
    t = frozenset(tau)
    return not any(s <= t for s in family.sets)


@dataclass(frozen=True)
class Tangle:
    """A consistent avoiding orientation of some S_k, with its threshold."""

    elements: frozenset
    k: object = None  # Fraction threshold; None means the full system
    maximal: bool = False


def enumerate_tangles(system, family, bound=20):
    """All F-tangles of the member separations, in lexicographic handle order.

    Backtracking with two prunes: consistency, and any forbidden set fully
    inside the partial orientation (both are monotone in the partial set).
    """
    seps = system.seps()
    if len(seps) > bound:
        raise BoundExceeded(f"{len(seps)} separations exceed bound {bound}")
    if any(not s for s in family.sets):
        return []
    member_masks = [mask_of(s) for s in family.sets]
    incompat = system._incompat
    out = []

    def forbidden_hit(cur_mask):
        return any(m & ~cur_mask == 0 for m in member_masks)

    def walk(i, cur_mask, cur):
        if forbidden_hit(cur_mask):
            return
        if i == len(seps):
            out.append(frozenset(cur))
            return
        for h in system.orientations(seps[i]):
            if not incompat[h] & cur_mask:
                cur.append(h)
                walk(i + 1, cur_mask | (1 << h), cur)
                cur.pop()

    walk(0, 0, [])
    return out


def order_thresholds(system, order):
    """One threshold per distinct order value, plus a sentinel above the max."""
    vals = sorted({order.of(s) for s in system.seps()})
    if not vals:
        return [Fraction(0)]
    return vals + [vals[-1] + 1]


def enumerate_tangles_in(system, family, order, bound=20):
    """The F-tangles of every S_k, with maximality flags.

    A tangle is maximal when no tangle of any other threshold strictly
    contains it (as a set of oriented separations).
    """
    records = []
    seen = set()
    for k in order_thresholds(system, order):
        sub = restrict_Sk(system, order, k)
        for tau in enumerate_tangles(sub, family, bound=bound):
            if tau not in seen:
                seen.add(tau)
                records.append(Tangle(elements=tau, k=k))
    out = []
    for t in records:
        maximal = not any(t.elements < u.elements for u in records)
        out.append(Tangle(elements=t.elements, k=t.k, maximal=maximal))
    return out


def maximal_tangles_in(system, family, order, bound=20):
    return [t for t in enumerate_tangles_in(system, family, order, bound=bound)
            if t.maximal]


# -- standardness -------------------------------------------------------------


def is_standard(family, system):
    """{s<-} must be forbidden for every trivial s->; returns (ok, missing)."""
    missing = []
    for h in system.elements():
        if system.is_trivial(h) and frozenset({system.inv(h)}) not in family.sets:
            missing.append(frozenset({system.inv(h)}))
    return not missing, missing


def standardize(family, system) -> ForbiddenFamily:
    ok, missing = is_standard(family, system)
    if ok:
        return family
    return family.extended(missing, PROVENANCE_STANDARDIZE)


# -- eclipsing and efficiency --------------------------------------------------


def eclipse_flags(system, order, r: int, s: int):
    """(eclipses, weakly_eclipses) for the oriented pair r, s."""
    lt = system.lt(r, s)
    return lt and order.of(r) < order.of(s), lt and order.of(r) <= order.of(s)


def efficiency_witness(system, order, sigma, tau, strong=False):
    """An (eclipsed, eclipsing) pair violating (strong) efficiency, or None."""
    sigma, tau = set(sigma), set(tau)
    for x in sigma:
        for y in tau:
            if y == x:
                continue
            ec, weak = eclipse_flags(system, order, y, x)
            if weak if strong else ec:
                return (x, y)
    return None


def is_efficient(system, order, sigma, tau) -> bool:
    return efficiency_witness(system, order, sigma, tau, strong=False) is None


def is_strongly_efficient(system, order, sigma, tau) -> bool:
    return efficiency_witness(system, order, sigma, tau, strong=True) is None


def is_rich(system, family, order, bound=20):
    """Brute force over all consistent orientations; counterexample on failure.

    Rich: every consistent orientation with a forbidden subset has a
    strongly efficient forbidden subset.
    """
    for tau in system.consistent_orientations(bound=bound):
        inside = [s for s in family.sets if s <= tau]
        if not inside:
            continue
        if not any(is_strongly_efficient(system, order, s, tau) for s in inside):
            return False, tau
    return True, None


def closed_under_eclipsing(system, family, order, bound=20):
    """Replacement closure check, quantified over every consistent orientation.

    Witness is (tau, sigma, replaced, replacement) for the first failure.
    """
    for tau in system.consistent_orientations(bound=bound):
        for sigma in family.sets:
            if not sigma <= tau:
                continue
            for x in sigma:
                for y in tau:
                    if y == x:
                        continue
                    _, weak = eclipse_flags(system, order, y, x)
                    if weak and (sigma - {x}) | {y} not in family.sets:
                        return False, (tau, sigma, x, y)
    return True, None


def set_geq(system, sigma, sigma2) -> bool:
    """Lifted ordering on sets: every element of sigma has an image below it."""
    return all(any(system.leq(y, x) for y in sigma2) for x in sigma)


def f_eff(system, family, order):
    """Members efficient in their own closure; inconsistent members reported.

    Returns (subfamily, report) where report lists (member, reason) pairs for
    everything dropped.
    """
    keep, report = [], []
    for sigma in family.sets:
        if not system.is_consistent(sigma):
            report.append((sigma, "inconsistent"))
            continue
        cl = system.closure(sigma)
        if is_efficient(system, order, sigma, cl):
            keep.append(sigma)
        else:
            report.append((sigma, "eclipsed-in-closure"))
    prov = {s: family.provenance[s] for s in keep}
    return ForbiddenFamily(keep, prov), report


# -- generators ---------------------------------------------------------------


def robustness_family(uni, order, target=None) -> ForbiddenFamily:
    """The triples {r->, r<- v s->, r<- v s<-} with both joins below |r|.

    r-> ranges over oriented members, s over all unoriented separations of
    the universe; only triples all of whose members lie in the target system
    are kept, and triples touching a degenerate separation are dropped.
    """
    target = uni if target is None else target
    g = uni.ground
    out = set()
    for r in uni.elements():
        if not target.contains(r):
            continue
        ri = uni.inv(r)
        for s in uni.seps():
            a = g.join(ri, s)
            b = g.join(ri, uni.inv(s))
            if not (order.of(a) < order.of(r) and order.of(b) < order.of(r)):
                continue
            triple = frozenset({r, a, b})
            if any(uni.is_degenerate(x) for x in triple):
                continue
            if all(target.contains(x) for x in triple):
                out.add(triple)
    return ForbiddenFamily(out, {s: PROVENANCE_R for s in out})


def profile_family(uni, target=None) -> ForbiddenFamily:
    """The profile triples {r->, s->, r<- v s<-} over all oriented pairs."""
    target = uni if target is None else target
    g = uni.ground
    out = set()
    els = uni.elements()
    for i, r in enumerate(els):
        if not target.contains(r):
            continue
        for s in els[i:]:
            if not target.contains(s):
                continue
            third = g.join(uni.inv(r), uni.inv(s))
            triple = frozenset({r, s, third})
            if any(uni.is_degenerate(x) for x in triple):
                continue
            if target.contains(third):
                out.add(triple)
    return ForbiddenFamily(out, {s: PROVENANCE_PROFILE for s in out})
