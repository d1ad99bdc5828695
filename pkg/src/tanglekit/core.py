"""Finite separation systems: posets with an order-reversing involution.

Conventions used throughout the package:

* Oriented separations are integer handles ``0..n-1`` of a *ground* system.
  ``inv(h)`` is the inverse orientation; ``inv(h) == h`` marks a degenerate
  separation, which owns a single handle.
* An unoriented separation is identified by its canonical handle
  ``min(h, inv(h))``.
* A system may be a restricted *view* of its ground system.  Views share the
  ground arrays, so a handle means the same separation in every view.  All
  predicates quantify over the view's members only (triviality witnesses,
  closure, orientation domains).
* Public APIs take and return sets/frozensets of handles; bitmasks are used
  internally for the exhaustive kernels.

Degeneracy vocabulary (all definable from <= and the involution alone):
``s`` is *small* if ``s <= s*``, *large* if ``s* <= s``, *trivial* if both
orientations of some other member separation lie strictly below it,
*co-trivial* if its inverse is trivial.  A system is *regular* if it has no
small element.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import BoundExceeded, InconsistentSet, SystemValidationError, UnknownHandle

SYSTEM_SCHEMA = "tanglekit/system-v1"

#: Default cap on unoriented separations for exhaustive orientation search.
ENUMERATION_BOUND = 20


def mask_of(handles: Iterable[int]) -> int:
    m = 0
    for h in handles:
        m |= 1 << h
    return m


def iter_mask(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class SeparationSystem:
    """A finite poset of oriented separations with order-reversing involution.

    Build ground systems with :meth:`from_relation` (validates the axioms) or
    :meth:`from_json`; derive subsystems with :meth:`restrict`.
    """

    def __init__(self, inv, up, labels, members=None, ground=None):
        self._inv = tuple(inv)
        self._up = tuple(up)
        self.labels = tuple(labels)
        self.n_ground = len(self._inv)
        full = (1 << self.n_ground) - 1
        self.members = full if members is None else members
        self.ground = ground if ground is not None else self
        # down[a] = mask of b <= a; incompat[x] = handles y of other separations
        # with y <= x* (the "point away from each other" test).
        if ground is None:
            down = [0] * self.n_ground
            for a in range(self.n_ground):
                ua = self._up[a]
                for b in iter_mask(ua):
                    down[b] |= 1 << a
            self._down = tuple(down)
            incompat = []
            for x in range(self.n_ground):
                pair = (1 << x) | (1 << self._inv[x])
                incompat.append(self._down[self._inv[x]] & ~pair)
            self._incompat = tuple(incompat)
            # req[x] = handles strictly above x with a different underlying
            # separation: exactly what x forces into a closure.
            req = []
            for x in range(self.n_ground):
                pair = (1 << x) | (1 << self._inv[x])
                req.append(self._up[x] & ~pair)
            self._req = tuple(req)
        else:
            self._down = ground._down
            self._incompat = ground._incompat
            self._req = ground._req

    # -- construction ------------------------------------------------------

    @classmethod
    def from_relation(cls, inv, leq_pairs, labels=None):
        """Build and validate a ground system from an explicit relation.

        ``leq_pairs`` lists (a, b) with a <= b; reflexive pairs may be omitted.
        Raises SystemValidationError naming the violated axiom and a witness.
        """
        inv = tuple(inv)
        n = len(inv)
        if sorted(inv[i] for i in range(n)) != list(range(n)):
            raise SystemValidationError("involution-permutation", witness=inv)
        for i in range(n):
            if inv[inv[i]] != i:
                raise SystemValidationError("involution-self-inverse", witness=i)
        up = [1 << i for i in range(n)]
        for a, b in leq_pairs:
            if not (0 <= a < n and 0 <= b < n):
                raise SystemValidationError("unknown-handle", witness=(a, b))
            up[a] |= 1 << b
        for a in range(n):
            for b in iter_mask(up[a]):
                if a != b and (up[b] >> a) & 1:
                    raise SystemValidationError("antisymmetry", witness=(a, b))
                if up[b] & ~up[a]:
                    c = next(iter_mask(up[b] & ~up[a]))
                    raise SystemValidationError("transitivity", witness=(a, b, c))
        for a in range(n):
            for b in iter_mask(up[a]):
                if not (up[inv[b]] >> inv[a]) & 1:
                    raise SystemValidationError("involution-order-reversing", witness=(a, b))
        if labels is None:
            labels = [str(i) for i in range(n)]
        return cls(inv, up, labels)

    def restrict(self, handles) -> "SeparationSystem":
        """Subsystem view induced on ``handles`` (closed under the involution)."""
        m = handles if isinstance(handles, int) else mask_of(handles)
        if m & ~self.members:
            raise UnknownHandle(next(iter_mask(m & ~self.members)))
        for h in iter_mask(m):
            if not (m >> self._inv[h]) & 1:
                raise SystemValidationError("involution-closed-members", witness=h)
        return SeparationSystem(self._inv, self._up, self.labels, members=m,
                                ground=self.ground)

    # -- basic structure ---------------------------------------------------

    def inv(self, h: int) -> int:
        return self._inv[h]

    def leq(self, a: int, b: int) -> bool:
        return bool((self._up[a] >> b) & 1)

    def lt(self, a: int, b: int) -> bool:
        return a != b and (self._up[a] >> b) & 1

    def sep(self, h: int) -> int:
        """Canonical handle of the unoriented separation underlying ``h``."""
        return min(h, self._inv[h])

    def label(self, h: int) -> str:
        return self.labels[h]

    def elements(self):
        """Member oriented handles, ascending."""
        return list(iter_mask(self.members))

    def seps(self):
        """Member unoriented separations as canonical handles, ascending."""
        return [h for h in iter_mask(self.members) if h <= self._inv[h]]

    def orientations(self, sep: int):
        """The one or two oriented handles of an unoriented separation."""
        i = self._inv[sep]
        return (sep,) if i == sep else (min(sep, i), max(sep, i))

    def contains(self, h: int) -> bool:
        return bool((self.members >> h) & 1)

    def __len__(self):
        return len(self.seps())

    # -- degeneracy hierarchy ----------------------------------------------

    def is_degenerate(self, h: int) -> bool:
        return self._inv[h] == h

    def is_small(self, h: int) -> bool:
        return self.leq(h, self._inv[h])

    def is_trivial(self, h: int) -> bool:
        """True iff both orientations of some other member separation are < h."""
        below = self._down[h] & self.members & ~(1 << h) & ~(1 << self._inv[h])
        for r in iter_mask(below):
            ri = self._inv[r]
            if r < ri and (below >> ri) & 1:
                return True
        return False

    def is_cotrivial(self, h: int) -> bool:
        return self.is_trivial(self._inv[h])

    def classify(self) -> "ClassifyReport":
        flags = {}
        for h in self.elements():
            flags[h] = ElementFlags(
                small=self.is_small(h),
                large=self.is_small(self._inv[h]),
                trivial=self.is_trivial(h),
                cotrivial=self.is_cotrivial(h),
                degenerate=self.is_degenerate(h),
            )
        regular = not any(f.small for f in flags.values())
        return ClassifyReport(flags=flags, regular=regular)

    def trivial_elements(self):
        return [h for h in self.elements() if self.is_trivial(h)]

    def without_trivial(self) -> "SeparationSystem":
        """Largest subsystem view with no trivial elements (iterated removal)."""
        sys = self
        while True:
            triv = sys.trivial_elements()
            if not triv:
                return sys
            drop = 0
            for h in triv:
                drop |= (1 << h) | (1 << self._inv[h])
            sys = SeparationSystem(self._inv, self._up, self.labels,
                                   members=sys.members & ~drop, ground=self.ground)

    # -- predicates on sets of oriented separations -------------------------

    def _check_members(self, sigma):
        for h in sigma:
            if not self.contains(h):
                raise UnknownHandle(h)

    def points_towards(self, x: int, s: int) -> bool:
        """True iff x >= some orientation of the separation underlying s."""
        return self.leq(s, x) or self.leq(self._inv[s], x)

    def is_star(self, sigma) -> bool:
        """Stars: non-degenerate separations pointing towards each other.

        Pairs of distinct separations use the x >= y* test.  A pair {x, x*}
        passes only if the two orientations are comparable (one is small);
        for regular separations such a pair never points towards itself
        non-trivially.
        """
        sigma = sorted(set(sigma))
        self._check_members(sigma)
        for x in sigma:
            if self.is_degenerate(x):
                return False
        for i, x in enumerate(sigma):
            for y in sigma[i + 1:]:
                if y == self._inv[x]:
                    if not (self.leq(x, y) or self.leq(y, x)):
                        return False
                elif not (self.leq(self._inv[y], x) and self.leq(self._inv[x], y)):
                    return False
        return True

    def is_nested(self, r: int, s: int) -> bool:
        """True iff the separations underlying r and s have comparable orientations."""
        for x in (r, self._inv[r]):
            for y in (s, self._inv[s]):
                if self.leq(x, y) or self.leq(y, x):
                    return True
        return False

    def crossing_pairs(self, handles):
        seps = sorted({self.sep(h) for h in handles})
        out = []
        for i, r in enumerate(seps):
            for s in seps[i + 1:]:
                if not self.is_nested(r, s):
                    out.append((r, s))
        return out

    def is_nested_set(self, handles) -> bool:
        return not self.crossing_pairs(handles)

    def consistency_witness(self, sigma):
        """A pair (x, y) of distinct separations pointing away from each other."""
        sigma = sorted(set(sigma))
        for i, x in enumerate(sigma):
            for y in sigma[i + 1:]:
                if self.sep(x) != self.sep(y) and (self._incompat[x] >> y) & 1:
                    return (x, y)
        return None

    def is_consistent(self, sigma) -> bool:
        return self.consistency_witness(sigma) is None

    def closure(self, sigma) -> frozenset:
        """The set of member separations required by sigma, plus sigma.

        Input must be consistent; the result equals
        sigma + {s-> : exists r-> in sigma with r != s and r-> < s->}.
        """
        sigma = set(sigma)
        self._check_members(sigma)
        w = self.consistency_witness(sigma)
        if w is not None:
            raise InconsistentSet(w)
        m = mask_of(sigma)
        out = m
        for x in iter_mask(m):
            out |= self._req[x]
        return frozenset(iter_mask(out & self.members))

    def closure_mask(self, mask: int) -> int:
        out = mask
        for x in iter_mask(mask):
            out |= self._req[x]
        return out & self.members

    # -- orientations --------------------------------------------------------

    def is_orientation(self, tau, seps=None) -> bool:
        """Exactly one orientation of each separation (default: all members)."""
        tau = set(tau)
        self._check_members(tau)
        domain = self.seps() if seps is None else sorted(seps)
        seen = set()
        for h in tau:
            s = self.sep(h)
            if s in seen and not self.is_degenerate(h):
                return False
            seen.add(s)
        return seen == set(domain) and all(self.sep(h) in set(domain) for h in tau)

    def oriented_seps(self, tau):
        """Canonical handles of the separations oriented by ``tau``."""
        return sorted({self.sep(h) for h in tau})

    def distinguishes(self, s: int, tau1, tau2) -> bool:
        """True iff both partial orientations orient ``s`` and differ on it.

        A degenerate separation has one orientation and never distinguishes.
        """
        o1 = [h for h in self.orientations(self.sep(s)) if h in tau1]
        o2 = [h for h in self.orientations(self.sep(s)) if h in tau2]
        return bool(o1) and bool(o2) and o1 != o2

    def consistent_orientations(self, bound: int = ENUMERATION_BOUND):
        """All consistent orientations of the member separations.

        Backtracking over separations in canonical-handle order, trying the
        smaller oriented handle first, so the output order is the
        lexicographic order of oriented handles.  Exhaustive and
        duplicate-free; prunes as soon as a partial set is inconsistent.
        """
        seps = self.seps()
        if len(seps) > bound:
            raise BoundExceeded(f"{len(seps)} separations exceed bound {bound}")
        incompat = self._incompat
        out = []

        def walk(i, cur_mask, cur):
            if i == len(seps):
                out.append(frozenset(cur))
                return
            for h in self.orientations(seps[i]):
                if not incompat[h] & cur_mask:
                    cur.append(h)
                    walk(i + 1, cur_mask | (1 << h), cur)
                    cur.pop()

        walk(0, 0, [])
        return out

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        obj = {
            "schema": SYSTEM_SCHEMA,
            "oriented": [
                {"id": i, "inv": self._inv[i], "label": self.labels[i]}
                for i in range(self.n_ground)
            ],
            "leq": sorted(
                (a, b)
                for a in range(self.n_ground)
                for b in iter_mask(self._up[a])
            ),
        }
        if self.members != (1 << self.n_ground) - 1:
            obj["members"] = sorted(iter_mask(self.members))
        return obj

    @classmethod
    def from_json(cls, obj) -> "SeparationSystem":
        try:
            oriented = obj["oriented"]
            ids = [e["id"] for e in oriented]
        except (KeyError, TypeError) as exc:
            raise SystemValidationError("schema", witness=str(exc)) from exc
        if sorted(ids) != list(range(len(ids))):
            raise SystemValidationError("ids-not-contiguous", witness=ids)
        inv = [0] * len(ids)
        labels = [""] * len(ids)
        for e in oriented:
            inv[e["id"]] = e["inv"]
            labels[e["id"]] = e.get("label", str(e["id"]))
        sys = cls.from_relation(inv, [tuple(p) for p in obj.get("leq", [])], labels)
        if "members" in obj:
            return sys.restrict(mask_of(obj["members"]))
        return sys

    def __repr__(self):
        return f"<SeparationSystem {len(self)} seps / {len(self.elements())} oriented>"


@dataclass(frozen=True)
class ElementFlags:
    small: bool
    large: bool
    trivial: bool
    cotrivial: bool
    degenerate: bool


@dataclass(frozen=True)
class ClassifyReport:
    flags: dict
    regular: bool


def load_system(path) -> SeparationSystem:
    with open(path) as f:
        return SeparationSystem.from_json(json.load(f))
