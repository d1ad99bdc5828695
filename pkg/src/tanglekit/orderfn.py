"""Order functions on separations and the injective submodular refinement.

Orders are exact rationals throughout; the base-3 perturbation values are
exact big integers, so no threshold comparison anywhere in the package ever
goes through floating point.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .core import SeparationSystem
from .errors import NonSubmodularOrder, SystemValidationError, UnknownHandle
from .universe import is_submodular, restrict_Sk

ORDER_SCHEMA = "tanglekit/order-v1"


class OrderFunction:
    """Map from unoriented separations of a ground system to rationals.

    Both orientations of a separation share its value.  Keys are canonical
    handles of the ground system, so one order function serves every
    restricted view of that system.
    """

    def __init__(self, system: SeparationSystem, values):
        self.system = system.ground
        vals = {}
        for sep, v in values.items():
            if not (0 <= sep < self.system.n_ground):
                raise UnknownHandle(sep)
            vals[self.system.sep(sep)] = Fraction(v)
        missing = [s for s in self.system.seps() if s not in vals]
        if missing:
            raise SystemValidationError("order-function-total", witness=missing[0])
        self._values = vals

    @classmethod
    def from_values(cls, system, values):
        return cls(system, values)

    @classmethod
    def constant(cls, system, value=0):
        return cls(system, {s: Fraction(value) for s in system.ground.seps()})

    def of(self, h: int) -> Fraction:
        return self._values[self.system.sep(h)]

    __call__ = of

    def values_on(self, system) -> dict:
        return {s: self._values[s] for s in system.seps()}

    def is_injective_on(self, system) -> bool:
        vals = list(self.values_on(system).values())
        return len(vals) == len(set(vals))

    def plus(self, other) -> "OrderFunction":
        val = other.of if hasattr(other, "of") else other
        return OrderFunction(self.system,
                             {s: v + Fraction(val(s)) for s, v in self._values.items()})

    def scaled(self, c) -> "OrderFunction":
        c = Fraction(c)
        return OrderFunction(self.system, {s: c * v for s, v in self._values.items()})

    def to_json(self) -> dict:
        return {
            "schema": ORDER_SCHEMA,
            "orders": {str(s): f"{v.numerator}/{v.denominator}"
                       for s, v in sorted(self._values.items())},
        }

    @classmethod
    def from_json(cls, system, obj) -> "OrderFunction":
        try:
            orders = obj["orders"]
        except (KeyError, TypeError) as exc:
            raise SystemValidationError("schema", witness=str(exc)) from exc
        return cls(system, {int(s): Fraction(v) for s, v in orders.items()})

    def __repr__(self):
        return f"<OrderFunction on {len(self._values)} seps>"


class Enumeration(OrderFunction):
    """A bijection between the unoriented separations and 1..|S|."""

    def __init__(self, system, ranks):
        ranks = {system.ground.sep(s): int(r) for s, r in ranks.items()}
        if sorted(ranks.values()) != list(range(1, len(ranks) + 1)):
            raise SystemValidationError("enumeration-bijective",
                                        witness=sorted(ranks.values()))
        super().__init__(system, ranks)
        self.ranks = ranks

    def rank(self, h: int) -> int:
        return self.ranks[self.system.sep(h)]


def parse_threshold(text):
    """CLI threshold: an integer, a 'p/q' rational, or 'inf' for everything."""
    if text is None or text in ("inf", "Inf", "INF"):
        return None
    return Fraction(text)


# -- refinement --------------------------------------------------------------


def refines(o2, o1, system=None):
    """o2 refines o1: o1(r) < o1(s) implies o2(r) < o2(s).  Witness pair on failure."""
    sys = (system or o1.system).ground if system is None else system
    seps = sys.seps()
    for r in seps:
        for s in seps:
            if o1.of(r) < o1.of(s) and not o2.of(r) < o2.of(s):
                return False, (r, s)
    return True, None


def indicator(uni, t: int):
    """The 0/1 function on oriented separations: 0 iff the argument is <= t."""

    def fn(h):
        return 0 if uni.leq(h, t) else 1

    return fn


def default_iota(uni) -> dict:
    """Lexicographic-handle bijection from oriented members to 0..|U->|-1."""
    return {h: i for i, h in enumerate(uni.elements())}


def gamma(uni, n: int, iota: dict, s: int) -> int:
    """Sum of n^iota(t) over oriented members t that are not >= s.

    Equivalently the indicator-weighted sum, so the base-n digits of the
    symmetrized value encode which separations point towards s.
    """
    total = 0
    for t in uni.elements():
        if not uni.leq(s, t):
            total += n ** iota[t]
    return total


def symmetrize(uni, fn) -> OrderFunction:
    """The order function s -> u(s->) + u(s<-) induced by a function on U->."""
    val = fn.of if hasattr(fn, "of") else fn
    out = {}
    for s in uni.seps():
        ors = uni.orientations(s)
        out[s] = Fraction(val(ors[0])) + Fraction(val(ors[-1]))
    return OrderFunction(uni, out)


def refine_injective(uni, o: OrderFunction, iota=None) -> OrderFunction:
    """An injective submodular order function refining a submodular one.

    Adds the perturbation delta(s) = (eps/2 / 3^|U->|) * (gamma3(s->) +
    gamma3(s<-)) where eps is the least gap between distinct values of o
    (eps = 1 when o is constant).  Deterministic for a fixed iota; the
    default iota is the lexicographic handle order.
    """
    ok, witness = is_submodular(uni, o)
    if not ok:
        raise NonSubmodularOrder(f"witness pair {witness}")
    if iota is None:
        iota = default_iota(uni)
    vals = o.values_on(uni)
    distinct = sorted(set(vals.values()))
    gaps = [b - a for a, b in zip(distinct, distinct[1:])]
    eps = min(gaps) if gaps else Fraction(1)
    m = len(uni.elements())
    scale = Fraction(eps, 2 * 3 ** m)
    out = {}
    for s in uni.seps():
        ors = uni.orientations(s)
        g = gamma(uni, 3, iota, ors[0]) + gamma(uni, 3, iota, ors[-1])
        out[s] = vals[s] + scale * g
    return OrderFunction(uni, out)


def enumeration_refinement(uni, o: OrderFunction, iota=None) -> Enumeration:
    """A structurally submodular enumeration of U refining o.

    Composes the injective refinement with the order isomorphism onto
    1..|U|; structural submodularity survives the composition.
    """
    o2 = refine_injective(uni, o, iota=iota)
    seps = sorted(uni.seps(), key=o2.of)
    return Enumeration(uni, {s: i + 1 for i, s in enumerate(seps)})


def tangles_preserved_under_refinement(system, family, o, o2, bound=20):
    """Check that every tangle at any o-threshold is a tangle at some o2-threshold.

    Exhausts thresholds at the distinct order values (plus a sentinel above
    the maximum).  Returns (ok, witness); the witness names the threshold and
    tangle that fail.
    """
    from .forbidden import enumerate_tangles

    def thresholds(fn):
        vals = sorted({fn.of(s) for s in system.seps()})
        if not vals:
            return [None]
        return vals + [vals[-1] + 1]

    o2_tangles = {}
    for k2 in thresholds(o2):
        sub2 = restrict_Sk(system, o2, k2)
        o2_tangles[k2] = set(enumerate_tangles(sub2, family, bound=bound))
    for k in thresholds(o):
        sub = restrict_Sk(system, o, k)
        for tau in enumerate_tangles(sub, family, bound=bound):
            if not any(tau in ts for ts in o2_tangles.values()):
                return False, (k, tau)
    return True, None
