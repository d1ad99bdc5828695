"""Trees of tangles: optimal distinguishers and their extraction from trees.

The brute-force oracle computes, for every pair of tangles, the set of
separations they orient differently and keeps the cheapest; the extraction
reads the same set off the tangle nodes of a thoroughly ordered structure
tree, and the layered variant off the pruned tree of maximal tangles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import iter_mask
from .errors import HypothesisFailure, NonInjectiveOrder
from .forbidden import (
    is_rich,
    is_standard,
    maximal_tangles_in,
    robustness_family,
)
from .tst import (
    LEAF_FORBIDDEN,
    LEAF_TANGLE,
    build_tst_in_S,
    classify_leaf,
    is_thoroughly_ordered,
)
from .universe import Universe, is_structurally_submodular


@dataclass
class PairReport:
    distinguishers: frozenset  # separations oriented differently by the pair
    minimum_order: object      # Fraction, None when the pair is indistinct
    optimal: frozenset         # the minimum-order distinguishers


@dataclass
class DistinguisherReport:
    pairs: dict                # (i, j) index pair -> PairReport
    optimal_union: frozenset   # union of all optimal distinguishers


def distinguisher_report(system, order, tangles) -> DistinguisherReport:
    """Brute-force optimal distinguishers over all pairs of (partial) orientations."""
    tangles = [frozenset(t) for t in tangles]
    pairs = {}
    union = set()
    for i in range(len(tangles)):
        for j in range(i + 1, len(tangles)):
            ds = frozenset(
                s for s in system.seps()
                if system.distinguishes(s, tangles[i], tangles[j]))
            if ds:
                m = min(order.of(s) for s in ds)
                opt = frozenset(s for s in ds if order.of(s) == m)
                union |= opt
            else:
                m, opt = None, frozenset()
            pairs[(i, j)] = PairReport(ds, m, opt)
    return DistinguisherReport(pairs=pairs, optimal_union=frozenset(union))


def optimal_distinguishers(system, order, tangles) -> frozenset:
    return distinguisher_report(system, order, tangles).optimal_union


# -- extraction from a thoroughly ordered structure tree -----------------------------


def tangle_nodes(tree, family) -> list:
    """Non-leaves all of whose child subtrees contain a tangle leaf."""
    classes = {l: classify_leaf(tree, family, l) for l in tree.leaves()}
    has_tangle_below = {}
    order = sorted(tree.nodes(), key=lambda v: -len(tree.beta(v)))
    for v in order:
        if tree.is_leaf(v):
            has_tangle_below[v] = classes[v].kind == LEAF_TANGLE
        else:
            has_tangle_below[v] = any(has_tangle_below[w] for w in tree.children[v])
    return [v for v in tree.nodes()
            if not tree.is_leaf(v)
            and all(has_tangle_below[w] for w in tree.children[v])]


@dataclass
class ToTHypotheses:
    structurally_submodular: bool
    injective: bool
    threshold_form: bool
    robustness_included: bool
    standard: bool
    rich: bool


def check_tot_hypotheses(system, order, family, bound=20, trust_rich=False):
    """Eager checks for the tree-of-tangles theorem on S = U_k."""
    if not isinstance(system.ground, Universe):
        raise HypothesisFailure("system must live in a universe")
    uni = system.ground
    struct, _ = is_structurally_submodular(uni, order)
    injective = order.is_injective_on(uni)
    inside = [order.of(h) for h in system.elements()]
    outside = [order.of(h) for h in uni.elements() if not system.contains(h)]
    threshold = not inside or not outside or max(inside) < min(outside)
    robust = robustness_family(uni, order, target=system)
    included = all(t in family.sets for t in robust.sets)
    standard, _ = is_standard(family, system)
    rich = True if trust_rich else is_rich(system, family, order, bound=bound)[0]
    hyp = ToTHypotheses(struct, injective, threshold, included, standard, rich)
    bad = [name for name, ok in vars(hyp).items() if not ok]
    if bad:
        raise HypothesisFailure(f"tree-of-tangles hypotheses failed: {bad}")
    return hyp


def tree_of_tangles(tree, system, order, family, bound=20, trust_rich=False):
    """The nested distinguisher set N read off a thoroughly ordered tree.

    N is the set of separations oriented at the tangle nodes; under the
    checked hypotheses it equals the brute-force optimal-distinguisher set.
    """
    check_tot_hypotheses(system, order, family, bound=bound, trust_rich=trust_rich)
    if not order.is_injective_on(system):
        raise NonInjectiveOrder("extraction needs an injective order")
    if not is_thoroughly_ordered(tree, order):
        raise HypothesisFailure("tree is not thoroughly ordered")
    return frozenset(tree.node_sep(v) for v in tangle_nodes(tree, family))


def is_critical(tree, v, order, family, bound=20) -> bool:
    """A node is critical if an orientation of its separation is co-trivial or
    completes a robustness triple over the path closure."""
    sys = tree.system
    if tree.is_leaf(v):
        return False
    uni = sys.ground
    robust = robustness_family(uni, order, target=sys)
    cl = frozenset(iter_mask(sys.closure_mask(tree.beta_mask(v))))
    for x in sys.orientations(tree.node_sep(v)):
        if sys.is_cotrivial(x):
            return True
        probe = cl | {x}
        if any(t <= probe for t in robust.sets):
            return True
    return False


# -- the layered tree of tangles -------------------------------------------------------


@dataclass
class ToTInSResult:
    distinguishers: frozenset
    tree: object
    tangle_nodes: list
    leaf_classes: dict
    maximal_tangles: list
    report: "ToTReport" = None


def tree_of_tangles_in(system, order, family, bound=20, trust_rich=False):
    """The layered tree of tangles: separations at tangle nodes of the pruned
    full-system tree, distinguishing every pair of maximal tangles optimally."""
    if not isinstance(system.ground, Universe):
        raise HypothesisFailure("system must be a universe")
    uni = system.ground
    struct, _ = is_structurally_submodular(uni, order)
    if not struct:
        raise HypothesisFailure("order not structurally submodular")
    if not order.is_injective_on(system):
        raise NonInjectiveOrder("layered extraction needs an injective order")
    robust = robustness_family(uni, order, target=system)
    missing = [t for t in robust.sets if t not in family.sets]
    if missing:
        raise HypothesisFailure(
            f"family misses robustness triples, e.g. {sorted(missing[0])}")
    result = build_tst_in_S(system, order, family, bound=bound, trust_rich=trust_rich)
    tree = result.tree
    # tangle nodes of the pruned tree = non-leaves with no forbidden-leaf child
    forbidden_leaves = {l for l, c in result.leaf_classes.items()
                        if c.kind == LEAF_FORBIDDEN}
    nodes = []
    for v in tree.nodes():
        if tree.is_leaf(v):
            continue
        if not any(w in forbidden_leaves for w in tree.children[v]):
            nodes.append(v)
    # cross-check against the recursive tangle-node reading
    has_tangle_below = {}
    for v in sorted(tree.nodes(), key=lambda u: -len(tree.beta(u))):
        if tree.is_leaf(v):
            has_tangle_below[v] = result.leaf_classes[v].kind == LEAF_TANGLE
        else:
            has_tangle_below[v] = any(has_tangle_below[w] for w in tree.children[v])
    recursive = [v for v in tree.nodes() if not tree.is_leaf(v)
                 and all(has_tangle_below[w] for w in tree.children[v])]
    assert nodes == recursive, "two readings of tangle nodes disagree"
    maximal = maximal_tangles_in(system, family, order, bound=bound)
    return ToTInSResult(
        distinguishers=frozenset(tree.node_sep(v) for v in nodes),
        tree=tree,
        tangle_nodes=nodes,
        leaf_classes=result.leaf_classes,
        maximal_tangles=maximal,
    )


# -- validation ---------------------------------------------------------------------


@dataclass
class ToTReport:
    ok: bool
    nested: bool
    crossing_pairs: list
    undistinguished: list      # (i, j) tangle-index pairs missing an optimal member
    missing: list              # oracle separations absent from N
    extra: list                # N separations absent from the oracle set


def verify_tot(system, order, distinguishers, tangles) -> ToTReport:
    """Nestedness, pairwise optimal distinguishing, and exact oracle equality."""
    n = frozenset(distinguishers)
    crossing = system.crossing_pairs(
        [h for s in n for h in system.orientations(s)])
    rep = distinguisher_report(system, order, tangles)
    undistinguished = [
        pair for pair, pr in rep.pairs.items()
        if pr.distinguishers and not (pr.optimal & n)
    ]
    missing = sorted(rep.optimal_union - n)
    extra = sorted(n - rep.optimal_union)
    ok = not crossing and not undistinguished and not missing and not extra
    return ToTReport(ok=ok, nested=not crossing, crossing_pairs=crossing,
                     undistinguished=undistinguished, missing=missing, extra=extra)
