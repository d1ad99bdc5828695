"""Separation trees and tangle structure trees.

A separation tree is rooted; every non-leaf's child edges carry the one or
two orientations of a single separation (one only when it is degenerate),
no separation repeats along a root path, and every path label set is
consistent.  A tangle structure tree additionally classifies every leaf as a
tangle leaf or a forbidden leaf and keeps forbidden subsets off non-leaf
paths.

The thorough builder expands nodes with the minimum-order separation not yet
oriented by the path closure, which makes the tree the unique thoroughly
ordered structure tree when the order function is injective.  Reduction to
an irreducible tree is done by validator-gated local moves; see
reduce_irreducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import iter_mask, mask_of
from .errors import (
    BoundExceeded,
    HypothesisFailure,
    NonInjectiveOrder,
    NotStandard,
    ReductionStuck,
    RichnessViolation,
    SystemValidationError,
    UnknownHandle,
)
from .forbidden import avoids, is_rich, is_standard, order_thresholds
from .universe import restrict_Sk

TREE_SCHEMA = "tanglekit/tree-v1"

LEAF_TANGLE = "tangle"
LEAF_FORBIDDEN = "forbidden"
LEAF_UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class LeafClass:
    kind: str
    witness: frozenset  # the tangle closure, or the forbidden subset


class SeparationTree:
    """Rooted tree with oriented-separation edge labels; immutable after build."""

    def __init__(self, system, parent, children, edge_label):
        self.system = system
        self.parent = tuple(parent)
        self.children = tuple(tuple(c) for c in children)
        self.edge_label = tuple(edge_label)
        roots = [v for v, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise SystemValidationError("tree-single-root", witness=roots)
        self.root = roots[0]
        self._beta = {}

    def __len__(self):
        return len(self.parent)

    def nodes(self):
        return range(len(self.parent))

    def is_leaf(self, v) -> bool:
        return not self.children[v]

    def leaves(self):
        return [v for v in self.nodes() if self.is_leaf(v)]

    def node_sep(self, v):
        """Canonical handle of the separation a non-leaf orients; None at leaves."""
        if self.is_leaf(v):
            return None
        return self.system.sep(self.edge_label[self.children[v][0]])

    def beta(self, v) -> frozenset:
        """Edge labels on the root path to v (the set beta_v)."""
        if v not in self._beta:
            out, w = [], v
            while self.parent[w] >= 0:
                out.append(self.edge_label[w])
                w = self.parent[w]
            self._beta[v] = frozenset(out)
        return self._beta[v]

    def beta_mask(self, v) -> int:
        return mask_of(self.beta(v))

    def descendants(self, v):
        out, stack = [], [v]
        while stack:
            w = stack.pop()
            out.append(w)
            stack.extend(self.children[w])
        return out

    def tree_infimum(self, a, b):
        """The deepest common ancestor of two nodes."""
        anc = set()
        w = a
        while w >= 0:
            anc.add(w)
            w = self.parent[w]
        w = b
        while w not in anc:
            w = self.parent[w]
        return w

    def to_json(self, leaf_classes=None) -> dict:
        obj = {
            "schema": TREE_SCHEMA,
            "root": self.root,
            "nodes": [{"id": v, "children": list(self.children[v])}
                      for v in self.nodes()],
            "beta": {str(v): self.edge_label[v]
                     for v in self.nodes() if self.parent[v] >= 0},
        }
        if leaf_classes is not None:
            obj["leafClass"] = {
                str(v): {"kind": c.kind, "witness": sorted(c.witness)}
                for v, c in sorted(leaf_classes.items())
            }
        return obj

    @classmethod
    def from_json(cls, system, obj) -> "SeparationTree":
        n = len(obj["nodes"])
        parent = [-1] * n
        children = [[] for _ in range(n)]
        for entry in obj["nodes"]:
            children[entry["id"]] = list(entry["children"])
            for c in entry["children"]:
                parent[c] = entry["id"]
        labels = [-1] * n
        for v, h in obj.get("beta", {}).items():
            labels[int(v)] = h
        return cls(system, parent, children, labels)

    def __repr__(self):
        return f"<SeparationTree {len(self)} nodes, {len(self.leaves())} leaves>"


# -- validation ----------------------------------------------------------------


@dataclass
class TstReport:
    ok: bool
    failures: list  # (node, reason) pairs
    leaf_classes: dict = field(default_factory=dict)


def _family_subset_of(family, members: frozenset):
    """Lexicographically first family member inside ``members``, else None."""
    hits = [s for s in family.sets if s <= members]
    if not hits:
        return None
    return min(hits, key=lambda s: (len(s), sorted(s)))


def classify_leaf(tree, family, leaf) -> LeafClass:
    sys = tree.system
    beta = tree.beta(leaf)
    hit = _family_subset_of(family, beta)
    cl = frozenset(iter_mask(sys.closure_mask(mask_of(beta))))
    if sys.is_consistent(cl) and sys.is_orientation(cl) and avoids(cl, family):
        return LeafClass(LEAF_TANGLE, cl)
    if hit is not None:
        return LeafClass(LEAF_FORBIDDEN, hit)
    return LeafClass(LEAF_UNRESOLVED, frozenset())


def validate_separation_tree(tree) -> list:
    """Structural failures: edge bijections, repeats on root paths, consistency."""
    sys = tree.system
    failures = []
    for v in tree.nodes():
        if not tree.is_leaf(v):
            labels = [tree.edge_label[c] for c in tree.children[v]]
            if any(not sys.contains(h) for h in labels):
                failures.append((v, "label-not-a-member"))
                continue
            seps = {sys.sep(h) for h in labels}
            if len(seps) != 1:
                failures.append((v, "children-orient-different-separations"))
                continue
            want = set(sys.orientations(next(iter(seps))))
            if sorted(labels) != sorted(want) or len(labels) != len(want):
                failures.append((v, "edge-labels-not-a-bijection"))
        if not sys.is_consistent(tree.beta(v)):
            failures.append((v, "path-labels-inconsistent"))
    for leaf in tree.leaves():
        seen = set()
        w = leaf
        while w >= 0:
            s = tree.node_sep(w)
            if s is not None:
                if s in seen and (w, "separation-repeats-on-path") not in failures:
                    failures.append((w, "separation-repeats-on-path"))
                seen.add(s)
            w = tree.parent[w]
    return failures


def validate_tst(tree, family) -> TstReport:
    """Full tangle-structure-tree check with per-node witnesses."""
    failures = list(validate_separation_tree(tree))
    classes = {}
    for leaf in tree.leaves():
        c = classify_leaf(tree, family, leaf)
        classes[leaf] = c
        if c.kind == LEAF_UNRESOLVED:
            failures.append((leaf, "leaf-neither-tangle-nor-forbidden"))
    for v in tree.nodes():
        if not tree.is_leaf(v) and _family_subset_of(family, tree.beta(v)):
            failures.append((v, "forbidden-subset-at-non-leaf"))
    return TstReport(ok=not failures, failures=failures, leaf_classes=classes)


def beta_path(tree, v) -> frozenset:
    if v not in range(len(tree)):
        raise UnknownHandle(v)
    return tree.beta(v)


def is_ordered(tree, order) -> bool:
    for v in tree.nodes():
        sv = tree.node_sep(v)
        if sv is None:
            continue
        w = tree.parent[v]
        while w >= 0:
            su = tree.node_sep(w)
            if su is not None and not order.of(su) <= order.of(sv):
                return False
            w = tree.parent[w]
    return True


def is_thoroughly_ordered(tree, order) -> bool:
    sys = tree.system
    for v in tree.nodes():
        sv = tree.node_sep(v)
        if sv is None:
            continue
        cl = sys.closure_mask(tree.beta_mask(v))
        oriented = {sys.sep(h) for h in iter_mask(cl)}
        if sv in oriented:
            return False
        unoriented = [s for s in sys.seps() if s not in oriented]
        if order.of(sv) != min(order.of(s) for s in unoriented):
            return False
    return True


# -- the thorough builder ---------------------------------------------------------


def build_thorough_tst(system, order, family, bound=20) -> SeparationTree:
    """The thoroughly ordered tangle structure tree of the member separations.

    Node rule: a forbidden subset inside the path closes a forbidden leaf;
    otherwise the path closure either orients everything (tangle leaf, or a
    RichnessViolation diagnostic when it fails to avoid the family) or the
    minimum-order unoriented separation is attached as child edges.
    Deterministic: children in oriented-handle order, ids in stack order.
    """
    if len(system.seps()) > bound:
        raise BoundExceeded(f"{len(system.seps())} separations exceed bound {bound}")
    if not order.is_injective_on(system):
        raise NonInjectiveOrder("order function not injective on the system")
    ok, missing = is_standard(family, system)
    if not ok:
        raise NotStandard(f"missing co-trivial singletons {sorted(map(sorted, missing))}")

    parent, children, edge_label = [-1], [[]], [-1]
    seps = system.seps()
    stack = [(0, 0)]  # (node, beta mask)
    while stack:
        v, beta = stack.pop()
        if _family_subset_of(family, frozenset(iter_mask(beta))) is not None:
            continue  # forbidden leaf
        cl = system.closure_mask(beta)
        assert system.is_consistent(set(iter_mask(cl))), "closure of a standard-safe path"
        oriented = {system.sep(h) for h in iter_mask(cl)}
        unoriented = [s for s in seps if s not in oriented]
        if not unoriented:
            if avoids(frozenset(iter_mask(cl)), family):
                continue  # tangle leaf
            hit = _family_subset_of(family, frozenset(iter_mask(cl)))
            raise RichnessViolation(frozenset(iter_mask(cl)), hit)
        s = min(unoriented, key=lambda t: (order.of(t), t))
        kids = []
        for h in system.orientations(s):
            w = len(parent)
            parent.append(v)
            children.append([])
            edge_label.append(h)
            kids.append(w)
            assert system.is_consistent(set(iter_mask(beta | (1 << h))))
        children[v] = kids
        for w in reversed(kids):
            stack.append((w, beta | (1 << edge_label[w])))
    return SeparationTree(system, parent, children, edge_label)


def display(tree, tau):
    """The unique leaf whose path labels sit inside the orientation ``tau``."""
    sys = tree.system
    tau = frozenset(tau)
    if not sys.is_orientation(tau):
        raise SystemValidationError("not-an-orientation", witness=sorted(tau))
    v = tree.root
    while not tree.is_leaf(v):
        nxt = [w for w in tree.children[v] if tree.edge_label[w] in tau]
        assert len(nxt) == 1, "orientation picks exactly one child"
        v = nxt[0]
    return v


def is_efficient_tree(tree, order) -> bool:
    """Every leaf's path set is efficient in its own closure."""
    from .forbidden import is_efficient

    sys = tree.system
    for leaf in tree.leaves():
        beta = tree.beta(leaf)
        cl = frozenset(iter_mask(sys.closure_mask(mask_of(beta))))
        if not is_efficient(sys, order, beta, cl):
            return False
    return True


# -- necessity and reduction --------------------------------------------------------


@dataclass
class NecessityReport:
    edge_necessary_for: dict   # child node -> list of leaves the edge is necessary for
    node_necessary: dict       # non-leaf node -> bool
    irreducible: bool
    leaf_classes: dict


def necessity(tree, family, order=None) -> NecessityReport:
    """Per-edge and per-node necessity flags (edges are keyed by child node)."""
    sys = tree.system
    classes = {leaf: classify_leaf(tree, family, leaf) for leaf in tree.leaves()}
    leaf_subsets = {}
    for leaf, c in classes.items():
        if c.kind == LEAF_FORBIDDEN:
            beta = tree.beta(leaf)
            leaf_subsets[leaf] = [s for s in family.sets if s <= beta]
    edge_necessary_for = {v: [] for v in tree.nodes() if tree.parent[v] >= 0}
    for leaf, c in classes.items():
        beta = tree.beta(leaf)
        w = leaf
        while tree.parent[w] >= 0:
            x = tree.edge_label[w]
            if c.kind == LEAF_TANGLE:
                needed = not any(sys.lt(y, x) for y in beta)
            elif c.kind == LEAF_FORBIDDEN:
                needed = all(x in s for s in leaf_subsets[leaf])
            else:
                needed = False
            if needed:
                edge_necessary_for[w].append(leaf)
            w = tree.parent[w]
    node_necessary = {}
    for v in tree.nodes():
        if tree.is_leaf(v):
            continue
        node_necessary[v] = all(edge_necessary_for[w] for w in tree.children[v])
    return NecessityReport(
        edge_necessary_for=edge_necessary_for,
        node_necessary=node_necessary,
        irreducible=all(node_necessary.values()),
        leaf_classes=classes,
    )


def is_irreducible(tree, family) -> bool:
    return necessity(tree, family).irreducible


def displayed_tangles(tree, family) -> frozenset:
    """The set of tangles displayed at the tree's tangle leaves."""
    return frozenset(
        c.witness for c in (classify_leaf(tree, family, l) for l in tree.leaves())
        if c.kind == LEAF_TANGLE
    )


def _canonical_tree(system, root, kids_of, label_of) -> SeparationTree:
    """Renumber a tree given as dicts into DFS order with label-sorted children."""
    parent, children, labels = [], [], []
    stack = [(root, -1, -1)]
    while stack:
        old, par_new, lab = stack.pop()
        new = len(parent)
        parent.append(par_new)
        labels.append(lab)
        children.append([])
        if par_new >= 0:
            children[par_new].append(new)
        for w in sorted(kids_of[old], key=lambda u: label_of[u], reverse=True):
            stack.append((w, new, label_of[w]))
    return SeparationTree(system, parent, children, labels)


def _contract_move(tree, v, keep_child) -> SeparationTree:
    """Contract the edge v--keep_child and drop the sibling subtrees of v."""
    drop = set()
    for w in tree.children[v]:
        if w != keep_child:
            drop.update(tree.descendants(w))
    kids_of, label_of = {}, {}
    for u in tree.nodes():
        if u in drop or u == keep_child:
            continue
        label_of[u] = tree.edge_label[u]
        kids_of[u] = (list(tree.children[keep_child]) if u == v
                      else list(tree.children[u]))
    for w in tree.children[keep_child]:
        label_of[w] = tree.edge_label[w]
    return _canonical_tree(tree.system, tree.root, kids_of, label_of)


def reduce_irreducible(tree, family, order) -> SeparationTree:
    """Irreducible reduction by validator-gated edge contractions.

    Candidate move: an unnecessary node v with a child w none of whose leaves
    need the edge vw; contract vw and delete the sibling subtree.  A move is
    kept only if the result is still a TST, ordered, efficient, and displays
    exactly the same tangles.  Repeats to a fixpoint; raises ReductionStuck
    if the tree is still reducible but no move validates.
    """
    target_tangles = displayed_tangles(tree, family)
    current = tree
    while True:
        rep = necessity(current, family)
        if rep.irreducible:
            return current
        moved = False
        for v in sorted(rep.node_necessary):
            if rep.node_necessary[v]:
                continue
            for w in current.children[v]:
                if rep.edge_necessary_for[w]:
                    continue
                cand = _contract_move(current, v, w)
                if not validate_tst(cand, family).ok:
                    continue
                if not is_ordered(cand, order) or not is_efficient_tree(cand, order):
                    continue
                if displayed_tangles(cand, family) != target_tangles:
                    continue
                current = cand
                moved = True
                break
            if moved:
                break
        if not moved:
            raise ReductionStuck("reducible tree admits no validated local move")


# -- layered trees (structure trees in S->) --------------------------------------


@dataclass
class TstInS:
    tree: SeparationTree
    leaf_classes: dict
    bare_root: bool
    thresholds: list


def _leaf_class_in_s(tree, family, order, leaf) -> LeafClass:
    """Def-6.9 leaf classification: maximal tangles in the whole system.

    The tangle at an ex-non-leaf lives in S_k for k the least order not
    oriented by the path closure; maximality is certified intrinsically by
    both one-step extensions being forbidden.
    """
    sys = tree.system
    beta = tree.beta(leaf)
    hit = _family_subset_of(family, beta)
    if hit is not None:
        return LeafClass(LEAF_FORBIDDEN, hit)
    cl = frozenset(iter_mask(sys.closure_mask(mask_of(beta))))
    if not sys.is_consistent(cl):
        return LeafClass(LEAF_UNRESOLVED, frozenset())
    oriented = {sys.sep(h) for h in cl}
    unoriented = [s for s in sys.seps() if s not in oriented]
    if not unoriented:
        if avoids(cl, family):
            return LeafClass(LEAF_TANGLE, cl)
        return LeafClass(LEAF_UNRESOLVED, frozenset())
    k = min(order.of(s) for s in unoriented)
    tau = frozenset(h for h in cl if order.of(h) < k)
    sub = restrict_Sk(sys, order, k)
    if not sub.is_orientation(tau) or not avoids(tau, family):
        return LeafClass(LEAF_UNRESOLVED, frozenset())
    s = min(unoriented, key=lambda t: (order.of(t), t))
    for h in sys.orientations(s):
        if _family_subset_of(family, beta | {h}) is None:
            return LeafClass(LEAF_UNRESOLVED, frozenset())
    return LeafClass(LEAF_TANGLE, tau)


def check_rich_per_layer(system, order, family, bound=20, trust_rich=False):
    """F must be rich and standard for every S_k; returns the threshold list."""
    ks = order_thresholds(system, order)
    for k in ks:
        sub = restrict_Sk(system, order, k)
        ok, missing = is_standard(family, sub)
        if not ok:
            raise NotStandard(f"not standard for S_{k}: {sorted(map(sorted, missing))}")
        if not trust_rich:
            rich, witness = is_rich(sub, family, order, bound=bound)
            if not rich:
                raise HypothesisFailure(
                    f"family not rich for S_{k}; counterexample {sorted(witness)}")
    return ks


def build_tst_in_S(system, order, family, bound=20, trust_rich=False) -> TstInS:
    """Layered structure tree: the full thorough tree minus forbidden leaf pairs.

    Leaves classify per the maximal-tangle notion; sibling forbidden-leaf
    pairs are deleted in a single pass.  The degenerate bare-root outcome
    (no tangles at any level) is flagged explicitly.
    """
    ks = check_rich_per_layer(system, order, family, bound=bound, trust_rich=trust_rich)
    full = build_thorough_tst(system, order, family, bound=bound)
    classes = {l: classify_leaf(full, family, l) for l in full.leaves()}
    drop = set()
    for v in full.nodes():
        kids = full.children[v]
        if len(kids) == 2 and all(
                full.is_leaf(w) and classes[w].kind == LEAF_FORBIDDEN for w in kids):
            drop.update(kids)
    keep = [u for u in full.nodes() if u not in drop]
    remap = {u: i for i, u in enumerate(keep)}
    parent = [remap.get(full.parent[u], -1) if full.parent[u] >= 0 else -1 for u in keep]
    children = [[remap[w] for w in full.children[u] if w not in drop] for u in keep]
    labels = [full.edge_label[u] for u in keep]
    pruned = SeparationTree(system, parent, children, labels)
    leaf_classes = {l: _leaf_class_in_s(pruned, family, order, l)
                    for l in pruned.leaves()}
    return TstInS(
        tree=pruned,
        leaf_classes=leaf_classes,
        bare_root=len(pruned) == 1,
        thresholds=ks,
    )


def validate_tst_in_s(result: TstInS, family, order, bound=20) -> TstReport:
    """Oracle-grade validation of a layered tree per the maximal-tangle notion."""
    from .forbidden import maximal_tangles_in

    tree = result.tree
    failures = list(validate_separation_tree(tree))
    maximal = {t.elements for t in
               maximal_tangles_in(tree.system, family, order, bound=bound)}
    for leaf, c in result.leaf_classes.items():
        if c.kind == LEAF_FORBIDDEN:
            continue
        if c.kind == LEAF_UNRESOLVED:
            failures.append((leaf, "leaf-neither-tangle-nor-forbidden"))
        elif c.witness not in maximal:
            failures.append((leaf, "tangle-leaf-not-a-maximal-tangle"))
    for v in tree.nodes():
        if not tree.is_leaf(v) and _family_subset_of(family, tree.beta(v)):
            failures.append((v, "forbidden-subset-at-non-leaf"))
    return TstReport(ok=not failures, failures=failures,
                     leaf_classes=result.leaf_classes)
