"""
Rooted Forests

Rooted forests as a directed restriction species: a forest is a parent
array, its underlying poset is the ancestor order with roots minimal, and
restricting to a down-closed or up-closed set of nodes is again a forest.

Key features:
- Parent-array forests with cycle and range validation
- AHU-style canonical codes for plain and layered forests
- Automorphism orders from sibling multiplicities
- Exhaustive enumeration by adding a root or a leaf
- Admissible cuts as (crown, root part) pairs
"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import factorial, prod
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

from app.errors import BoundError, StructureError
from app.groupoids import IsoClass
from app.posets import Poset, down_closed_subsets

logger = logging.getLogger(__name__)

FOREST_ENUMERATION_LIMIT = 7


@dataclass(frozen=True)
class RootedForest:
    """
    A rooted forest on nodes 0..n-1.

    Args:
        parent: parent[x] is the parent of node x, or None for a root
    """

    parent: Tuple[Optional[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "parent", tuple(None if p is None else int(p) for p in self.parent))
        n = len(self.parent)
        for x, p in enumerate(self.parent):
            if p is None:
                continue
            if not 0 <= p < n:
                raise StructureError(f"parent {p} out of range", f"parent[{x}]")
            if p == x:
                raise StructureError("node is its own parent", f"parent[{x}]")
        for x in range(n):
            seen = {x}
            p = self.parent[x]
            while p is not None:
                if p in seen:
                    raise StructureError("parent array contains a cycle", f"parent[{x}]")
                seen.add(p)
                p = self.parent[p]

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def size(self) -> int:
        return self.n

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: Dict[int, List[int]] = {x: [] for x in range(self.n)}
        for x, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(x)
        return tuple(tuple(kids[x]) for x in range(self.n))

    @property
    def roots(self) -> Tuple[int, ...]:
        return tuple(x for x, p in enumerate(self.parent) if p is None)

    @cached_property
    def lower_sets(self) -> Tuple[FrozenSet[int], ...]:
        """Proper ancestors of every node (roots are minimal)."""
        ancestors = []
        for x in range(self.n):
            chain = set()
            p = self.parent[x]
            while p is not None:
                chain.add(p)
                p = self.parent[p]
            ancestors.append(frozenset(chain))
        return tuple(ancestors)

    def order_pairs(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset((a, x) for x in range(self.n) for a in self.lower_sets[x])

    def underlying_poset(self) -> Poset:
        return Poset(self.n, self.order_pairs())

    def is_isolated_roots(self) -> bool:
        return all(p is None for p in self.parent)

    def to_json(self) -> Dict[str, Any]:
        return {"parent": list(self.parent)}

    def restrict(self, elements: Sequence[int]) -> "RootedForest":
        """
        Induced forest on a convex set of nodes, relabelled in the order given.

        A node whose parent is dropped becomes a root; on convex subsets no
        kept node has a dropped node between it and a kept ancestor.
        """
        index = {x: pos for pos, x in enumerate(elements)}
        return RootedForest(tuple(
            index[self.parent[x]] if self.parent[x] in index else None for x in elements
        ))

    restrict_down = restrict
    restrict_up = restrict

    def _codes(self, layer_of: Optional[Sequence[int]] = None) -> Tuple[str, int]:
        memo: Dict[int, Tuple[str, int]] = {}

        def visit(x: int) -> Tuple[str, int]:
            if x in memo:
                return memo[x]
            parts = [visit(c) for c in self.children[x]]
            counts = Counter(code for code, _ in parts)
            aut = prod(a for _, a in parts) * prod(factorial(m) for m in counts.values())
            head = "" if layer_of is None else str(layer_of[x])
            memo[x] = (head + "(" + "".join(sorted(code for code, _ in parts)) + ")", aut)
            return memo[x]

        tops = [visit(r) for r in self.roots]
        counts = Counter(code for code, _ in tops)
        aut = prod(a for _, a in tops) * prod(factorial(m) for m in counts.values())
        return "".join(sorted(code for code, _ in tops)), aut

    @cached_property
    def _iso_class(self) -> IsoClass:
        code, aut = self._codes()
        return IsoClass(f"F{code}", aut, self.n)

    def canonical_form(self) -> IsoClass:
        return self._iso_class

    def layered_form(self, layer_of: Sequence[int], depth: int) -> IsoClass:
        code, aut = self._codes(layer_of)
        return IsoClass(f"R{depth}:{code}", aut, self.n)


def isolated_roots(n: int) -> RootedForest:
    return RootedForest((None,) * n)


def forest_to_poset(forest: RootedForest) -> Poset:
    """The culf map from forests to posets on 1-layered objects."""
    return forest.underlying_poset()


@lru_cache(maxsize=None)
def _forest_levels(n_max: int) -> Tuple[Tuple[RootedForest, ...], ...]:
    if n_max == 0:
        return ((RootedForest(()),),)
    levels = _forest_levels(n_max - 1)
    found: Dict[str, RootedForest] = {}
    for f in levels[-1]:
        # a new root, or a new leaf under any node
        for p in (None,) + tuple(range(f.n)):
            candidate = RootedForest(f.parent + (p,))
            found.setdefault(candidate.canonical_form().key, candidate)
    logger.debug("enumerated %d forests of size %d", len(found), n_max)
    return levels + (tuple(found[k] for k in sorted(found)),)


def enumerate_forests(n_max: int) -> List[RootedForest]:
    """
    One rooted forest per isomorphism class, sizes 0..n_max.

    Raises:
        BoundError: If n_max is negative or above FOREST_ENUMERATION_LIMIT
    """
    if not 0 <= n_max <= FOREST_ENUMERATION_LIMIT:
        raise BoundError(f"forest enumeration supports sizes 0..{FOREST_ENUMERATION_LIMIT}, got {n_max}")
    return [f for level in _forest_levels(n_max) for f in level]


def forest_cuts(forest: RootedForest) -> List[Tuple[RootedForest, RootedForest]]:
    """Admissible cuts as (crown, root part); the root part is ancestor-closed."""
    cuts = []
    for down in down_closed_subsets(forest):
        crown = [x for x in range(forest.n) if x not in down]
        cuts.append((forest.restrict(crown), forest.restrict(sorted(down))))
    return cuts
