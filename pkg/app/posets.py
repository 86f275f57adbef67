"""
Finite Posets, Finite Sets and Layerings

This module holds the combinatorics every other module stands on: finite
posets given by their strict order, finite sets, and n-layerings (monotone
maps to the ordinal {1..n}) of either. Canonical keys and automorphism
orders come from brute-force labeling over colour cells.

Key features:
- Validated construction (irreflexive, transitive) with networkx for cover input
- Canonical labeling: iterated colour refinement, then permutations within cells
- Layerings with face maps (join or delete layers) and degeneracies (empty layers)
- Down-closed subsets, nonempty-layer counts and exhaustive enumeration

Layers are numbered from bottom to top: every element of layer i lies in
or below layer i+1 along the order.
"""

import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import permutations, product
from math import comb, factorial, prod
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple

import networkx as nx

from app.errors import BoundError, StructureError
from app.groupoids import IsoClass

logger = logging.getLogger(__name__)

# Largest number of candidate labelings tried for one canonical form
MAX_LABELINGS = int(os.getenv("DECOMP_MOBIUS_MAX_LABELINGS", "1000000"))
# Exhaustive poset enumeration guard
POSET_ENUMERATION_LIMIT = 7


def _ranks(values: Sequence) -> List[int]:
    table = {v: r for r, v in enumerate(sorted(set(values)))}
    return [table[v] for v in values]


def _refined_colors(n: int, lower: Sequence[Sequence[int]], upper: Sequence[Sequence[int]], colors: Sequence[int]) -> List[int]:
    """Split colour classes by the colours below and above until stable."""
    ranks = _ranks([(colors[x], len(lower[x]), len(upper[x])) for x in range(n)])
    for _ in range(n + 1):
        signature = [
            (ranks[x], tuple(sorted(ranks[y] for y in lower[x])), tuple(sorted(ranks[y] for y in upper[x])))
            for x in range(n)
        ]
        refined = _ranks(signature)
        if len(set(refined)) == len(set(ranks)):
            return refined
        ranks = refined
    return ranks


def canonical_labeling(n: int, relations: Iterable[Tuple[int, int]], colors: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, int], ...], int]:
    """
    Canonical relabeling of a coloured strict order.

    Colours are refined by their neighbourhoods; every ordering of the
    elements that lists colour cells in rank order is tried, and the
    lexicographically least relation code wins. The minimisers form one
    orbit of the automorphism group, so their number is |Aut|.

    Args:
        n (int): Number of elements
        relations: Pairs (i, j) meaning i strictly below j
        colors: One comparable colour per element (e.g. its layer)

    Returns:
        tuple: (colours by position, relation code, automorphism order)

    Raises:
        BoundError: If the search space exceeds MAX_LABELINGS
    """
    relations = list(relations)
    lower: List[List[int]] = [[] for _ in range(n)]
    upper: List[List[int]] = [[] for _ in range(n)]
    for i, j in relations:
        lower[j].append(i)
        upper[i].append(j)
    ranks = _refined_colors(n, lower, upper, colors)
    cells = [[x for x in range(n) if ranks[x] == r] for r in sorted(set(ranks))]
    total = prod(factorial(len(c)) for c in cells)
    if total > MAX_LABELINGS:
        raise BoundError(f"canonical labeling would try {total} orderings (limit {MAX_LABELINGS})")

    best = None
    count = 0
    position = [0] * n
    for choice in product(*(permutations(c) for c in cells)):
        p = 0
        for block in choice:
            for x in block:
                position[x] = p
                p += 1
        code = sorted((position[i], position[j]) for i, j in relations)
        if best is None or code < best:
            best, count = code, 1
        elif code == best:
            count += 1
    return tuple(sorted(colors)), tuple(best or ()), count


def _code_text(code: Sequence[Tuple[int, int]]) -> str:
    return ",".join(f"{i}<{j}" for i, j in code)


@dataclass(frozen=True)
class Poset:
    """A finite poset on elements 0..n-1 given by its strict order relation."""

    n: int
    relations: FrozenSet[Tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "relations", frozenset((int(i), int(j)) for i, j in self.relations))
        if self.n < 0:
            raise StructureError(f"element count must be non-negative, got {self.n}")
        for i, j in self.relations:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise StructureError("relation endpoint out of range", (i, j))
            if i == j:
                raise StructureError("relation is not irreflexive", i)
        lower = self.lower_sets
        for i, j in self.relations:
            for h in lower[i]:
                if (h, j) not in self.relations:
                    raise StructureError("relation is not transitive", (h, i, j))

    @classmethod
    def from_covers(cls, n: int, covers: Iterable[Sequence[int]]) -> "Poset":
        """
        Build a poset from generating pairs, taking the transitive closure.

        Args:
            n (int): Element count
            covers: Pairs [i, j] meaning i strictly below j

        Returns:
            Poset: The generated order

        Raises:
            StructureError: On out-of-range endpoints, loops or cycles
        """
        graph = nx.DiGraph()
        graph.add_nodes_from(range(n))
        for pos, pair in enumerate(covers):
            i, j = pair
            if not (0 <= i < n and 0 <= j < n):
                raise StructureError("cover endpoint out of range", f"covers[{pos}]")
            if i == j:
                raise StructureError("cover relates an element to itself", f"covers[{pos}]")
            graph.add_edge(i, j)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            path = " -> ".join(str(u) for u, _ in cycle) + f" -> {cycle[0][0]}"
            raise StructureError("covers contain a cycle, the relation is not antisymmetric", path)
        closure = nx.transitive_closure_dag(graph)
        return cls(n, frozenset(closure.edges()))

    @property
    def size(self) -> int:
        return self.n

    @cached_property
    def lower_sets(self) -> Tuple[FrozenSet[int], ...]:
        below: Dict[int, set] = defaultdict(set)
        for i, j in self.relations:
            below[j].add(i)
        return tuple(frozenset(below[x]) for x in range(self.n))

    @cached_property
    def upper_sets(self) -> Tuple[FrozenSet[int], ...]:
        above: Dict[int, set] = defaultdict(set)
        for i, j in self.relations:
            above[i].add(j)
        return tuple(frozenset(above[x]) for x in range(self.n))

    def strictly_below(self, i: int, j: int) -> bool:
        return (i, j) in self.relations

    def order_pairs(self) -> FrozenSet[Tuple[int, int]]:
        return self.relations

    def underlying_poset(self) -> "Poset":
        return self

    def covers(self) -> List[Tuple[int, int]]:
        """Cover relations (transitive reduction), sorted."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.relations)
        return sorted(nx.transitive_reduction(graph).edges())

    def to_json(self) -> Dict[str, Any]:
        return {"n": self.n, "covers": [list(c) for c in self.covers()]}

    def restrict(self, elements: Sequence[int]) -> "Poset":
        """Induced order on the given elements, relabelled in the order given."""
        index = {x: p for p, x in enumerate(elements)}
        return Poset(len(index), frozenset(
            (index[i], index[j]) for i, j in self.relations if i in index and j in index
        ))

    # convex restrictions coincide for posets
    restrict_down = restrict
    restrict_up = restrict

    @cached_property
    def _iso_class(self) -> IsoClass:
        _, code, aut = canonical_labeling(self.n, self.relations, [0] * self.n)
        return IsoClass(f"P{self.n}:{_code_text(code)}", aut, self.n)

    def canonical_form(self) -> IsoClass:
        return self._iso_class

    def layered_form(self, layer_of: Sequence[int], depth: int) -> IsoClass:
        """Class of a layering of this poset, isomorphism over the identity of {1..depth}."""
        palette, code, aut = canonical_labeling(self.n, self.relations, layer_of)
        sizes = ".".join(str(palette.count(l)) for l in range(1, depth + 1))
        return IsoClass(f"C{depth}:{sizes}:{_code_text(code)}", aut, self.n)


@dataclass(frozen=True)
class FiniteSetObj:
    """A finite set with n elements."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise StructureError(f"element count must be non-negative, got {self.n}")

    @property
    def size(self) -> int:
        return self.n

    @property
    def relations(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset()

    @property
    def lower_sets(self) -> Tuple[FrozenSet[int], ...]:
        return (frozenset(),) * self.n

    def order_pairs(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset()

    def underlying_poset(self) -> Poset:
        return Poset(self.n)

    def to_json(self) -> Dict[str, Any]:
        return {"n": self.n}

    def restrict(self, elements: Sequence[int]) -> "FiniteSetObj":
        return FiniteSetObj(len(elements))

    restrict_down = restrict
    restrict_up = restrict

    def canonical_form(self) -> IsoClass:
        return IsoClass(f"S{self.n}", factorial(self.n), self.n)

    def layered_form(self, layer_of: Sequence[int], depth: int) -> IsoClass:
        sizes = [list(layer_of).count(l) for l in range(1, depth + 1)]
        return IsoClass(f"I{depth}:{'.'.join(map(str, sizes))}", prod(factorial(s) for s in sizes), self.n)


@dataclass(frozen=True)
class Layering:
    """
    A monotone map from a structure to {1..depth}.

    The base is a Poset, a FiniteSetObj or any structure with the same
    interface: n, lower_sets, order_pairs, restrict_down and
    restrict_up (keep a down-closed or up-closed subset, relabelled in
    increasing order), canonical_form and layered_form.
    """

    base: Any
    depth: int
    layer_of: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "layer_of", tuple(int(l) for l in self.layer_of))
        if self.depth < 0:
            raise StructureError(f"depth must be non-negative, got {self.depth}")
        if len(self.layer_of) != self.base.n:
            raise StructureError(f"layering assigns {len(self.layer_of)} layers to {self.base.n} elements")
        for x, l in enumerate(self.layer_of):
            if not 1 <= l <= self.depth:
                raise StructureError(f"layer {l} outside 1..{self.depth}", x)
        for i, j in self.base.order_pairs():
            if self.layer_of[i] > self.layer_of[j]:
                raise StructureError("layering is not monotone", (i, j))

    @classmethod
    def single(cls, base: Any) -> "Layering":
        """The 1-layering of a structure (every element in layer 1)."""
        return cls(base, 1, (1,) * base.n)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "Layering":
        """Layered finite set with the given layer sizes."""
        layer_of = tuple(l for l, count in enumerate(sizes, 1) for _ in range(count))
        return cls(FiniteSetObj(len(layer_of)), len(sizes), layer_of)

    @property
    def size(self) -> int:
        return self.base.n

    def layer(self, i: int) -> Tuple[int, ...]:
        if not 1 <= i <= self.depth:
            raise StructureError(f"layer index {i} outside 1..{self.depth}")
        return tuple(x for x, l in enumerate(self.layer_of) if l == i)

    def layer_sizes(self) -> Tuple[int, ...]:
        return tuple(self.layer_of.count(l) for l in range(1, self.depth + 1))

    def is_nondegenerate(self) -> bool:
        return all(self.layer_sizes())

    def face(self, i: int) -> "Layering":
        """
        Face map d_i: delete layer 1 (i=0), delete the top layer (i=depth),
        otherwise join layers i and i+1.
        """
        k = self.depth
        if k == 0 or not 0 <= i <= k:
            raise StructureError(f"face d_{i} undefined on a {k}-layering")
        if i == 0:
            keep = [x for x, l in enumerate(self.layer_of) if l >= 2]
            layers = [self.layer_of[x] - 1 for x in keep]
        elif i == k:
            keep = [x for x, l in enumerate(self.layer_of) if l <= k - 1]
            layers = [self.layer_of[x] for x in keep]
        else:
            keep = list(range(self.base.n))
            layers = [l - 1 if l > i else l for l in self.layer_of]
        if len(keep) == self.base.n and 0 < i < k:
            base = self.base
        elif i == 0:
            base = self.base.restrict_up(keep)
        else:
            base = self.base.restrict_down(keep)
        return Layering(base, k - 1, tuple(layers))

    def degeneracy(self, i: int) -> "Layering":
        """Degeneracy s_i: insert an empty layer at position i+1."""
        if not 0 <= i <= self.depth:
            raise StructureError(f"degeneracy s_{i} undefined on a {self.depth}-layering")
        return Layering(self.base, self.depth + 1, tuple(l + 1 if l > i else l for l in self.layer_of))

    @cached_property
    def _iso_class(self) -> IsoClass:
        if self.depth == 1:
            return self.base.canonical_form()
        return self.base.layered_form(self.layer_of, self.depth)

    def canonical_form(self) -> IsoClass:
        """Class up to layer-preserving isomorphism; 1-layerings share the base key."""
        return self._iso_class


def canonical_form(x: Any) -> IsoClass:
    """Canonical (key, aut_order) of any structure of this package."""
    return x.canonical_form()


def discrete_poset(n: int) -> Poset:
    return Poset(n)


def chain_poset(n: int) -> Poset:
    return Poset(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def weak_compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered tuples of non-negative integers with the given sum."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def _linear_extension(lower: Sequence[FrozenSet[int]]) -> List[int]:
    # strict down-sets grow along the order
    return sorted(range(len(lower)), key=lambda x: (len(lower[x]), x))


def _monotone_maps(lower: Sequence[FrozenSet[int]], depth: int) -> Iterator[Tuple[int, ...]]:
    n = len(lower)
    order = _linear_extension(lower)
    assignment = [0] * n

    def extend(idx: int) -> Iterator[Tuple[int, ...]]:
        if idx == n:
            yield tuple(assignment)
            return
        x = order[idx]
        start = max((assignment[y] for y in lower[x]), default=1)
        for l in range(start, depth + 1):
            assignment[x] = l
            yield from extend(idx + 1)
        assignment[x] = 0

    yield from extend(0)


def layerings(x: Any, depth: int) -> List[Layering]:
    """
    All monotone maps from x to {1..depth}, layers allowed to be empty.

    Args:
        x: Poset, FiniteSetObj or another base structure
        depth (int): Number of layers

    Returns:
        list: Every labelled layering (one per map)
    """
    if depth < 0:
        raise StructureError(f"depth must be non-negative, got {depth}")
    if depth == 0:
        return [Layering(x, 0, ())] if x.n == 0 else []
    return [Layering(x, depth, m) for m in _monotone_maps(x.lower_sets, depth)]


def _down_closed_masks(lower: Sequence[FrozenSet[int]]) -> List[int]:
    n = len(lower)
    need = [sum(1 << y for y in lower[x]) for x in range(n)]
    return [
        mask for mask in range(1 << n)
        if all(need[x] & mask == need[x] for x in range(n) if mask >> x & 1)
    ]


def down_closed_subsets(p: Any) -> List[FrozenSet[int]]:
    """
    All subsets S with x in S and y below x implying y in S.

    Returns:
        list: frozensets sorted by size, then by elements
    """
    subsets = [frozenset(x for x in range(p.n) if mask >> x & 1) for mask in _down_closed_masks(p.lower_sets)]
    return sorted(subsets, key=lambda s: (len(s), sorted(s)))


def nonempty_layerings_count(x: Any, depth: int) -> int:
    """
    Number of depth-layerings of x with every layer nonempty.

    Counts strict chains of down-closed subsets from the empty set to the
    whole structure; each step is one layer.
    """
    if depth < 0:
        raise StructureError(f"depth must be non-negative, got {depth}")
    if not any(x.lower_sets):
        # no relations: ordered partitions into depth blocks (surjections)
        return sum((-1) ** j * comb(depth, j) * (depth - j) ** x.n for j in range(depth + 1))
    downs = _down_closed_masks(x.lower_sets)
    counts: Dict[int, int] = {0: 1}
    for _ in range(depth):
        step: Dict[int, int] = defaultdict(int)
        for below, ways in counts.items():
            for mask in downs:
                if mask != below and mask & below == below:
                    step[mask] += ways
        counts = step
    return counts.get((1 << x.n) - 1, 0)


def restrict(p: Poset, subset: Iterable[int]) -> Poset:
    return p.restrict(sorted(subset))


def disjoint_union(a: Poset, b: Poset) -> Poset:
    """Elements of b follow those of a; no relations across."""
    shifted = {(i + a.n, j + a.n) for i, j in b.relations}
    return Poset(a.n + b.n, frozenset(a.relations | shifted))


def ordinal_sum(a: Poset, b: Poset) -> Poset:
    """Like disjoint_union, with every element of a below every element of b."""
    across = {(i, a.n + j) for i in range(a.n) for j in range(b.n)}
    return Poset(a.n + b.n, disjoint_union(a, b).relations | across)


def isolated_points(p: Poset) -> FrozenSet[int]:
    return frozenset(x for x in range(p.n) if not p.lower_sets[x] and not p.upper_sets[x])


def is_discrete(p: Poset) -> bool:
    return not p.relations


def discrete_part_of_layer(layering: Layering, i: int) -> FrozenSet[int]:
    """Elements of layer i comparable to nothing in the whole base poset."""
    isolated = isolated_points(layering.base.underlying_poset())
    return frozenset(x for x in layering.layer(i) if x in isolated)


@lru_cache(maxsize=None)
def _poset_levels(n_max: int) -> Tuple[Tuple[Poset, ...], ...]:
    if n_max == 0:
        return ((Poset(0),),)
    levels = _poset_levels(n_max - 1)
    found: Dict[str, Poset] = {}
    top = n_max - 1
    for q in levels[-1]:
        for down in down_closed_subsets(q):
            candidate = Poset(n_max, q.relations | {(d, top) for d in down})
            found.setdefault(candidate.canonical_form().key, candidate)
    logger.debug("enumerated %d posets of size %d", len(found), n_max)
    return levels + (tuple(found[k] for k in sorted(found)),)


def enumerate_posets(n_max: int) -> List[Poset]:
    """
    One poset per isomorphism class, sizes 0..n_max.

    Every poset with n elements arises from one with n-1 elements by adding
    a new maximal element over a down-closed subset.

    Raises:
        BoundError: If n_max is negative or above POSET_ENUMERATION_LIMIT
    """
    if not 0 <= n_max <= POSET_ENUMERATION_LIMIT:
        raise BoundError(f"poset enumeration supports sizes 0..{POSET_ENUMERATION_LIMIT}, got {n_max}")
    return [p for level in _poset_levels(n_max) for p in level]
