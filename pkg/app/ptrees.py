"""
Signatures and P-Trees

Trees decorated by a finitary signature: every edge carries a colour, every
node carries an operation whose output colour is the colour of the edge
below it and whose input colours, in order, are the colours of the edges
above it. Forests of such trees are the objects the tree coalgebra splits.

Key features:
- Signature validation with positions such as ops[1].in[0]
- Bare edges (nodeless trees) and corollas are ordinary objects
- Node order with leaves minimal, so layer 1 is the crown side
- Root part and crown of a cut as restrictions to up- and down-closed node sets
- Enumeration of all trees up to a node count, for every root colour

Trees are rigid because inputs are ordered; a forest's automorphisms only
permute identical components.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from math import factorial, prod
from typing import Any, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from app.errors import BoundError, StructureError
from app.forests import RootedForest, forest_cuts
from app.groupoids import IsoClass
from app.posets import Poset, down_closed_subsets, weak_compositions

logger = logging.getLogger(__name__)

PTREE_ENUMERATION_LIMIT = 7
RESERVED_CHARACTERS = frozenset("()|,@;[] ")


def _check_name(name: Any, position: str) -> str:
    if not isinstance(name, str) or not name:
        raise StructureError("names must be nonempty strings", position)
    if RESERVED_CHARACTERS & set(name):
        raise StructureError(f"name {name!r} uses a reserved character", position)
    return name


@dataclass(frozen=True)
class Operation:
    name: str
    out: str
    inputs: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))

    @property
    def arity(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True)
class Signature:
    """
    A finitary signature: colours and operations with coloured inputs.

    Args:
        colors: Edge colours, nonempty and distinct
        ops: Operations whose colours are all drawn from colors
    """

    colors: Tuple[str, ...]
    ops: Tuple[Operation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(self.colors))
        object.__setattr__(self, "ops", tuple(self.ops))
        if not self.colors:
            raise StructureError("a signature needs at least one colour", "colors")
        for pos, color in enumerate(self.colors):
            _check_name(color, f"colors[{pos}]")
        if len(set(self.colors)) != len(self.colors):
            raise StructureError("colours must be distinct", "colors")
        names = set()
        for pos, op in enumerate(self.ops):
            _check_name(op.name, f"ops[{pos}].name")
            if op.name in names:
                raise StructureError(f"duplicate operation {op.name!r}", f"ops[{pos}].name")
            names.add(op.name)
            if op.out not in self.colors:
                raise StructureError(f"unknown colour {op.out!r}", f"ops[{pos}].out")
            for slot, color in enumerate(op.inputs):
                if color not in self.colors:
                    raise StructureError(f"unknown colour {color!r}", f"ops[{pos}].in[{slot}]")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Signature":
        """Build from {"colors": [...], "ops": [{"name", "out", "in"}]}."""
        ops = []
        for pos, entry in enumerate(data.get("ops", [])):
            try:
                ops.append(Operation(entry["name"], entry["out"], tuple(entry.get("in", ()))))
            except (KeyError, TypeError, AttributeError):
                raise StructureError("operation needs 'name' and 'out'", f"ops[{pos}]")
        return cls(tuple(data.get("colors", ())), tuple(ops))

    def to_json(self) -> Dict[str, Any]:
        return {
            "colors": list(self.colors),
            "ops": [{"name": op.name, "out": op.out, "in": list(op.inputs)} for op in self.ops],
        }

    @cached_property
    def _by_name(self) -> Dict[str, Operation]:
        return {op.name: op for op in self.ops}

    def op(self, name: str) -> Operation:
        try:
            return self._by_name[name]
        except KeyError:
            raise StructureError(f"unknown operation {name!r}")

    def edge(self, color: str) -> "PTree":
        if color not in self.colors:
            raise StructureError(f"unknown colour {color!r}")
        return PTree(color)

    def node(self, name: str, children: Sequence["PTree"] = ()) -> "PTree":
        """A validated tree with an op-decorated root node."""
        tree = PTree(self.op(name).out, name, tuple(children))
        tree.validate(self)
        return tree

    def corolla(self, name: str) -> "PTree":
        op = self.op(name)
        return PTree(op.out, name, tuple(PTree(c) for c in op.inputs))


@dataclass(frozen=True)
class PTree:
    """
    A P-tree: either a bare edge of some colour, or a node decorated by an
    operation with one subtree per input.
    """

    color: str
    op: Optional[str] = None
    children: Tuple["PTree", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.op is None and self.children:
            raise StructureError("a bare edge has no children")

    @property
    def is_edge(self) -> bool:
        return self.op is None

    @cached_property
    def node_count(self) -> int:
        if self.is_edge:
            return 0
        return 1 + sum(c.node_count for c in self.children)

    def validate(self, signature: Signature, path: str = "root") -> None:
        """
        Check colours and arities against a signature.

        Raises:
            StructureError: With the path of the offending node
        """
        if self.color not in signature.colors:
            raise StructureError(f"unknown colour {self.color!r}", path)
        if self.is_edge:
            return
        op = signature.op(self.op)
        if op.out != self.color:
            raise StructureError(f"operation {op.name!r} outputs {op.out!r}, edge below is {self.color!r}", path)
        if len(self.children) != op.arity:
            raise StructureError(f"operation {op.name!r} takes {op.arity} inputs, got {len(self.children)}", path)
        for slot, (child, color) in enumerate(zip(self.children, op.inputs)):
            if child.color != color:
                raise StructureError(f"input {slot} of {op.name!r} expects colour {color!r}, got {child.color!r}", f"{path}.children[{slot}]")
            child.validate(signature, f"{path}.children[{slot}]")

    def serialize(self, layers: Optional[Iterator[int]] = None) -> str:
        """Text form; with layers, each node consumes the next value in preorder."""
        if self.is_edge:
            return f"|{self.color}"
        head = self.op if layers is None else f"{self.op}@{next(layers)}"
        return head + "(" + ",".join(c.serialize(layers) for c in self.children) + ")"

    def to_json(self) -> Any:
        if self.is_edge:
            return {"edge": self.color}
        return {"op": self.op, "children": [c.to_json() for c in self.children]}


@dataclass(frozen=True)
class PForest:
    """
    A finite forest of P-trees, nodes numbered in preorder across components.

    The node order has leaves minimal: a node lies below its ancestors.
    """

    trees: Tuple[PTree, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))

    @classmethod
    def of(cls, *trees: PTree) -> "PForest":
        return cls(tuple(trees))

    @cached_property
    def n(self) -> int:
        return sum(t.node_count for t in self.trees)

    @property
    def size(self) -> int:
        return self.n

    @cached_property
    def lower_sets(self) -> Tuple[FrozenSet[int], ...]:
        """Descendant nodes of every node."""
        below: List[FrozenSet[int]] = [frozenset()] * self.n
        counter = [0]

        def walk(t: PTree) -> List[int]:
            if t.is_edge:
                return []
            me = counter[0]
            counter[0] += 1
            descendants: List[int] = []
            for c in t.children:
                descendants.extend(walk(c))
            below[me] = frozenset(descendants)
            return [me] + descendants

        for t in self.trees:
            walk(t)
        return tuple(below)

    def order_pairs(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset((d, x) for x in range(self.n) for d in self.lower_sets[x])

    def underlying_poset(self) -> Poset:
        return Poset(self.n, self.order_pairs())

    def restrict_up(self, elements: Sequence[int]) -> "PForest":
        """
        Root part on an up-closed set of nodes.

        Every component keeps its root edge; dropped subtrees become bare
        leaf edges of their colour.
        """
        keep = set(elements)
        position = [0]

        def root_part(t: PTree) -> PTree:
            if t.is_edge:
                return t
            me = position[0]
            if me not in keep:
                position[0] += t.node_count
                return PTree(t.color)
            position[0] += 1
            return PTree(t.color, t.op, tuple(root_part(c) for c in t.children))

        return PForest(tuple(root_part(t) for t in self.trees))

    def restrict_down(self, elements: Sequence[int]) -> "PForest":
        """
        Crown on a down-closed set of nodes: one component per leaf edge of
        the root part that remains when these nodes are removed.
        """
        keep = set(elements)
        position = [0]
        crown: List[PTree] = []

        def collect(t: PTree) -> None:
            if t.is_edge:
                crown.append(t)
                return
            me = position[0]
            if me in keep:
                position[0] += t.node_count
                crown.append(t)
                return
            position[0] += 1
            for c in t.children:
                collect(c)

        for t in self.trees:
            collect(t)
        return PForest(tuple(crown))

    def _form(self, layer_of: Optional[Sequence[int]]) -> Tuple[str, int]:
        layers = None if layer_of is None else iter(layer_of)
        parts = [t.serialize(layers) for t in self.trees]
        aut = prod(factorial(m) for m in Counter(parts).values())
        return ";".join(sorted(parts)), aut

    @cached_property
    def _iso_class(self) -> IsoClass:
        code, aut = self._form(None)
        return IsoClass(f"T[{code}]", aut, self.n)

    def canonical_form(self) -> IsoClass:
        return self._iso_class

    def layered_form(self, layer_of: Sequence[int], depth: int) -> IsoClass:
        code, aut = self._form(layer_of)
        return IsoClass(f"T{depth}[{code}]", aut, self.n)

    def is_corolla_forest(self) -> bool:
        """Every component is a bare edge or a single corolla."""
        return all(t.node_count <= 1 for t in self.trees)

    def to_json(self) -> Any:
        if len(self.trees) == 1:
            return self.trees[0].to_json()
        return {"forest": [t.to_json() for t in self.trees]}


@lru_cache(maxsize=None)
def _trees(signature: Signature, color: str, nodes: int) -> Tuple[PTree, ...]:
    if nodes == 0:
        return (PTree(color),)
    found = []
    for op in signature.ops:
        if op.out != color:
            continue
        for parts in weak_compositions(nodes - 1, op.arity):
            for kids in product(*(_trees(signature, c, m) for c, m in zip(op.inputs, parts))):
                found.append(PTree(color, op.name, kids))
    return tuple(found)


def enumerate_ptrees(signature: Signature, n_max: int) -> List[PForest]:
    """
    Every P-tree with at most n_max nodes, any root colour, bare edges included.

    Args:
        signature (Signature): Decorating signature
        n_max (int): Largest node count

    Returns:
        list: One-component forests sorted by canonical key

    Raises:
        BoundError: If n_max is negative or above PTREE_ENUMERATION_LIMIT
    """
    if not 0 <= n_max <= PTREE_ENUMERATION_LIMIT:
        raise BoundError(f"P-tree enumeration supports sizes 0..{PTREE_ENUMERATION_LIMIT}, got {n_max}")
    found: Dict[str, PForest] = {}
    for nodes in range(n_max + 1):
        for color in signature.colors:
            for tree in _trees(signature, color, nodes):
                forest = PForest.of(tree)
                found.setdefault(forest.canonical_form().key, forest)
    logger.debug("enumerated %d P-trees with at most %d nodes", len(found), n_max)
    return [found[k] for k in sorted(found)]


Cuttable = Union[PTree, PForest, RootedForest]


def tree_cuts(tree: Cuttable) -> List[Tuple[Any, Any]]:
    """
    All admissible cuts of a P-tree, P-forest or rooted forest.

    Returns:
        list: (crown, root part) pairs, the trivial cuts included
    """
    if isinstance(tree, RootedForest):
        return forest_cuts(tree)
    forest = PForest.of(tree) if isinstance(tree, PTree) else tree
    cuts = []
    for down in down_closed_subsets(forest):
        rest = [x for x in range(forest.n) if x not in down]
        cuts.append((forest.restrict_down(sorted(down)), forest.restrict_up(rest)))
    return cuts
