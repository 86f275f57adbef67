"""
The Layered-Sets-and-Posets Bicomodule

B_{i,j} is the groupoid of pairs (S -> i, P -> j+1): an i-layered finite
set next to a (j+1)-layered finite poset. Rows are the lower decalage of
layered posets, columns are layered sets, and the abacus map
f: B_{i+1,j} -> B_{i,j+1} moves the last set layer into a new, discrete,
first poset layer. Replacing the top vertical face by d̲_0 f gives the
modified bisimplicial groupoid whose augmentations make B a bicomodule
configuration between layered sets and layered posets.

Key features:
- LayeredPair objects with canonical keys "B{i},{j}:{set sizes}|{poset key}"
- Every structure map as an object-level function, with groupoid maps on top
- Abacus axioms, modified bisimplicial identities, fibrations, stability,
  culf augmentations and the Möbius conditions as Reports
- Coactions γ_l, γ_r, the functionals δ^L, δ^R and the Rota identity check
- Mutations (ordinal sum, unmodified top face, within-layer discreteness,
  pruned classes) as negative controls

Layers run bottom to top; the poset layer 1 is the one the abacus feeds.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.coalgebra import FormalSum, Functional, corpus_map, coproduct, mobius_closed_form, mobius_table
from app.errors import StructureError
from app.groupoids import (
    FiniteGroupoid,
    GroupoidMap,
    IsoClass,
    Square,
    fiber_cardinality,
    monomorphism_witness,
    pullback_witness,
)
from app.posets import (
    FiniteSetObj,
    Layering,
    Poset,
    discrete_part_of_layer,
    enumerate_posets,
    isolated_points,
    layerings,
    nonempty_layerings_count,
    weak_compositions,
)
from app.reports import Report
from app.simplicial import (
    SimplicialInstance,
    SimplicialMap,
    check_segal,
    check_simplicial_identities,
    culf_report,
    instance_C,
    instance_I,
)

logger = logging.getLogger(__name__)

# Classes removed by the drop-class negative control, per target.
# ({x}; empty poset) in B_{1,0} breaks the fibration squares;
# ({x}; empty 2-layered poset) in B_{1,1} breaks the stable squares.
DROPPED_CLASS = ((1, 0), "B1,0:1|P0:")
DROPPED_STABLE_CLASS = ((1, 1), "B1,1:1|C2:0.0:")


def _restrict(layering: Layering, keep: Sequence[int]) -> Layering:
    base = layering.base.underlying_poset().restrict(keep)
    return Layering(base, layering.depth, tuple(layering.layer_of[x] for x in keep))


@dataclass(frozen=True)
class LayeredPair:
    """
    An object of B_{i,j}.

    Args:
        set_part: Layering of a FiniteSetObj, depth i
        poset_part: Layering of a Poset, depth j+1 (at least 1)
    """

    set_part: Layering
    poset_part: Layering

    def __post_init__(self):
        if not isinstance(self.set_part.base, FiniteSetObj):
            raise StructureError("set part must layer a finite set")
        if not isinstance(self.poset_part.base, Poset):
            raise StructureError("poset part must layer a poset")
        if self.poset_part.depth < 1:
            raise StructureError("poset part needs at least one layer")

    @classmethod
    def build(cls, set_sizes: Sequence[int], poset: Poset, layer_of: Optional[Sequence[int]] = None, depth: Optional[int] = None) -> "LayeredPair":
        """Pair from set layer sizes and a poset layering (default: one layer)."""
        if layer_of is None:
            layer_of = (1,) * poset.n
        if depth is None:
            depth = max(layer_of, default=1)
        return cls(Layering.from_sizes(set_sizes), Layering(poset, depth, tuple(layer_of)))

    @property
    def i(self) -> int:
        return self.set_part.depth

    @property
    def j(self) -> int:
        return self.poset_part.depth - 1

    @property
    def size(self) -> int:
        return self.set_part.size + self.poset_part.size

    @cached_property
    def _iso_class(self) -> IsoClass:
        s = self.set_part.canonical_form()
        p = self.poset_part.canonical_form()
        sizes = ".".join(str(n) for n in self.set_part.layer_sizes())
        return IsoClass(f"B{self.i},{self.j}:{sizes}|{p.key}", s.aut_order * p.aut_order, self.size)

    def canonical_form(self) -> IsoClass:
        return self._iso_class


def set_layerings(total: int, depth: int) -> List[Layering]:
    """One layering per class: the layered sets with the given size and depth."""
    return [Layering.from_sizes(sizes) for sizes in weak_compositions(total, depth)]


class BoxProduct:
    """
    The bisimplicial groupoid of layered sets beside layered posets, with
    its abacus map.

    Args:
        ordinal_sum (bool): Attach the moved layer below all of P instead of
                            beside it
        unmodified_top (bool): Keep the plain top vertical face (delete the
                               last set layer)
        layer_discrete (bool): The left pointing moves points isolated within
                               the bottom layer only
        dropped: Classes to remove, by bidegree
    """

    def __init__(self, ordinal_sum: bool = False, unmodified_top: bool = False, layer_discrete: bool = False,
                 dropped: Optional[Mapping[Tuple[int, int], Iterable[str]]] = None):
        self.ordinal_sum = ordinal_sum
        self.unmodified_top = unmodified_top
        self.layer_discrete = layer_discrete
        self.dropped = {k: frozenset(v) for k, v in (dropped or {}).items()}
        self.strict = not self.dropped
        self._groupoids: Dict[Tuple[int, int, int], Tuple[FiniteGroupoid, Dict[str, Any]]] = {}
        self._maps: Dict[Tuple[str, int, int, int], GroupoidMap] = {}

    @property
    def name(self) -> str:
        flags = [n for n, on in (("ordinal-sum", self.ordinal_sum), ("unmodified-top", self.unmodified_top),
                                  ("layer-discrete", self.layer_discrete), ("drop-class", bool(self.dropped))) if on]
        return "bicomodule" + "".join(f"[{f}]" for f in flags)

    # -- objects ------------------------------------------------------------

    def objects(self, i: int, j: int, bound: int) -> List[LayeredPair]:
        """Pairs in B_{i,j} with total size at most bound."""
        gone = self.dropped.get((i, j), frozenset())
        found = []
        posets = enumerate_posets(bound)
        for m in range(bound + 1):
            sets = set_layerings(m, i)
            for p in posets:
                if p.n > bound - m:
                    continue
                for s in sets:
                    for layering in layerings(p, j + 1):
                        pair = LayeredPair(s, layering)
                        if pair.canonical_form().key not in gone:
                            found.append(pair)
        return found

    def canon(self, x: Any) -> IsoClass:
        return x.canonical_form()

    def _classified(self, i: int, j: int, bound: int) -> Tuple[FiniteGroupoid, Dict[str, Any]]:
        if (i, j, bound) not in self._groupoids:
            self._groupoids[(i, j, bound)] = FiniteGroupoid.from_objects(self.objects(i, j, bound), self.canon)
            logger.debug("B_{%d,%d} up to size %d: %d classes", i, j, bound, len(self._groupoids[(i, j, bound)][0]))
        return self._groupoids[(i, j, bound)]

    def groupoid(self, i: int, j: int, bound: int) -> FiniteGroupoid:
        return self._classified(i, j, bound)[0]

    def representatives(self, i: int, j: int, bound: int) -> Dict[str, LayeredPair]:
        return self._classified(i, j, bound)[1]

    # -- structure maps -----------------------------------------------------

    def horizontal_face(self, k: int, x: LayeredPair) -> LayeredPair:
        """d̲_k = id x d_{k+1}: join poset layers k+1, k+2, or delete the top one."""
        if not 0 <= k <= x.j or x.j < 1:
            raise StructureError(f"horizontal face {k} undefined on B_{{{x.i},{x.j}}}")
        return LayeredPair(x.set_part, x.poset_part.face(k + 1))

    def horizontal_degeneracy(self, k: int, x: LayeredPair) -> LayeredPair:
        """s̲_k = id x s_{k+1}."""
        if not 0 <= k <= x.j:
            raise StructureError(f"horizontal degeneracy {k} undefined on B_{{{x.i},{x.j}}}")
        return LayeredPair(x.set_part, x.poset_part.degeneracy(k + 1))

    def vertical_face(self, k: int, x: LayeredPair) -> LayeredPair:
        """e_k on the set part; the top index k = i gives the (modified) top face."""
        if not 0 <= k <= x.i or x.i < 1:
            raise StructureError(f"vertical face {k} undefined on B_{{{x.i},{x.j}}}")
        if k == x.i:
            return self.top_face(x)
        return LayeredPair(x.set_part.face(k), x.poset_part)

    def vertical_degeneracy(self, k: int, x: LayeredPair) -> LayeredPair:
        """t_k: insert an empty set layer."""
        return LayeredPair(x.set_part.degeneracy(k), x.poset_part)

    def abacus(self, x: LayeredPair) -> LayeredPair:
        """
        f: B_{i+1,j} -> B_{i,j+1}.

        The last set layer becomes a new first poset layer, its points
        indexed before those of P and comparable to nothing (below all of P
        under the ordinal-sum mutation).
        """
        s, p = x.set_part, x.poset_part
        if s.depth < 1:
            raise StructureError("the abacus map needs a set layer to move")
        m = len(s.layer(s.depth))
        base = p.base
        relations = {(a + m, b + m) for a, b in base.relations}
        if self.ordinal_sum:
            relations |= {(a, m + b) for a in range(m) for b in range(base.n)}
        poset = Poset(m + base.n, frozenset(relations))
        layer_of = (1,) * m + tuple(l + 1 for l in p.layer_of)
        return LayeredPair(s.face(s.depth), Layering(poset, p.depth + 1, layer_of))

    def modified_top_face(self, x: LayeredPair) -> LayeredPair:
        """ẽ_⊤ = d̲_0 f: the last set layer joins poset layer 1 as isolated points."""
        return self.horizontal_face(0, self.abacus(x))

    def top_face(self, x: LayeredPair) -> LayeredPair:
        if self.unmodified_top:
            return LayeredPair(x.set_part.face(x.i), x.poset_part)
        return self.modified_top_face(x)

    def bottom_pointing(self, x: LayeredPair) -> LayeredPair:
        """s_{-1} = id x s_0: an empty bottom poset layer."""
        return LayeredPair(x.set_part, x.poset_part.degeneracy(0))

    def discrete_part(self, x: LayeredPair) -> FrozenSet[int]:
        """Points of poset layer 1 that the left pointing moves."""
        if not self.layer_discrete:
            return discrete_part_of_layer(x.poset_part, 1)
        layer = set(x.poset_part.layer(1))
        base = x.poset_part.base
        return frozenset(a for a in layer if not (base.lower_sets[a] | base.upper_sets[a]) & layer)

    def top_pointing(self, x: LayeredPair) -> LayeredPair:
        """t_{⊤+1}: the discrete part of poset layer 1 becomes a new top set layer."""
        moved = self.discrete_part(x)
        keep = [a for a in range(x.poset_part.size) if a not in moved]
        s = x.set_part
        new_set = Layering(FiniteSetObj(s.size + len(moved)), s.depth + 1, s.layer_of + (s.depth + 1,) * len(moved))
        return LayeredPair(new_set, _restrict(x.poset_part, keep))

    def u(self, x: LayeredPair) -> Layering:
        """Augmentation B_{i,0} -> I_i: the set part."""
        if x.j != 0:
            raise StructureError("u is defined on B_{i,0}")
        return x.set_part

    def v(self, x: LayeredPair) -> Layering:
        """Augmentation B_{0,j} -> C_j: delete poset layer 1."""
        if x.i != 0:
            raise StructureError("v is defined on B_{0,j}")
        return x.poset_part.face(0)

    def left_augmented_abacus(self, s: Layering) -> LayeredPair:
        """f_{i,-1}: I_{i+1} -> B_{i,0}; the last set layer becomes a discrete poset."""
        if s.depth < 1:
            raise StructureError("the abacus map needs a set layer to move")
        m = len(s.layer(s.depth))
        return LayeredPair(s.face(s.depth), Layering(Poset(m), 1, (1,) * m))

    def right_augmented_abacus(self, x: LayeredPair) -> Layering:
        """f_{-1,j}: B_{0,j} -> C_{j+1}; forget the empty set part."""
        if x.i != 0:
            raise StructureError("f_{-1,j} is defined on B_{0,j}")
        return x.poset_part

    # -- groupoid maps ------------------------------------------------------

    def groupoid_map(self, name: str, source: Tuple[int, int], target: Tuple[int, int],
                     func: Callable[[LayeredPair], LayeredPair], bound: int, faithful: bool = True) -> GroupoidMap:
        cache = (name, source[0], source[1], bound)
        if cache not in self._maps:
            self._maps[cache] = GroupoidMap.from_objects(
                self.groupoid(*source, bound), self.representatives(*source, bound),
                self.groupoid(*target, bound), func, self.canon,
                faithful=faithful, name=name, strict=self.strict,
            )
        return self._maps[cache]

    def row(self, i: int) -> "RowInstance":
        return RowInstance(self, i)

    def column(self, j: int) -> "ColumnInstance":
        return ColumnInstance(self, j)


class RowInstance(SimplicialInstance):
    """Row i of B: degree j is B_{i,j}, faces d̲_k, degeneracies s̲_k."""

    def __init__(self, box: BoxProduct, i: int):
        super().__init__(f"row{i}({box.name})")
        self.box = box
        self.i = i
        self.strict = box.strict

    def objects(self, j: int, bound: int) -> List[LayeredPair]:
        return self.box.objects(self.i, j, bound)

    def groupoid(self, j: int, bound: int) -> FiniteGroupoid:
        self._check_degree(j)
        return self.box.groupoid(self.i, j, bound)

    def representatives(self, j: int, bound: int) -> Dict[str, Any]:
        return self.box.representatives(self.i, j, bound)

    def face(self, k: int, i: int, x: LayeredPair) -> LayeredPair:
        return self.box.horizontal_face(i, x)

    def degeneracy(self, k: int, i: int, x: LayeredPair) -> LayeredPair:
        return self.box.horizontal_degeneracy(i, x)

    def canon(self, x: Any) -> IsoClass:
        return x.canonical_form()

    def is_deleting_face(self, k: int, i: int) -> bool:
        return i == k


class ColumnInstance(SimplicialInstance):
    """Column j of B: degree i is B_{i,j}, faces e_k and the top face, degeneracies t_k."""

    def __init__(self, box: BoxProduct, j: int):
        super().__init__(f"column{j}({box.name})")
        self.box = box
        self.j = j
        self.strict = box.strict

    def objects(self, i: int, bound: int) -> List[LayeredPair]:
        return self.box.objects(i, self.j, bound)

    def groupoid(self, i: int, bound: int) -> FiniteGroupoid:
        self._check_degree(i)
        return self.box.groupoid(i, self.j, bound)

    def representatives(self, i: int, bound: int) -> Dict[str, Any]:
        return self.box.representatives(i, self.j, bound)

    def face(self, k: int, i: int, x: LayeredPair) -> LayeredPair:
        return self.box.vertical_face(i, x)

    def degeneracy(self, k: int, i: int, x: LayeredPair) -> LayeredPair:
        return self.box.vertical_degeneracy(i, x)

    def canon(self, x: Any) -> IsoClass:
        return x.canonical_form()

    def is_deleting_face(self, k: int, i: int) -> bool:
        return i == 0 or (self.box.unmodified_top and i == k)


# -- pointwise checks ------------------------------------------------------

def _key(x: Any) -> str:
    return x.canonical_form().key


def _pointwise(report: Report, id: str, items: Iterable[Tuple[str, Any]],
               lhs: Callable[[Any], Any], rhs: Callable[[Any], Any], expected: bool = True) -> None:
    """Record whether lhs(x) and rhs(x) are isomorphic for every object."""
    for name, x in items:
        left, right = _key(lhs(x)), _key(rhs(x))
        if left != right:
            report.add(id, False, {"object": name, "left": left, "right": right}, expected)
            return
    report.add(id, True, None, expected)


def _record(report: Report, id: str, square: Square, bound: int, graded: bool = False, expected: bool = True) -> None:
    witness = pullback_witness(square, graded=graded, bound=bound)
    report.add(id, witness is None, witness, expected)


def check_abacus_axioms(box: BoxProduct, size_bound: int, i_max: int = 2, j_max: int = 2) -> Report:
    """
    The abacus axioms, pointwise on every class up to the bounds:

    (a) f commutes with horizontal faces and degeneracies, shifted by one
    (b) f commutes with e_k (k < i) and t_k (k <= i)
    (c) d̲_0 f t_⊤ = id
    (d) f e_{⊤-1} = d̲_0 f f and ẽ_⊤ = d̲_0 f
    (e) every modified column is simplicial
    plus the augmented abacus identities for u and v.
    """
    report = Report(box.name, "abacus")
    b = size_bound
    reps = lambda i, j: sorted(box.representatives(i, j, b).items())
    f = box.abacus
    for i in range(0, i_max):
        for j in range(0, j_max):
            items = reps(i + 1, j)
            if j >= 1:
                for k in range(j + 1):
                    _pointwise(report, f"a/f.d{k}/i={i}/j={j}", items,
                               lambda x, k=k: f(box.horizontal_face(k, x)),
                               lambda x, k=k: box.horizontal_face(k + 1, f(x)))
            for k in range(j + 1):
                _pointwise(report, f"a/f.s{k}/i={i}/j={j}", items,
                           lambda x, k=k: f(box.horizontal_degeneracy(k, x)),
                           lambda x, k=k: box.horizontal_degeneracy(k + 1, f(x)))
            for k in range(i):
                _pointwise(report, f"b/f.e{k}/i={i}/j={j}", items,
                           lambda x, k=k: f(LayeredPair(x.set_part.face(k), x.poset_part)),
                           lambda x, k=k: LayeredPair(f(x).set_part.face(k), f(x).poset_part))
            for k in range(i + 1):
                _pointwise(report, f"b/f.t{k}/i={i}/j={j}", items,
                           lambda x, k=k: f(box.vertical_degeneracy(k, x)),
                           lambda x, k=k: box.vertical_degeneracy(k, f(x)))
    for i in range(0, i_max + 1):
        for j in range(0, j_max + 1):
            items = reps(i, j)
            _pointwise(report, f"c/d0.f.ttop/i={i}/j={j}", items,
                       lambda x: box.horizontal_face(0, f(box.vertical_degeneracy(x.i, x))),
                       lambda x: x)
            if i >= 1:
                _pointwise(report, f"d/top=d0.f/i={i}/j={j}", items,
                           lambda x: box.vertical_face(x.i, x),
                           lambda x: box.horizontal_face(0, f(x)))
            if i >= 2:
                _pointwise(report, f"d/f.e(top-1)=d0.f.f/i={i}/j={j}", items,
                           lambda x: f(LayeredPair(x.set_part.face(x.i - 1), x.poset_part)),
                           lambda x: box.horizontal_face(0, f(f(x))))
    for j in range(0, j_max + 1):
        report.extend(check_simplicial_identities(box.column(j), b, i_max), f"e/column{j}/")
    sets = instance_I()
    for i in range(0, i_max):
        _pointwise(report, f"aug/dtop.f=f.u/i={i}", reps(i + 1, 0),
                   lambda x: box.horizontal_face(1, f(x)),
                   lambda x: box.left_augmented_abacus(box.u(x)))
        _pointwise(report, f"aug/u.f=etop/i={i}", sorted(sets.representatives(i + 1, b).items()),
                   lambda s: box.u(box.left_augmented_abacus(s)),
                   lambda s: s.face(s.depth))
    for j in range(0, j_max):
        _pointwise(report, f"aug/v.f=f.e0/j={j}", reps(1, j),
                   lambda x: box.v(f(x)),
                   lambda x: box.right_augmented_abacus(LayeredPair(x.set_part.face(0), x.poset_part)))
    for j in range(0, j_max + 1):
        _pointwise(report, f"aug/v=d0.f/j={j}", reps(0, j),
                   lambda x: box.v(x),
                   lambda x: box.right_augmented_abacus(x).face(0))
    report.log_summary()
    return report


def check_modified_bisimplicial(box: BoxProduct, size_bound: int, i_max: int = 2, j_max: int = 2) -> Report:
    """
    Simplicial identities of every row and modified column, commutation of
    vertical with horizontal maps, and the sections ẽ_⊤ t_⊤ = id and
    ẽ_⊤ t_{⊤+1} = id.
    """
    report = Report(box.name, "bisimplicial")
    b = size_bound
    for i in range(0, i_max + 1):
        report.extend(check_simplicial_identities(box.row(i), b, j_max), f"row{i}/")
    for j in range(0, j_max + 1):
        report.extend(check_simplicial_identities(box.column(j), b, i_max), f"column{j}/")
    for i in range(0, i_max + 1):
        for j in range(0, j_max + 1):
            items = sorted(box.representatives(i, j, b).items())
            horizontal = [(f"d{k}", lambda x, k=k: box.horizontal_face(k, x)) for k in range(j + 1) if j >= 1]
            horizontal += [(f"s{k}", lambda x, k=k: box.horizontal_degeneracy(k, x)) for k in range(j + 1)]
            vertical = [(f"e{k}", lambda x, k=k: box.vertical_face(k, x)) for k in range(i + 1) if i >= 1]
            vertical += [(f"t{k}", lambda x, k=k: box.vertical_degeneracy(k, x)) for k in range(i + 1)]
            for hname, h in horizontal:
                for vname, v in vertical:
                    # vertical indices refer to the column degree, unchanged by h
                    _pointwise(report, f"commute/{vname}.{hname}/i={i}/j={j}", items,
                               lambda x, h=h, v=v: v(h(x)), lambda x, h=h, v=v: h(v(x)))
            _pointwise(report, f"section/etop.ttop/i={i}/j={j}", items,
                       lambda x: box.vertical_face(x.i + 1, box.vertical_degeneracy(x.i, x)), lambda x: x)
            _pointwise(report, f"section/etop.tplus/i={i}/j={j}", items,
                       lambda x: box.vertical_face(x.i + 1, box.top_pointing(x)), lambda x: x)
    report.log_summary()
    return report


def check_fibrations(box: BoxProduct, size_bound: int, i_max: int = 2, j_max: int = 2) -> Report:
    """
    f against e_0 (right fibration) and f against the horizontal faces
    (left fibration) as cardinality pullbacks.

    Against the top horizontal face the square is not a pullback once a
    two-element poset fits in the bound: deleting the top layer can make a
    point of layer 1 isolated. Those squares are entered with
    expected=False.
    """
    report = Report(box.name, "fibrations")
    b = size_bound
    f = box.abacus
    for i in range(1, i_max):
        for j in range(0, j_max):
            square = Square(
                box.groupoid_map(f"f{i},{j}", (i + 1, j), (i, j + 1), f, b),
                box.groupoid_map(f"e0@{i + 1},{j}", (i + 1, j), (i, j), lambda x: box.vertical_face(0, x), b, False),
                box.groupoid_map(f"e0@{i},{j + 1}", (i, j + 1), (i - 1, j + 1), lambda x: box.vertical_face(0, x), b, False),
                box.groupoid_map(f"f{i - 1},{j}", (i, j), (i - 1, j + 1), f, b),
                f"right-fibration/{i},{j}",
            )
            _record(report, f"right/f.e0/i={i}/j={j}", square, b)
    for i in range(0, i_max):
        for j in range(1, j_max):
            for k in range(j + 1):
                top = k == j
                square = Square(
                    box.groupoid_map(f"f{i},{j}", (i + 1, j), (i, j + 1), f, b),
                    box.groupoid_map(f"d{k}@{i + 1},{j}", (i + 1, j), (i + 1, j - 1),
                                     lambda x, k=k: box.horizontal_face(k, x), b, not top),
                    box.groupoid_map(f"d{k + 1}@{i},{j + 1}", (i, j + 1), (i, j),
                                     lambda x, k=k: box.horizontal_face(k + 1, x), b, not top),
                    box.groupoid_map(f"f{i},{j - 1}", (i + 1, j - 1), (i, j), f, b),
                    f"left-fibration/{i},{j},{k}",
                )
                _record(report, f"left/f.d{k}/i={i}/j={j}", square, b, expected=not (top and b >= 2))
    report.log_summary()
    return report


def check_bicomodule_configuration(box: BoxProduct, size_bound: int, i_max: int = 2, j_max: int = 2) -> Report:
    """
    Double Segal (rows and columns), the two stability squares, culf
    augmentations u and v, and the identities u ẽ_⊤ = e_⊤ u and
    v e_0 = v ẽ_1.

    The second stability square (modified top face against the top
    horizontal face) is expected to fail once a two-element poset fits in
    the bound.
    """
    report = Report(box.name, "bicomodule")
    b = size_bound
    for i in range(0, i_max + 1):
        report.extend(check_segal(box.row(i), b, j_max), f"segal/row{i}/")
    for j in range(0, j_max + 1):
        report.extend(check_segal(box.column(j), b, i_max), f"segal/column{j}/")
    stable_first = Square(
        box.groupoid_map("d0@1,1", (1, 1), (1, 0), lambda x: box.horizontal_face(0, x), b),
        box.groupoid_map("e0@1,1", (1, 1), (0, 1), lambda x: box.vertical_face(0, x), b, False),
        box.groupoid_map("e0@1,0", (1, 0), (0, 0), lambda x: box.vertical_face(0, x), b, False),
        box.groupoid_map("d0@0,1", (0, 1), (0, 0), lambda x: box.horizontal_face(0, x), b),
        "stable-bottom",
    )
    _record(report, "stable/d0.e0", stable_first, b)
    stable_second = Square(
        box.groupoid_map("etop@1,1", (1, 1), (0, 1), lambda x: box.vertical_face(1, x), b, not box.unmodified_top),
        box.groupoid_map("d1@1,1", (1, 1), (1, 0), lambda x: box.horizontal_face(1, x), b, False),
        box.groupoid_map("d1@0,1", (0, 1), (0, 0), lambda x: box.horizontal_face(1, x), b, False),
        box.groupoid_map("etop@1,0", (1, 0), (0, 0), lambda x: box.vertical_face(1, x), b, not box.unmodified_top),
        "stable-top",
    )
    _record(report, "stable/etop.dtop", stable_second, b, expected=b < 2)
    u_map = SimplicialMap("u", box.column(0), instance_I(), lambda k, x: box.u(x))
    v_map = SimplicialMap("v", box.row(0), instance_C(), lambda k, x: box.v(x))
    report.extend(culf_report(u_map, b, i_max), "culf/u/")
    report.extend(culf_report(v_map, b, j_max), "culf/v/")
    for i in range(1, i_max + 1):
        _pointwise(report, f"augmentation/u.etop=etop.u/i={i}", sorted(box.representatives(i, 0, b).items()),
                   lambda x: box.u(box.vertical_face(x.i, x)), lambda x: box.u(x).face(x.i))
    for j in range(0, j_max + 1):
        _pointwise(report, f"augmentation/v.e0=v.e1/j={j}", sorted(box.representatives(1, j, b).items()),
                   lambda x: box.v(box.vertical_face(0, x)), lambda x: box.v(box.vertical_face(1, x)))
    report.log_summary()
    return report


def _iterate(func: Callable[[Any], Any], times: int, x: Any) -> Any:
    for _ in range(times):
        x = func(x)
    return x


def _nondegenerate_fiber(box: BoxProduct, sources: Sequence[LayeredPair], step: Callable[[Any], Any],
                         times: int, base: LayeredPair) -> Fraction:
    """Fiber cardinality over base of the iterated map, on the given sources only."""
    domain, reps = FiniteGroupoid.from_objects(sources, box.canon)
    target = base.canonical_form()
    codomain = FiniteGroupoid((target,))
    on_classes = {k: _key(_iterate(step, times, x)) for k, x in reps.items()}
    return fiber_cardinality(GroupoidMap(domain, codomain, on_classes, None, "iterated", strict=False), target)


def phi_right(box: BoxProduct, poset: Poset, n: int) -> Fraction:
    """
    Nondegenerate n-simplices of the row comodule over P: pairs in B_{0,n}
    with every poset layer nonempty, lying over P under d̲_0 iterated.
    """
    sources = [LayeredPair(Layering.from_sizes(()), l) for l in layerings(poset, n + 1) if l.is_nondegenerate()]
    base = LayeredPair.build((), poset)
    return _nondegenerate_fiber(box, sources, lambda x: box.horizontal_face(0, x), n, base)


def phi_left(box: BoxProduct, poset: Poset, n: int) -> Fraction:
    """
    Nondegenerate n-simplices of the column comodule over P: n nonempty set
    layers beside a one-layer poset whose discrete part is nonempty,
    lying over P under the iterated top face.
    """
    sources = []
    for m in range(poset.n + 1):
        for s in set_layerings(m, n):
            if not s.is_nondegenerate():
                continue
            for p in enumerate_posets(poset.n - m):
                if p.n != poset.n - m:
                    continue
                pair = LayeredPair(s, Layering.single(p))
                if box.discrete_part(pair):
                    sources.append(pair)
    base = LayeredPair.build((), poset)
    return _nondegenerate_fiber(box, sources, lambda x: box.vertical_face(x.i, x), n, base)


def phi_left_count(poset: Poset, n: int) -> int:
    """Ordered n nonempty blocks of isolated points leaving at least one isolated point."""
    m = len(isolated_points(poset))
    return sum(comb(m, r) * nonempty_layerings_count(FiniteSetObj(m - r), n) for r in range(1, m + 1))


def check_mobius_bicomodule(box: BoxProduct, size_bound: int, i_max: int = 2, j_max: int = 2) -> Report:
    """
    Finiteness of both pointed comodules: s_{-1} and t_{⊤+1} are
    monomorphisms and sections, the fiber of t_{⊤+1} is empty exactly when
    the bottom layer has a discrete part, and nondegenerate simplices over
    a fixed poset vanish from degree |P| on.
    """
    report = Report(box.name, "mobius-bicomodule")
    b = size_bound
    for i in range(0, i_max):
        for j in range(0, j_max):
            s_map = box.groupoid_map(f"s-1@{i},{j}", (i, j), (i, j + 1), box.bottom_pointing, b)
            witness = monomorphism_witness(s_map)
            report.add(f"mono/s-1/i={i}/j={j}", witness is None, witness)
            t_map = box.groupoid_map(f"t+1@{i},{j}", (i, j), (i + 1, j), box.top_pointing, b)
            witness = monomorphism_witness(t_map)
            report.add(f"mono/t+1/i={i}/j={j}", witness is None, witness)
            bad = None
            for y in box.groupoid(i + 1, j, b):
                empty = fiber_cardinality(t_map, y) == 0
                if empty != bool(discrete_part_of_layer(box.representatives(i + 1, j, b)[y.key].poset_part, 1)):
                    bad = {"object": y.key}
                    break
            report.add(f"fiber/t+1/i={i}/j={j}", bad is None, bad)
    for i in range(0, i_max + 1):
        for j in range(0, j_max + 1):
            items = sorted(box.representatives(i, j, b).items())
            _pointwise(report, f"section/d0.s-1/i={i}/j={j}", items,
                       lambda x: box.horizontal_face(0, box.bottom_pointing(x)), lambda x: x)
            _pointwise(report, f"section/etop.t+1/i={i}/j={j}", items,
                       lambda x: box.vertical_face(x.i + 1, box.top_pointing(x)), lambda x: x)
    posets = enumerate_posets(b)
    for n in range(0, max(i_max, j_max) + 2):
        right_bad = left_bad = None
        for p in posets:
            if right_bad is None and phi_right(box, p, n) != nonempty_layerings_count(p, n + 1):
                right_bad = {"object": p.canonical_form().key, "n": n}
            if n >= 1 and left_bad is None and phi_left(box, p, n) != phi_left_count(p, n):
                left_bad = {"object": p.canonical_form().key, "n": n}
        report.add(f"phi/right/n={n}", right_bad is None, right_bad)
        if n >= 1:
            report.add(f"phi/left/n={n}", left_bad is None, left_bad)
    vanish = None
    for p in posets:
        if phi_right(box, p, p.n) != 0 or (p.n >= 1 and phi_left(box, p, p.n) != 0):
            vanish = {"object": p.canonical_form().key}
            break
    report.add("phi/vanishing", vanish is None, vanish)
    report.log_summary()
    return report


# -- coactions and the Rota identity ---------------------------------------

def gamma_left(poset: Poset) -> FormalSum:
    """Σ over subsets S of isolated points: δ_{set |S|} ⊗ δ_{P minus S}."""
    total = FormalSum()
    iso = sorted(isolated_points(poset))
    for r in range(len(iso) + 1):
        for chosen in combinations(iso, r):
            rest = [x for x in range(poset.n) if x not in chosen]
            total.add((f"S{r}", poset.restrict(rest).canonical_form().key))
    return total


def gamma_right(poset: Poset) -> FormalSum:
    """Σ over down-closed S: δ_S ⊗ δ_{complement}; the coproduct of posets."""
    return coproduct(instance_C(), poset)


def _empty_indicator(instance: SimplicialInstance, empty: Callable[[Any], LayeredPair], name: str) -> Functional:
    """The span B_{0,0} <- X_0 -> 1 as a functional on poset keys."""
    box = BoxProduct()
    target = box.groupoid(0, 0, 0)
    embed = GroupoidMap.from_objects(instance.groupoid(0, 0), instance.representatives(0, 0), target,
                                     empty, box.canon, faithful=True, name=name)
    reps = box.representatives(0, 0, 0)
    return Functional({reps[c.key].poset_part.canonical_form().key: fiber_cardinality(embed, c) for c in target}, name=name)


def delta_L() -> Functional:
    """δ^L: nonzero only on the empty poset."""
    return _empty_indicator(instance_I(), lambda s: LayeredPair(s, Layering(Poset(0), 1, ())), "deltaL")


def delta_R() -> Functional:
    """δ^R: nonzero only on the empty poset."""
    return _empty_indicator(instance_C(), lambda p: LayeredPair(Layering.from_sizes(()), p.degeneracy(0)), "deltaR")


@dataclass(frozen=True)
class RotaResult:
    poset: str
    size: int
    lhs: Fraction
    rhs: Fraction
    closed_form: Fraction
    mu: Fraction

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs == self.closed_form


def rota_check(poset: Poset, mu_sets: Functional, mu_posets: Functional,
               delta_left: Optional[Functional] = None, delta_right: Optional[Functional] = None) -> RotaResult:
    """
    Both sides of μ^I ⋆_l δ^R = δ^L ⋆_r μ^C at P, and the closed form.

    Args:
        poset (Poset): P
        mu_sets (Functional): μ of layered sets on keys "S{n}"
        mu_posets (Functional): μ of layered posets on poset keys
    """
    dl = delta_left or delta_L()
    dr = delta_right or delta_R()
    lhs = sum((c * mu_sets(s) * dr(p) for (s, p), c in gamma_left(poset)), Fraction(0))
    rhs = sum((c * dl(first) * mu_posets(second) for (first, second), c in gamma_right(poset)), Fraction(0))
    key = poset.canonical_form().key
    closed = mobius_closed_form(instance_C(), poset)
    return RotaResult(key, poset.n, lhs, rhs, closed, mu_posets(key))


def rota_table(size_bound: int, threads: Optional[int] = None, wrong_sign: bool = False) -> List[RotaResult]:
    """
    rota_check on every poset up to the bound, sorted by key.

    Args:
        wrong_sign (bool): Negative control; use μ^I = +1 everywhere
    """
    posets = enumerate_posets(size_bound)
    sets = instance_I()
    if wrong_sign:
        mu_sets = Functional(default=1, name="mu-wrong-sign")
    else:
        mu_sets = mobius_table(sets, [FiniteSetObj(n) for n in range(size_bound + 1)], threads)
    mu_posets = mobius_table(instance_C(), posets, threads)
    dl, dr = delta_L(), delta_R()
    results = corpus_map(lambda p: rota_check(p, mu_sets, mu_posets, dl, dr), posets, threads)
    return sorted(results, key=lambda r: r.poset)


def rota_report(results: Sequence[RotaResult]) -> Report:
    """Per size: lhs is the signed discrete indicator, rhs is μ^C, and both meet the closed form."""
    report = Report("posets", "rota")
    sizes = sorted({r.size for r in results})
    for n in sizes:
        group = [r for r in results if r.size == n]
        checks = {
            "left=discrete-sign": [r for r in group if r.lhs != r.closed_form],
            "right=mu": [r for r in group if r.rhs != r.mu],
            "equal": [r for r in group if not r.equal],
        }
        for name, bad in checks.items():
            report.add(f"{name}/size={n}", not bad, {"class": bad[0].poset} if bad else None)
    report.log_summary()
    return report
