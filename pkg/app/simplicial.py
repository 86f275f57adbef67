"""
Truncated Simplicial Groupoids and Their Axiom Checkers

An instance presents a simplicial groupoid degree by degree: the objects
of degree k are k-layered structures up to a size bound, face maps join
two layers or delete an outer one, and degeneracies insert an empty
layer. The checkers build the relevant squares of groupoid maps and hand
them to the cardinality-level pullback test.

Key features:
- One instance class for every structure with layerings (posets, sets,
  rooted forests, P-trees), plus lower and upper decalage
- Simplicial maps between instances (decalage maps, forgetful maps)
- Decomposition-space, Segal, completeness and culf checks as Reports
- Pointwise simplicial identity checks on enumerated objects
- Pruned instances for negative controls

Degrees are truncated at MAX_DEGREE; callers pick a size bound.
"""

import logging
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from app.errors import BoundError, NotSimplicialError, StructureError
from app.forests import enumerate_forests
from app.groupoids import (
    FiniteGroupoid,
    GroupoidMap,
    IsoClass,
    Square,
    monomorphism_witness,
    pullback_witness,
)
from app.posets import FiniteSetObj, Layering, enumerate_posets, layerings, nonempty_layerings_count
from app.ptrees import Signature, enumerate_ptrees
from app.reports import Report

logger = logging.getLogger(__name__)

MAX_DEGREE = int(os.getenv("DECOMP_MOBIUS_MAX_DEGREE_LIMIT", "4"))


class SimplicialInstance:
    """
    A truncated simplicial groupoid given by object-level data.

    Subclasses implement objects, face, degeneracy and canon; everything
    else (groupoids, groupoid maps, caches) is derived here.
    """

    strict = True

    def __init__(self, name: str):
        self.name = name
        self._groupoids: Dict[Tuple[int, int], Tuple[FiniteGroupoid, Dict[str, Any]]] = {}
        self._maps: Dict[Tuple[str, int, int, int], GroupoidMap] = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"

    def objects(self, k: int, bound: int) -> Sequence[Any]:
        raise NotImplementedError

    def face(self, k: int, i: int, x: Any) -> Any:
        raise NotImplementedError

    def degeneracy(self, k: int, i: int, x: Any) -> Any:
        raise NotImplementedError

    def canon(self, x: Any) -> IsoClass:
        return x.canonical_form()

    def size(self, x: Any) -> int:
        return self.canon(x).size

    def is_deleting_face(self, k: int, i: int) -> bool:
        """Outer faces delete a layer; inner faces join two."""
        return i in (0, k)

    def _check_degree(self, k: int) -> None:
        if not 0 <= k <= MAX_DEGREE:
            raise BoundError(f"{self.name}: degree {k} outside 0..{MAX_DEGREE}")

    def groupoid(self, k: int, bound: int) -> FiniteGroupoid:
        return self._classified(k, bound)[0]

    def representatives(self, k: int, bound: int) -> Dict[str, Any]:
        return self._classified(k, bound)[1]

    def _classified(self, k: int, bound: int) -> Tuple[FiniteGroupoid, Dict[str, Any]]:
        if (k, bound) not in self._groupoids:
            self._check_degree(k)
            self._groupoids[(k, bound)] = FiniteGroupoid.from_objects(self.objects(k, bound), self.canon)
            logger.debug("%s: degree %d, size <= %d: %d classes", self.name, k, bound, len(self._groupoids[(k, bound)][0]))
        return self._groupoids[(k, bound)]

    def face_map(self, k: int, i: int, bound: int) -> GroupoidMap:
        """d_i: X_k -> X_{k-1} on classes."""
        if not 0 <= i <= k or k == 0:
            raise StructureError(f"{self.name}: face d_{i} undefined in degree {k}")
        cache = ("d", k, i, bound)
        if cache not in self._maps:
            self._maps[cache] = GroupoidMap.from_objects(
                self.groupoid(k, bound), self.representatives(k, bound), self.groupoid(k - 1, bound),
                lambda x: self.face(k, i, x), self.canon,
                faithful=not self.is_deleting_face(k, i), name=f"d{i}", strict=self.strict,
            )
        return self._maps[cache]

    def degeneracy_map(self, k: int, i: int, bound: int) -> GroupoidMap:
        """s_i: X_k -> X_{k+1} on classes."""
        if not 0 <= i <= k:
            raise StructureError(f"{self.name}: degeneracy s_{i} undefined in degree {k}")
        cache = ("s", k, i, bound)
        if cache not in self._maps:
            self._maps[cache] = GroupoidMap.from_objects(
                self.groupoid(k, bound), self.representatives(k, bound), self.groupoid(k + 1, bound),
                lambda x: self.degeneracy(k, i, x), self.canon,
                faithful=True, name=f"s{i}", strict=self.strict,
            )
        return self._maps[cache]


class LayeredInstance(SimplicialInstance):
    """
    Layerings of the structures in a corpus: degree k holds every k-layering
    of every structure of size at most the bound.

    Args:
        name (str): Instance name
        corpus: bound -> structures, one per isomorphism class
        closed (bool): Whether faces of corpus layerings stay in the corpus
    """

    def __init__(self, name: str, corpus: Callable[[int], Sequence[Any]], closed: bool = True):
        super().__init__(name)
        self.corpus = corpus
        self.strict = closed

    def objects(self, k: int, bound: int) -> List[Layering]:
        return [layering for x in self.corpus(bound) for layering in layerings(x, k)]

    def face(self, k: int, i: int, x: Layering) -> Layering:
        return x.face(i)

    def degeneracy(self, k: int, i: int, x: Layering) -> Layering:
        return x.degeneracy(i)

    def lift(self, structure: Any) -> Layering:
        """The degree-1 object of a plain structure."""
        return Layering.single(structure)

    def layerings_of(self, x: Layering, k: int) -> List[Layering]:
        """Degree-k objects over the degree-1 object x."""
        return layerings(x.base, k)

    def phi(self, x: Layering, k: int) -> int:
        """Number of k-simplices over x with every layer nonempty."""
        return nonempty_layerings_count(x.base, k)


class PTreeInstance(LayeredInstance):
    """Nested cuts of P-trees; crowns of single trees are forests, so maps are partial."""

    def __init__(self, signature: Signature, name: str = "ptrees"):
        super().__init__(name, lambda bound: enumerate_ptrees(signature, bound), closed=False)
        self.signature = signature


def instance_from_species(name: str, corpus: Callable[[int], Sequence[Any]]) -> LayeredInstance:
    """
    Simplicial groupoid of layerings of a directed restriction species.

    The structures must restrict to down-closed and up-closed subsets of
    their underlying poset (restrict_down, restrict_up) and provide
    canonical_form and layered_form.
    """
    return LayeredInstance(name, corpus)


def instance_C() -> LayeredInstance:
    return instance_from_species("posets", enumerate_posets)


def instance_I() -> LayeredInstance:
    return LayeredInstance("sets", lambda bound: [FiniteSetObj(n) for n in range(bound + 1)])


def instance_forests() -> LayeredInstance:
    return instance_from_species("forests", enumerate_forests)


def instance_ptrees(signature: Signature) -> PTreeInstance:
    return PTreeInstance(signature)


class DecalageInstance(SimplicialInstance):
    """
    Lower (side "lower") or upper decalage: degree k is the base's degree
    k+1 with the bottom, respectively top, face and degeneracy removed.
    """

    def __init__(self, base: SimplicialInstance, side: str = "lower"):
        if side not in ("lower", "upper"):
            raise StructureError(f"decalage side must be 'lower' or 'upper', got {side!r}")
        super().__init__(f"dec-{side}({base.name})")
        self.base = base
        self.side = side
        self.strict = base.strict

    def _shift(self, i: int) -> int:
        return i + 1 if self.side == "lower" else i

    def objects(self, k: int, bound: int) -> Sequence[Any]:
        return self.base.objects(k + 1, bound)

    def groupoid(self, k: int, bound: int) -> FiniteGroupoid:
        self._check_degree(k)
        return self.base.groupoid(k + 1, bound)

    def representatives(self, k: int, bound: int) -> Dict[str, Any]:
        return self.base.representatives(k + 1, bound)

    def face(self, k: int, i: int, x: Any) -> Any:
        return self.base.face(k + 1, self._shift(i), x)

    def degeneracy(self, k: int, i: int, x: Any) -> Any:
        return self.base.degeneracy(k + 1, self._shift(i), x)

    def canon(self, x: Any) -> IsoClass:
        return self.base.canon(x)

    def is_deleting_face(self, k: int, i: int) -> bool:
        return i == k if self.side == "lower" else i == 0

    def decalage_map(self) -> "SimplicialMap":
        """The map to the base: the deleted bottom (or top) face."""
        if self.side == "lower":
            return SimplicialMap("d_bot", self, self.base, lambda k, x: self.base.face(k + 1, 0, x))
        return SimplicialMap("d_top", self, self.base, lambda k, x: self.base.face(k + 1, k + 1, x))


class PrunedInstance(SimplicialInstance):
    """An instance with some classes removed; maps become partial."""

    strict = False

    def __init__(self, base: SimplicialInstance, dropped: Mapping[int, FrozenSet[str]], name: str = ""):
        super().__init__(name or f"pruned({base.name})")
        self.base = base
        self.dropped = {k: frozenset(v) for k, v in dropped.items()}

    def objects(self, k: int, bound: int) -> List[Any]:
        gone = self.dropped.get(k, frozenset())
        return [x for x in self.base.objects(k, bound) if self.base.canon(x).key not in gone]

    def face(self, k: int, i: int, x: Any) -> Any:
        return self.base.face(k, i, x)

    def degeneracy(self, k: int, i: int, x: Any) -> Any:
        return self.base.degeneracy(k, i, x)

    def canon(self, x: Any) -> IsoClass:
        return self.base.canon(x)

    def is_deleting_face(self, k: int, i: int) -> bool:
        return self.base.is_deleting_face(k, i)


@dataclass(eq=False)
class SimplicialMap:
    """
    A degree-wise map between instances.

    Args:
        name (str): Label for reports
        source, target: Instances
        apply: (degree, object) -> object of the target
        faithful (bool): True when no element is forgotten
    """

    name: str
    source: SimplicialInstance
    target: SimplicialInstance
    apply: Callable[[int, Any], Any]
    faithful: bool = False

    def groupoid_map(self, k: int, bound: int) -> GroupoidMap:
        return GroupoidMap.from_objects(
            self.source.groupoid(k, bound), self.source.representatives(k, bound), self.target.groupoid(k, bound),
            lambda x: self.apply(k, x), self.target.canon,
            faithful=self.faithful, name=f"{self.name}{k}", strict=self.source.strict and self.target.strict,
        )


def forgetful_map(source: LayeredInstance, target: LayeredInstance, forget: Callable[[Any], Any], name: str) -> SimplicialMap:
    """Apply a structure-level map to the base of every layering, keeping layers."""
    return SimplicialMap(name, source, target, lambda k, x: Layering(forget(x.base), x.depth, x.layer_of), faithful=True)


def forests_to_posets(forests: LayeredInstance, posets: LayeredInstance) -> SimplicialMap:
    return forgetful_map(forests, posets, lambda f: f.underlying_poset(), "underlying-poset")


def posets_to_sets(posets: LayeredInstance, sets: LayeredInstance) -> SimplicialMap:
    return forgetful_map(posets, sets, lambda p: FiniteSetObj(p.n), "underlying-set")


def drop_layering(instance: SimplicialInstance, degree: int = 2, key: str = "C2:1.1:0<1") -> PrunedInstance:
    """Negative control: remove one class (by default the split 2-chain) from one degree."""
    return PrunedInstance(instance, {degree: frozenset({key})}, f"{instance.name}-drop-layering")


def _record(report: Report, id: str, square: Square, graded: bool, bound: int, expected: bool = True) -> None:
    witness = pullback_witness(square, graded=graded, bound=bound)
    report.add(id, witness is None, witness, expected)


def check_decomposition_space(X: SimplicialInstance, size_bound: int, degree_bound: int) -> Report:
    """
    The four square families: degeneracies and inner faces against the
    bottom face (dbot-*) and against the top face (dtop-*).

    Every square's top map is a degeneracy or an inner face, so fibers are
    compared without grading.

    Args:
        X: Instance to check
        size_bound (int): Largest structure size enumerated
        degree_bound (int): Largest degree used (squares reach degree n+2)

    Returns:
        Report: One entry per square
    """
    report = Report(X.name, "decomposition-space")
    b = size_bound
    for n in range(0, degree_bound - 1):
        for i in range(0, n + 1):
            _record(report, f"dbot-s/n={n}/i={i}", Square(
                X.degeneracy_map(n + 1, i + 1, b), X.face_map(n + 1, 0, b),
                X.face_map(n + 2, 0, b), X.degeneracy_map(n, i, b), f"dbot-s{i}"), False, b)
            _record(report, f"dtop-s/n={n}/i={i}", Square(
                X.degeneracy_map(n + 1, i, b), X.face_map(n + 1, n + 1, b),
                X.face_map(n + 2, n + 2, b), X.degeneracy_map(n, i, b), f"dtop-s{i}"), False, b)
        for i in range(1, n + 1):
            _record(report, f"dbot-d/n={n}/i={i}", Square(
                X.face_map(n + 2, i + 1, b), X.face_map(n + 2, 0, b),
                X.face_map(n + 1, 0, b), X.face_map(n + 1, i, b), f"dbot-d{i}"), False, b)
            _record(report, f"dtop-d/n={n}/i={i}", Square(
                X.face_map(n + 2, i, b), X.face_map(n + 2, n + 2, b),
                X.face_map(n + 1, n + 1, b), X.face_map(n + 1, i, b), f"dtop-d{i}"), False, b)
    report.log_summary()
    return report


def segal_squares(X: SimplicialInstance, size_bound: int, degree_bound: int) -> List[Tuple[str, Square]]:
    b = size_bound
    return [
        (f"segal/n={n}", Square(X.face_map(n + 1, n + 1, b), X.face_map(n + 1, 0, b),
                                X.face_map(n, 0, b), X.face_map(n, n, b), f"segal{n}"))
        for n in range(1, degree_bound)
    ]


def check_segal(X: SimplicialInstance, size_bound: int, degree_bound: int, expected: bool = True) -> Report:
    """
    Segal squares X_{n+1} -> X_n over X_{n-1} (top face against bottom face),
    compared grade by grade since both faces delete a layer.
    """
    report = Report(X.name, "segal")
    for id, square in segal_squares(X, size_bound, degree_bound):
        _record(report, id, square, True, size_bound, expected)
    report.log_summary()
    return report


def complete_report(X: SimplicialInstance, size_bound: int, duplicate_unit: bool = False) -> Report:
    """
    s_0: X_0 -> X_1 must be a monomorphism.

    With duplicate_unit, X_0 gets a second rigid copy of every class, the
    negative control for this check.
    """
    report = Report(X.name, "complete")
    s0 = X.degeneracy_map(0, 0, size_bound)
    if duplicate_unit:
        extra = tuple(IsoClass(c.key + "'", c.aut_order, c.size) for c in s0.domain)
        on_classes = dict(s0.on_classes)
        on_classes.update({c.key + "'": s0.image(c.key[:-1]) for c in extra})
        aut = dict(s0.aut_image_order)
        aut.update({c.key: c.aut_order for c in extra})
        s0 = GroupoidMap(FiniteGroupoid(s0.domain.classes + extra), s0.codomain, on_classes, aut, "s0", s0.strict)
    witness = monomorphism_witness(s0)
    report.add("s0-mono", witness is None, witness)
    report.log_summary()
    return report


def check_complete(X: SimplicialInstance, size_bound: int) -> bool:
    return complete_report(X, size_bound).ok


def simpliciality_witness(g: SimplicialMap, size_bound: int, degree_bound: int) -> Optional[Dict[str, Any]]:
    """First object where g fails to commute with a face or degeneracy, or None."""
    src, tgt = g.source, g.target
    for k in range(0, degree_bound + 1):
        for key, x in src.representatives(k, size_bound).items():
            gx = g.apply(k, x)
            if k >= 1:
                for i in range(k + 1):
                    lhs = tgt.canon(g.apply(k - 1, src.face(k, i, x))).key
                    rhs = tgt.canon(tgt.face(k, i, gx)).key
                    if lhs != rhs:
                        return {"object": key, "identity": f"g d{i} = d{i} g", "left": lhs, "right": rhs}
            if k + 1 <= degree_bound:
                for i in range(k + 1):
                    lhs = tgt.canon(g.apply(k + 1, src.degeneracy(k, i, x))).key
                    rhs = tgt.canon(tgt.degeneracy(k, i, gx)).key
                    if lhs != rhs:
                        return {"object": key, "identity": f"g s{i} = s{i} g", "left": lhs, "right": rhs}
    return None


def culf_report(g: SimplicialMap, size_bound: int, degree_bound: int) -> Report:
    """
    Cartesian squares of g against inner faces and degeneracies.

    Raises:
        NotSimplicialError: If g breaks a simplicial identity
    """
    witness = simpliciality_witness(g, size_bound, degree_bound)
    if witness is not None:
        raise NotSimplicialError(f"{g.name} is not simplicial: {witness}")
    report = Report(f"{g.source.name}->{g.target.name}", "culf")
    b = size_bound
    for k in range(2, degree_bound + 1):
        for i in range(1, k):
            _record(report, f"d/k={k}/i={i}", Square(
                g.source.face_map(k, i, b), g.groupoid_map(k, b), g.groupoid_map(k - 1, b),
                g.target.face_map(k, i, b), f"culf-d{i}"), False, b)
    for k in range(0, degree_bound):
        for i in range(0, k + 1):
            _record(report, f"s/k={k}/i={i}", Square(
                g.source.degeneracy_map(k, i, b), g.groupoid_map(k, b), g.groupoid_map(k + 1, b),
                g.target.degeneracy_map(k, i, b), f"culf-s{i}"), False, b)
    report.log_summary()
    return report


def check_culf(g: SimplicialMap, size_bound: int, degree_bound: int) -> bool:
    return culf_report(g, size_bound, degree_bound).ok


def check_simplicial_identities(X: SimplicialInstance, size_bound: int, degree_bound: int) -> Report:
    """
    Pointwise simplicial identities on every enumerated class:
    d_i d_j = d_{j-1} d_i (i < j), s_i s_j = s_{j+1} s_i (i <= j) and the
    mixed face/degeneracy identities.
    """
    report = Report(X.name, "simplicial-identities")
    key = lambda x: X.canon(x).key
    for k in range(0, degree_bound + 1):
        failures: Dict[str, Optional[Dict[str, Any]]] = {"dd": None, "ss": None, "ds": None}
        for name, x in X.representatives(k, size_bound).items():
            for j in range(k + 1):
                for i in range(j):
                    if k >= 2 and failures["dd"] is None:
                        if key(X.face(k - 1, i, X.face(k, j, x))) != key(X.face(k - 1, j - 1, X.face(k, i, x))):
                            failures["dd"] = {"object": name, "i": i, "j": j}
                for i in range(j + 1):
                    if failures["ss"] is None:
                        if key(X.degeneracy(k + 1, i, X.degeneracy(k, j, x))) != key(X.degeneracy(k + 1, j + 1, X.degeneracy(k, i, x))):
                            failures["ss"] = {"object": name, "i": i, "j": j}
                for i in range(k + 2):
                    if failures["ds"] is not None:
                        break
                    lhs = key(X.face(k + 1, i, X.degeneracy(k, j, x)))
                    if i < j:
                        rhs = key(X.degeneracy(k - 1, j - 1, X.face(k, i, x)))
                    elif i in (j, j + 1):
                        rhs = name
                    else:
                        rhs = key(X.degeneracy(k - 1, j, X.face(k, i - 1, x)))
                    if lhs != rhs:
                        failures["ds"] = {"object": name, "i": i, "j": j}
        if k >= 2:
            report.add(f"dd/k={k}", failures["dd"] is None, failures["dd"])
        report.add(f"ss/k={k}", failures["ss"] is None, failures["ss"])
        report.add(f"ds/k={k}", failures["ds"] is None, failures["ds"])
    report.log_summary()
    return report
