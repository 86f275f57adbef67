"""
Finite Groupoid Bookkeeping

This module is the arithmetic floor of the toolkit. Groupoids of
combinatorial structures are presented by their isomorphism classes
(a canonical key plus the order of the automorphism group), and every
axiom checker in the package reduces to the fiber counts computed here.

Key features:
- Exact rationals everywhere (fractions.Fraction, never floats)
- Homotopy cardinality and homotopy fiber cardinality
- Graded fibers for maps that delete elements (face maps that drop a layer)
- Cardinality-level pullback and monomorphism checks with witnesses
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from app.errors import GroupoidError, SquareError, StructureError, UnknownClassError

logger = logging.getLogger(__name__)

Rational = Fraction


def format_rational(value) -> str:
    """
    Serialize an exact rational as "n" or "p/q".

    Args:
        value: int or Fraction

    Returns:
        str: Lowest-terms string form
    """
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class IsoClass:
    """One isomorphism class: canonical key, |Aut| and the size grade."""

    key: str
    aut_order: int
    size: int = 0

    def __post_init__(self):
        if self.aut_order < 1:
            raise StructureError(f"aut_order must be positive, got {self.aut_order}", self.key)


@dataclass(frozen=True)
class FiniteGroupoid:
    """
    A finite groupoid given by one IsoClass per isomorphism class.

    Classes are kept sorted by key so iteration order is deterministic.
    """

    classes: Tuple[IsoClass, ...] = ()
    _index: Dict[str, IsoClass] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.classes, key=lambda c: c.key))
        index: Dict[str, IsoClass] = {}
        for c in ordered:
            if c.key in index:
                raise StructureError("duplicate class key in groupoid", c.key)
            index[c.key] = c
        object.__setattr__(self, "classes", ordered)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_objects(cls, objects: Iterable[Any], canon: Callable[[Any], IsoClass]) -> Tuple["FiniteGroupoid", Dict[str, Any]]:
        """
        Build a groupoid from labelled representatives, one kept per class.

        Args:
            objects: Structures to classify (duplicates up to iso are fine)
            canon: Function returning the IsoClass of a structure

        Returns:
            tuple: (FiniteGroupoid, dict key -> first representative seen)
        """
        reps: Dict[str, Any] = {}
        found: Dict[str, IsoClass] = {}
        for obj in objects:
            c = canon(obj)
            if c.key not in found:
                found[c.key] = c
                reps[c.key] = obj
        return cls(tuple(found.values())), reps

    def __contains__(self, item) -> bool:
        key = item.key if isinstance(item, IsoClass) else item
        return key in self._index

    def __getitem__(self, key: str) -> IsoClass:
        try:
            return self._index[key]
        except KeyError:
            raise UnknownClassError(f"class {key!r} is not in this groupoid") from None

    def __iter__(self) -> Iterator[IsoClass]:
        return iter(self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def keys(self) -> List[str]:
        return [c.key for c in self.classes]

    def disjoint_union(self, other: "FiniteGroupoid") -> "FiniteGroupoid":
        return FiniteGroupoid(self.classes + other.classes)

    def truncate(self, bound: int) -> "FiniteGroupoid":
        """Full subgroupoid of classes with size <= bound."""
        return FiniteGroupoid(tuple(c for c in self.classes if c.size <= bound))


def homotopy_cardinality(groupoid: FiniteGroupoid) -> Fraction:
    """
    Sum of 1/|Aut| over the classes of a finite groupoid.

    Args:
        groupoid (FiniteGroupoid): Groupoid to measure

    Returns:
        Fraction: Exact homotopy cardinality (0 for the empty groupoid)
    """
    return sum((Fraction(1, c.aut_order) for c in groupoid), Fraction(0))


@dataclass(frozen=True, eq=False)
class GroupoidMap:
    """
    A functor between finite groupoids, seen on isomorphism classes.

    aut_image_order records |image of Aut(x)| for each domain class. Maps
    that keep every element are faithful and record |Aut(x)| itself; maps
    that forget elements leave it as None.
    """

    domain: FiniteGroupoid
    codomain: FiniteGroupoid
    on_classes: Mapping[str, str]
    aut_image_order: Optional[Mapping[str, int]] = None
    name: str = ""
    strict: bool = True
    _fibers: Dict[str, List[IsoClass]] = field(init=False, repr=False)

    def __post_init__(self):
        fibers: Dict[str, List[IsoClass]] = defaultdict(list)
        for c in self.domain:
            if c.key not in self.on_classes:
                raise StructureError(f"map {self.name or '?'} is undefined on a domain class", c.key)
            target = self.on_classes[c.key]
            if target in self.codomain:
                if self.aut_image_order is not None:
                    image = self.aut_image_order[c.key]
                    if c.aut_order % image or self.codomain[target].aut_order % image:
                        raise StructureError(f"map {self.name or '?'}: automorphism image order {image} does not divide", c.key)
            elif self.strict:
                raise UnknownClassError(f"map {self.name or '?'} sends {c.key!r} outside its codomain ({target!r})")
            fibers[target].append(c)
        object.__setattr__(self, "_fibers", dict(fibers))

    @classmethod
    def identity(cls, groupoid: FiniteGroupoid, name: str = "id") -> "GroupoidMap":
        keys = groupoid.keys()
        return cls(groupoid, groupoid, {k: k for k in keys}, {c.key: c.aut_order for c in groupoid}, name)

    @classmethod
    def from_objects(
        cls,
        domain: FiniteGroupoid,
        reps: Mapping[str, Any],
        codomain: FiniteGroupoid,
        func: Callable[[Any], Any],
        canon: Callable[[Any], IsoClass],
        faithful: bool = False,
        name: str = "",
        strict: bool = True,
    ) -> "GroupoidMap":
        """
        Build a map by applying an object-level function to representatives.

        Args:
            domain (FiniteGroupoid): Source classes
            reps (Mapping): Representative structure for each domain key
            codomain (FiniteGroupoid): Target classes
            func: Object-level map
            canon: Canonical form on the target side
            faithful (bool): True when func keeps every element, so Aut(x)
                             embeds into Aut(func(x))
            name (str): Label used in logs and errors
            strict (bool): Reject images outside the codomain

        Returns:
            GroupoidMap: The induced map on classes
        """
        on_classes = {c.key: canon(func(reps[c.key])).key for c in domain}
        aut = {c.key: c.aut_order for c in domain} if faithful else None
        return cls(domain, codomain, on_classes, aut, name, strict)

    def image(self, key: str) -> str:
        try:
            return self.on_classes[key]
        except KeyError:
            raise UnknownClassError(f"class {key!r} is not in the domain of {self.name or 'map'}") from None

    def fiber(self, key: str) -> List[IsoClass]:
        """Domain classes lying over a codomain key."""
        return self._fibers.get(key, [])

    @property
    def faithful(self) -> bool:
        if self.aut_image_order is None:
            return False
        return all(self.aut_image_order[c.key] == c.aut_order for c in self.domain)

    def compose(self, first: "GroupoidMap", name: str = "") -> "GroupoidMap":
        """Return self after first (first runs first)."""
        on_classes = {k: self.image(v) for k, v in first.on_classes.items() if v in self.on_classes}
        domain = FiniteGroupoid(tuple(c for c in first.domain if c.key in on_classes))
        aut = None
        if first.faithful and self.faithful:
            aut = {c.key: c.aut_order for c in domain}
        return GroupoidMap(domain, self.codomain, on_classes, aut, name or f"{self.name}.{first.name}", self.strict)


def _target(f: GroupoidMap, z: Union[IsoClass, str]) -> IsoClass:
    key = z.key if isinstance(z, IsoClass) else z
    return f.codomain[key]


def fiber_cardinality(f: GroupoidMap, z: Union[IsoClass, str]) -> Fraction:
    """
    Homotopy cardinality of the homotopy fiber of f over z.

    Args:
        f (GroupoidMap): The map
        z: Codomain class or its key

    Returns:
        Fraction: |Aut(z)| * sum of 1/|Aut(x)| over classes x mapped to z

    Raises:
        UnknownClassError: If z is not a codomain class
    """
    target = _target(f, z)
    total = sum((Fraction(1, x.aut_order) for x in f.fiber(target.key)), Fraction(0))
    return target.aut_order * total


def fiber_cardinality_graded(f: GroupoidMap, z: Union[IsoClass, str]) -> Dict[int, Fraction]:
    """
    Fiber cardinality of f over z split by excess size.

    Face maps that delete an outer layer have infinite fibers on the
    untruncated groupoids; each excess grade is still finite.

    Returns:
        dict: excess size -> Fraction, zero entries omitted
    """
    target = _target(f, z)
    graded: Dict[int, Fraction] = defaultdict(Fraction)
    for x in f.fiber(target.key):
        graded[x.size - target.size] += Fraction(target.aut_order, x.aut_order)
    return {e: q for e, q in sorted(graded.items()) if q}


@dataclass(frozen=True, eq=False)
class Square:
    """
    A square of groupoid maps

        A --top--> B
        |          |
       left      right
        v          v
        C --bottom-> D
    """

    top: GroupoidMap
    left: GroupoidMap
    right: GroupoidMap
    bottom: GroupoidMap
    name: str = ""

    def check_commutes(self) -> None:
        """
        Raise SquareError unless right.top == bottom.left on every class of A.

        Classes whose image leaves a (non-strict) intermediate groupoid are
        skipped: the pullback test reports them instead.
        """
        for a in self.top.domain:
            b = self.top.image(a.key)
            c = self.left.image(a.key)
            if b not in self.right.on_classes or c not in self.bottom.on_classes:
                continue
            if self.right.image(b) != self.bottom.image(c):
                raise SquareError(f"square {self.name or '?'} does not commute at {a.key!r}")


def _fmt_graded(graded: Mapping[int, Fraction]) -> Dict[str, str]:
    return {str(e): format_rational(q) for e, q in graded.items()}


def pullback_witness(square: Square, graded: bool = False, bound: Optional[int] = None) -> Optional[Dict[str, Any]]:
    """
    First class of B where the fiber comparison fails, or None.

    For every class b of B, compares the fiber of top over b with the
    fiber of bottom over right(b). With graded=True the comparison is made
    excess by excess, up to bound - size(b), which is the range the
    truncated groupoids enumerate completely.

    Args:
        square (Square): A commuting square
        graded (bool): Compare graded fibers (for maps deleting elements)
        bound (int, optional): Size bound the groupoids were enumerated to

    Returns:
        dict or None: Witness with the base key and the two fiber values

    Raises:
        SquareError: If the square does not commute
    """
    square.check_commutes()
    for b in square.top.codomain:
        if bound is not None and b.size > bound:
            continue
        d_key = square.right.image(b.key)
        if d_key not in square.bottom.codomain:
            return {"base": b.key, "reason": f"image {d_key} outside the bottom codomain"}
        if graded:
            limit = None if bound is None else bound - b.size
            top = {e: q for e, q in fiber_cardinality_graded(square.top, b).items() if limit is None or e <= limit}
            bottom = {e: q for e, q in fiber_cardinality_graded(square.bottom, d_key).items() if limit is None or e <= limit}
            if top != bottom:
                return {"base": b.key, "top": _fmt_graded(top), "bottom": _fmt_graded(bottom)}
        else:
            top_q = fiber_cardinality(square.top, b)
            bottom_q = fiber_cardinality(square.bottom, d_key)
            if top_q != bottom_q:
                return {"base": b.key, "top": format_rational(top_q), "bottom": format_rational(bottom_q)}
    return None


def is_pullback_at_cardinality(square: Square, graded: bool = False, bound: Optional[int] = None) -> bool:
    """True iff every fiber of top matches the fiber of bottom below it."""
    witness = pullback_witness(square, graded, bound)
    if witness is not None:
        logger.debug("square %s fails at %s", square.name, witness)
    return witness is None


def monomorphism_witness(f: GroupoidMap) -> Optional[Dict[str, Any]]:
    """
    First codomain class whose fiber is neither empty nor contractible.

    Raises:
        GroupoidError: If f records no automorphism images
    """
    if f.aut_image_order is None:
        raise GroupoidError(f"map {f.name or '?'} carries no automorphism image data")
    for z in f.codomain:
        fiber = f.fiber(z.key)
        if not fiber:
            continue
        if len(fiber) > 1:
            return {"base": z.key, "reason": f"{len(fiber)} classes in the fiber"}
        x = fiber[0]
        if x.aut_order != z.aut_order or f.aut_image_order[x.key] != z.aut_order:
            return {"base": z.key, "reason": "automorphism groups differ"}
    return None


def is_monomorphism(f: GroupoidMap) -> bool:
    """True iff every fiber of f is empty or contractible."""
    return monomorphism_witness(f) is None


def product_groupoid(left: FiniteGroupoid, right: FiniteGroupoid) -> FiniteGroupoid:
    """Cartesian product; keys are "(a,b)", automorphisms multiply."""
    return FiniteGroupoid(tuple(
        IsoClass(f"({a.key},{b.key})", a.aut_order * b.aut_order, a.size + b.size)
        for a in left for b in right
    ))


def product_map(f: GroupoidMap, g: GroupoidMap) -> GroupoidMap:
    """The map f x g between product groupoids."""
    on_classes = {}
    aut = {} if f.aut_image_order is not None and g.aut_image_order is not None else None
    for a in f.domain:
        for b in g.domain:
            key = f"({a.key},{b.key})"
            on_classes[key] = f"({f.image(a.key)},{g.image(b.key)})"
            if aut is not None:
                aut[key] = f.aut_image_order[a.key] * g.aut_image_order[b.key]
    return GroupoidMap(
        product_groupoid(f.domain, g.domain),
        product_groupoid(f.codomain, g.codomain),
        on_classes,
        aut,
        f"{f.name}x{g.name}",
    )
