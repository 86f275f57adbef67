"""
Incidence Coalgebras and Möbius Functions

The linear layer on top of the simplicial instances: coproducts read off
2-layerings, the convolution product of functionals, the nondegenerate
counts Φ_k, and the Möbius function both by alternating sums and by the
closed forms for posets, sets, forests and P-trees.

Key features:
- FormalSum and Functional with exact Fraction coefficients
- Coproduct Δ(a) = Σ over 2-layerings of (bottom layer) ⊗ (top layer)
- μ = Σ_k (-1)^k Φ_k, checked against closed forms and against μ⋆ζ = ε = ζ⋆μ
- Coassociativity and counit laws as Reports
- Corpus loops on a thread pool with deterministic ordering

The Möbius function here is the one of the incidence algebra of the
decomposition space, not the interval Möbius function of each poset:
μ(chain of 2) is 0, not -1.
"""

import logging
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from app.groupoids import format_rational
from app.posets import FiniteSetObj, Layering, is_discrete
from app.ptrees import PForest
from app.reports import Report
from app.simplicial import LayeredInstance

logger = logging.getLogger(__name__)

THREADS = int(os.getenv("DECOMP_MOBIUS_THREADS", "0") or 0)


def corpus_map(fn: Callable[[Any], Any], items: Sequence[Any], threads: Optional[int] = None) -> List[Any]:
    """
    Apply fn to every item, on a thread pool when threads > 1.

    Results keep the order of items whatever the thread count.
    """
    workers = THREADS if threads is None else threads
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class FormalSum:
    """
    An exact linear combination of class keys (or tuples of keys for
    tensor factors). Zero coefficients are never stored.
    """

    def __init__(self, terms: Optional[Mapping[Hashable, Any]] = None):
        self.terms: Dict[Hashable, Fraction] = {}
        for key, coeff in (terms or {}).items():
            self.add(key, coeff)

    def add(self, key: Hashable, coeff: Any = 1) -> "FormalSum":
        value = self.terms.get(key, Fraction(0)) + Fraction(coeff)
        if value:
            self.terms[key] = value
        else:
            self.terms.pop(key, None)
        return self

    def coefficient(self, key: Hashable) -> Fraction:
        return self.terms.get(key, Fraction(0))

    def __add__(self, other: "FormalSum") -> "FormalSum":
        total = FormalSum(self.terms)
        for key, coeff in other.terms.items():
            total.add(key, coeff)
        return total

    def __mul__(self, scalar: Any) -> "FormalSum":
        return FormalSum({k: v * Fraction(scalar) for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FormalSum) and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[Hashable, Fraction]]:
        return iter(sorted(self.terms.items()))

    def __repr__(self) -> str:
        return " + ".join(f"{format_rational(v)}*{k}" for k, v in self) or "0"

    def to_list(self) -> List[Dict[str, Any]]:
        """Sorted serialisation: pairs as left/right, single keys as class."""
        rows = []
        for key, coeff in self:
            if isinstance(key, tuple) and len(key) == 2:
                rows.append({"left": key[0], "right": key[1], "coeff": format_rational(coeff)})
            elif isinstance(key, tuple):
                rows.append({"factors": list(key), "coeff": format_rational(coeff)})
            else:
                rows.append({"class": key, "coeff": format_rational(coeff)})
        return rows


class Functional:
    """A linear functional on classes: a finite table, default elsewhere."""

    def __init__(self, table: Optional[Mapping[str, Any]] = None, default: Any = 0, name: str = ""):
        self.table = {k: Fraction(v) for k, v in (table or {}).items()}
        self.default = Fraction(default)
        self.name = name

    def __call__(self, key: str) -> Fraction:
        return self.table.get(key, self.default)

    def evaluate(self, terms: FormalSum) -> Fraction:
        return sum((coeff * self(key) for key, coeff in terms), Fraction(0))


def zeta() -> Functional:
    return Functional(default=1, name="zeta")


def _as_object(X: LayeredInstance, a: Any) -> Layering:
    return a if isinstance(a, Layering) else X.lift(a)


def cuts(X: LayeredInstance, a: Any, drop_cut: bool = False) -> List[Tuple[Layering, Layering]]:
    """
    Object-level splittings of a: (bottom layer, top layer) of each 2-layering.

    Args:
        drop_cut (bool): Negative control; omit the first cut with both
                         layers nonempty on objects of size at least 2
    """
    a = _as_object(X, a)
    splits = []
    dropped = not drop_cut or a.size < 2
    for layering in X.layerings_of(a, 2):
        if not dropped and layering.is_nondegenerate():
            dropped = True
            continue
        splits.append((layering.face(2), layering.face(0)))
    return splits


def coproduct(X: LayeredInstance, a: Any, drop_cut: bool = False) -> FormalSum:
    """
    Δ(a) as a sum of class pairs.

    Coefficients count the 2-layerings of a representative giving each
    pair of classes, so Δ(set_n) has binomial coefficients.
    """
    total = FormalSum()
    for left, right in cuts(X, a, drop_cut):
        total.add((X.canon(left).key, X.canon(right).key))
    return total


def counit(X: LayeredInstance, a: Any) -> Fraction:
    """1 on objects without elements (nodes, for P-trees), else 0."""
    return Fraction(1) if _as_object(X, a).size == 0 else Fraction(0)


def counit_functional(X: LayeredInstance, objects: Iterable[Any]) -> Functional:
    return Functional({X.canon(_as_object(X, a)).key: counit(X, a) for a in objects}, name="epsilon")


def convolve(phi: Functional, psi: Functional, X: LayeredInstance, objects: Iterable[Any]) -> Functional:
    """
    (φ⋆ψ)(a) = Σ over Δ(a) of coeff · φ(left) · ψ(right), tabulated on objects.
    """
    table = {}
    for a in objects:
        a = _as_object(X, a)
        table[X.canon(a).key] = sum(
            (coeff * phi(left) * psi(right) for (left, right), coeff in coproduct(X, a)), Fraction(0)
        )
    return Functional(table, name=f"{phi.name}*{psi.name}")


def phi(X: LayeredInstance, a: Any, k: int) -> Fraction:
    """Φ_k(a): k-layerings of a with every layer nonempty."""
    return Fraction(X.phi(_as_object(X, a), k))


def phi_vector(X: LayeredInstance, a: Any, max_degree: int) -> List[Fraction]:
    return [phi(X, a, k) for k in range(max_degree + 1)]


def mobius_by_inversion(X: LayeredInstance, a: Any, alternating: bool = True) -> Fraction:
    """
    μ(a) = Σ_k (-1)^k Φ_k(a); Φ_k vanishes for k beyond the size of a.
    With alternating=False the signs are dropped (negative control).
    """
    a = _as_object(X, a)
    sign = -1 if alternating else 1
    return sum((Fraction(sign ** k) * phi(X, a, k) for k in range(a.size + 1)), Fraction(0))


def mobius_closed_form(X: LayeredInstance, a: Any) -> Fraction:
    """
    Closed forms: (-1)^n for sets; for P-forests (-1)^(corollas) when every
    component is a corolla or a bare edge; for posets and other species
    (-1)^n when the underlying poset is discrete; 0 otherwise.
    """
    structure = _as_object(X, a).base
    n = structure.n
    if isinstance(structure, FiniteSetObj):
        return Fraction((-1) ** n)
    if isinstance(structure, PForest):
        return Fraction((-1) ** n) if structure.is_corolla_forest() else Fraction(0)
    return Fraction((-1) ** n) if is_discrete(structure.underlying_poset()) else Fraction(0)


def coproduct_closure(X: LayeredInstance, objects: Iterable[Any]) -> Dict[str, Layering]:
    """Representatives of the given objects and of every factor of their coproducts."""
    found: Dict[str, Layering] = {}
    for a in objects:
        a = _as_object(X, a)
        found.setdefault(X.canon(a).key, a)
        for left, right in cuts(X, a):
            found.setdefault(X.canon(left).key, left)
            found.setdefault(X.canon(right).key, right)
    return dict(sorted(found.items()))


def mobius_table(
    X: LayeredInstance, objects: Iterable[Any], threads: Optional[int] = None, alternating: bool = True
) -> Functional:
    """μ by inversion on the objects and every coproduct factor."""
    reps = coproduct_closure(X, objects)
    values = corpus_map(lambda a: mobius_by_inversion(X, a, alternating), list(reps.values()), threads)
    return Functional(dict(zip(reps.keys(), values)), name="mu")


def _corpus(X: LayeredInstance, size_bound: int) -> List[Layering]:
    return list(X.representatives(1, size_bound).values())


def _by_size(objects: Sequence[Layering]) -> Dict[int, List[Layering]]:
    sizes: Dict[int, List[Layering]] = defaultdict(list)
    for a in objects:
        sizes[a.size].append(a)
    return dict(sorted(sizes.items()))


def verify_coalgebra_laws(X: LayeredInstance, size_bound: int, drop_cut: bool = False) -> Report:
    """
    Coassociativity, both counit laws and grading of Δ on every class of
    degree 1 up to the size bound, one report entry per law and size.
    """
    report = Report(X.name, "coalgebra")

    def laws(a: Layering) -> Dict[str, bool]:
        splits = cuts(X, a, drop_cut)
        key = X.canon(a).key
        left_first = FormalSum()
        right_first = FormalSum()
        counit_left = FormalSum()
        counit_right = FormalSum()
        graded = True
        for b, c in splits:
            kb, kc = X.canon(b).key, X.canon(c).key
            graded = graded and b.size + c.size == a.size
            for b1, b2 in cuts(X, b, drop_cut):
                left_first.add((X.canon(b1).key, X.canon(b2).key, kc))
            for c1, c2 in cuts(X, c, drop_cut):
                right_first.add((kb, X.canon(c1).key, X.canon(c2).key))
            counit_left.add(kc, counit(X, b))
            counit_right.add(kb, counit(X, c))
        unit = FormalSum({key: 1})
        return {
            "coassociativity": left_first == right_first,
            "counit-left": counit_left == unit,
            "counit-right": counit_right == unit,
            "grading": graded,
        }

    for size, objects in _by_size(_corpus(X, size_bound)).items():
        results = corpus_map(laws, objects)
        for law in ("coassociativity", "counit-left", "counit-right", "grading"):
            bad = [X.canon(a).key for a, r in zip(objects, results) if not r[law]]
            report.add(f"{law}/size={size}", not bad, {"class": bad[0]} if bad else None)
    report.log_summary()
    return report


def verify_mobius(
    X: LayeredInstance, size_bound: int, threads: Optional[int] = None, wrong_sign: bool = False
) -> Report:
    """
    μ by inversion against the closed form, and μ⋆ζ = ε = ζ⋆μ, on every
    class of degree 1 up to the size bound. wrong_sign sums Φ_k without
    the alternating sign, so every nonempty class should fail.
    """
    report = Report(X.name, "mobius")
    corpus = _corpus(X, size_bound)
    mu = mobius_table(X, corpus, threads, alternating=not wrong_sign)
    z = zeta()
    mu_zeta = convolve(mu, z, X, corpus)
    zeta_mu = convolve(z, mu, X, corpus)
    for size, objects in _by_size(corpus).items():
        keys = [X.canon(a).key for a in objects]
        closed = [k for k, a in zip(keys, objects) if mu(k) != mobius_closed_form(X, a)]
        report.add(f"closed-form/size={size}", not closed, {"class": closed[0]} if closed else None)
        for name, table in (("mu*zeta", mu_zeta), ("zeta*mu", zeta_mu)):
            bad = [k for k, a in zip(keys, objects) if table(k) != counit(X, a)]
            report.add(f"{name}/size={size}", not bad, {"class": bad[0]} if bad else None)
    report.log_summary()
    return report
