"""
Monads on finite sets, their Eilenberg-Moore algebras, monad morphisms (F, theta)
and the lifting of algebras along them.

Everything is tabulated. A monad is given by pointwise operations on canonical
element labels (ints, frozensets, Just/Nothing) and the tables for T, eta and mu
on a carrier are derived from those and memoised per carrier. A morphism from
T1 to T2 has components theta_A : T2 F A -> F T1 A.
"""
import logging as log
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from threading import Lock
from typing import Any, Callable, Dict, Hashable, List, Optional, Tuple, Union

import numpy as np

from .config import get_settings
from .constants import BUILTIN_MONAD_BOUNDS
from .exceptions import (
    BudgetExceeded,
    CarrierMismatch,
    CarrierTooLarge,
    LawViolation,
    MonadError,
)
from .order_core import bits
from .verdicts import Ok, Violation, first_of

Label = Hashable

# Naturality is checked on every map between carriers up to this size.
NATURALITY_SIZE = 3


def render_label(x: Label) -> str:
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(render_label(e) for e in x)) + "}"
    if isinstance(x, Just):
        return f"just({render_label(x.value)})"
    if isinstance(x, Nothing):
        return "*"
    return str(x)


@dataclass(frozen=True)
class FinSetObj:
    elements: Tuple[Label, ...]

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash(self.elements)

    @cached_property
    def _positions(self) -> Dict[Label, int]:
        return {x: k for k, x in enumerate(self.elements)}

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, x: Label) -> int:
        try:
            return self._positions[x]
        except KeyError:
            raise MonadError(f"{render_label(x)} is not an element of this carrier") from None

    @classmethod
    def standard(cls, n: int) -> "FinSetObj":
        return cls(tuple(range(n)))

    def render(self) -> str:
        return "{" + ", ".join(render_label(x) for x in self.elements) + "}"


@dataclass(frozen=True)
class FinFn:
    """A total function, table[i] being the codomain index of domain element i."""

    domain: FinSetObj
    codomain: FinSetObj
    table: Tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.domain.size:
            raise MonadError(
                f"Function table has {len(self.table)} entries for a {self.domain.size}-element domain"
            )
        if any(not 0 <= k < self.codomain.size for k in self.table):
            raise MonadError("Function table entries must lie within the codomain")

    def __call__(self, x: Label) -> Label:
        return self.codomain.elements[self.table[self.domain.index(x)]]

    def __matmul__(self, other: "FinFn") -> "FinFn":
        """self @ other is self after other."""
        if other.codomain != self.domain:
            raise MonadError("Cannot compose: codomain and domain differ")
        return FinFn(other.domain, self.codomain, tuple(self.table[k] for k in other.table))

    @classmethod
    def identity(cls, a: FinSetObj) -> "FinFn":
        return cls(a, a, tuple(range(a.size)))

    @classmethod
    def from_labels(cls, domain: FinSetObj, codomain: FinSetObj, fn: Callable[[Label], Label]) -> "FinFn":
        return cls(domain, codomain, tuple(codomain.index(fn(x)) for x in domain.elements))

    def first_difference(self, other: "FinFn") -> Optional[Label]:
        """The first domain element on which two parallel functions disagree."""
        for k, (mine, theirs) in enumerate(zip(self.table, other.table)):
            if mine != theirs:
                return self.domain.elements[k]
        return None

    def is_surjective(self) -> bool:
        return len(set(self.table)) == self.codomain.size

    def lines(self) -> List[str]:
        return [f"{render_label(x)} -> {render_label(self(x))}" for x in self.domain.elements]


class Memo:
    """Read-mostly cache; writes are serialised and the first value stored wins."""

    def __init__(self):
        self._values: Dict[Any, Any] = {}
        self._lock = Lock()

    def get(self, key, compute: Callable[[], Any]):
        try:
            return self._values[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            return self._values.setdefault(key, value)


class FinFunctor(ABC):
    name: str = "functor"

    @abstractmethod
    def obj(self, a: FinSetObj) -> FinSetObj:
        pass

    @abstractmethod
    def fmap(self, f: FinFn) -> FinFn:
        pass


class IdentityFunctor(FinFunctor):
    name = "identity"

    def obj(self, a: FinSetObj) -> FinSetObj:
        return a

    def fmap(self, f: FinFn) -> FinFn:
        return f


IDENTITY_FUNCTOR = IdentityFunctor()


# Monads


class MonadInstance(FinFunctor):
    """
    Subclasses describe T on labels; obj, fmap, unit and mult tabulate it.
    `count(n)` is |TA| for an n-element A, used to decide what can be tabulated.
    """

    name: str
    size_bound: int

    def __init__(self):
        self._memo = Memo()

    @abstractmethod
    def count(self, n: int) -> int:
        pass

    @abstractmethod
    def elements(self, carrier: Tuple[Label, ...]) -> Tuple[Label, ...]:
        pass

    @abstractmethod
    def map_label(self, fn: Callable[[Label], Label], t: Label) -> Label:
        pass

    @abstractmethod
    def unit_label(self, x: Label) -> Label:
        pass

    @abstractmethod
    def join_label(self, tt: Label) -> Label:
        pass

    @abstractmethod
    def random_label(self, a: FinSetObj, rng: np.random.Generator) -> Label:
        """A uniformly drawn element of TA, without tabulating TA."""

    def tabulable(self, n: int, tabulation_limit: Optional[int] = None) -> bool:
        if tabulation_limit is None:
            tabulation_limit = get_settings().tabulation_limit
        return self.count(n) <= tabulation_limit

    def obj(self, a: FinSetObj) -> FinSetObj:
        def compute():
            limit = get_settings().tabulation_limit
            if not self.tabulable(a.size, limit):
                raise CarrierTooLarge(self.name, a.size, limit)
            return FinSetObj(self.elements(a.elements))

        return self._memo.get(("obj", a), compute)

    def fmap(self, f: FinFn) -> FinFn:
        # not memoised: law checks map many sampled functions, each used once
        return FinFn.from_labels(self.obj(f.domain), self.obj(f.codomain), lambda t: self.map_label(f, t))

    def unit(self, a: FinSetObj) -> FinFn:
        return self._memo.get(("unit", a), lambda: FinFn.from_labels(a, self.obj(a), self.unit_label))

    def mult(self, a: FinSetObj) -> FinFn:
        return self._memo.get(
            ("mult", a), lambda: FinFn.from_labels(self.obj(self.obj(a)), self.obj(a), self.join_label)
        )

    def __repr__(self) -> str:
        return f"<monad {self.name}>"


class IdentityMonad(MonadInstance):
    name = "identity"
    size_bound = BUILTIN_MONAD_BOUNDS["identity"]

    def count(self, n: int) -> int:
        return n

    def elements(self, carrier):
        return tuple(carrier)

    def map_label(self, fn, t):
        return fn(t)

    def unit_label(self, x):
        return x

    def join_label(self, tt):
        return tt

    def random_label(self, a, rng):
        return a.elements[int(rng.integers(a.size))]


@dataclass(frozen=True)
class Just:
    value: Label


@dataclass(frozen=True)
class Nothing:
    pass


NOTHING = Nothing()


class MaybeMonad(MonadInstance):
    """A + {*}: eta is the inclusion and mu collapses just(*) and * to *."""

    name = "maybe"
    size_bound = BUILTIN_MONAD_BOUNDS["maybe"]

    def count(self, n: int) -> int:
        return n + 1

    def elements(self, carrier):
        return tuple(Just(x) for x in carrier) + (NOTHING,)

    def map_label(self, fn, t):
        return Just(fn(t.value)) if isinstance(t, Just) else NOTHING

    def unit_label(self, x):
        return Just(x)

    def join_label(self, tt):
        return tt.value if isinstance(tt, Just) else NOTHING

    def random_label(self, a, rng):
        k = int(rng.integers(a.size + 1))
        return Just(a.elements[k]) if k < a.size else NOTHING


class PowersetMonad(MonadInstance):
    """Subsets as frozensets, listed in bitset order; eta is {a} and mu is union."""

    name = "powerset"
    size_bound = BUILTIN_MONAD_BOUNDS["powerset"]
    nonempty = False

    def count(self, n: int) -> int:
        return 2 ** n - (1 if self.nonempty else 0)

    def elements(self, carrier):
        start = 1 if self.nonempty else 0
        return tuple(frozenset(carrier[i] for i in bits(mask)) for mask in range(start, 2 ** len(carrier)))

    def map_label(self, fn, t):
        return frozenset(fn(x) for x in t)

    def unit_label(self, x):
        return frozenset((x,))

    def join_label(self, tt):
        return frozenset().union(*tt)

    def random_label(self, a, rng):
        while True:
            keep = rng.random(a.size) < 0.5
            subset = frozenset(x for x, kept in zip(a.elements, keep) if kept)
            if subset or not self.nonempty:
                return subset


class NonemptyPowersetMonad(PowersetMonad):
    name = "nonempty-powerset"
    size_bound = BUILTIN_MONAD_BOUNDS["nonempty-powerset"]
    nonempty = True


def builtin_monads() -> List[MonadInstance]:
    return list(_BUILTINS.values())


_BUILTINS: Dict[str, MonadInstance] = {
    m.name: m for m in (IdentityMonad(), MaybeMonad(), PowersetMonad(), NonemptyPowersetMonad())
}


def get_monad(name: str) -> MonadInstance:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise MonadError(f"Unknown monad {name!r}; choose from {', '.join(_BUILTINS)}") from None


def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(get_settings().seed if seed is None else seed)


def random_fn(a: FinSetObj, b: FinSetObj, rng: np.random.Generator) -> FinFn:
    return FinFn(a, b, tuple(int(k) for k in rng.integers(b.size, size=a.size)))


def all_fns(a: FinSetObj, b: FinSetObj):
    for table in product(range(b.size), repeat=a.size):
        yield FinFn(a, b, table)


def _differs(law: str, lhs: FinFn, rhs: FinFn, *context) -> Optional[Violation]:
    x = lhs.first_difference(rhs)
    if x is None:
        return None
    return Violation(law, (*context, render_label(x)))


def check_monad(
    t: MonadInstance,
    size_bound: Optional[int] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> Union[Ok, Violation]:
    """
    Functor and monad laws on the standard carriers 1..size_bound. Associativity
    runs over all of T^3 A when that is tabulable and over sampled elements
    otherwise.
    """
    settings = get_settings()
    size_bound = t.size_bound if size_bound is None else size_bound
    samples = settings.samples if samples is None else samples
    rng = _rng(seed)

    for n in range(1, size_bound + 1):
        a = FinSetObj.standard(n)
        ta = t.obj(a)
        identity = FinFn.identity(ta)

        if t.fmap(FinFn.identity(a)) != identity:
            return _differs("functor identity", t.fmap(FinFn.identity(a)), identity, n)
        for _ in range(samples):
            b = FinSetObj.standard(int(rng.integers(1, size_bound + 1)))
            c = FinSetObj.standard(int(rng.integers(1, size_bound + 1)))
            f, g = random_fn(a, b, rng), random_fn(b, c, rng)
            violation = _differs("functor composition", t.fmap(g @ f), t.fmap(g) @ t.fmap(f), n)
            if violation is not None:
                return violation

        mu = t.mult(a)
        violation = first_of(
            [
                lambda: _differs("left unit", mu @ t.fmap(t.unit(a)), identity, n),
                lambda: _differs("right unit", mu @ t.unit(ta), identity, n),
            ]
        )
        if violation is not None:
            return violation

        if t.tabulable(t.count(t.count(n)), settings.tabulation_limit):
            violation = _differs("associativity", mu @ t.fmap(mu), mu @ t.mult(ta), n)
        else:
            log.warning(
                f"{t.name}: T^3 of a {n}-element carrier is not tabulable; "
                f"checking associativity on {samples} samples"
            )
            violation = _sampled_associativity(t, ta, samples, rng, n)
        if violation is not None:
            return violation
    return Ok()


def _sampled_associativity(t: MonadInstance, ta: FinSetObj, samples: int, rng, n: int) -> Optional[Violation]:
    tta = t.obj(ta)
    for _ in range(samples):
        x = t.random_label(tta, rng)
        lhs = t.join_label(t.map_label(t.join_label, x))
        rhs = t.join_label(t.join_label(x))
        if lhs != rhs:
            return Violation("associativity", (n, render_label(x)))
    return None


# Eilenberg-Moore algebras


@dataclass(frozen=True)
class AlgebraInstance:
    monad: MonadInstance
    carrier: FinSetObj
    structure: FinFn

    def lines(self) -> List[str]:
        return self.structure.lines()


def make_algebra(t: MonadInstance, a: FinSetObj, fn: Callable[[Label], Label]) -> AlgebraInstance:
    return AlgebraInstance(t, a, FinFn.from_labels(t.obj(a), a, fn))


def check_algebra(
    alg: AlgebraInstance, samples: Optional[int] = None, seed: Optional[int] = None
) -> Union[Ok, Violation]:
    """
    sigma after eta is the identity, then sigma after T sigma equals sigma after
    mu. The second law is sampled when T^2 of the carrier is not tabulable.
    """
    t, a, sigma = alg.monad, alg.carrier, alg.structure
    settings = get_settings()
    ta = t.obj(a)
    if sigma.domain != ta or sigma.codomain != a:
        raise MonadError("Structure map must go from T of the carrier to the carrier")

    violation = _differs("unit", sigma @ t.unit(a), FinFn.identity(a))
    if violation is not None:
        return violation

    if t.tabulable(ta.size, settings.tabulation_limit):
        violation = _differs("associativity", sigma @ t.fmap(sigma), sigma @ t.mult(a))
    else:
        samples = settings.samples if samples is None else samples
        log.warning(
            f"{t.name}: T^2 of a {a.size}-element carrier is not tabulable; "
            f"checking the algebra on {samples} samples"
        )
        rng = _rng(seed)
        violation = None
        for _ in range(samples):
            x = t.random_label(ta, rng)
            if sigma(t.map_label(sigma, x)) != sigma(t.join_label(x)):
                violation = Violation("associativity", (render_label(x),))
                break
    return Ok() if violation is None else violation


def enumerate_algebras(t: MonadInstance, a: FinSetObj, budget: Optional[int] = None) -> List[AlgebraInstance]:
    """
    Every structure map TA -> A passing check_algebra, in lexicographic order of
    tables. Entries on eta(x) are fixed to x up front.
    """
    if budget is None:
        budget = get_settings().budget
    ta = t.obj(a)
    if a.size ** ta.size > budget:
        raise BudgetExceeded(ta.size, a.size, budget)

    fixed: Dict[int, int] = {}
    for x, k in enumerate(t.unit(a).table):
        if fixed.setdefault(k, x) != x:
            return []
    free = [k for k in range(ta.size) if k not in fixed]

    found = []
    for choice in product(range(a.size), repeat=len(free)):
        table = dict(fixed)
        table.update(zip(free, choice))
        alg = AlgebraInstance(t, a, FinFn(ta, a, tuple(table[k] for k in range(ta.size))))
        if check_algebra(alg):
            found.append(alg)
    log.debug(f"{t.name} has {len(found)} algebras on a {a.size}-element carrier")
    return found


def is_homomorphism(source: AlgebraInstance, target: AlgebraInstance, h: FinFn) -> bool:
    t = source.monad
    return h @ source.structure == target.structure @ t.fmap(h)


def enumerate_homomorphisms(source: AlgebraInstance, target: AlgebraInstance) -> List[FinFn]:
    return [h for h in all_fns(source.carrier, target.carrier) if is_homomorphism(source, target, h)]


# Monad morphisms


@dataclass(frozen=True, eq=False)
class MonadMorphismInstance:
    """(F, theta) from T1 = source to T2 = target."""

    name: str
    source: MonadInstance
    target: MonadInstance
    component: Callable[[FinSetObj], FinFn]
    functor: FinFunctor = IDENTITY_FUNCTOR
    _memo: Memo = field(default_factory=Memo, repr=False)

    def theta(self, a: FinSetObj) -> FinFn:
        def compute():
            theta = self.component(a)
            domain = self.target.obj(self.functor.obj(a))
            codomain = self.functor.obj(self.source.obj(a))
            if theta.domain != domain or theta.codomain != codomain:
                raise MonadError(f"{self.name}: theta at a {a.size}-element carrier has the wrong type")
            return theta

        return self._memo.get(a, compute)

    @property
    def carrier_bound(self) -> int:
        return min(self.source.size_bound, self.target.size_bound)

    @cached_property
    def verdict(self) -> Union[Ok, Violation]:
        return check_monad_morphism(self)


def check_monad_morphism(m: MonadMorphismInstance, carrier_bound: Optional[int] = None) -> Union[Ok, Violation]:
    """
    Naturality on every map between carriers up to NATURALITY_SIZE, then the unit
    and multiplication equations on carriers 1..carrier_bound. A multiplication
    check whose theta at T1 A cannot be tabulated is skipped with a warning.
    """
    t1, t2, F = m.source, m.target, m.functor
    bound = m.carrier_bound if carrier_bound is None else carrier_bound
    small = min(bound, NATURALITY_SIZE)

    for n, k in product(range(1, small + 1), repeat=2):
        a, b = FinSetObj.standard(n), FinSetObj.standard(k)
        for f in all_fns(a, b):
            lhs = F.fmap(t1.fmap(f)) @ m.theta(a)
            rhs = m.theta(b) @ t2.fmap(F.fmap(f))
            violation = _differs("naturality", lhs, rhs, n, k, f.table)
            if violation is not None:
                return violation

    for n in range(1, bound + 1):
        a = FinSetObj.standard(n)
        fa = F.obj(a)
        violation = _differs("unit", m.theta(a) @ t2.unit(fa), F.fmap(t1.unit(a)), n)
        if violation is not None:
            return violation

    for n in range(1, bound + 1):
        a = FinSetObj.standard(n)
        fa = F.obj(a)
        try:
            rhs = F.fmap(t1.mult(a)) @ m.theta(t1.obj(a)) @ t2.fmap(m.theta(a))
        except CarrierTooLarge as e:
            log.warning(f"{m.name}: multiplication law skipped at size {n}: {e}")
            continue
        violation = _differs("multiplication", m.theta(a) @ t2.mult(fa), rhs, n)
        if violation is not None:
            return violation
    return Ok()


def _require(verdict: Union[Ok, Violation]) -> None:
    if not verdict:
        raise LawViolation(verdict)


def lift_morphism(m: MonadMorphismInstance, alg: AlgebraInstance) -> AlgebraInstance:
    """(A, sigma) |-> (FA, F sigma after theta_A), a T2-algebra."""
    if alg.monad is not m.source:
        raise MonadError(f"{m.name} lifts {m.source.name}-algebras, got a {alg.monad.name}-algebra")
    _require(m.verdict)
    _require(check_algebra(alg))

    a = alg.carrier
    lifted = AlgebraInstance(m.target, m.functor.obj(a), m.functor.fmap(alg.structure) @ m.theta(a))
    verdict = check_algebra(lifted)
    if not verdict:
        raise AssertionError(f"{m.name} lifted an algebra to a non-algebra: {verdict}")
    return lifted


def lift_homomorphism(m: MonadMorphismInstance, h: FinFn) -> FinFn:
    return m.functor.fmap(h)


Lifting = Callable[[AlgebraInstance], AlgebraInstance]


def recover_theta(
    functor: FinFunctor,
    lifted: Lifting,
    source: MonadInstance,
    target: MonadInstance,
    name: str = "recovered",
) -> MonadMorphismInstance:
    """
    theta_A = sigma~ after T2 F(eta1_A), where sigma~ is the lifted structure of
    the free algebra (T1 A, mu1_A). Components are computed on demand.
    """

    def component(a: FinSetObj) -> FinFn:
        free = AlgebraInstance(source, source.obj(a), source.mult(a))
        image = lifted(free)
        expected = functor.obj(free.carrier)
        if image.carrier != expected:
            raise CarrierMismatch(expected, image.carrier)
        if image.monad is not target:
            raise MonadError(f"Lifting produced a {image.monad.name}-algebra, expected {target.name}")
        return image.structure @ target.fmap(functor.fmap(source.unit(a)))

    m = MonadMorphismInstance(name, source, target, component, functor)
    if get_settings().verify:
        _check_recovered(m)
    return m


def _check_recovered(m: MonadMorphismInstance) -> None:
    verdict = check_monad_morphism(m, carrier_bound=1)
    if not verdict:
        raise AssertionError(f"Recovered theta is not a monad morphism: {verdict}")


def lifting_of(m: MonadMorphismInstance) -> Lifting:
    return lambda alg: lift_morphism(m, alg)


# Builtin morphisms


def identity_morphism(t: MonadInstance) -> MonadMorphismInstance:
    return MonadMorphismInstance(f"{t.name}->{t.name}", t, t, lambda a: FinFn.identity(t.obj(a)))


def unit_morphism(t: MonadInstance) -> MonadMorphismInstance:
    """From T to the identity monad, theta_A = eta_A : A -> TA."""
    return MonadMorphismInstance(f"{t.name}->identity", t, get_monad("identity"), t.unit)


def pointwise_morphism(
    name: str, source: MonadInstance, target: MonadInstance, label_fn: Callable[[Label], Label]
) -> MonadMorphismInstance:
    """F = identity and theta_A given elementwise from T2 A to T1 A."""

    def component(a: FinSetObj) -> FinFn:
        return FinFn.from_labels(target.obj(a), source.obj(a), label_fn)

    return MonadMorphismInstance(name, source, target, component)


def _just_to_singleton(t: Label) -> Label:
    return frozenset((t.value,)) if isinstance(t, Just) else frozenset()


def builtin_morphisms() -> Dict[Tuple[str, str], MonadMorphismInstance]:
    found: Dict[Tuple[str, str], MonadMorphismInstance] = {}
    for t in builtin_monads():
        found[(t.name, t.name)] = identity_morphism(t)
        found.setdefault((t.name, "identity"), unit_morphism(t))
    powerset = get_monad("powerset")
    found[("powerset", "maybe")] = pointwise_morphism(
        "powerset->maybe", powerset, get_monad("maybe"), _just_to_singleton
    )
    found[("powerset", "nonempty-powerset")] = pointwise_morphism(
        "powerset->nonempty-powerset", powerset, get_monad("nonempty-powerset"), lambda s: s
    )
    return found


def get_morphism(source: str, target: str) -> MonadMorphismInstance:
    """The builtin morphism lifting source-algebras to target-algebras."""
    morphisms = builtin_morphisms()
    try:
        return morphisms[(source, target)]
    except KeyError:
        known = ", ".join(f"{s}->{t}" for s, t in morphisms)
        raise MonadError(f"No builtin morphism {source}->{target}; known: {known}") from None
