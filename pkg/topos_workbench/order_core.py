"""Finite posets, their downset lattices, and finite Heyting algebras.

Everything here is immutable once built: order relations and operation tables are
read-only numpy arrays, so values can be shared freely.
"""
import logging as log
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from .config import get_settings
from .constants import DOWNSETS_PREFIX, MAX_POSET_SIZE, MAX_POWERSET_RANK
from .exceptions import (
    AlgebraTooLarge,
    CycleDetected,
    DuplicateLabel,
    IndexOutOfRange,
    NotALattice,
    NotDistributive,
    PosetTooLarge,
    SpecError,
    UnknownLabel,
)
from .verdicts import Violation, first_failure, first_of

# Brute-force r.p.c. cross-checks cost n^4; beyond this size they are skipped.
BRUTE_FORCE_LIMIT = 64


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def bits(mask: int) -> Tuple[int, ...]:
    """Indices of the set bits of `mask`, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Poset:
    """
    A finite partial order on `range(size)`.

    leq[i, j] is True iff element i <= element j. Labels are only used for
    input and rendering.
    """

    elements: Tuple[str, ...]
    leq: np.ndarray

    @property
    def size(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"Poset({list(self.elements)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        return self.elements == other.elements and np.array_equal(self.leq, other.leq)

    def __hash__(self) -> int:
        return hash((self.elements, self.leq.tobytes()))

    @cached_property
    def _positions(self) -> Mapping[str, int]:
        return {label: i for i, label in enumerate(self.elements)}

    def index(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise UnknownLabel(label) from None

    def le(self, i: int, j: int) -> bool:
        return bool(self.leq[i, j])

    @cached_property
    def down_masks(self) -> Tuple[int, ...]:
        """down_masks[i] is the bitset of the principal downset S_i = {j : j <= i}."""
        return tuple(
            sum(1 << int(j) for j in np.flatnonzero(self.leq[:, i])) for i in range(self.size)
        )

    @cached_property
    def strict_down_masks(self) -> Tuple[int, ...]:
        return tuple(mask & ~(1 << i) for i, mask in enumerate(self.down_masks))

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    @cached_property
    def ranks(self) -> Tuple[int, ...]:
        """Length of the longest chain strictly below each element."""
        ranks = [0] * self.size
        for i in self.linear_extension:
            below = bits(self.strict_down_masks[i])
            ranks[i] = max((ranks[j] + 1 for j in below), default=0)
        return tuple(ranks)

    @cached_property
    def linear_extension(self) -> Tuple[int, ...]:
        # Fewer elements below means earlier; ties broken by index.
        return tuple(
            sorted(range(self.size), key=lambda i: (int(self.leq[:, i].sum()), i))
        )

    def top(self) -> Optional[int]:
        tops = np.flatnonzero(self.leq.all(axis=0))
        return int(tops[0]) if len(tops) else None

    def bottom(self) -> Optional[int]:
        bottoms = np.flatnonzero(self.leq.all(axis=1))
        return int(bottoms[0]) if len(bottoms) else None

    def minimal(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.size) if self.strict_down_masks[i] == 0)

    def pair_count(self) -> int:
        """Number of pairs (i, j) with i <= j, reflexive ones included."""
        return int(self.leq.sum())

    def is_downset(self, mask: int) -> bool:
        return all(self.down_masks[i] & ~mask == 0 for i in bits(mask))

    def render_mask(self, mask: int) -> str:
        """Members listed by rank, then index: for powersets, by size and then bitset."""
        members = sorted(bits(mask), key=lambda i: (self.ranks[i], i))
        return "{" + ",".join(self.elements[i] for i in members) + "}"

    def sub_poset(self, indices: Sequence[int]) -> "Poset":
        indices = list(indices)
        return Poset(
            tuple(self.elements[i] for i in indices),
            _frozen(self.leq[np.ix_(indices, indices)].copy()),
        )


@dataclass(frozen=True)
class Downset:
    """A downward-closed set of poset indices, stored as a bitset."""

    mask: int

    def members(self) -> Tuple[int, ...]:
        return bits(self.mask)

    def __contains__(self, index: int) -> bool:
        return bool(self.mask >> index & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def render(self, poset: Poset) -> str:
        return poset.render_mask(self.mask)


def _poset_from_matrix(elements: Sequence[str], leq: np.ndarray) -> Poset:
    return Poset(tuple(elements), _frozen(leq))


def build_poset(spec: Mapping) -> Poset:
    """
    Build a poset from {"elements": [...], "leq": [[a, b], ...]}.

    Pairs mean a <= b and may be covers or any part of the order: the
    reflexive-transitive closure is always taken. "pairs" is accepted as an
    alias of "leq".
    """
    elements = [str(label) for label in spec.get("elements", [])]
    pairs = spec.get("leq", spec.get("pairs", [])) or []

    positions = {}
    for label in elements:
        if label in positions:
            raise DuplicateLabel(label)
        positions[label] = len(positions)
    n = len(elements)
    if n > MAX_POSET_SIZE:
        raise PosetTooLarge(n, MAX_POSET_SIZE)

    leq = np.eye(n, dtype=bool)
    for pair in pairs:
        if len(pair) != 2:
            raise SpecError(f"Order pair {pair!r} must have exactly two labels")
        low, high = (str(label) for label in pair)
        for label in (low, high):
            if label not in positions:
                raise UnknownLabel(label)
        leq[positions[low], positions[high]] = True

    for k in range(n):
        leq |= np.outer(leq[:, k], leq[k, :])

    clash = leq & leq.T & ~np.eye(n, dtype=bool)
    if clash.any():
        i, j = np.argwhere(clash)[0]
        raise CycleDetected(elements[i], elements[j])

    log.debug(f"Built poset with {n} elements and {int(leq.sum())} order pairs")
    return _poset_from_matrix(elements, leq)


def _subset_label(mask: int) -> str:
    return "{" + ",".join(str(i + 1) for i in bits(mask)) + "}"


def powerset_poset(rank: int) -> Poset:
    """P({1..rank}) under inclusion; element k is the subset with bitset k."""
    if not 0 <= rank <= MAX_POWERSET_RANK:
        raise SpecError(f"powerset rank must be between 0 and {MAX_POWERSET_RANK}")
    masks = np.arange(1 << rank)
    leq = (masks[:, None] & ~masks[None, :]) == 0
    return _poset_from_matrix([_subset_label(int(k)) for k in masks], leq)


def chain_poset(length: int) -> Poset:
    if not 1 <= length <= MAX_POSET_SIZE:
        raise SpecError(f"chain length must be between 1 and {MAX_POSET_SIZE}")
    idx = np.arange(length)
    return _poset_from_matrix([str(i) for i in idx], idx[:, None] <= idx[None, :])


def antichain_poset(width: int) -> Poset:
    if not 1 <= width <= MAX_POSET_SIZE:
        raise SpecError(f"antichain width must be between 1 and {MAX_POSET_SIZE}")
    return _poset_from_matrix([f"a{i}" for i in range(width)], np.eye(width, dtype=bool))


def diamond_poset() -> Poset:
    return build_poset(
        {"elements": ["0", "a", "b", "1"], "leq": [["0", "a"], ["0", "b"], ["a", "1"], ["b", "1"]]}
    )


def v_poset() -> Poset:
    return build_poset({"elements": ["0", "a", "b"], "leq": [["0", "a"], ["0", "b"]]})


NAMED_PATTERN = re.compile(r"^(powerset|chain|antichain):(\d+)$")


def named_poset(name: str) -> Optional[Poset]:
    """The builtin poset called `name`, or None when `name` is not a builtin."""
    if name == "diamond":
        return diamond_poset()
    if name == "V":
        return v_poset()
    match = NAMED_PATTERN.match(name)
    if match is None:
        return None
    kind, number = match.group(1), int(match.group(2))
    if kind == "powerset":
        return powerset_poset(number)
    if kind == "chain":
        return chain_poset(number)
    return antichain_poset(number)


def load_poset_file(path: Union[str, Path]) -> Poset:
    """Read a poset from a JSON or YAML file."""
    try:
        with open(path, "r") as f:
            spec = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise SpecError(f"Error occurred while reading poset file {path}: {e}") from e
    if not isinstance(spec, Mapping):
        raise SpecError(f"Poset file {path} must hold a mapping with 'elements' and 'leq'")
    return build_poset(spec)


def resolve_poset(spec: str) -> Poset:
    """A builtin name (powerset:N, chain:N, antichain:N, diamond, V) or a file path."""
    poset = named_poset(spec)
    if poset is not None:
        return poset
    if not Path(spec).is_file():
        raise SpecError(f"{spec!r} is neither a builtin poset nor a readable file")
    return load_poset_file(spec)


@dataclass(frozen=True, eq=False)
class Heyting:
    """
    A finite Heyting algebra on `range(size)`, given by tables.

    When the algebra was generated from a poset, `poset` and `masks` record
    which downset each element denotes.
    """

    labels: Tuple[str, ...]
    leq: np.ndarray
    meet: np.ndarray
    join: np.ndarray
    imp: np.ndarray
    bot: int
    top: int
    poset: Optional[Poset] = None
    masks: Optional[Tuple[int, ...]] = None

    @property
    def size(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"Heyting(size={self.size})"

    @cached_property
    def neg(self) -> np.ndarray:
        return _frozen(self.imp[:, self.bot].copy())

    def check_index(self, a: int) -> int:
        if not 0 <= a < self.size:
            raise IndexOutOfRange(a, self.size)
        return a

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SpecError(f"Algebra has no element labelled {label!r}") from None

    def downset(self, a: int) -> Downset:
        if self.masks is None:
            raise SpecError("Algebra was not generated from a poset")
        return Downset(self.masks[self.check_index(a)])


def downsets_within(poset: Poset, universe: int, limit: Optional[int] = None) -> Tuple[int, ...]:
    """
    All downsets of `poset` contained in the downward-closed bitset `universe`,
    ascending by bitset value.
    """
    if limit is None:
        limit = get_settings().max_algebra
    found = [0]
    # Extending downsets one element at a time along a linear extension
    # reaches each downset exactly once.
    for i in poset.linear_extension:
        if not universe >> i & 1:
            continue
        below = poset.strict_down_masks[i]
        found.extend([mask | 1 << i for mask in found if below & ~mask == 0])
        if len(found) > limit:
            raise AlgebraTooLarge(len(found), limit)
    return tuple(sorted(found))


def downset_algebra(poset: Poset, universe: int, masks: Sequence[int]) -> Heyting:
    """Heyting algebra of the given downsets (all downsets inside `universe`)."""
    values = np.array(masks, dtype=np.int64)
    n = len(values)

    def lookup(table: np.ndarray) -> np.ndarray:
        positions = np.searchsorted(values, table)
        return _frozen(positions.astype(np.intp))

    meet = lookup(values[:, None] & values[None, :])
    join = lookup(values[:, None] | values[None, :])

    # a => b is {p in universe : S_p & a is inside b}
    imp_masks = np.zeros((n, n), dtype=np.int64)
    outside_b = ~values[None, :]
    for p in bits(universe):
        escapes = (poset.down_masks[p] & values[:, None] & outside_b) != 0
        imp_masks |= np.where(escapes, 0, 1 << p)
    imp = lookup(imp_masks)

    leq = _frozen((values[:, None] & ~values[None, :]) == 0)
    algebra = Heyting(
        labels=tuple(poset.render_mask(int(m)) for m in values),
        leq=leq,
        meet=meet,
        join=join,
        imp=imp,
        bot=0,
        top=n - 1,
        poset=poset,
        masks=tuple(int(m) for m in values),
    )
    _maybe_verify(algebra)
    return algebra


def enumerate_downsets(p: Poset, max_size: Optional[int] = None) -> Heyting:
    """The Heyting algebra of all downsets of `p` ordered by inclusion."""
    masks = downsets_within(p, p.full_mask, max_size)
    log.debug(f"Poset of size {p.size} has {len(masks)} downsets")
    return downset_algebra(p, p.full_mask, masks)


def _greatest(candidates: np.ndarray, leq: np.ndarray) -> np.ndarray:
    """
    For each row of the boolean matrix `candidates`, the column index of its
    greatest True entry, or -1 if the row has no greatest entry.
    """
    # dominated[r, x]: some candidate y of row r is not below x
    dominated = (candidates[:, None, :] & ~leq.T[None, :, :]).any(axis=2)
    greatest = candidates & ~dominated
    return np.where(greatest.any(axis=1), greatest.argmax(axis=1), -1)


def brute_force_imp(leq: np.ndarray, meet: np.ndarray) -> np.ndarray:
    """a => b as the greatest x with meet(a, x) <= b, by exhaustive search."""
    n = len(leq)
    imp = np.empty((n, n), dtype=np.intp)
    for a in range(n):
        # candidates[b, x]: meet(a, x) <= b
        candidates = leq[meet[a][None, :], np.arange(n)[:, None]]
        imp[a] = _greatest(candidates, leq)
    return imp


def heyting_from_lattice(p: Poset) -> Heyting:
    """Use a finite distributive lattice directly as a Heyting algebra."""
    if p.size == 0:
        raise SpecError("The empty poset has no top or bottom, so it is not a lattice")
    leq = p.leq
    n = p.size
    # lower[i, j, c]: c <= i and c <= j
    lower = leq.T[:, None, :] & leq.T[None, :, :]
    upper = leq[:, None, :] & leq[None, :, :]
    meet = _greatest(lower.reshape(n * n, n), leq).reshape(n, n)
    join = _greatest(upper.reshape(n * n, n), leq.T).reshape(n, n)
    for table, missing in ((meet, "meet"), (join, "join")):
        if (table < 0).any():
            i, j = np.argwhere(table < 0)[0]
            raise NotALattice(p.elements[i], p.elements[j], missing)

    a, b, c = np.ix_(range(n), range(n), range(n))
    broken = meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]
    if broken.any():
        raise NotDistributive(tuple(p.elements[int(i)] for i in np.argwhere(broken)[0]))

    algebra = Heyting(
        labels=p.elements,
        leq=leq,
        meet=_frozen(meet.astype(np.intp)),
        join=_frozen(join.astype(np.intp)),
        imp=_frozen(brute_force_imp(leq, meet)),
        bot=p.bottom(),
        top=p.top(),
    )
    _maybe_verify(algebra)
    return algebra


def two_element() -> Heyting:
    """The classical algebra of truth values {0 < 1}."""
    return heyting_from_lattice(chain_poset(2))


def resolve_algebra(spec: str) -> Heyting:
    """
    `downsets:<poset>` for the downset algebra of a poset, otherwise the named
    poset itself, which must then be a distributive lattice.
    """
    if spec.startswith(DOWNSETS_PREFIX):
        return enumerate_downsets(resolve_poset(spec[len(DOWNSETS_PREFIX):]))
    return heyting_from_lattice(resolve_poset(spec))


def h_imp(h: Heyting, a: int, b: int) -> int:
    """Relative pseudo-complement a => b."""
    return int(h.imp[h.check_index(a), h.check_index(b)])


def neg(h: Heyting, a: int) -> int:
    """Pseudo-complement, a => bot."""
    return int(h.neg[h.check_index(a)])


@dataclass(frozen=True)
class BooleanCheck:
    boolean: bool
    witness: Optional[int] = None

    def __bool__(self) -> bool:
        return self.boolean


def is_boolean(h: Heyting) -> BooleanCheck:
    """True iff a v ~a = top for every a; otherwise the least failing a."""
    failing = np.flatnonzero(h.join[np.arange(h.size), h.neg] != h.top)
    if len(failing):
        return BooleanCheck(False, int(failing[0]))
    return BooleanCheck(True)


def double_negation_holds(h: Heyting) -> bool:
    return bool((h.neg[h.neg] == np.arange(h.size)).all())


def implication_is_material(h: Heyting) -> bool:
    """a => b equals ~a v b for all a, b."""
    return bool((h.imp == h.join[h.neg[:, None], np.arange(h.size)[None, :]]).all())


def heyting_violations(h: Heyting, brute_force_limit: int = BRUTE_FORCE_LIMIT) -> Optional[Violation]:
    """First failing Heyting-algebra law, checked exhaustively, or None."""
    n = h.size
    leq, meet, join = h.leq, h.meet, h.join
    idx = np.arange(n)
    a, b, c = np.ix_(idx, idx, idx)

    checks = [
        lambda: first_failure("reflexivity", ~np.diag(leq)),
        lambda: first_failure("antisymmetry", leq & leq.T & (idx[:, None] != idx[None, :])),
        lambda: first_failure("transitivity", leq[a, b] & leq[b, c] & ~leq[a, c]),
        lambda: first_failure("bottom", ~leq[h.bot, :]),
        lambda: first_failure("top", ~leq[:, h.top]),
        lambda: first_failure("meet lower bound", ~(leq[meet, a[:, :, 0]] & leq[meet, b[:, :, 0]])),
        lambda: first_failure("meet greatest", leq[c, a] & leq[c, b] & ~leq[c, meet[a, b]]),
        lambda: first_failure("join upper bound", ~(leq[a[:, :, 0], join] & leq[b[:, :, 0], join])),
        lambda: first_failure("join least", leq[a, c] & leq[b, c] & ~leq[join[a, b], c]),
        lambda: first_failure("distributivity", meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]),
        lambda: first_failure("meet unit", meet[h.top, idx] != idx),
        lambda: first_failure("meet commutativity", meet != meet.T),
        lambda: first_failure("meet associativity", meet[meet[a, b], c] != meet[a, meet[b, c]]),
        lambda: first_failure("r.p.c. bound", ~leq[meet[a[:, :, 0], h.imp], b[:, :, 0]]),
        lambda: first_failure("r.p.c. greatest", leq[meet[a, c], b] & ~leq[c, h.imp[a, b]]),
        lambda: first_failure("pseudo-complement", meet[idx, h.neg] != h.bot),
    ]
    if n <= brute_force_limit:
        checks.append(lambda: first_failure("r.p.c. brute force", h.imp != brute_force_imp(leq, meet)))
    return first_of(checks)


def _maybe_verify(h: Heyting) -> None:
    if not get_settings().verify:
        return
    violation = heyting_violations(h)
    if violation is not None:
        raise AssertionError(f"Generated algebra fails {violation}")


def closed_under(masks: Iterable[int]) -> bool:
    """Whether a set of downset bitsets is closed under intersection and union."""
    masks = set(masks)
    return all(x & y in masks and x | y in masks for x in masks for y in masks)
