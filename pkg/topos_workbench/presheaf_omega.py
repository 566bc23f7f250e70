"""
The subobject classifier of presheaves on a finite poset P.

Omega(a) is the set of a-cribles, the downsets of S_a = {b : b <= a}, and for
b <= a restriction sends a crible S to {c in S : c <= b}. Cribles are stored as
bitsets over the indices of P itself, so a crible of S_a is also a downset of P.
"""
import logging as log
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .constants import MAX_DOWNSETS
from .order_core import Downset, Heyting, Poset, bits, downset_algebra, downsets_within
from .exceptions import NoTopElement, PosetError
from .verdicts import Violation


@dataclass(frozen=True, eq=False)
class OmegaPresheaf:
    base: Poset
    at: Tuple[Tuple[int, ...], ...]
    restrictions: Mapping[Tuple[int, int], Tuple[int, ...]]

    def cribles(self, a: int) -> Tuple[Downset, ...]:
        return tuple(Downset(mask) for mask in self.at[a])

    def restrict(self, a: int, b: int) -> Tuple[int, ...]:
        """Table Omega(a) -> Omega(b) for b <= a, as crible positions."""
        try:
            return self.restrictions[(a, b)]
        except KeyError:
            raise PosetError(
                f"{self.base.elements[b]!r} is not below {self.base.elements[a]!r}"
            ) from None

    @cached_property
    def positions(self) -> Tuple[Dict[int, int], ...]:
        return tuple({mask: k for k, mask in enumerate(cribles)} for cribles in self.at)


def restrict_crible(p: Poset, mask: int, b: int) -> int:
    return mask & p.down_masks[b]


def build_omega(p: Poset) -> OmegaPresheaf:
    """Tabulate Omega on every object and every arrow b <= a of P."""
    at = tuple(downsets_within(p, p.down_masks[a], limit=MAX_DOWNSETS) for a in range(p.size))
    positions = [{mask: k for k, mask in enumerate(cribles)} for cribles in at]
    restrictions = {}
    for a in range(p.size):
        for b in bits(p.down_masks[a]):
            restrictions[(a, b)] = tuple(
                positions[b][restrict_crible(p, mask, b)] for mask in at[a]
            )
    omega = OmegaPresheaf(p, at, restrictions)
    violation = functoriality_violation(omega)
    if violation is not None:
        raise AssertionError(f"Omega is not a functor: {violation}")
    log.debug(f"Omega over {p.size} objects has {sum(len(c) for c in at)} cribles in total")
    return omega


def functoriality_violation(omega: OmegaPresheaf) -> Optional[Violation]:
    """Identity and composition laws over all comparable pairs and triples."""
    p = omega.base
    for a in range(p.size):
        if omega.restrict(a, a) != tuple(range(len(omega.at[a]))):
            return Violation("identity", (a,))
    for a in range(p.size):
        for b in bits(p.down_masks[a]):
            ab = omega.restrict(a, b)
            for c in bits(p.down_masks[b]):
                bc, ac = omega.restrict(b, c), omega.restrict(a, c)
                for k in range(len(ab)):
                    if bc[ab[k]] != ac[k]:
                        return Violation("composition", (a, b, c, k))
    return None


def count_truth_values(p: Poset) -> int:
    """
    Global truth values 1 => Omega. With a top element the terminal presheaf is
    representable, so by Yoneda they are the cribles on the top.
    """
    top = p.top()
    if top is None:
        raise NoTopElement()
    return len(downsets_within(p, p.down_masks[top], limit=MAX_DOWNSETS))


def natural_transformations_to_omega(omega: OmegaPresheaf) -> List[Tuple[int, ...]]:
    """
    Every compatible choice of one crible per object (mask per element index),
    found by backtracking along a linear extension. Works without a top.
    """
    p = omega.base
    order = p.linear_extension
    chosen: Dict[int, int] = {}
    found = []

    def extend(depth: int) -> None:
        if depth == len(order):
            found.append(tuple(chosen[a] for a in range(p.size)))
            return
        a = order[depth]
        below = [b for b in bits(p.strict_down_masks[a])]
        for mask in omega.at[a]:
            if all(restrict_crible(p, mask, b) == chosen[b] for b in below):
                chosen[a] = mask
                extend(depth + 1)
        chosen.pop(a, None)

    extend(0)
    return found


@dataclass(frozen=True)
class SubfunctorOfRepresentable:
    """A subfunctor of H_a: for each b <= a, whether the arrow b <= a is kept."""

    a: int
    selected: Tuple[Tuple[int, bool], ...]

    @property
    def mask(self) -> int:
        return sum(1 << b for b, keep in self.selected if keep)

    def is_selected(self, b: int) -> bool:
        return dict(self.selected)[b]


def enumerate_subfunctors(p: Poset, a: int) -> List[SubfunctorOfRepresentable]:
    """All selections on S_a closed under restriction, ascending by selected bitset."""
    below = bits(p.down_masks[a])
    found = []
    for choice in product((False, True), repeat=len(below)):
        kept = sum(1 << b for b, keep in zip(below, choice) if keep)
        if p.is_downset(kept):
            found.append(SubfunctorOfRepresentable(a, tuple(zip(below, choice))))
    return sorted(found, key=lambda s: s.mask)


def match_subfunctors(
    omega: OmegaPresheaf, a: int, subfunctors: Sequence[SubfunctorOfRepresentable]
) -> Dict[int, int]:
    """
    The bijection Sub(H_a) -> Omega(a), as positions into `subfunctors` mapped
    to crible positions. Raises if it is not a bijection.
    """
    positions = omega.positions[a]
    matching = {}
    for k, sub in enumerate(subfunctors):
        if sub.mask not in positions:
            raise AssertionError(f"Subfunctor {sub} selects no {a}-crible")
        matching[k] = positions[sub.mask]
    if sorted(matching.values()) != list(range(len(omega.at[a]))):
        raise AssertionError(f"Subfunctors of H_{a} do not cover Omega({a}) one-to-one")
    return matching


def algebra_at(omega: OmegaPresheaf, a: int) -> Heyting:
    """Omega(a) as a Heyting algebra under intersection, union and r.p.c."""
    return downset_algebra(omega.base, omega.base.down_masks[a], omega.at[a])


def render_crible(p: Poset, mask: int) -> str:
    return p.render_mask(mask)


def rank_order(p: Poset, masks: Sequence[int]) -> List[int]:
    """
    Cribles listed by the height of their tallest member (empty crible first),
    then by size, then by members.
    """

    def key(mask: int):
        members = bits(mask)
        return (max((p.ranks[i] for i in members), default=-1), len(members), members)

    return sorted(masks, key=key)
