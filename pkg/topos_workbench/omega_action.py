"""
Omega-valued sets: a finite Heyting algebra acting on a carrier through its
meet monoid, with a truth value <p=q> for equality of points.

Points and algebra elements are both plain indices. action[alpha, p] is
alpha.p and eq[p, q] is <p=q>.
"""
import logging as log
from dataclasses import dataclass
from functools import cached_property, reduce
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from .constants import MAX_INSTANCE_WORK
from .exceptions import (
    EquivalenceBroken,
    InstanceError,
    InstanceTooLarge,
    NotUpperBound,
    SpecError,
)
from .order_core import Heyting
from .verdicts import Ok, Violation, first_failure, first_of


@dataclass(frozen=True, eq=False)
class OmegaSetInstance:
    algebra: Heyting
    carrier: Tuple[str, ...]
    action: np.ndarray
    eq: np.ndarray

    @property
    def size(self) -> int:
        return len(self.carrier)

    def act(self, alpha: int, p: int) -> int:
        return int(self.action[alpha, p])

    def truth(self, p: int, q: int) -> int:
        return int(self.eq[p, q])

    @cached_property
    def order(self) -> np.ndarray:
        """order[p, q] iff p = <p=q>.p, the first characterisation of p <= q."""
        points = np.arange(self.size)
        order = self.action[self.eq, points[:, None]] == points[:, None]
        order.setflags(write=False)
        return order


def make_instance(
    algebra: Heyting,
    carrier: Sequence[str],
    action: Union[np.ndarray, Sequence[Sequence[int]]],
    eq: Union[np.ndarray, Sequence[Sequence[int]]],
) -> OmegaSetInstance:
    """Check table shapes and ranges and freeze them; laws are left to validate_instance."""
    n, m = algebra.size, len(carrier)
    work = max(n * n * m, m ** 3)
    if work > MAX_INSTANCE_WORK:
        raise InstanceTooLarge(work, MAX_INSTANCE_WORK)
    action = np.array(action, dtype=np.intp).reshape(-1, m) if m else np.zeros((n, 0), dtype=np.intp)
    eq = np.array(eq, dtype=np.intp).reshape(m, m) if m else np.zeros((0, 0), dtype=np.intp)
    if action.shape != (n, m):
        raise InstanceError(f"Action table must be {n} x {m}, got {action.shape[0]} x {action.shape[1]}")
    if m and (action.min() < 0 or action.max() >= m):
        raise InstanceError("Action table entries must be point indices")
    if m and (eq.min() < 0 or eq.max() >= n):
        raise InstanceError("Equality table entries must be algebra indices")
    action.setflags(write=False)
    eq.setflags(write=False)
    return OmegaSetInstance(algebra, tuple(str(x) for x in carrier), action, eq)


def validate_instance(inst: OmegaSetInstance) -> Union[Ok, Violation]:
    """Check every law on every tuple; the first violation found is returned."""
    h = inst.algebra
    A, E = inst.action, inst.eq
    n, m = h.size, inst.size
    alphas, points = np.arange(n), np.arange(m)
    a, b, p3 = np.ix_(alphas, alphas, points)
    p, q, r = np.ix_(points, points, points)
    a2, p2 = alphas[:, None], points[None, :]
    pp, qq = points[:, None], points[None, :]

    violation = first_of(
        [
            lambda: first_failure("monoid unit", A[h.top, points] != points),
            lambda: first_failure("monoid compatibility", A[h.meet[a, b], p3] != A[a, A[b, p3]]),
            lambda: first_failure("well-definedness", A[E, pp] != A[E, qq]),
            lambda: first_failure("action bound", ~h.leq[a2, E[A[a2, p2], p2]]),
            lambda: first_failure("symmetry", E != E.T),
            lambda: first_failure("transitivity", ~h.leq[h.meet[E[p, q], E[q, r]], E[p, r]]),
        ]
    )
    if violation is not None:
        log.info(f"Omega-set instance fails {violation}")
        return violation
    return Ok()


def build_omega_self(h: Heyting) -> OmegaSetInstance:
    """
    H acting on itself: alpha.beta = alpha & beta and
    <beta=gamma> = (beta => gamma) & (gamma => beta).
    """
    inst = make_instance(h, h.labels, h.meet, h.meet[h.imp, h.imp.T])
    verdict = validate_instance(inst)
    if not verdict:
        raise AssertionError(f"Canonical Omega-set fails {verdict}")
    return inst


def leq_points(inst: OmegaSetInstance, p: int, q: int) -> bool:
    """p <= q, evaluated through all three equivalent characterisations."""
    truth = inst.eq[p, q]
    first = inst.action[truth, p] == p
    second = inst.action[truth, q] == p
    third = bool((inst.action[:, q] == p).any())
    if not first == second == third:
        raise EquivalenceBroken(p, q)
    return bool(first)


def point_order(inst: OmegaSetInstance) -> np.ndarray:
    return inst.order


def point_meet(inst: OmegaSetInstance, p: int, q: int) -> int:
    """Greatest lower bound <p=q>.p of two points."""
    truth = inst.eq[p, q]
    meet = int(inst.action[truth, p])
    if meet != inst.action[truth, q]:
        raise InstanceError(f"<p=q>.p and <p=q>.q differ for points ({p}, {q})")
    order = inst.order
    lower = order[:, p] & order[:, q]
    if not lower[meet] or (lower & ~order[:, meet]).any():
        raise InstanceError(f"{meet} is not the greatest lower bound of ({p}, {q})")
    return meet


@dataclass(frozen=True)
class AdjunctionMaps:
    """F_p(alpha) = alpha.p and G_p(q) = <p <= q>, tabulated."""

    lower: np.ndarray
    upper: np.ndarray


def adjunction_maps(inst: OmegaSetInstance, p: int) -> AdjunctionMaps:
    lower = inst.action[:, p]
    meets = inst.action[inst.eq[p, :], p]
    # <p <= q> read as <p = p & q>
    upper = inst.eq[p, meets]
    return AdjunctionMaps(lower, upper)


def check_adjunction(inst: OmegaSetInstance, p: int) -> Union[Ok, Violation]:
    """Galois connection F_p -| G_p together with its unit and counit inequalities."""
    h, order = inst.algebra, inst.order
    maps = adjunction_maps(inst, p)
    F, G = maps.lower, maps.upper
    alphas, points = np.arange(h.size), np.arange(inst.size)
    violation = first_of(
        [
            lambda: first_failure(
                "galois connection", order[F[:, None], points[None, :]] != h.leq[alphas[:, None], G[None, :]]
            ),
            lambda: first_failure("unit", ~h.leq[alphas, G[F]]),
            lambda: first_failure("counit", ~order[F[G], points]),
        ]
    )
    return Ok() if violation is None else violation


def sup_bounded(inst: OmegaSetInstance, ys: Iterable[int], p: int) -> int:
    """Least upper bound of ys, computed as <p in ys>.p from the upper bound p."""
    ys = list(ys)
    h, order = inst.algebra, inst.order
    for z in ys:
        if not order[z, p]:
            raise NotUpperBound(p, z)
    membership = reduce(lambda acc, z: int(h.join[acc, inst.eq[z, p]]), ys, h.bot)
    sup = int(inst.action[membership, p])

    upper = order[ys, :].all(axis=0) if ys else np.ones(inst.size, dtype=bool)
    if not upper[sup] or (upper & ~order[sup, :]).any():
        raise InstanceError(f"{sup} is not the least upper bound of {ys}")
    return sup


def load_instance(path: Union[str, Path], algebra: Heyting) -> OmegaSetInstance:
    """Read {"carrier": [...], "action": [[...]], "eq": [[...]]} (JSON or YAML)."""
    try:
        with open(path, "r") as f:
            spec = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise SpecError(f"Error occurred while reading instance file {path}: {e}") from e
    if not isinstance(spec, Mapping) or not {"carrier", "action", "eq"} <= set(spec):
        raise SpecError(f"Instance file {path} needs 'carrier', 'action' and 'eq'")
    try:
        return make_instance(algebra, spec["carrier"], spec["action"], spec["eq"])
    except (TypeError, ValueError) as e:
        raise SpecError(f"Error occurred while reading instance tables from {path}: {e}") from e
