import numpy as np
import pytest

from topos_workbench.exceptions import AlgebraTooLarge, NoTopElement, PosetError
from topos_workbench.order_core import bits, build_poset, enumerate_downsets, resolve_poset
from topos_workbench.presheaf_omega import (
    algebra_at,
    build_omega,
    count_truth_values,
    enumerate_subfunctors,
    functoriality_violation,
    match_subfunctors,
    natural_transformations_to_omega,
    rank_order,
    render_crible,
)

POSETS = ["powerset:1", "powerset:2", "powerset:3", "chain:1", "chain:4", "diamond", "V", "antichain:2"]

# The twenty cribles on {1,2,3}, each a set of subsets of {1,2,3}.
TWENTY_CRIBLES = [
    [],
    [()],
    [(), (1,)],
    [(), (2,)],
    [(), (3,)],
    [(), (1,), (2,)],
    [(), (1,), (3,)],
    [(), (2,), (3,)],
    [(), (1,), (2,), (3,)],
    [(), (1,), (2,), (1, 2)],
    [(), (1,), (3,), (1, 3)],
    [(), (2,), (3,), (2, 3)],
    [(), (1,), (2,), (3,), (1, 2)],
    [(), (1,), (2,), (3,), (1, 3)],
    [(), (1,), (2,), (3,), (2, 3)],
    [(), (1,), (2,), (3,), (1, 2), (1, 3)],
    [(), (1,), (2,), (3,), (1, 2), (2, 3)],
    [(), (1,), (2,), (3,), (1, 3), (2, 3)],
    [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3)],
    [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)],
]


def as_subsets(p, mask):
    """A crible on the powerset poset as a set of frozensets of ints."""
    found = set()
    for i in bits(mask):
        label = p.elements[i].strip("{}")
        found.add(frozenset(int(x) for x in label.split(",")) if label else frozenset())
    return frozenset(found)


@pytest.fixture(params=POSETS)
def omega(request):
    return build_omega(resolve_poset(request.param))


def test_twenty_cribles_on_the_top():
    p = resolve_poset("powerset:3")
    omega = build_omega(p)
    top = p.top()
    assert len(omega.at[top]) == 20
    listed = {as_subsets(p, mask) for mask in omega.at[top]}
    expected = {frozenset(frozenset(s) for s in crible) for crible in TWENTY_CRIBLES}
    assert listed == expected


def test_ranked_listing_matches_golden_file(test_data):
    p = resolve_poset("powerset:3")
    masks = rank_order(p, build_omega(p).at[p.top()])
    rendered = [render_crible(p, mask) for mask in masks]
    assert rendered == (test_data / "cribles_powerset_3.txt").read_text().splitlines()


def test_minimal_elements_have_two_cribles(omega):
    p = omega.base
    for a in p.minimal():
        assert omega.at[a] == (0, 1 << a)


def test_six_cribles_on_top_of_powerset_two():
    p = resolve_poset("powerset:2")
    assert len(build_omega(p).at[p.top()]) == 6


def test_cribles_stay_inside_their_principal_downset(omega):
    p = omega.base
    for a in range(p.size):
        for mask in omega.at[a]:
            assert mask & ~p.down_masks[a] == 0
            assert p.is_downset(mask)


def test_restriction_lands_in_cribles(omega):
    p = omega.base
    for (a, b), table in omega.restrictions.items():
        assert p.le(b, a)
        assert len(table) == len(omega.at[a])
        for k, target in enumerate(table):
            assert omega.at[b][target] == omega.at[a][k] & p.down_masks[b]


def test_functoriality(omega):
    assert functoriality_violation(omega) is None


def test_restriction_needs_comparable_elements():
    p = resolve_poset("V")
    omega = build_omega(p)
    with pytest.raises(PosetError):
        omega.restrict(p.index("a"), p.index("b"))


@pytest.mark.parametrize("spec, count", [("powerset:3", 20), ("powerset:2", 6), ("chain:1", 2), ("diamond", 6), ("chain:3", 4)])
def test_truth_values_by_yoneda_and_by_enumeration(spec, count):
    p = resolve_poset(spec)
    assert count_truth_values(p) == count
    assert len(natural_transformations_to_omega(build_omega(p))) == count


def test_truth_values_need_a_top():
    p = resolve_poset("V")
    with pytest.raises(NoTopElement):
        count_truth_values(p)
    # compatible families still exist: one per downset of the whole poset
    assert len(natural_transformations_to_omega(build_omega(p))) == enumerate_downsets(p).size


def test_global_sections_are_determined_by_their_top_component():
    p = resolve_poset("powerset:2")
    omega = build_omega(p)
    top = p.top()
    sections = natural_transformations_to_omega(omega)
    assert sorted(section[top] for section in sections) == list(omega.at[top])
    for section in sections:
        for a in range(p.size):
            assert section[a] == section[top] & p.down_masks[a]


@pytest.mark.parametrize("spec", ["powerset:3", "powerset:2", "diamond"])
def test_subfunctors_of_the_top_representable(spec):
    p = resolve_poset(spec)
    omega = build_omega(p)
    top = p.top()
    subs = enumerate_subfunctors(p, top)
    assert len(subs) == len(omega.at[top])
    matching = match_subfunctors(omega, top, subs)
    assert sorted(matching.values()) == list(range(len(subs)))


def test_subfunctors_are_closed_under_restriction(omega):
    p = omega.base
    for a in range(p.size):
        for sub in enumerate_subfunctors(p, a):
            for b, keep in sub.selected:
                if keep:
                    assert all(sub.is_selected(c) for c in bits(p.down_masks[b]))
        matching = match_subfunctors(omega, a, enumerate_subfunctors(p, a))
        assert len(matching) == len(omega.at[a])


def test_minimal_element_has_empty_and_full_subfunctor():
    p = resolve_poset("powerset:3")
    subs = enumerate_subfunctors(p, 0)
    assert [sub.mask for sub in subs] == [0, 1]


def test_algebra_on_the_top_is_the_downset_algebra():
    p = resolve_poset("powerset:3")
    omega = build_omega(p)
    top_algebra = algebra_at(omega, p.top())
    downsets = enumerate_downsets(p)
    assert top_algebra.masks == downsets.masks
    for table in ("meet", "join", "imp"):
        assert np.array_equal(getattr(top_algebra, table), getattr(downsets, table))


def test_algebra_at_a_lower_element_is_its_own_downsets():
    p = resolve_poset("powerset:3")
    omega = build_omega(p)
    a = p.index("{1,2}")
    h = algebra_at(omega, a)
    sub = enumerate_downsets(p.sub_poset(bits(p.down_masks[a])))
    assert h.size == sub.size == 6
    assert h.masks == sub.masks
    for table in ("leq", "meet", "join", "imp"):
        assert np.array_equal(getattr(h, table), getattr(sub, table))


def wide_poset():
    """0 < a0..a13 < 1: sixteen elements, as many as a poset may have."""
    atoms = [f"a{i}" for i in range(14)]
    leq = [["0", a] for a in atoms] + [[a, "1"] for a in atoms]
    return build_poset({"elements": ["0", *atoms, "1"], "leq": leq})


def test_truth_values_of_a_sixteen_element_poset():
    p = wide_poset()
    # the empty crible, then {0} together with any set of atoms, then everything
    assert count_truth_values(p) == 2 + 2**14


def test_omega_of_a_sixteen_element_poset():
    p = wide_poset()
    omega = build_omega(p)
    assert len(omega.at[p.top()]) == 2 + 2**14
    assert all(len(omega.at[p.index(f"a{i}")]) == 3 for i in range(14))


def test_downset_algebra_of_a_sixteen_element_poset_is_still_capped():
    with pytest.raises(AlgebraTooLarge):
        enumerate_downsets(wide_poset())
