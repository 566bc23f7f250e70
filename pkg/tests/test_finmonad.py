import logging

import pytest

from topos_workbench.exceptions import BudgetExceeded, CarrierMismatch, CarrierTooLarge, LawViolation, MonadError
from topos_workbench.finmonad import (
    IDENTITY_FUNCTOR,
    NOTHING,
    AlgebraInstance,
    FinFn,
    FinSetObj,
    Just,
    MaybeMonad,
    builtin_monads,
    builtin_morphisms,
    check_algebra,
    check_monad,
    check_monad_morphism,
    enumerate_algebras,
    enumerate_homomorphisms,
    get_monad,
    get_morphism,
    identity_morphism,
    is_homomorphism,
    lift_homomorphism,
    lift_morphism,
    lifting_of,
    make_algebra,
    pointwise_morphism,
    recover_theta,
    render_label,
)
from topos_workbench.verdicts import Ok, Violation

identity = get_monad("identity")
maybe = get_monad("maybe")
powerset = get_monad("powerset")

TWO = FinSetObj.standard(2)


def max_algebra(a: FinSetObj = TWO) -> AlgebraInstance:
    return make_algebra(powerset, a, lambda s: max(s, default=0))


def test_labels_render_canonically():
    assert render_label(frozenset()) == "{}"
    assert render_label(frozenset({1, 0})) == "{0,1}"
    assert render_label(Just(Just(2))) == "just(just(2))"
    assert render_label(NOTHING) == "*"
    assert TWO.render() == "{0, 1}"


def test_functions_compose_right_to_left():
    three = FinSetObj.standard(3)
    f = FinFn(TWO, three, (2, 0))
    g = FinFn(three, TWO, (1, 1, 0))
    assert (g @ f).table == (0, 1)
    assert f @ FinFn.identity(TWO) == f
    with pytest.raises(MonadError):
        f @ f


def test_function_tables_are_validated():
    with pytest.raises(MonadError):
        FinFn(TWO, TWO, (0,))
    with pytest.raises(MonadError):
        FinFn(TWO, TWO, (0, 2))
    with pytest.raises(MonadError):
        TWO.index(5)


@pytest.mark.parametrize("t", builtin_monads(), ids=lambda t: t.name)
def test_builtin_monads_satisfy_the_laws(t):
    assert check_monad(t) == Ok()


def test_powerset_elements_follow_bitset_order():
    assert powerset.obj(TWO).elements == (frozenset(), frozenset({0}), frozenset({1}), frozenset({0, 1}))
    assert get_monad("nonempty-powerset").obj(TWO).size == 3


def test_powerset_multiplication_is_union():
    mu = powerset.mult(TWO)
    assert mu(frozenset({frozenset({0}), frozenset({1})})) == frozenset({0, 1})
    assert mu(frozenset({frozenset()})) == frozenset()
    assert mu(frozenset()) == frozenset()


def test_maybe_multiplication_collapses_nothing():
    mu = maybe.mult(TWO)
    assert mu(Just(Just(1))) == Just(1)
    assert mu(Just(NOTHING)) == NOTHING
    assert mu(NOTHING) == NOTHING
    assert maybe.unit(TWO)(0) == Just(0)


def test_large_carriers_are_not_tabulated():
    with pytest.raises(CarrierTooLarge):
        powerset.obj(FinSetObj.standard(13))


def test_unknown_monad():
    with pytest.raises(MonadError):
        get_monad("list")


class ForgetfulMaybe(MaybeMonad):
    name = "forgetful-maybe"

    def join_label(self, tt):
        return NOTHING


def test_broken_multiplication_fails_left_unit():
    assert check_monad(ForgetfulMaybe()) == Violation("left unit", (1, "just(0)"))


def test_associativity_is_sampled_beyond_the_tabulation_limit(caplog):
    with caplog.at_level(logging.WARNING):
        assert check_monad(powerset, size_bound=2, samples=8)
    assert "checking associativity on 8 samples" in caplog.text


def test_law_checks_cache_only_per_carrier_tables():
    t = MaybeMonad()
    assert check_monad(t) == Ok()
    assert {key[0] for key in t._memo._values} <= {"obj", "unit", "mult"}
    f = FinFn(TWO, TWO, (1, 0))
    assert t.fmap(f)(Just(0)) == Just(1)
    assert t.fmap(f) == t.fmap(f)


def test_max_algebra_on_two_elements():
    assert check_algebra(max_algebra()) == Ok()


def test_empty_set_sent_to_the_top_breaks_associativity():
    alg = make_algebra(powerset, TWO, lambda s: max(s, default=1))
    assert check_algebra(alg) == Violation("associativity", ("{{0},{}}",))


def test_structure_map_must_fix_units():
    alg = make_algebra(maybe, TWO, lambda t: 0)
    assert check_algebra(alg) == Violation("unit", ("1",))


def test_identity_algebra():
    alg = make_algebra(identity, TWO, lambda x: x)
    assert check_algebra(alg)


@pytest.mark.parametrize(
    "name, n, count",
    [("identity", 3, 1), ("maybe", 1, 1), ("maybe", 3, 3), ("powerset", 1, 1), ("powerset", 2, 2), ("nonempty-powerset", 2, 2)],
)
def test_algebra_counts(name, n, count):
    algebras = enumerate_algebras(get_monad(name), FinSetObj.standard(n))
    assert len(algebras) == count
    assert all(check_algebra(alg) for alg in algebras)


def test_algebras_are_listed_by_table():
    first, second = enumerate_algebras(powerset, TWO)
    assert first.structure.table == (0, 0, 1, 1)
    assert second.structure.table == (1, 0, 1, 0)


def test_algebra_enumeration_respects_the_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_algebras(powerset, FinSetObj.standard(3), budget=100)


def test_homomorphisms_between_the_two_orders():
    up, down = enumerate_algebras(powerset, TWO)
    swap = FinFn(TWO, TWO, (1, 0))
    assert is_homomorphism(up, down, swap)
    assert not is_homomorphism(up, up, swap)
    homs = enumerate_homomorphisms(up, up)
    assert [h.table for h in homs] == [(0, 0), (0, 1)]


@pytest.mark.parametrize("key", sorted(builtin_morphisms()))
def test_builtin_morphisms_are_lawful(key):
    assert get_morphism(*key).verdict == Ok()


def test_unknown_morphism():
    with pytest.raises(MonadError):
        get_morphism("maybe", "powerset")


def test_a_point_for_nothing_is_not_natural():
    bad = pointwise_morphism(
        "bad", powerset, maybe, lambda t: frozenset((t.value,)) if isinstance(t, Just) else frozenset((0,))
    )
    assert check_monad_morphism(bad) == Violation("naturality", (1, 2, (1,), "*"))


def test_theta_must_have_the_right_type():
    wrong = pointwise_morphism("wrong", powerset, maybe, lambda t: t)
    with pytest.raises(MonadError):
        wrong.theta(TWO)


def test_lifting_a_sup_lattice_to_a_pointed_set():
    m = get_morphism("powerset", "maybe")
    lifted = lift_morphism(m, max_algebra())
    assert lifted.monad is maybe
    assert lifted.structure(Just(0)) == 0
    assert lifted.structure(Just(1)) == 1
    assert lifted.structure(NOTHING) == 0
    assert lifted.lines() == ["just(0) -> 0", "just(1) -> 1", "* -> 0"]


def test_lifted_algebras_are_algebras():
    for m in builtin_morphisms().values():
        for n in (1, 2):
            for alg in enumerate_algebras(m.source, FinSetObj.standard(n)):
                assert check_algebra(lift_morphism(m, alg))


def test_lifting_preserves_homomorphisms():
    m = get_morphism("powerset", "maybe")
    algebras = enumerate_algebras(powerset, TWO)
    for source in algebras:
        for target in algebras:
            lifted_source, lifted_target = lift_morphism(m, source), lift_morphism(m, target)
            homs = enumerate_homomorphisms(source, target)
            images = [lift_homomorphism(m, h) for h in homs]
            assert len(set(images)) == len(homs)
            assert all(is_homomorphism(lifted_source, lifted_target, h) for h in images)


def test_identity_lifting_is_full_and_faithful():
    m = identity_morphism(powerset)
    algebras = enumerate_algebras(powerset, TWO)
    for source in algebras:
        for target in algebras:
            lifted_source, lifted_target = lift_morphism(m, source), lift_morphism(m, target)
            assert lifted_source == source
            assert enumerate_homomorphisms(lifted_source, lifted_target) == enumerate_homomorphisms(source, target)


def test_lifting_rejects_non_algebras():
    m = get_morphism("powerset", "maybe")
    bad = make_algebra(powerset, TWO, lambda s: max(s, default=1))
    with pytest.raises(LawViolation) as e:
        lift_morphism(m, bad)
    assert e.value.violation.law == "associativity"


def test_lifting_rejects_algebras_of_another_monad():
    m = get_morphism("powerset", "maybe")
    with pytest.raises(MonadError):
        lift_morphism(m, make_algebra(maybe, TWO, lambda t: t.value if isinstance(t, Just) else 0))


@pytest.mark.parametrize(
    "key",
    [("powerset", "maybe"), ("powerset", "nonempty-powerset"), ("maybe", "identity"), ("powerset", "powerset"), ("maybe", "maybe")],
)
def test_theta_survives_lifting_and_recovery(key):
    m = get_morphism(*key)
    recovered = recover_theta(m.functor, lifting_of(m), m.source, m.target)
    for n in range(1, 4):
        a = FinSetObj.standard(n)
        assert recovered.theta(a) == m.theta(a)


def test_lifting_survives_recovery_and_relifting():
    m = get_morphism("powerset", "maybe")
    recovered = recover_theta(IDENTITY_FUNCTOR, lifting_of(m), powerset, maybe)
    for alg in enumerate_algebras(powerset, TWO):
        assert lift_morphism(recovered, alg) == lift_morphism(m, alg)


def test_lifting_onto_the_wrong_carrier_is_caught():
    def shrink(alg):
        return make_algebra(maybe, FinSetObj.standard(1), lambda t: 0)

    with pytest.raises(CarrierMismatch):
        recover_theta(IDENTITY_FUNCTOR, shrink, powerset, maybe)
