# flake8: noqa
from .order_core import (
    Heyting,
    Poset,
    build_poset,
    enumerate_downsets,
    heyting_from_lattice,
    is_boolean,
    resolve_algebra,
    resolve_poset,
)
from .pl_logic import check_proof, check_validity, match_schema, parse_formula
from .presheaf_omega import build_omega, count_truth_values, enumerate_subfunctors
from .omega_action import build_omega_self, validate_instance
from .finmonad import (
    builtin_monads,
    check_algebra,
    check_monad_morphism,
    enumerate_algebras,
    lift_morphism,
    recover_theta,
)
