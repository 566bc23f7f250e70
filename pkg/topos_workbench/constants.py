# Written with p0, p1, p2 standing for the metavariables alpha, beta, gamma.
AXIOM_SCHEMAS = {
    1: "p0 -> (p0 & p0)",
    2: "(p0 & p1) -> (p1 & p0)",
    3: "(p0 -> p1) -> ((p0 & p2) -> (p1 & p2))",
    4: "((p0 -> p1) & (p1 -> p2)) -> (p0 -> p2)",
    5: "p1 -> (p0 -> p1)",
    6: "(p0 & (p0 -> p1)) -> p1",
    7: "p0 -> (p0 | p1)",
    8: "(p0 | p1) -> (p1 | p0)",
    9: "((p0 -> p2) & (p1 -> p2)) -> ((p0 | p1) -> p2)",
    10: "~p0 -> (p0 -> p1)",
    11: "((p0 -> p1) & (p0 -> ~p1)) -> ~p0",
    12: "p0 | ~p0",
}

METAVARIABLES = ("alpha", "beta", "gamma")

EXCLUDED_MIDDLE = 12

CLASSICAL_ONLY = frozenset({EXCLUDED_MIDDLE})

SYSTEMS = ("CL", "IL")

MAX_POSET_SIZE = 16

MAX_POWERSET_RANK = 4

# Bitsets over the largest allowed poset; no poset has more downsets.
MAX_DOWNSETS = 1 << MAX_POSET_SIZE

NAMED_POSETS = ("powerset:N", "chain:N", "antichain:N", "diamond", "V")

DOWNSETS_PREFIX = "downsets:"

DEFAULT_BUDGET = 10_000_000

DEFAULT_MAX_ALGEBRA = 1024

DEFAULT_SAMPLES = 64

DEFAULT_SEED = 0

DEFAULT_TABULATION_LIMIT = 4096

DEFAULT_LOG_LEVEL = "WARNING"

# Upper bound on table lookups for the triple-nested Omega-set law checks.
MAX_INSTANCE_WORK = 10_000_000

VALUATION_CHUNK = 1 << 16

# Deepest formula the parser accepts, counting nested connectives and parentheses.
MAX_FORMULA_DEPTH = 100

BUILTIN_MONAD_BOUNDS = {
    "identity": 4,
    "maybe": 4,
    "powerset": 3,
    "nonempty-powerset": 3,
}

JSON_SCHEMA_VERSION = 1
