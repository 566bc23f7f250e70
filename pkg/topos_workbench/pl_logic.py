"""
Propositional formulas: parsing, Heyting-valued semantics, validity search,
axiom-schema recognition and Hilbert-style proof checking.

Surface syntax: `~` negation, `&` conjunction, `|` disjunction, `->`
implication, variables `p0`, `p1`, ... Precedence is ~ > & > | > ->; `->`
associates to the right, `&` and `|` to the left.
"""
import logging as log
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from .config import get_settings
from .constants import (
    AXIOM_SCHEMAS,
    CLASSICAL_ONLY,
    MAX_FORMULA_DEPTH,
    METAVARIABLES,
    SYSTEMS,
    VALUATION_CHUNK,
)
from .exceptions import (
    BudgetExceeded,
    FormulaSyntaxError,
    ProofFormatError,
    SpecError,
    UnassignedVariable,
)
from .order_core import Heyting


# Formulas


@dataclass(frozen=True)
class Var:
    id: int

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Neg:
    child: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Var, Neg, And, Or, Imp]

BINARY = {And: "&", Or: "|", Imp: "->"}


def format_formula(f: Formula) -> str:
    """
    Print a binary operand in parentheses when it uses another connective, or
    the same one on the side it does not associate to. `p0 -> (p0 & p0)` keeps
    its parentheses; `p0 & p1 & p2` needs none.
    """
    if isinstance(f, Var):
        return f"p{f.id}"
    if isinstance(f, Neg):
        return "~" + _operand(f.child, Neg, grouped=True)
    kind = type(f)
    # -> groups to the right, & and | to the left
    right_assoc = kind is Imp
    left = _operand(f.left, kind, grouped=right_assoc)
    right = _operand(f.right, kind, grouped=not right_assoc)
    return f"{left} {BINARY[kind]} {right}"


def _operand(f: Formula, parent: type, grouped: bool) -> str:
    text = format_formula(f)
    if type(f) in BINARY and (type(f) is not parent or grouped):
        return f"({text})"
    return text


def variables(f: Formula) -> FrozenSet[int]:
    if isinstance(f, Var):
        return frozenset({f.id})
    if isinstance(f, Neg):
        return variables(f.child)
    return variables(f.left) | variables(f.right)


def substitute(f: Formula, var: int, g: Formula) -> Formula:
    """f with every occurrence of p<var> replaced by g."""
    if isinstance(f, Var):
        return g if f.id == var else f
    if isinstance(f, Neg):
        return Neg(substitute(f.child, var, g))
    return type(f)(substitute(f.left, var, g), substitute(f.right, var, g))


# Parser

TOKEN = re.compile(r"\s*(?:(?P<var>p[0-9]+)|(?P<op>->|[~&|()]))")


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode())


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = TOKEN.match(text, pos)
        if match is None:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"Unknown token {text[offset]!r}", _byte_offset(text, offset))
        kind = "var" if match.group("var") else "op"
        tokens.append((match.group(kind), _byte_offset(text, match.start(kind))))
        pos = match.end()
    return tokens


class FormulaParser:
    """Recursive descent over the token list; offsets are byte offsets into the input."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.nesting = 0

    def _peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def _offset(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1]
        return len(self.text.encode())

    @contextmanager
    def _nested(self) -> Iterator[None]:
        if self.nesting >= MAX_FORMULA_DEPTH:
            raise FormulaSyntaxError(
                f"Formula is nested more than {MAX_FORMULA_DEPTH} levels deep", self._offset()
            )
        self.nesting += 1
        try:
            yield
        finally:
            self.nesting -= 1

    def _consume(self, expected: Optional[str] = None) -> str:
        token = self._peek()
        if token is None:
            raise FormulaSyntaxError(
                f"Expected {expected!r} but input ended" if expected else "Unexpected end of input",
                self._offset(),
            )
        if expected is not None and token != expected:
            raise FormulaSyntaxError(f"Expected {expected!r} but found {token!r}", self._offset())
        self.pos += 1
        return token

    def parse(self) -> Formula:
        formula = self.parse_imp()
        if self._peek() is not None:
            raise FormulaSyntaxError(f"Unexpected token {self._peek()!r}", self._offset())
        if formula_depth(formula) > MAX_FORMULA_DEPTH:
            raise FormulaSyntaxError(f"Formula is nested more than {MAX_FORMULA_DEPTH} levels deep", 0)
        return formula

    def parse_imp(self) -> Formula:
        left = self.parse_or()
        if self._peek() == "->":
            with self._nested():
                self._consume()
                return Imp(left, self.parse_imp())
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        while self._peek() == "|":
            self._consume()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_unary()
        while self._peek() == "&":
            self._consume()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self) -> Formula:
        if self._peek() == "~":
            with self._nested():
                self._consume()
                return Neg(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        token = self._peek()
        if token == "(":
            with self._nested():
                self._consume()
                inner = self.parse_imp()
                self._consume(")")
            return inner
        if token is not None and token.startswith("p"):
            self._consume()
            return Var(int(token[1:]))
        if token is None:
            raise FormulaSyntaxError("Expected a formula but input ended", self._offset())
        raise FormulaSyntaxError(f"Expected a formula but found {token!r}", self._offset())


def formula_depth(f: Formula) -> int:
    """Height of the syntax tree, a variable having height 1. Iterative, so any depth is safe."""
    depth, stack = 0, [(f, 1)]
    while stack:
        g, d = stack.pop()
        depth = max(depth, d)
        if isinstance(g, Neg):
            stack.append((g.child, d + 1))
        elif not isinstance(g, Var):
            stack.extend(((g.left, d + 1), (g.right, d + 1)))
    return depth


def parse_formula(text: str) -> Formula:
    return FormulaParser(text).parse()


# Semantics


@dataclass(frozen=True)
class Valuation:
    """Assignment of algebra elements to variable ids."""

    assignment: Mapping[int, int]
    algebra: Heyting = field(repr=False, compare=False)

    def __getitem__(self, var: int) -> int:
        try:
            return self.assignment[var]
        except KeyError:
            raise UnassignedVariable(var) from None

    def updated(self, var: int, value: int) -> "Valuation":
        return Valuation({**self.assignment, var: value}, self.algebra)

    def render(self) -> Dict[str, str]:
        return {f"p{v}": self.algebra.labels[a] for v, a in sorted(self.assignment.items())}


def eval_formula(f: Formula, v: Valuation) -> int:
    h = v.algebra
    if isinstance(f, Var):
        return h.check_index(v[f.id])
    if isinstance(f, Neg):
        return int(h.neg[eval_formula(f.child, v)])
    left, right = eval_formula(f.left, v), eval_formula(f.right, v)
    if isinstance(f, And):
        return int(h.meet[left, right])
    if isinstance(f, Or):
        return int(h.join[left, right])
    return int(h.imp[left, right])


def eval_vectorized(f: Formula, h: Heyting, values: Mapping[int, np.ndarray]) -> np.ndarray:
    """Evaluate f at many valuations at once; `values[var]` holds one entry per valuation."""
    if isinstance(f, Var):
        return values[f.id]
    if isinstance(f, Neg):
        return h.neg[eval_vectorized(f.child, h, values)]
    left = eval_vectorized(f.left, h, values)
    right = eval_vectorized(f.right, h, values)
    if isinstance(f, And):
        return h.meet[left, right]
    if isinstance(f, Or):
        return h.join[left, right]
    return h.imp[left, right]


@dataclass(frozen=True)
class Valid:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Countermodel:
    valuation: Valuation
    value: int

    def __bool__(self) -> bool:
        return False


def check_validity(
    f: Formula, h: Heyting, budget: Optional[int] = None
) -> Union[Valid, Countermodel]:
    """
    Search every valuation of f's variables into h, variables sorted by id and
    valuations counted in base |h| with the lowest variable most significant.
    Returns the first valuation not sent to top.
    """
    if budget is None:
        budget = get_settings().budget
    names = sorted(variables(f))
    total = h.size ** len(names)
    if total > budget:
        raise BudgetExceeded(len(names), h.size, budget)
    shape = (h.size,) * len(names)

    for start in range(0, total, VALUATION_CHUNK):
        stop = min(start + VALUATION_CHUNK, total)
        digits = np.unravel_index(np.arange(start, stop), shape) if names else ()
        values = dict(zip(names, digits))
        result = np.broadcast_to(eval_vectorized(f, h, values), (stop - start,))
        failing = np.flatnonzero(result != h.top)
        if len(failing):
            k = int(failing[0])
            valuation = Valuation({var: int(values[var][k]) for var in names}, h)
            log.debug(f"Countermodel for {format_formula(f)}: {valuation.render()}")
            return Countermodel(valuation, int(result[k]))
    return Valid()


# Axiom schemas


@lru_cache(maxsize=None)
def schema_pattern(schema: int) -> Formula:
    if schema not in AXIOM_SCHEMAS:
        raise SpecError(f"There is no axiom schema {schema}; schemas are 1..{len(AXIOM_SCHEMAS)}")
    return parse_formula(AXIOM_SCHEMAS[schema])


@dataclass(frozen=True)
class Match:
    bindings: Mapping[str, Formula]

    def __bool__(self) -> bool:
        return True

    def render(self) -> Dict[str, str]:
        return {name: format_formula(f) for name, f in self.bindings.items()}


@dataclass(frozen=True)
class NoMatch:
    def __bool__(self) -> bool:
        return False


def _bind(pattern: Formula, f: Formula, bindings: Dict[int, Formula]) -> bool:
    if isinstance(pattern, Var):
        bound = bindings.setdefault(pattern.id, f)
        return bound == f
    if type(pattern) is not type(f):
        return False
    if isinstance(pattern, Neg):
        return _bind(pattern.child, f.child, bindings)
    return _bind(pattern.left, f.left, bindings) and _bind(pattern.right, f.right, bindings)


def match_schema(f: Formula, schema: int) -> Union[Match, NoMatch]:
    """Match f against an axiom schema, binding alpha, beta, gamma consistently."""
    bindings: Dict[int, Formula] = {}
    if not _bind(schema_pattern(schema), f, bindings):
        return NoMatch()
    return Match({METAVARIABLES[k]: bindings[k] for k in sorted(bindings)})


def schema_instance(schema: int, bindings: Mapping[str, Formula]) -> Formula:
    """The axiom obtained by filling a schema's metavariables simultaneously."""
    by_id = {k: bindings[name] for k, name in enumerate(METAVARIABLES) if name in bindings}
    return _instantiate(schema_pattern(schema), by_id)


def _instantiate(f: Formula, by_id: Mapping[int, Formula]) -> Formula:
    if isinstance(f, Var):
        return by_id.get(f.id, f)
    if isinstance(f, Neg):
        return Neg(_instantiate(f.child, by_id))
    return type(f)(_instantiate(f.left, by_id), _instantiate(f.right, by_id))


# Proofs


@dataclass(frozen=True)
class Axiom:
    schema: int

    def __str__(self) -> str:
        return f"AX {self.schema}"


@dataclass(frozen=True)
class ModusPonens:
    """Cites the line holding alpha and the line holding alpha -> beta (1-based)."""

    minor: int
    major: int

    def __str__(self) -> str:
        return f"MP {self.minor} {self.major}"


Justification = Union[Axiom, ModusPonens]


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    justification: Justification


@dataclass(frozen=True)
class Proof:
    lines: Tuple[ProofLine, ...]
    system: str = "IL"

    @property
    def conclusion(self) -> Optional[Formula]:
        return self.lines[-1].formula if self.lines else None


class RejectReason(str, Enum):
    SCHEMA_MISMATCH = "SchemaMismatch"
    FORBIDDEN_AXIOM_12_IN_IL = "ForbiddenAxiom12InIL"
    BAD_MP = "BadMP"
    FORWARD_REFERENCE = "ForwardReference"


@dataclass(frozen=True)
class Accepted:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Rejected:
    line: int
    reason: RejectReason
    detail: str = ""

    def __bool__(self) -> bool:
        return False


def check_proof(p: Proof) -> Union[Accepted, Rejected]:
    """Check every line; the first failing line (1-based) is reported."""
    if p.system not in SYSTEMS:
        raise SpecError(f"Unknown proof system {p.system!r}; expected one of {SYSTEMS}")
    for number, line in enumerate(p.lines, start=1):
        rejection = _check_line(p, number, line)
        if rejection is not None:
            log.info(f"Proof rejected at line {number}: {rejection.reason.value}")
            return rejection
    return Accepted()


def _check_line(p: Proof, number: int, line: ProofLine) -> Optional[Rejected]:
    just = line.justification
    if isinstance(just, Axiom):
        if just.schema in CLASSICAL_ONLY and p.system == "IL":
            return Rejected(number, RejectReason.FORBIDDEN_AXIOM_12_IN_IL, "excluded middle is not an IL axiom")
        if just.schema not in AXIOM_SCHEMAS:
            return Rejected(number, RejectReason.SCHEMA_MISMATCH, f"no axiom schema {just.schema}")
        if not match_schema(line.formula, just.schema):
            return Rejected(number, RejectReason.SCHEMA_MISMATCH, f"not an instance of axiom {just.schema}")
        return None

    cited = (just.minor, just.major)
    if any(i < 1 for i in cited):
        return Rejected(number, RejectReason.BAD_MP, "line numbers start at 1")
    if any(i >= number for i in cited):
        return Rejected(number, RejectReason.FORWARD_REFERENCE, "MP may only cite earlier lines")
    minor = p.lines[just.minor - 1].formula
    major = p.lines[just.major - 1].formula
    if major != Imp(minor, line.formula):
        return Rejected(
            number,
            RejectReason.BAD_MP,
            f"line {just.major} is not line {just.minor} -> this line",
        )
    return None


LINE_PATTERN = re.compile(r"^\s*(\d+)\.\s*(?P<formula>[^;]+);\s*(?P<rule>.+?)\s*$")
SYSTEM_PATTERN = re.compile(r"^\s*system:\s*(\S+)\s*$", re.IGNORECASE)


def parse_proof(text: str) -> Proof:
    """
    Read the line-oriented proof format: a `system: CL|IL` header, then
    `<n>. <formula> ; AX <k>` or `<n>. <formula> ; MP <i> <j>`. `#` starts a comment.
    """
    system = None
    lines = []
    for row, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        header = SYSTEM_PATTERN.match(content)
        if header:
            system = header.group(1).upper()
            if system not in SYSTEMS:
                raise ProofFormatError(f"unknown system {header.group(1)!r}", row)
            continue
        match = LINE_PATTERN.match(content)
        if match is None:
            raise ProofFormatError(f"cannot read {content!r}", row)
        if int(match.group(1)) != len(lines) + 1:
            raise ProofFormatError(f"expected step {len(lines) + 1}, found {match.group(1)}", row)
        try:
            formula = parse_formula(match.group("formula"))
        except FormulaSyntaxError as e:
            raise ProofFormatError(str(e), row) from e
        lines.append(ProofLine(formula, _parse_rule(match.group("rule"), row)))
    if system is None:
        raise ProofFormatError("missing 'system: CL' or 'system: IL' header", 1)
    return Proof(tuple(lines), system)


def _parse_rule(rule: str, row: int) -> Justification:
    parts = rule.split()
    try:
        if parts[0].upper() == "AX" and len(parts) == 2:
            return Axiom(int(parts[1]))
        if parts[0].upper() == "MP" and len(parts) == 3:
            return ModusPonens(int(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise ProofFormatError(f"justification must be 'AX <k>' or 'MP <i> <j>', got {rule!r}", row)


def load_proof_file(path: Union[str, Path]) -> Proof:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as e:
        raise SpecError(f"Error occurred while reading proof file {path}: {e}") from e
    return parse_proof(text)
