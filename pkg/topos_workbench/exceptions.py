class ToposError(Exception):
    """Root of every error raised by topos_workbench."""


class SpecError(ToposError):
    """A named spec, poset file or table file could not be understood."""


# order_core


class PosetError(ToposError):
    pass


class DuplicateLabel(PosetError):
    def __init__(self, label: str):
        super().__init__(f"Duplicate element label {label!r}")
        self.label = label


class UnknownLabel(PosetError):
    def __init__(self, label: str):
        super().__init__(f"Order pair references undeclared label {label!r}")
        self.label = label


class CycleDetected(PosetError):
    def __init__(self, first: str, second: str):
        super().__init__(
            f"Order is not antisymmetric: {first!r} <= {second!r} <= {first!r}"
        )
        self.pair = (first, second)


class PosetTooLarge(PosetError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"Poset has {size} elements, the limit is {limit}")
        self.size = size
        self.limit = limit


class NoTopElement(PosetError):
    def __init__(self):
        super().__init__("Poset has no greatest element")


class NotALattice(PosetError):
    def __init__(self, first: str, second: str, missing: str):
        super().__init__(f"Elements {first!r} and {second!r} have no {missing}")
        self.pair = (first, second)


class NotDistributive(PosetError):
    def __init__(self, witness: tuple):
        super().__init__(f"Lattice is not distributive at {witness}")
        self.witness = witness


class AlgebraError(ToposError):
    pass


class IndexOutOfRange(AlgebraError):
    def __init__(self, index: int, size: int):
        super().__init__(f"Element index {index} outside algebra of size {size}")
        self.index = index
        self.size = size


class AlgebraTooLarge(AlgebraError):
    def __init__(self, size: int, limit: int):
        super().__init__(
            f"Algebra would have {size} elements, the limit is {limit} (TOPOS_MAX_ALGEBRA)"
        )
        self.size = size
        self.limit = limit


# pl_logic


class FormulaSyntaxError(ToposError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnassignedVariable(ToposError):
    def __init__(self, var: int):
        super().__init__(f"Variable p{var} has no value in the valuation")
        self.var = var


class BudgetExceeded(ToposError):
    def __init__(self, count: int, size: int, budget: int):
        super().__init__(
            f"{size}^{count} candidates exceed the search budget of {budget}"
        )
        self.count = count
        self.size = size
        self.budget = budget


class ProofFormatError(ToposError):
    def __init__(self, message: str, line: int):
        super().__init__(f"Line {line}: {message}")
        self.line = line


# omega_action


class InstanceError(ToposError):
    pass


class InstanceTooLarge(InstanceError):
    def __init__(self, work: int, limit: int):
        super().__init__(f"Law checks need {work} steps, the limit is {limit}")
        self.work = work
        self.limit = limit


class EquivalenceBroken(InstanceError):
    def __init__(self, p: int, q: int):
        super().__init__(f"Order characterisations disagree on points ({p}, {q})")
        self.pair = (p, q)


class NotUpperBound(InstanceError):
    def __init__(self, p: int, witness: int):
        super().__init__(f"Point {p} is not an upper bound: {witness} is not below it")
        self.p = p
        self.witness = witness


# finmonad


class MonadError(ToposError):
    pass


class CarrierTooLarge(MonadError):
    def __init__(self, monad: str, size: int, bound: int):
        super().__init__(
            f"{monad} applied to a {size}-element carrier has more than {bound} elements "
            "(TOPOS_TABULATION_LIMIT)"
        )
        self.size = size
        self.bound = bound


class CarrierMismatch(MonadError):
    def __init__(self, expected, actual):
        super().__init__(
            f"Lifted carrier of {len(actual.elements)} elements is not the expected "
            f"{len(expected.elements)}-element carrier (U2 F^ != F U1)"
        )
        self.expected = expected
        self.actual = actual


class LawViolation(MonadError):
    def __init__(self, violation):
        super().__init__(f"Precondition failed: {violation}")
        self.violation = violation
