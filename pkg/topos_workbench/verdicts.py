from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np


@dataclass(frozen=True)
class Ok:
    def __bool__(self) -> bool:
        return True

    def __str__(self) -> str:
        return "ok"


@dataclass(frozen=True)
class Violation:
    """A law that failed, with the first offending tuple."""

    law: str
    witness: tuple = ()

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"violation of {self.law} at {self.witness}"


Verdict = Union[Ok, Violation]


def first_failure(law: str, failures: np.ndarray) -> Optional[Violation]:
    """Violation at the lexicographically least True cell of `failures`, if any."""
    if not failures.any():
        return None
    return Violation(law, tuple(int(i) for i in np.argwhere(failures)[0]))


def first_of(checks: Sequence) -> Optional[Violation]:
    for check in checks:
        violation = check()
        if violation is not None:
            return violation
    return None
