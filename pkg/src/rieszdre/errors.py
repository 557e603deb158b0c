"""Exception and warning types.

Every error carries enough context (row index, offending value, iterate)
for the CLI to report it without a traceback.  The CLI maps the three
base classes onto exit codes: ``UsageError`` -> 1, ``DataError`` -> 2,
``NumericalError`` -> 3.
"""

from __future__ import annotations


class RieszDreError(Exception):
    """Base class for all package errors."""


class UsageError(RieszDreError, ValueError):
    """Bad arguments or configuration supplied by the caller."""


class DataError(RieszDreError, ValueError):
    """Input data violates a dataset invariant."""


class NumericalError(RieszDreError, ArithmeticError):
    """A numerical routine could not produce a valid result."""


# -- data ---------------------------------------------------------------


class NonBinaryTreatment(DataError):
    def __init__(self, row: int, value: object):
        super().__init__(f"treatment at row {row} is {value!r}; expected 0 or 1")
        self.row = row
        self.value = value


class EmptyArm(DataError):
    def __init__(self, arm: int):
        super().__init__(f"treatment arm {arm} has no observations")
        self.arm = arm


class NonFiniteValue(DataError):
    def __init__(self, row: int, column: str):
        super().__init__(f"non-finite value at row {row}, column {column!r}")
        self.row = row
        self.column = column


class SchemaMismatch(DataError):
    pass


class TooFewSamples(DataError):
    pass


class InsufficientWaymarkSamples(DataError):
    pass


class EmptyArmInFold(DataError):
    def __init__(self, fold: int, arm: int):
        super().__init__(
            f"training complement of fold {fold} has no observations in arm {arm}"
        )
        self.fold = fold
        self.arm = arm


# -- usage --------------------------------------------------------------


class BadFoldCount(UsageError):
    pass


class NonPositiveLambda(UsageError):
    pass


class DegenerateDesign(UsageError):
    pass


# -- numerical ----------------------------------------------------------


class DomainError(NumericalError):
    """A loss or model was evaluated outside its domain.

    ``index`` names the first offending sample (or row) when known.
    """

    def __init__(self, message: str, index: int | None = None, value: float | None = None):
        super().__init__(message)
        self.index = index
        self.value = value


class SingularSystem(NumericalError):
    pass


# -- warnings -----------------------------------------------------------


class NonConvergenceWarning(RuntimeWarning):
    pass


class OverlapWarning(RuntimeWarning):
    pass


class RatioBoundWarning(RuntimeWarning):
    pass


class ResampledDesignWarning(RuntimeWarning):
    pass
