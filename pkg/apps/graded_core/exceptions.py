# apps/graded_core/exceptions.py
"""Error hierarchy shared by every numerical app.

Each error carries the process exit code the lab commands report for it:
2 for bad input, 3 for a numerical precondition that does not hold, 1 for a
verification that ran and failed.
"""


class LabError(Exception):
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self):
        if not self.details:
            return self.message
        extra = ', '.join(f"{key}={value}" for key, value in sorted(self.details.items()))
        return f"{self.message} ({extra})"


class InputError(LabError):
    exit_code = 2


class DimensionMismatch(InputError):
    pass


class ParityMismatch(InputError):
    pass


class CommutationError(InputError):
    """An operator fails to commute with a declared algebra action."""


class NotSelfAdjoint(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, column=None, **details):
        super().__init__(message, line=line, column=column, **details)
        self.line = line
        self.column = column


class NumericalPrecondition(LabError):
    exit_code = 3


class RankAmbiguity(NumericalPrecondition):
    """A singular value sits too close to the rank threshold to decide."""


class RefineRequired(NumericalPrecondition):
    def __init__(self, message, suggested_samples=None, **details):
        super().__init__(message, suggested_samples=suggested_samples, **details)
        self.suggested_samples = suggested_samples


class GapViolation(NumericalPrecondition):
    pass


class ExtensionTooShort(NumericalPrecondition):
    pass


class UnitarityError(NumericalPrecondition):
    pass


class InvolutionError(NumericalPrecondition):
    pass


class HodgeError(NumericalPrecondition):
    pass


class LagrangianError(NumericalPrecondition):
    pass


class VerificationFailure(LabError):
    exit_code = 1
