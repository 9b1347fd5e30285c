"""Exception hierarchy shared by all modules."""


class PolyBGKError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(PolyBGKError, ValueError):
    """A parameter or configuration value lies outside its admissible range."""


class DegenerateFrequency(PolyBGKError, ValueError):
    pass


class ThetaZero(PolyBGKError, ValueError):
    """The Gaussian bound constant is undefined at theta = 0."""


class InvalidGrid(PolyBGKError, ValueError):
    pass


class NegativeInput(PolyBGKError, ValueError):
    pass


class CutoffTooSmall(PolyBGKError, ValueError):
    pass


class VacuumCell(PolyBGKError, ArithmeticError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class NonSPDTensor(PolyBGKError, ArithmeticError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class CorrectionDiverged(PolyBGKError, ArithmeticError):
    pass


class HypothesisViolated(PolyBGKError):
    """A lemma's preconditions do not hold, so its inequality is not checked."""


class ParseError(PolyBGKError, ValueError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
