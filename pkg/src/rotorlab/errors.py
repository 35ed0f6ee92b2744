"""Exception types shared by all rotorlab modules."""


class RotorlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(RotorlabError, ValueError):
    pass


class InvalidState(RotorlabError, ValueError):
    pass


class StepTooLarge(RotorlabError, ValueError):
    """dt * omega exceeds the per-step azimuth resolution guard."""


class NonFiniteState(RotorlabError, ArithmeticError):
    """A simulated state became NaN or infinite (the model went unstable)."""


class SingularG(RotorlabError, ArithmeticError):
    pass


class OutOfRange(RotorlabError, ValueError):
    pass


class UnstableConfig(RotorlabError, ValueError):
    pass


class TooFewFrames(RotorlabError, ValueError):
    pass


class RankDeficientLog(RotorlabError, ValueError):
    pass


class DegenerateSamples(RotorlabError, ValueError):
    pass


class NoValidSamples(RotorlabError, ValueError):
    pass


class IterationDivergence(RotorlabError, ArithmeticError):
    def __init__(self, annulus, message=""):
        self.annulus = annulus
        super().__init__(message or f"induced velocity did not converge in annulus {annulus}")


class OutOfSpan(RotorlabError, ValueError):
    pass


class BeyondStallClamp(RotorlabError, ValueError):
    pass


class BelowStallSpeed(RotorlabError, ValueError):
    pass


class SchemaMismatch(RotorlabError, ValueError):
    pass


class NonMonotoneTime(RotorlabError, ValueError):
    def __init__(self, line, message=""):
        self.line = line
        super().__init__(message or f"timestamp not strictly increasing at line {line}")


class ConfigError(RotorlabError, ValueError):
    pass
