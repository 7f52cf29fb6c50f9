class AttackLabError(Exception):
    """Base class for every error raised by the laboratory."""


# environment contract
class IllegalAction(AttackLabError):
    pass


class SteppedTerminal(AttackLabError):
    pass


class InvalidIndices(AttackLabError):
    pass


class TooLarge(AttackLabError):
    pass


# numerics
class ShapeMismatch(AttackLabError):
    pass


class NonFinite(AttackLabError):
    pass


class NotScalar(AttackLabError):
    pass


# learning
class NoLegalAction(AttackLabError):
    pass


class ConfigMismatch(AttackLabError):
    pass


class DivergedTraining(AttackLabError):
    """Raised on a non-finite loss. ``policy`` holds the last good parameters."""

    def __init__(self, message: str, policy=None):
        super().__init__(message)
        self.policy = policy


class EmptyEvaluation(AttackLabError):
    pass


class BadTargets(AttackLabError):
    pass


# harness
class WrongArity(AttackLabError):
    pass


class ConfigError(AttackLabError):
    pass


class RecordMismatch(AttackLabError):
    pass
