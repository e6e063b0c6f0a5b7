"""Exception hierarchy. Each family maps to one CLI exit code."""

from __future__ import annotations


class UsoError(Exception):
    exit_code = 1


class InputError(UsoError):
    """Bad input files or geometry."""

    exit_code = 2


class ComputeError(UsoError):
    exit_code = 3


class EvaluateError(UsoError):
    exit_code = 4


class ConfigError(UsoError):
    exit_code = 5


class SchemaError(InputError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class MissingEntity(InputError):
    def __init__(self, frame: int, entity_id: int):
        super().__init__(f"frame {frame}: entity {entity_id} missing")
        self.frame = frame
        self.entity_id = entity_id


class NonContiguousFrames(InputError):
    pass


class NonChronological(InputError):
    pass


class TooFewFrames(InputError):
    pass


class DegenerateConfiguration(InputError):
    pass


class TooFewPoints(InputError):
    pass


class PointAtInfinity(InputError):
    pass


class OutOfBounds(InputError):
    pass


class InsideEndzone(ValueError):
    pass


class OutOfCourt(ValueError):
    pass


class FrameOutOfRange(InputError):
    pass


class NoPasses(EvaluateError):
    pass


class HolderNotFound(ComputeError):
    pass


class NoHolderEver(ComputeError):
    pass


class InsufficientHistory(EvaluateError):
    pass


class NoEvaluablePasses(EvaluateError):
    pass
