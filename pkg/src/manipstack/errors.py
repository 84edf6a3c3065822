"""Exception types shared across the stack."""


class ManipStackError(Exception):
    """Base class for all package errors."""


class LtlSyntaxError(ManipStackError):
    """Formula text does not conform to the grammar."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class NegationExcluded(LtlSyntaxError):
    """The `!` operator is outside the supported fragment."""


class NextExcluded(LtlSyntaxError):
    """The `X` operator is outside the supported fragment."""


class NbaFormatError(ManipStackError):
    """Malformed automaton text file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AlreadyAugmented(ManipStackError):
    """Auxiliary initial state was already added to this automaton."""


class EmptyGraph(ManipStackError):
    """No accepting structure survives pruning; mission unrealizable."""


class NoProgressEdge(ManipStackError):
    """No live outgoing edge decreases the distance to acceptance."""


class MissionUnrealizable(ManipStackError):
    """All symbolic alternatives are exhausted."""


class BudgetExhausted(ManipStackError):
    """Tree budget spent before the terminal uncertainty constraint held."""

    def __init__(self, best_det):
        super().__init__(f"planner budget exhausted (best det = {best_det:.6g})")
        self.best_det = best_det


class NoFreeGraspPoint(ManipStackError):
    """Every candidate on the grasp circle collides."""


class GripRefusedUncertain(ManipStackError):
    """Object uncertainty above the grasp threshold."""


class GripRefusedFar(ManipStackError):
    """Robot not within gripping distance of the object."""


class NothingGripped(ManipStackError):
    """Release requested with the gripper disengaged."""


class LocallyTrapped(ManipStackError):
    """Reactive tracking made no progress for too long."""


class StartInCollision(ManipStackError):
    """Topology query started from an occupied cell."""


class NoPlacementFound(ManipStackError):
    """No clear spot to relocate a blocking object."""


class ScenarioError(ManipStackError):
    """Invalid scenario configuration."""
