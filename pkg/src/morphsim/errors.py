"""Exception hierarchy shared across the engine."""


class MorphSimError(Exception):
    """Base class for all engine errors."""


class ConfigError(MorphSimError):
    """Bad or inconsistent configuration (unknown key, unsupported value)."""


class InvalidDeformationError(MorphSimError):
    """A deformation gradient with non-positive determinant was encountered."""


class WindowViolationError(MorphSimError):
    """A particle left the active grid window (mis-tuned moving grid)."""

    def __init__(self, message, particle=None, position=None, substep=None):
        super().__init__(message)
        self.particle = particle
        self.position = position
        self.substep = substep


class InvalidStateError(MorphSimError):
    """Simulation state violates a structural precondition (e.g. no robot particles)."""


class PhysicsDivergedError(MorphSimError):
    """Non-finite value in particle or grid state; substep aborted.

    ``dump_path`` points at the diagnostics dump written on abort, when one
    could be written.
    """

    def __init__(self, message, particle=None, substep=None, dump_path=None):
        super().__init__(message)
        self.particle = particle
        self.substep = substep
        self.dump_path = dump_path


class StaleReplayError(MorphSimError):
    """Replay record does not match the current build's task configuration."""
