class MnaError(Exception):
    pass


class CodecError(MnaError, ValueError):
    """Malformed wire input or an entry field out of range."""


class StackError(MnaError, ValueError):
    """A stack operation's precondition does not hold."""


class MisroutedError(MnaError):
    """The top label is not the one owned by the processing node."""

    def __init__(self, node_id: str, expected: int, found: object):
        super().__init__(f"node {node_id}: expected top label {expected}, found {found}")
        self.node_id = node_id
        self.expected = expected
        self.found = found


class PlanningError(MnaError):
    """The ingress cannot build a stack for the requested path."""

    def __init__(self, message: str, node_id: str | None = None, required: int | None = None,
                 rld: int | None = None):
        self.node_id = node_id
        self.required = required
        self.rld = rld
        super().__init__(message)

    @property
    def deficit(self) -> int | None:
        if self.required is None or self.rld is None:
            return None
        return self.required - self.rld


class SimulationError(MnaError):
    """Packets of one flow diverged; indicates a non-deterministic engine."""
