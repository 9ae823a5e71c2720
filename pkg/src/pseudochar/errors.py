"""Exception types shared by every module."""


class AlphabetError(ValueError):
    """A word uses a symbol outside the generating set."""


class ResourceError(RuntimeError):
    """A computation exceeded its size budget."""


class DegenerateInput(ValueError):
    """The input is trivial in a way that makes the request meaningless."""


class PreconditionError(ValueError):
    pass


class ConsistencyError(RuntimeError):
    """An internal invariant failed; points at a bad oracle or scaling."""
