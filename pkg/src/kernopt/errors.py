"""Exception types that callers are expected to catch and act on.

Plain argument validation raises ValueError; the classes here mark
conditions with a dedicated recovery path (switch to sampling mode,
report a gap as unavailable, and so on).
"""


class EnumerationTooLarge(RuntimeError):
    """The finite state space exceeds the configured enumeration cap."""


class OracleUnavailable(RuntimeError):
    """No exact transition mass is defined for this kernel."""


class GapUnavailable(ValueError):
    """The optimality gap needs a known optimum value and none is set."""


class DegenerateProblem(ValueError):
    """Every state is already epsilon-optimal; nothing to bound."""


class UnknownProblem(KeyError):
    """Requested problem id is not in the builtin catalog."""
