"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, PreconditionError
(and subclasses) -> 3, ResourceError -> 4.
"""


class FraclabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FraclabError):
    """Malformed configuration, flags, or input grammar."""


class FamilyParseError(ConfigError):
    """Polynomial family string does not match the grammar."""


class PreconditionError(FraclabError):
    """An operation's mathematical precondition is violated."""


class RangeError(PreconditionError):
    """A scalar argument is outside its admissible range."""


class ArityError(PreconditionError):
    """A list argument has the wrong length for the given family."""


class ConstructionError(PreconditionError):
    """A measure/set construction was given unusable parameters."""


class NormalizationError(PreconditionError):
    """Input expected to be a probability density is not normalized."""


class DegeneratePairError(PreconditionError):
    """The two rational dilates of a 3AP pattern coincide."""


class FitError(FraclabError):
    """Too few usable data points for a requested regression."""


class ResourceError(FraclabError):
    """The computation would exceed the configured memory budget."""
