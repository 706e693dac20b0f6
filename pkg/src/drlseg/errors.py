"""Exception taxonomy shared across the package.

Every error that can surface from the command-line tool carries a process
exit code and a short machine-readable kind string, so batch callers can
dispatch on failures without parsing prose.
"""


class ToolError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2
    kind = "error"


class InvalidArgumentError(ToolError):
    """A value violated a documented precondition or invariant."""

    exit_code = 2
    kind = "invalid-argument"


class ParseError(InvalidArgumentError):
    """A file (image, mask, or config) could not be decoded."""

    exit_code = 2
    kind = "parse"


class NumericFailureError(ToolError):
    """A numerical update produced non-finite values."""

    exit_code = 3
    kind = "numeric-failure"


class ContainmentError(ToolError):
    """The outer-boundary result failed to contain the inner-boundary result."""

    exit_code = 4
    kind = "containment-failure"


class UndefinedMetricError(ToolError):
    """A metric is mathematically undefined for the given inputs (e.g. 0/0).

    Raised instead of silently substituting a number, because fabricated
    zeros would corrupt comparisons between runs.  Report-level callers
    catch this and serialize the value as "NA".
    """

    exit_code = 2
    kind = "undefined-metric"
