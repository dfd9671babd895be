"""Exception types shared across the package.

Grouped so the CLI can map them onto exit codes: input/format problems
(exit 2) versus failures raised while computing a sample (exit 3).
"""


class GraspError(Exception):
    """Base class for all errors raised by this package."""


# Input / format errors ------------------------------------------------------

class ParseError(GraspError):
    """A corpus file line could not be parsed; message carries the line number."""


class SchemaError(GraspError):
    """Well-formed input violating the documented schema (lengths, duplicates)."""


class SizeMismatchError(SchemaError):
    """Raw matrix file length does not match the declared shape."""


class DataError(SchemaError):
    """Numeric payload contains invalid values (NaN or infinity)."""


class ReferentialIntegrityError(GraspError):
    """An id refers to a page that does not exist in the corpus."""


class AlignmentError(GraspError):
    """Two embedding matrices do not cover the same id set."""


class ContractError(GraspError):
    """A precondition of an operation was violated by the caller.

    Raised for bad parameter values or shape mismatches; the CLI treats
    it as a configuration error.
    """


# Pipeline errors ------------------------------------------------------------

class SamplingError(GraspError):
    """A requested sample cannot be drawn (pool too small)."""


class UndefinedMetricError(GraspError):
    """A metric is undefined for the given input (too few vectors/clusters)."""


class CrawlError(GraspError):
    """The crawl could not proceed (seed unreachable)."""
