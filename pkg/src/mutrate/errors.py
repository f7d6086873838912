"""Exception types shared across the package."""


class MutrateError(Exception):
    """Base class for domain errors raised by this package."""


class SingularDenominator(MutrateError):
    """A closed-form estimator hit its blind spot (denominator exactly zero)."""


class NoRootInRange(MutrateError):
    """The moment equation has no sign change on the search interval."""


class MismatchedK(MutrateError):
    """Two k-mer tables (or a table and a query) disagree on k."""


class EmptyRetainedSet(MutrateError):
    """The thresholded k-mer set carries zero mass, so the ratio is undefined."""


class FastaParseError(MutrateError):
    """Malformed or invalid FASTA input."""
