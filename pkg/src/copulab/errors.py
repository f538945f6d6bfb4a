"""Exception hierarchy shared by all copulab modules."""


class CopulabError(Exception):
    """Base class for all copulab errors."""


class SpecError(CopulabError):
    """A copula/marginal/perturbation spec string or JSON object is malformed.

    Carries the offending field name so command-line users can fix the input.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SingularPart(CopulabError):
    """The model carries singular mass, so a plain density request is refused.

    Informational: callers that account for the diagonal atom explicitly
    should use ``ac_density`` instead of ``density``.
    """


class NoDensity(CopulabError):
    """The absolutely continuous part has no evaluable density."""


class NotADensity(CopulabError):
    """A candidate density function failed the nonnegativity or margin check."""

    def __init__(self, message, worst_point=None, worst_value=None):
        self.worst_point = worst_point
        self.worst_value = worst_value
        super().__init__(message)


class NotACopula(CopulabError):
    """A transformed CDF failed copula validation."""


class ResolutionTooLow(CopulabError):
    """Requested grid resolution is below the supported minimum."""


class NonCommuting(CopulabError):
    """Two copulas fail the numerical fold-commutation check."""


class NonPositive(CopulabError):
    """A sequence entry is nonpositive where positivity is required."""


class MarginalMismatch(CopulabError):
    """A convolved marginal could not be inverted to the requested accuracy."""


class NonConvergent(CopulabError):
    """Successive tail-limit estimates did not settle; an estimate is still attached."""

    def __init__(self, message, value=None):
        self.value = value
        super().__init__(message)
