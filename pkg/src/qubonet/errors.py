"""Exception types shared across the package."""


class QubonetError(Exception):
    pass


class SpecError(QubonetError, ValueError):
    """Invalid constraint specification."""


class BoundsError(SpecError):
    pass


class SizeError(SpecError):
    pass


class BaseCaseError(QubonetError, ValueError):
    """Targets handed to the chain builder are not one-hot or one-cold."""


class CoverageError(QubonetError, KeyError):
    """An assignment does not cover every variable it is evaluated on."""

    def __str__(self):
        return Exception.__str__(self)


class LabelClashError(QubonetError, ValueError):
    pass


class FormatError(QubonetError, ValueError):
    """A model or spec file could not be parsed."""
