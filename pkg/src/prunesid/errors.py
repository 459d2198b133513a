"""Exception hierarchy; the CLI maps these onto exit codes."""


class PruneSidError(Exception):
    """Base class for everything this package raises on purpose."""


class ValidationError(PruneSidError, ValueError):
    """Input data violates a documented invariant (NaN entries, bad shapes)."""


class ParameterError(PruneSidError, ValueError):
    """A caller-supplied parameter is out of its documented range."""


class FormatError(ValidationError):
    """A token file or manifest cannot be parsed."""


class ScaleGuardError(PruneSidError):
    """A desk-scale-only routine was asked to run beyond its size guard."""
