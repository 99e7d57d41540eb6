"""Exception hierarchy shared by all geokit modules.

Two broad classes matter to callers (and to the CLI exit codes): input or
contract violations (:class:`ValidationError`) and computations whose
numerical residuals exceed the requested tolerance (:class:`NumericalError`).
"""


class GeokitError(Exception):
    """Base class for all geokit errors."""


class ValidationError(GeokitError):
    """Bad input: shapes, file contents, preconditions, spectra."""


class SystemFormatError(ValidationError):
    """A system file does not follow the JSON system format."""


class SpectrumError(ValidationError):
    """A requested eigenvalue set violates distinctness, conjugacy, or
    proximity constraints."""


class NotInvariantError(ValidationError):
    """A subspace fails the required invariance property (controlled
    invariant / output nulling / conditioned invariant)."""


class NumericalError(GeokitError):
    """A computation finished but its residual exceeds the tolerance."""


class SynthesisError(NumericalError):
    """Feedback synthesis produced residuals above tolerance or was handed a
    dependent / non-self-conjugate column selection."""


class DecompositionError(NumericalError):
    """A structured decomposition has off-pattern blocks above tolerance."""


class GenerationError(NumericalError):
    """Constrained random-system generation exhausted its retry budget."""
