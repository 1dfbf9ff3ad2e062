"""Exception hierarchy shared by all modules."""


class KreinPertError(Exception):
    """Base class for every error raised by the package."""


class NonFinite(KreinPertError, ValueError):
    pass


class NonHermitian(KreinPertError, ValueError):
    pass


class NoConvergence(KreinPertError, RuntimeError):
    pass


class NotPositive(KreinPertError, ValueError):
    pass


class SingularOperator(KreinPertError, ValueError):
    """The Sylvester operator has (numerically) zero in its spectrum."""


class ContourConflict(KreinPertError, ValueError):
    """No circle separates the two spectra; use the Kronecker solver."""


class HypothesisViolated(KreinPertError, ValueError):
    pass


class TouchingSpectra(KreinPertError, ValueError):
    pass


class SingularW(KreinPertError, ValueError):
    """``I - K'K`` is not invertible, so the graphs do not split the space."""


class SimilarityResidual(KreinPertError, RuntimeError):
    pass


class NotContractive(KreinPertError, ValueError):
    pass


class NotJSymmetric(KreinPertError, ValueError):
    pass


class RankDeficient(KreinPertError, ValueError):
    pass


class QuadratureUnstable(KreinPertError, RuntimeError):
    pass


class ConfigInvalid(KreinPertError, ValueError):
    pass


class AssertionFailure(KreinPertError):
    """A guarantee that should hold in the proven regime was violated.

    ``check`` names the guarantee, ``details`` carries the raw numbers.
    """

    def __init__(self, check, message, details=None):
        super().__init__(f"{check}: {message}")
        self.check = check
        self.details = dict(details or {})


class MismatchWithClosedForm(AssertionFailure):
    pass
