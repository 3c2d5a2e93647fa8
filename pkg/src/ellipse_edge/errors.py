"""Exception types shared across the package."""


class ContractError(ValueError):
    """A precondition on the arguments was violated."""


class AdmissibilityError(ContractError):
    """Contour radii violate the admissibility condition r1 < tau * r2."""


class DegenerateSaddleError(ContractError):
    """c_n^2 <= 8n: the two real saddle points coalesce or turn complex."""


class RangeOverflowError(OverflowError):
    """An unscaled evaluation left the double-precision range."""


class AccuracyError(ArithmeticError):
    """A quadrature truncation or residue certificate failed.

    The offending bound is carried in ``certificate``.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class DropRateError(RuntimeError):
    """Too many Monte Carlo samples were dropped by the eigensolver."""
