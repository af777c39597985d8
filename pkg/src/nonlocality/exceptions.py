"""Exception hierarchy shared by all modules."""


class NonlocalityError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(NonlocalityError, ValueError):
    """Operand dimensions are incompatible."""


class SizeError(NonlocalityError, ValueError):
    """A configured size guard was exceeded."""


class DomainError(NonlocalityError, ValueError):
    """A parameter or weight lies outside its admissible range."""


class HermiticityError(NonlocalityError, ValueError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class ConsistencyError(NonlocalityError, ValueError):
    """Supplied marginals do not match the joint distribution."""


class NumericError(NonlocalityError, ArithmeticError):
    """An iterative method failed to converge or produced an unusable result."""
