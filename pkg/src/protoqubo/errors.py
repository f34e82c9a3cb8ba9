"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid input: bad dimensions, non-finite values, or out-of-range parameters."""


class PreconditionError(InputError):
    """A documented precondition of an operation does not hold."""


class CapacityError(RuntimeError):
    """Problem size exceeds the hard cap of an enumeration solver."""


class NumericalIntegrityError(RuntimeError):
    """An internal numerical consistency check failed.

    Typically indicates an invalid precomputed kernel (e.g. not positive
    semidefinite) rather than a bug in the caller's arguments.
    """
