"""Exception types shared across the package."""


class ChenFliessError(Exception):
    """Base class for all errors raised by this package."""


class ResourceCapError(ChenFliessError):
    """A word enumeration or polynomial expansion exceeded its configured cap."""


class HorizonError(ChenFliessError):
    """A generated series was queried past its declared horizon."""


class DegenerateDataError(ChenFliessError):
    """Not enough information to fit the requested quantity."""


class NumericalError(ChenFliessError):
    """A numerical routine broke down (blow-up, underflow, non-finite values)."""
