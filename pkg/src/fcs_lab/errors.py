"""Exception hierarchy shared by all fcs_lab modules."""


class FCSError(Exception):
    """Base class; ``reason`` is the machine-readable tag used by the CLI."""

    @property
    def reason(self) -> str:
        return type(self).__name__


class NotHermitian(FCSError, ValueError):
    pass


class NotPSD(FCSError, ValueError):
    pass


class BadIndex(FCSError, IndexError):
    pass


class BadDims(FCSError, ValueError):
    pass


class DimensionMismatch(FCSError, ValueError):
    pass


class DegenerateFixedPoint(FCSError):
    """The transfer operator has more than one (or no) unit eigenvalue."""


class TooLarge(FCSError, ValueError):
    pass


class BadParams(FCSError, ValueError):
    pass


class Undefined(FCSError):
    """No closed form is available for the requested quantity."""


class BadSpec(FCSError, ValueError):
    pass


class NonFinite(FCSError, ArithmeticError):
    pass
