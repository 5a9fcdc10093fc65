"""Exception hierarchy shared by all grasswalk modules."""


class GrasswalkError(Exception):
    """Base class for all library errors."""


class OddEntry(GrasswalkError):
    """A weight entry is odd; only even entries are allowed."""


class NotDecreasing(GrasswalkError):
    """Weight entries are not weakly decreasing."""


class NegativeEntry(GrasswalkError):
    """A weight entry is negative."""


class RankMismatch(GrasswalkError):
    """Two objects of different rank were combined."""


class RankNotOne(GrasswalkError):
    """A rank-one closed form was requested with rank above one."""


class InvalidNodeCount(GrasswalkError):
    """Quadrature grid requested with too few nodes."""


class GridUnderResolved(GrasswalkError):
    """Grid resolution is insufficient for the requested degree."""


class NumericBreakdown(GrasswalkError):
    """The Gram matrix lost positive definiteness during orthogonalization."""


class UnsupportedAlgebra(GrasswalkError):
    """The requested operation does not support this coefficient algebra."""


class NotConverged(GrasswalkError):
    """An iterative sampler failed its convergence diagnostics."""


class NonIntegerP(GrasswalkError):
    """An operation requiring an integer size parameter got a fractional one."""


class SeriesRange(GrasswalkError):
    """Series evaluation requested outside its validated argument range."""


class NotInChamber(GrasswalkError):
    """A point violates the decreasing-nonnegative chamber ordering."""


class SingularMinor(GrasswalkError):
    """A zero principal minor was raised to a negative power."""


class InadmissibleRow(GrasswalkError):
    """A transition row with genuinely negative coefficients was requested."""


class DegreeCapExceeded(GrasswalkError):
    """A walk left the configured degree cap.

    Carries a ``report`` dict with partial progress information.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class BesselUncertain(GrasswalkError):
    """Monte Carlo reference too noisy for the requested comparison."""
