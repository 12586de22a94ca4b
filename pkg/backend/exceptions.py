class LatticeLabError(Exception):
    """Base class for numerical and domain failures raised by the laboratory"""


class OutOfDomain(LatticeLabError):
    """Parameters or arguments lie outside the region where a quantity is defined"""


class BoundaryDegenerate(LatticeLabError):
    """(a, d) sits within tolerance of d_-(a) or d_+(a), where root counts are degenerate"""


class SingularDerivative(LatticeLabError):
    """A closed-form derivative divides by g'(v) = 0"""


class DiscriminantNegative(LatticeLabError):
    """The critical points of the m-map do not exist (a^2 - a + 1 - 6d < 0)"""


class NotFound(LatticeLabError):
    """Newton iteration did not produce an admissible standing front"""


class BlowUp(LatticeLabError):
    """Time integration left the band |u_j| <= 2"""


class NoInterface(LatticeLabError):
    """No level crossing was found in a recorded lattice state"""


class CriteriaConflict(LatticeLabError):
    """A scanned cell has an analytic verdict contradicted by simulation"""
