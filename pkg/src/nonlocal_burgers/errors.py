"""Exception hierarchy shared by every module of the package."""


class NonlocalBurgersError(Exception):
    """Base class for all errors raised by this package."""


class KernelError(NonlocalBurgersError, ValueError):
    pass


class NonSymmetricKernel(KernelError):
    pass


class NegativeKernel(KernelError):
    pass


class NonUnitMass(KernelError):
    pass


class InfiniteSecondMoment(KernelError):
    pass


class SpacingTooCoarse(KernelError):
    pass


class WrongKernel(KernelError):
    pass


class BadDomain(NonlocalBurgersError, ValueError):
    pass


class NotMonotone(NonlocalBurgersError, ValueError):
    pass


class TailsTooFat(NonlocalBurgersError, ValueError):
    pass


class DegenerateRiemann(NonlocalBurgersError, ValueError):
    pass


class GridMismatch(NonlocalBurgersError, ValueError):
    pass


class NonpositiveTime(NonlocalBurgersError, ValueError):
    pass


class SingularSolve(NonlocalBurgersError, ArithmeticError):
    pass


class BlowUp(NonlocalBurgersError, ArithmeticError):
    pass


class FanHitBoundary(NonlocalBurgersError, RuntimeError):
    def __init__(self, message, suggested_domain=None):
        super().__init__(message)
        self.suggested_domain = suggested_domain


class BadP(NonlocalBurgersError, ValueError):
    pass


class TooFewPoints(NonlocalBurgersError, ValueError):
    pass


class NonpositiveError(NonlocalBurgersError, ValueError):
    pass


class WindowTooShort(NonlocalBurgersError, ValueError):
    pass


class MismatchedRuns(NonlocalBurgersError, ValueError):
    pass


class ConfigParse(NonlocalBurgersError, ValueError):
    pass
