"""
Exceptions raised by pvasym.

Every exception carries the exit code the command line uses for it:
1 for bad input or a violated invariant, 2 for numerical failures, 3 for
non-generic monodromy data.
"""


class PVError(RuntimeError):
    exit_code = 1


class InputError(PVError):
    exit_code = 1


class NumericalError(PVError):
    exit_code = 2


class NonGenericError(PVError):
    exit_code = 3


class ConfigError(InputError):
    pass


# ellipkit
class DegenerateModulus(NumericalError):
    pass


class NonconvergentNome(NumericalError):
    pass


class NearThetaZero(NumericalError):
    pass


class PoleProximity(NumericalError):
    """
    The argument is within the pole tolerance of a pole; `pole` is the
    nearest pole, so that callers can treat the value as a flagged infinity.
    """

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class BranchPoint(InputError):
    pass


# boutroux
class NoConvergence(NumericalError):

    def __init__(self, message, phi=None):
        super().__init__(message)
        self.phi = phi


class DegeneratePhi(NumericalError):
    pass


# monodromy
class SingularChart(InputError):
    pass


class ZeroGauge(InputError):
    pass


class OnCriticalRay(InputError):
    pass


class ManifoldViolation(InputError):
    pass


class NonGenericMonodromy(NonGenericError):
    pass


# elliptic_rep / error_term
class UnitValue(NumericalError):
    pass


class SingularY(InputError):
    pass


class SingularDenominator(NumericalError):
    pass


class StripViolation(InputError):
    pass


class TailNotConverged(NumericalError):
    pass


# painleve_ode
class SingularPoint(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class MaxSteps(NumericalError):
    pass


# stokes
class CoalescingTurningPoints(NumericalError):
    pass


class TraceStall(NumericalError):
    pass
