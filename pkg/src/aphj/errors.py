"""Exception types shared across the package."""


class AphjError(Exception):
    """Base class for all errors raised by aphj."""


class ConfigError(AphjError, ValueError):
    pass


class RuntimeFailure(AphjError, RuntimeError):
    pass


# apfunc
class NonRealResidue(AphjError, ArithmeticError):
    pass


class IncompatibleRepresentation(AphjError, TypeError):
    pass


class WindowTooShort(AphjError, ValueError):
    pass


class OrderTooLarge(AphjError, ValueError):
    pass


class GridMismatch(AphjError, ValueError):
    pass


# freqmod
class EmptyInput(AphjError, ValueError):
    pass


class NotInModule(AphjError, ValueError):
    pass


# solvers
class NyquistViolation(AphjError, ValueError):
    pass


class UnboundedHamiltonian(AphjError, ValueError):
    pass


class CFLFailure(RuntimeFailure):
    pass


class BlowUp(RuntimeFailure):
    pass


class InvariantBreach(RuntimeFailure):
    """A discrete invariant (max principle, conservation) failed at runtime."""


class NotConverged(RuntimeFailure):
    pass
