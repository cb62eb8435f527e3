"""Exception and warning types shared across the package."""


class TrapMassError(Exception):
    """Base class for all package errors."""


# --- parameter / model construction ---

class MissingField(TrapMassError):
    def __init__(self, field):
        self.field = field
        super().__init__(f"required field missing: {field!r}")


class NonPositiveMass(TrapMassError):
    def __init__(self, field, value):
        self.field = field
        super().__init__(f"{field} must be positive, got {value!r}")


class NonMonotoneLevels(TrapMassError):
    def __init__(self, levels):
        super().__init__(
            f"internal levels must start at 0 and be strictly increasing, got {levels!r}"
        )


class LevelOutOfRange(TrapMassError):
    def __init__(self, index, n_levels):
        super().__init__(f"level index {index} out of range for {n_levels} levels")


# --- Fock-space numerics ---

class DimensionTooSmall(TrapMassError):
    pass


class DimensionMismatch(TrapMassError):
    pass


class ParamMismatch(TrapMassError):
    pass


class ConvergenceFailure(TrapMassError):
    pass


class TruncationInsufficient(TrapMassError):
    pass


class NoConvergence(TrapMassError):
    def __init__(self, dim_max, last_change=None):
        self.dim_max = dim_max
        self.last_change = last_change
        msg = f"no convergence up to dim_max={dim_max}"
        if last_change is not None:
            msg += f" (last change {last_change:.3e})"
        super().__init__(msg)


# --- traces / fits / optimization ---

class GridTooCoarse(TrapMassError):
    pass


class OptimizerFailure(TrapMassError):
    pass


class NotNormalized(TrapMassError):
    pass


class NonGaussianProfile(TrapMassError):
    pass


# --- clock module ---

class ZeroGravity(TrapMassError):
    pass


class DegenerateLevels(TrapMassError):
    pass


class GravityNotSupported(TrapMassError):
    pass


class InvalidDistribution(TrapMassError):
    pass


# --- warnings ---

class RegimeWarning(UserWarning):
    """Inputs are outside the small-parameter regime a formula assumes."""


class WeakFieldWarning(UserWarning):
    """gh/c^2 is large enough that first-order redshift formulas degrade."""
