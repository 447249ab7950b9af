"""Exception types shared across the library."""


class DimensionMismatchError(ValueError):
    """Shapes of chained operands do not line up; message names the failing link."""


class ConfigError(ValueError):
    """Bad or missing configuration entry.

    Attributes
    ----------
    key : str
        The offending configuration key.
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


class SignalDataError(ValueError):
    """CSV trace could not be loaded (short file, bad column, non-numeric cell)."""


class ConstructionError(ValueError):
    """A projection matrix cannot be built from the requested parameters."""


class SingularFitError(RuntimeError):
    """Least-squares refit hit a rank-deficient support.

    Attributes
    ----------
    iteration : int
        Greedy iteration (0-based) at which the deficiency appeared.
    """

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"rank-deficient support at iteration {iteration}")


class SolverFailureError(RuntimeError):
    """Convex solver did not reach a feasible solution within tolerance.

    Carries the best iterate found (may be None).
    """

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class CombinatorialGuardError(ValueError):
    """Requested exhaustive enumeration exceeds the subset-count guard."""
