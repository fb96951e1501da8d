"""Exception and warning types shared across the package.

Model problems (bad input data) raise :class:`ModelError`; breakdowns of the
numerical machinery raise subclasses of :class:`NumericalFailure`.  The CLI
maps the former to exit code 1 and the latter to exit code 2.
"""


class ModelError(ValueError):
    """Invalid model, state, or dimension mismatch."""


class NumericalFailure(RuntimeError):
    """Base class for numerical breakdowns of the spectral machinery."""


class SingularS(NumericalFailure):
    """The quadratic-form matrix S is numerically singular.

    Carries ``smallest_singular_value`` so callers can report how close to
    singular the solve was.
    """

    def __init__(self, smallest_singular_value: float):
        self.smallest_singular_value = smallest_singular_value
        super().__init__(
            f"S is numerically singular (smallest singular value "
            f"{smallest_singular_value:.3e}); the shift vector is undefined"
        )


class DefectiveX(NumericalFailure):
    """X is not (numerically) diagonalizable."""

    def __init__(self, condition_estimate: float):
        self.condition_estimate = condition_estimate
        super().__init__(
            f"eigenvector matrix of X has condition estimate "
            f"{condition_estimate:.3e} (> 1e10); X is numerically defective"
        )


class LyapunovUnsolvable(NumericalFailure):
    """A resonant rapidity pair beta_r + beta_s ~ 0 blocks the Lyapunov solve."""

    def __init__(self, pair: tuple, value: complex):
        self.pair = pair
        self.value = value
        super().__init__(
            f"rapidity pair {pair} has beta_r + beta_s = {value:.3e}; "
            f"the continuous Lyapunov equation is unsolvable"
        )


class NoKernel(NumericalFailure):
    """No common kernel vector of the lowering modes within tolerance."""

    def __init__(self, smallest_singular_value: float):
        self.smallest_singular_value = smallest_singular_value
        super().__init__(
            f"no steady-state kernel found (smallest singular value of the "
            f"stacked mode matrix is {smallest_singular_value:.3e})"
        )


class TruncationOverflow(NumericalFailure):
    """A requested decay mode would leak outside the interior subspace."""


class StepFailure(NumericalFailure):
    """The adaptive integrator could not meet its tolerance."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"adaptive integrator failed near t = {time:.6g}")


class UnstableSpectrum(NumericalFailure):
    """Steady-state construction refused: some rapidity has Re(beta) < 0."""


class AmbiguousKernelWarning(UserWarning):
    """The steady-state kernel is degenerate; the first basis vector is used."""


class IllConditionedWarning(UserWarning):
    """A least-squares fit matrix exceeded the conditioning threshold."""
