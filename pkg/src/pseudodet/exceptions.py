"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures to its stable contract: 1 for bad input, 2 for numerical or
precondition failures.
"""


class PseudoDetError(Exception):
    exit_code = 2


class InputError(PseudoDetError, ValueError):
    exit_code = 1


class NonSquare(InputError):
    pass


class NotHermitian(InputError):
    def __init__(self, deviation, tol):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"matrix is not Hermitian: max |A - A*| = {deviation:.3e} > {tol:.3e}"
        )


class DimensionMismatch(InputError):
    pass


class EmptyDataset(InputError):
    pass


class NumericalError(PseudoDetError, ArithmeticError):
    exit_code = 2


class ConvergenceFailure(NumericalError):
    def __init__(self, message, residual=float("nan")):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class CapExceeded(NumericalError):
    def __init__(self, n, k, count, cap):
        self.n, self.k, self.count, self.cap = n, k, count, cap
        super().__init__(
            f"n={n} exceeds minor cap {cap}: {count} minors of size {k} "
            "would be enumerated (raise the cap explicitly to proceed)"
        )


class DeterminantOverflow(NumericalError):
    pass


class KernelMismatch(NumericalError):
    pass


class RankDrift(NumericalError):
    pass


class InvalidProjector(NumericalError):
    pass


class NotPSD(NumericalError):
    pass
