"""Exception types shared across the package."""


class NumericalFailure(ArithmeticError):
    """A factorization or decomposition broke down.

    Parameters
    ----------
    message : str
        Human readable description.
    step : int, optional
        Zero-based time step at which the failure occurred, when known.
    """

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
