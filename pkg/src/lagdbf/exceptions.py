"""Exception types raised by the solvers and the benchmark harness."""


class DimensionError(ValueError):
    """Array shapes are inconsistent with the system dimensions."""


class ConfigurationError(ValueError):
    """Invalid problem or algorithm configuration."""


class NumericDomainError(ValueError):
    """An argument lies outside the domain of a closed-form update."""


class SolverError(RuntimeError):
    """A solver failed to make progress or produced non-finite values.

    Parameters
    ----------
    message : str
        Human readable description.
    diagnostics : dict, optional
        Iteration index, offending quantities and similar context.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({details})"
