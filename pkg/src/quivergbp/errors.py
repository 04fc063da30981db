class CapExceeded(RuntimeError):
    """A configured size cap (paths, vertices, labellings) was exceeded."""


class InconclusiveAdmissibility(ValueError):
    """No nilpotency witness was found below the configured bound."""


class QuiverMismatch(ValueError):
    pass


class ValidationError(ValueError):
    """An input violates a structural precondition.

    ``diagnostics`` lists every violated clause, not just the first.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
