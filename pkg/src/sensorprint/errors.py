"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when user-supplied data or parameters fail validation.

    The CLI maps this to exit code 2.
    """


class TraceParseError(ValidationError):
    """Raised when a trace file cannot be parsed into a ``SensorTrace``.

    Carries enough positional context (file, line or JSON path) to point
    at the offending record.
    """

    def __init__(self, message, *, source=None, line=None):
        detail = message
        if source is not None:
            prefix = str(source)
            if line is not None:
                prefix += f":{line}"
            detail = f"{prefix}: {message}"
        super().__init__(detail)
        self.source = source
        self.line = line
