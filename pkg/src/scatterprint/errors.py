"""Exception types shared across the pipeline."""


class ValidationError(ValueError):
    """Input data violates a documented contract."""


class ManifestError(ValidationError):
    """A manifest file failed to parse; the message carries the line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class TrainingError(RuntimeError):
    """An iterative solver stopped before reaching its convergence criterion."""
