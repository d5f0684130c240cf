"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates a documented precondition or value-range contract."""


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite loss; carries the offending epoch."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite training loss ({loss!r}) at epoch {epoch}")


class FileFormatError(DomainError):
    """A serialized artifact failed to parse or validate.

    ``line`` is 1-based when the problem is tied to a specific line,
    else None.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
