"""Exception types shared across the package."""

from __future__ import annotations


class CenregError(ValueError):
    """Base class for all validation and pipeline rejections."""


class PipelineError(CenregError):
    """A fit-pipeline stage rejected its input; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class ParseError(CenregError):
    """A file could not be parsed; carries the path and 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
