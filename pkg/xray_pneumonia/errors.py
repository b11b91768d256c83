"""
Exception hierarchy for the pneumonia classification toolkit.

Library code raises these; only the CLI turns them into exit codes.
"""

from typing import TYPE_CHECKING, Optional, Sequence

if TYPE_CHECKING:
    from .training.gradcheck import GradCheckReport


class XrayError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(XrayError, ValueError):
    """Tensor shapes are incompatible with the requested operation."""

    @classmethod
    def mismatch(cls, what: str, *shapes: Sequence[int]) -> "ShapeError":
        rendered = " vs ".join(str(tuple(int(d) for d in s)) for s in shapes)
        return cls(f"{what}: {rendered}")


class ParameterError(XrayError, ValueError):
    """A parameter is outside its valid domain."""


class ConfigError(ParameterError):
    """Malformed key=value experiment configuration."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ManifestError(ParameterError):
    """Manifest rows are malformed or reference unusable files."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"manifest line {line_number}: {message}"
        super().__init__(message)


class ImageDecodeError(XrayError):
    """An image file could not be decoded."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class CheckpointError(XrayError):
    """A checkpoint is malformed or does not match the expected model."""


class DivergedError(XrayError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")


class GradCheckError(XrayError):
    """Analytic gradients disagree with finite differences."""

    def __init__(self, report: "GradCheckReport"):
        self.report = report
        first = report.failures[0]
        super().__init__(
            f"{len(report.failures)} gradient mismatches; first at "
            f"{first.parameter}{list(first.index)}: analytic={first.analytic!r} "
            f"numeric={first.numeric!r}"
        )
