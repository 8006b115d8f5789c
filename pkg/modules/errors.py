"""Pipeline exceptions.

Content problems raise ValidationError (a ValueError); file system problems
stay OSError. The CLI maps the first to exit code 1 and the second to 2.
"""

from typing import Optional, Sequence


class CrowdPropError(Exception):
    """Base class for pipeline errors."""


class ValidationError(CrowdPropError, ValueError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path and line is not None:
            location = f"{path}:{line}: "
        elif path:
            location = f"{path}: "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")


class InventoryMismatchError(ValidationError):
    """Two inputs were built against different relation inventories."""


class JoinError(ValidationError):
    """Prediction and gold files do not cover the same sentences."""

    def __init__(
        self,
        message: str,
        missing_in_gold: Sequence[str] = (),
        missing_in_predictions: Sequence[str] = (),
        limit: int = 10,
    ):
        self.missing_in_gold = list(missing_in_gold)
        self.missing_in_predictions = list(missing_in_predictions)
        parts = [message]
        if self.missing_in_gold:
            shown = ", ".join(self.missing_in_gold[:limit])
            parts.append(f"{len(self.missing_in_gold)} prediction ids not in gold (first: {shown})")
        if self.missing_in_predictions:
            shown = ", ".join(self.missing_in_predictions[:limit])
            parts.append(f"{len(self.missing_in_predictions)} gold ids not in predictions (first: {shown})")
        super().__init__("; ".join(parts))
