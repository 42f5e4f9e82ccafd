"""Exception types shared across the package."""

from __future__ import annotations


class DataError(Exception):
    """A data file or in-memory dataset violates its contract."""


class SchemaError(DataError):
    """A parsed annotation tree failed schema validation."""

    def __init__(self, source: str, violations: list[str]):
        self.source = source
        self.violations = list(violations)
        head = "; ".join(self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"{source}: {head}{more}")


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite loss or parameter."""

    def __init__(self, epoch: int, detail: str):
        self.epoch = epoch
        super().__init__(f"diverged at epoch {epoch}: {detail}")
