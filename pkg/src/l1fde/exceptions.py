"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the region where a routine is defined or implemented."""


class NumericalError(ArithmeticError):
    """A linear solve or time step broke down (singular pivot, non-finite values)."""

    def __init__(self, message: str, step: int | None = None) -> None:
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step
