from __future__ import annotations

from collections.abc import Iterable

EXIT_CLEAN = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_SEARCH_GUARD = 3


class RctError(Exception):
    exit_code = EXIT_INPUT

    def __init__(self, message: str, items: Iterable[str] = ()) -> None:
        super().__init__(message)
        self.message = message
        self.items = list(items)

    def lines(self) -> list[str]:
        return [self.message, *(f"- {item}" for item in self.items)]


class InputError(RctError):
    """The document could not be read or does not match the schema."""


class SchemaError(InputError):
    pass


class ConfigError(InputError):
    pass


class AssignmentError(InputError):
    pass


class ModelViolation(RctError):
    """Input parsed but breaks a model invariant."""

    exit_code = EXIT_VIOLATION


class LibraryError(ModelViolation):
    pass


class FloorplanError(ModelViolation):
    pass


class UnsupportedFloorplanError(ModelViolation):
    pass


class CharacterizationError(ModelViolation):
    pass


class SearchLimitExceeded(RctError):
    exit_code = EXIT_SEARCH_GUARD
