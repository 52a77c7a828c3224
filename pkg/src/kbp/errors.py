"""Exception types shared across the package."""


class KbpError(Exception):
    """Base class for all package errors."""


class ScenarioError(KbpError):
    """A scenario document failed to load or validate."""


class FormulaError(KbpError):
    """A formula string failed to parse or failed a fragment check."""


class ProgramError(KbpError):
    """A program failed validation against its scenario."""


class BudgetError(KbpError):
    """A state-space or enumeration budget was exceeded."""


class UndecidedError(KbpError):
    """The set of representing systems could not be decided within budget."""
