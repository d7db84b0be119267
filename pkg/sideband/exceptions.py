"""
Errors raised by the sideband library.

Each error remembers which physical relation or precondition failed so the
CLI and the HTTP views can report it by name. The service layer turns these
into result dicts; the management command turns them into exit codes.
"""

from typing import Optional

EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3


class SidebandError(Exception):
    """Base class for everything the toolkit raises on purpose."""

    exit_code = 1

    def __init__(self, message: str, relation: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.relation = relation

    def __str__(self):
        if self.relation:
            return f"{self.message} [{self.relation}]"
        return self.message

    def to_dict(self):
        return {
            'success': False,
            'message': self.message,
            'errors': [str(self)],
            'relation': self.relation,
        }


class ValidationError(SidebandError):
    """Bad input or a violated invariant."""

    exit_code = EXIT_VALIDATION


class UnsupportedError(ValidationError):
    """The operation is not defined for this resonance condition or input."""


class ConvergenceError(SidebandError):
    """A numerical check failed (step halving, positivity, trace, residues)."""

    exit_code = EXIT_CONVERGENCE
