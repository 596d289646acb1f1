"""Exception types shared across the package."""
from __future__ import annotations


class LhscertError(Exception):
    """Base class for package errors."""


class ValidationError(LhscertError, ValueError):
    """Malformed or out-of-range input (shapes, hermiticity, parameter ranges)."""


class CertificateError(LhscertError):
    """A certificate could not be constructed or failed verification.

    The message names the violated condition; ``details`` carries the
    offending margins so callers can report them.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = dict(details or {})


class SolverError(LhscertError):
    """Numerical machinery (LP/SDP solver) failed; distinct from infeasibility."""
