from __future__ import annotations


class GuardError(RuntimeError):
    """A configured resource ceiling was exceeded."""


class VerificationError(RuntimeError):
    """A structural check failed; ``witness`` explains where."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
