"""Exception types shared across the package.

Every error carries a ``kind`` tag that the service layer maps onto HTTP
statuses and the CLI maps onto exit codes:

* ``domain``         -> exit 1 (a precondition on the inputs failed)
* ``nonconvergence`` -> exit 2 (an iteration or search legitimately gave up)
* ``tolerance``      -> exit 3 (an internal accuracy check failed)
"""

from __future__ import annotations


class GradlapError(Exception):
    kind = "tolerance"


class DomainError(GradlapError):
    """A mathematical precondition on the inputs is violated."""

    kind = "domain"


class NonConvergence(GradlapError):
    """An iteration hit its budget without meeting its tolerance.

    This is a legitimate outcome for the nonexistence probe, which uses
    divergence of the fixed-point iteration as its observable.
    """

    kind = "nonconvergence"

    def __init__(self, message, iterations=None, stage=None, reports=None):
        super().__init__(message)
        self.iterations = iterations
        self.stage = stage
        self.reports = reports


class NoAdmissibleFrame(NonConvergence):
    """The discriminant search exhausted its cases without a valid frame."""


class BracketNotFound(NonConvergence):
    """A ladder scan never straddled the sought transition."""


class ToleranceError(GradlapError):
    """A computed quantity failed an internal accuracy check."""

    kind = "tolerance"
