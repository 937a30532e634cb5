"""Exception types raised across the package."""


class NSGreedyError(Exception):
    """Base class for package errors."""


class DomainError(NSGreedyError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class InstanceTooLarge(NSGreedyError, ValueError):
    """An exhaustive routine was asked to enumerate beyond its hard cap."""


class NonMonotoneError(NSGreedyError, ValueError):
    """A set function that must be nondecreasing decreases somewhere.

    ``witness`` holds ``(S, v)``: adding ``v`` to ``S`` lowers the value.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
