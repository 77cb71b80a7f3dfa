"""Shared exception types used across the toolkit."""


class CapacityError(Exception):
    """An input asks for a sieve / table larger than the configured capacity."""


class BudgetExceededError(Exception):
    """A summation loop would exceed the caller's iteration budget."""


class NonConvergenceError(Exception):
    """An iterative solver failed to converge (diagnostic failure)."""
