"""Tabular Q-learning, DQN and replay strategies on a deterministic cart-pole."""

__version__ = "0.1.0"

PRNG_ALGORITHM = "numpy.random.PCG64"


class ContractViolation(ValueError):
    """Raised when an operation is called outside its precondition."""
