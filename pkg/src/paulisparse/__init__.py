"""Learning and verifying Pauli-sparse unitaries from Choi-state queries."""

__version__ = "0.1.0"
