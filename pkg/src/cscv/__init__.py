"""Context-sensitive concolic verification for MCL contracts."""

__version__ = "0.1.0"
