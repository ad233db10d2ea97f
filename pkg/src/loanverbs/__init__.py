"""Detect integrated and light-verb uses of Spanish loanword verbs and model their use."""

__version__ = "0.1.0"
