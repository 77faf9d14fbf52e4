"""Nested-fraction minimisation: value functions, envelopes and asymptotic constants."""

__version__ = "0.1.0"
