"""Quasi-static simulator of a tendon-driven, machined-spring, five-fingered hand."""

__version__ = "0.1.0"
