"""Scaling and placement of distributed service chains on vehicle clusters."""

__version__ = "0.1.0"
