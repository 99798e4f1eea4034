"""Curriculum task selection for contextual reinforcement learning."""

from ._procurl import *  # noqa: F401,F403

__version__ = "0.1.0"
