"""Link-layer simulator and analytics for packet-switched quantum networks."""

from ._core import *  # noqa: F401,F403
from ._core import DecodeError, EncodeError, StateError  # noqa: F401

__version__ = "0.1.0"
