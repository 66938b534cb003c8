"""Delay-Doppler ISAC precoder design and OTFS link simulation."""

from ._ddisac import *  # noqa: F401,F403
from ._ddisac import __doc__  # noqa: F401
