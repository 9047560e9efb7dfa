"""Asynchronous single-neighbor gossip personalized learning.

Thin wrapper over the compiled extension; see the C++ headers for the full
operation contracts.
"""

from djam._djam import *  # noqa: F401,F403
from djam._djam import __doc__  # noqa: F401
