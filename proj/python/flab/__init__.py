"""Finite-volume laboratory for the Neumann filtration equation u_t = div(grad phi(u)).

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from flab._core import *  # noqa: F401,F403
from flab._core import __doc__ as _core_doc

__all__ = [n for n in dir() if not n.startswith("_")]
__doc__ = _core_doc
