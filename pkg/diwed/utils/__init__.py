"""Utilities: exact arithmetic, file formats and text rendering.

Only the arithmetic helpers are re-exported here; the core modules import
them, and ``formatters``/``io`` import the core modules in turn.
"""

from .exact import fwht, integer_rank, sign_transform_direct

__all__ = [
    "fwht",
    "integer_rank",
    "sign_transform_direct",
]
