"""Prompt modules for the DIWED MCP server.

All prompt creators return lists of Message objects compatible with MCP prompts.
"""

from .certification import (
    create_experiment_plan_prompt,
    create_interpretation_prompt,
)

__all__ = [
    "create_interpretation_prompt",
    "create_experiment_plan_prompt",
]

__version__ = "0.1.0"
