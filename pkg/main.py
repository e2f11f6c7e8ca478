import asyncio
import logging
from pathlib import Path
from typing import List, Optional

from mcp.server.fastmcp import FastMCP
from mcp.server.fastmcp.prompts import base

from diwed import config
from diwed.bounds import FAMILIES, bound_table, gamma_producible_bound, witness_bound as compute_bound
from diwed.certify import WITNESSES, certify, estimate
from diwed.correl import FUNCTIONALS, named_functional
from diwed.errors import DiwedError
from diwed.localset import facet_check_full_correlation, facet_check_local_polytope, local_bound
from diwed.quantum import STATE_BUILDERS, named_state, seesaw, seesaw_fixed_state
from diwed.tables import TABLES, reproduce_table as run_table
from diwed.utils.formatters import (
    format_bound,
    format_bound_table,
    format_certification,
    format_error_message,
    format_facet,
    format_seesaw,
    format_table_rows,
)
from diwed.utils.io import read_counts

# Import prompt creators
from prompts import create_interpretation_prompt, create_experiment_plan_prompt

logging.basicConfig(level=getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING))
logger = logging.getLogger("diwed.server")

mcp = FastMCP("diwed")

KNOWLEDGE_DIR = Path(__file__).parent / "knowledge"


def load_knowledge(name: str, fallback: str) -> str:
    """Load one markdown guide from the knowledge directory."""
    try:
        with open(KNOWLEDGE_DIR / name, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        logger.error("Error loading %s: %s", name, e)
        return fallback


WITNESS_GUIDE = load_knowledge("witness_guide.md", "Witness guide not available.")


# === RESOURCES ===
@mcp.resource("knowledge://witness-guide")
def get_witness_guide() -> str:
    """How the I_n, gamma and MABK witnesses certify entanglement and nonlocality depth."""
    return WITNESS_GUIDE


@mcp.resource("knowledge://file-formats")
def get_file_formats() -> str:
    """JSON layouts for correlators, behaviors, counts and strategies."""
    return load_knowledge(
        "file_formats.md",
        """
        # File formats

        Counts: {"records": [{"setting": "01", "counts": {"+-": 12}}]}
        See the project README for the other layouts.
        """,
    )


# === PROMPTS ===
@mcp.prompt("interpret-certification")
def interpret_certification_prompt(report_text: str, context: str = "") -> List[base.Message]:
    """Explain a certification report in experimental terms."""
    return create_interpretation_prompt(report_text, context, witness_guide=WITNESS_GUIDE)


@mcp.prompt("plan-experiment")
def plan_experiment_prompt(n: int, target_depth: int, platform: str = "") -> List[base.Message]:
    """Choose a witness, state and shot budget for a target depth."""
    return create_experiment_plan_prompt(n, target_depth, platform, witness_guide=WITNESS_GUIDE)


# === TOOLS ===
@mcp.tool()
async def witness_bound(family: str = "iota", n: int = 3, k: Optional[int] = None, gamma: float = 2.0) -> str:
    """Producibility bound of a witness family.

    Args:
        family: iota (I_n, quantum), ns (I_n, no-signaling), mabk, or gamma.
        n: Number of parties.
        k: Depth; omit to list every k from 1 to n.
        gamma: Parameter of the gamma family, in (0, 2].

    Returns:
        Formatted bound (or table of bounds).
    """
    try:
        if k is None:
            if family == "gamma":
                bounds = [gamma_producible_bound(n, j, gamma) for j in range(1, n + 1)]
            else:
                bounds = bound_table(family, n)
            return format_bound_table(bounds)
        return format_bound(compute_bound(family, n, k, gamma))
    except DiwedError as e:
        return format_error_message(
            "Invalid Bound Request",
            str(e),
            suggestions=[
                f"Use a family from {', '.join(FAMILIES)}",
                "Keep 1 <= k <= n",
                "MABK bounds need n >= 2",
            ],
        )


@mcp.tool()
async def optimize_violation(
    functional: str = "iota",
    n: int = 3,
    state: Optional[str] = None,
    restarts: int = 10,
    seed: Optional[int] = None,
    gamma: float = 2.0,
) -> str:
    """Search for the largest quantum violation with the see-saw method.

    Args:
        functional: iota, gamma or mabk.
        n: Number of parties (qubits).
        state: Optional fixed state: ghz, w, cluster-linear or cluster-ring.
        restarts: Random restarts; more restarts find better optima.
        seed: Root seed; same seed gives the same result.
        gamma: Parameter of the gamma family.
    """
    if functional not in FUNCTIONALS:
        return format_error_message(
            "Unknown Functional",
            f"{functional!r} is not available",
            suggestions=[f"Use one of {', '.join(FUNCTIONALS)}"],
        )
    try:
        f = named_functional(functional, n, gamma)
        if state:
            fixed = named_state(state, n)
            result = await asyncio.to_thread(seesaw_fixed_state, f, fixed, restarts, seed)
        else:
            result = await asyncio.to_thread(seesaw, f, None, restarts, seed)
    except DiwedError as e:
        return format_error_message(
            "Optimization Failed",
            str(e),
            suggestions=[
                f"States available: {', '.join(sorted(STATE_BUILDERS))}",
                "Try more restarts or another seed",
                f"Keep n <= {config.MAX_STATE_QUBITS}",
            ],
        )
    return format_seesaw(result, f.name, state)


@mcp.tool()
async def certify_counts(counts_json: str, witness: str = "iota", sigmas: float = config.DEFAULT_SIGMAS) -> str:
    """Certify entanglement or nonlocality depth from measured counts.

    Args:
        counts_json: JSON text {"records": [{"setting": "010", "counts": {"++-": 12, ...}}, ...]}
                     with one record per setting (all 2^n settings).
        witness: iota (entanglement depth), ns (nonlocality depth) or mabk.
        sigmas: Standard errors subtracted before comparing with the bounds.
    """
    try:
        report = certify(estimate(read_counts(counts_json)), sigmas, witness)
    except DiwedError as e:
        return format_error_message(
            "Certification Failed",
            str(e),
            suggestions=[
                "Provide one record per setting bitstring",
                "Outcome strings use '+' and '-' with one symbol per party",
                f"Witness must be one of {', '.join(WITNESSES)}",
                "Read knowledge://file-formats for the exact layout",
            ],
        )
    return format_certification(report)


@mcp.tool()
async def check_facet(n: int = 3, space: str = "corr") -> str:
    """Check that I_n <= 1 is a facet of the local polytope.

    Args:
        n: Number of parties (corr: up to 8, local: up to 6).
        space: corr for the full-correlation polytope, local for behavior space.
    """
    if space not in ("corr", "local"):
        return format_error_message(
            "Unknown Space",
            f"{space!r} is not a polytope space",
            suggestions=["Use 'corr' or 'local'"],
        )
    try:
        f = named_functional("iota", n)
        check = facet_check_full_correlation if space == "corr" else facet_check_local_polytope
        report = await asyncio.to_thread(check, f, local_bound(f).value)
    except DiwedError as e:
        return format_error_message(
            "Facet Check Failed",
            str(e),
            suggestions=["Use space 'corr' (n <= 8) or 'local' (n <= 6)", "n must be at least 2"],
        )
    return format_facet(report)


@mcp.tool()
async def reproduce_table(table: str = "I") -> str:
    """Recompute a published table and compare it with the stored values.

    Args:
        table: I, II, III, IV, V or C. Table V runs the see-saw and takes longer.
    """
    try:
        report = await asyncio.to_thread(run_table, table)
    except DiwedError as e:
        return format_error_message(
            "Unknown Table",
            str(e),
            suggestions=[f"Use one of {', '.join(TABLES)}"],
        )
    return format_table_rows(f"TABLE {report.table}: {report.title}", [r.to_dict() for r in report.rows])


if __name__ == "__main__":
    mcp.run(transport="stdio")
