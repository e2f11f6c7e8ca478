"""Prompts for reading certification results and planning experiments.

Prompt creators return lists of Message objects compatible with MCP prompts.
"""

from typing import List

from mcp.server.fastmcp.prompts import base

from diwed.bounds import algebraic_max, producible_quantum_bound
from diwed.errors import DiwedError
from diwed.quantum import quantum_max


def create_interpretation_prompt(report_text: str, context: str = "", witness_guide: str = "") -> List[base.Message]:
    """Create a prompt that explains a certification report.

    Args:
        report_text: Output of the certify_counts tool
        context: Experimental setting (platform, state, shot counts)
        witness_guide: Content of knowledge://witness-guide

    Returns:
        List of Message objects for MCP prompt
    """

    system_message = f"""
    You are an expert in device-independent certification of multipartite entanglement.
    You read witness reports and explain what they prove and what they do not.

    REFERENCE:
    {witness_guide}

    INTERPRETATION RULES:

    1. **What is certified**
    - An entanglement depth d means at least d parties share genuine entanglement
    - A nonlocality depth d means at least d parties share genuinely multipartite nonlocality
    - Nothing is assumed about the devices; only the counts are used

    2. **Statistical margin**
    - The observed value is lowered by the stated number of standard errors
    - Crossings of the adjusted value are the only ones that count
    - Settings are treated as independent samples

    3. **Warnings**
    - A value above the n-partite quantum bound points at a data or model problem
    - MABK bounds flagged as partition maxima exceed the textbook k-producible value

    OUTPUT FORMAT:
    - Verdict: [one sentence]
    - Evidence: [bounds crossed and by how much]
    - Caveats: [statistics, loopholes not addressed]
    - Next step: [more shots, another witness, or a different state]
    """

    user_message = f"""
    Interpret this certification report:

    {report_text}

    EXPERIMENTAL CONTEXT: {context or "not provided"}

    Explain the certified depth in plain terms and say how far the data is from the next depth.
    """

    return [base.UserMessage(system_message), base.UserMessage(user_message)]


def _depth_targets(n: int, target_depth: int) -> str:
    """Bounds an experiment must beat for the requested depth."""
    try:
        needed = producible_quantum_bound(n, target_depth - 1).bound
        top = quantum_max(n).value
        ns = algebraic_max(target_depth - 1)
    except DiwedError as e:
        return f"(bounds unavailable: {e})"
    return (
        f"- I_{n} must exceed {needed:.4f} ((k={target_depth - 1})-producible quantum bound)\n"
        f"    - GHZ_{n} reaches at most {top:.4f}; the required GHZ visibility is {needed / top:.4f}\n"
        f"    - Beating {ns:.4f} would also certify nonlocality depth {target_depth}"
    )


def create_experiment_plan_prompt(
    n: int, target_depth: int, platform: str = "", witness_guide: str = ""
) -> List[base.Message]:
    """Create a prompt that plans a depth-certification experiment.

    Args:
        n: Number of parties
        target_depth: Entanglement depth to certify (2..n)
        platform: Physical platform (ions, photons, superconducting qubits, ...)
        witness_guide: Content of knowledge://witness-guide

    Returns:
        List of Message objects for MCP prompt
    """

    system_message = f"""
    You are an experimental quantum information scientist planning Bell tests with two
    settings per party and +-1 outcomes.

    REFERENCE:
    {witness_guide}

    PLANNING FRAMEWORK:
    1. Pick the witness (I_n or MABK) whose bound gap is largest for the target depth
    2. Pick the state and the measurement angles (GHZ with the optimal XY-plane angles)
    3. Estimate the visibility the platform must reach
    4. Estimate shots per setting so that the margin stays below the gap
    """

    user_message = f"""
    Plan an experiment on {n} parties that certifies entanglement depth {target_depth}.

    PLATFORM: {platform or "unspecified"}

    TARGETS:
    {_depth_targets(n, target_depth)}

    Give the witness, the state, the measurement settings, the required visibility and a shot budget.
    """

    return [base.UserMessage(system_message), base.UserMessage(user_message)]
