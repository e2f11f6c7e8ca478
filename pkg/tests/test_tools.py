"""
Tests for the DIWED MCP server tools, resources and prompts.

These tests ensure that every tool returns a formatted string and that
failures come back as readable error messages rather than exceptions.
"""

import json
import sys
from pathlib import Path
from unittest.mock import patch

import pytest

# Add the project root to the path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from diwed.certify import records_from_tensor
from diwed.errors import DegenerateOptimizationError
from diwed.quantum import ansatz_strategy, expectation, quantum_max
from diwed.tables import TableReport, TableRow
from diwed.utils.io import counts_to_dict, dumps
from main import (
    certify_counts,
    check_facet,
    get_file_formats,
    get_witness_guide,
    interpret_certification_prompt,
    load_knowledge,
    optimize_violation,
    plan_experiment_prompt,
    reproduce_table,
    witness_bound,
)


def _counts_json(n: int) -> str:
    tensor = expectation(ansatz_strategy(n, quantum_max(n).phi))
    return dumps(counts_to_dict(records_from_tensor(tensor, 1_000_000)))


class TestToolReturnTypes:
    """Test that all tools return properly formatted strings."""

    @pytest.mark.asyncio
    async def test_witness_bound_returns_string(self):
        """Test a single bound."""
        result = await witness_bound(family="ns", n=4, k=4)

        assert isinstance(result, str)
        assert "WITNESS BOUND" in result
        assert "2.7500000000" in result

    @pytest.mark.asyncio
    async def test_witness_bound_table(self):
        """Test that omitting k lists every depth."""
        result = await witness_bound(family="iota", n=3)

        assert isinstance(result, str)
        assert "ERROR" not in result

    @pytest.mark.asyncio
    async def test_gamma_table(self):
        """Test the gamma family table at gamma = 1 for two parties."""
        result = await witness_bound(family="gamma", n=2, gamma=1.0)

        assert isinstance(result, str)
        assert "ERROR" not in result

    @pytest.mark.asyncio
    async def test_optimize_returns_string(self):
        """Test the see-saw report."""
        result = await optimize_violation(functional="iota", n=2, restarts=3, seed=1)

        assert isinstance(result, str)
        assert "SEE-SAW OPTIMUM" in result
        assert "Value: 1.41421" in result

    @pytest.mark.asyncio
    async def test_optimize_fixed_state(self):
        """Test that a fixed state is named in the report."""
        result = await optimize_violation(functional="iota", n=2, state="ghz", restarts=3, seed=1)

        assert "State (fixed): ghz" in result

    @pytest.mark.asyncio
    async def test_certify_counts_returns_string(self):
        """Test that near-ideal GHZ_3 counts certify depth 3."""
        result = await certify_counts(_counts_json(3))

        assert isinstance(result, str)
        assert "CERTIFICATION" in result
        assert "entanglement depth ≥ 3" in result

    @pytest.mark.asyncio
    async def test_check_facet_returns_string(self):
        """Test the facet check of I_3."""
        result = await check_facet(n=3)

        assert "FACET CHECK" in result
        assert "Facet: yes" in result

    @pytest.mark.asyncio
    async def test_reproduce_table_returns_string(self):
        """Test a deterministic table."""
        result = await reproduce_table("I")

        assert "TABLE I" in result
        assert "All entries within tolerance" in result

    @pytest.mark.asyncio
    async def test_depth_table_returns_string(self):
        """Test the entanglement-depth table built from stored violations."""
        result = await reproduce_table("II")

        assert "TABLE II" in result
        assert "All entries within tolerance" in result


class TestErrorHandling:
    """Test that failures become error messages."""

    @pytest.mark.asyncio
    async def test_unknown_family(self):
        """Test an unknown bound family."""
        result = await witness_bound(family="chsh", n=2, k=2)

        assert "ERROR" in result
        assert "Invalid Bound Request" in result
        assert "Suggestions:" in result

    @pytest.mark.asyncio
    async def test_unknown_functional(self):
        """Test an unknown functional name."""
        result = await optimize_violation(functional="chsh", n=2)

        assert "Unknown Functional" in result

    @pytest.mark.asyncio
    async def test_degenerate_optimization(self):
        """Test that an optimizer failure is reported, not raised."""
        with patch("main.seesaw", side_effect=DegenerateOptimizationError("every restart stalled")):
            result = await optimize_violation(functional="iota", n=2, restarts=2)

        assert "Optimization Failed" in result
        assert "every restart stalled" in result

    @pytest.mark.asyncio
    async def test_malformed_counts(self):
        """Test counts with a missing setting."""
        counts = json.dumps({"records": [{"setting": "00", "counts": {"++": 5}}]})
        result = await certify_counts(counts)

        assert "Certification Failed" in result
        assert "missing settings" in result

    @pytest.mark.asyncio
    async def test_non_integer_counts(self):
        """Test that a count that is not a number comes back as a message."""
        counts = json.dumps({"records": [{"setting": "0", "counts": {"+": "lots"}}]})
        result = await certify_counts(counts)

        assert "Certification Failed" in result
        assert "not an integer" in result

    @pytest.mark.asyncio
    async def test_invalid_json(self):
        """Test counts that are not JSON."""
        result = await certify_counts("{not json")

        assert "Certification Failed" in result

    @pytest.mark.asyncio
    async def test_unknown_space(self):
        """Test an unknown polytope space."""
        result = await check_facet(n=3, space="quantum")

        assert "Unknown Space" in result

    @pytest.mark.asyncio
    async def test_facet_too_large(self):
        """Test the party limit of the local-polytope check."""
        result = await check_facet(n=7, space="local")

        assert "Facet Check Failed" in result

    @pytest.mark.asyncio
    async def test_unknown_table(self):
        """Test a table that is not reproduced."""
        result = await reproduce_table("VI")

        assert "Unknown Table" in result

    @pytest.mark.asyncio
    async def test_table_mismatch_is_reported(self, mocker):
        """Test that mismatched rows are counted in the output."""
        report = TableReport("V", "stub", (TableRow("I_3 w", 1.2, 1.3631, 1e-3),), 1)
        mocker.patch("main.run_table", return_value=report)
        result = await reproduce_table("V")

        assert "1 entry outside tolerance" in result
        assert "✘" in result


class TestResourcesAndPrompts:
    """Test knowledge resources and prompt creators."""

    def test_witness_guide(self):
        """Test that the guide is loaded from disk."""
        guide = get_witness_guide()
        assert isinstance(guide, str)
        assert len(guide) > 100

    def test_file_formats(self):
        """Test the file format resource."""
        assert "records" in get_file_formats()

    def test_missing_knowledge_falls_back(self):
        """Test the fallback text for a missing guide."""
        assert load_knowledge("absent.md", "fallback") == "fallback"

    def test_interpretation_prompt(self):
        """Test that the report text reaches the user message."""
        messages = interpret_certification_prompt("Certified: entanglement depth ≥ 3", "trapped ions")
        assert len(messages) == 2
        assert "depth ≥ 3" in messages[1].content.text
        assert "trapped ions" in messages[1].content.text

    def test_experiment_plan_targets(self):
        """Test that the plan carries the bound to beat."""
        messages = plan_experiment_prompt(3, 3)
        text = messages[1].content.text
        assert "I_3 must exceed 1.4142" in text
        assert "1.6667" in text
