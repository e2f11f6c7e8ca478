"""
Tests for count estimation and depth certification.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from diwed.certify import (
    CorrelatorEstimate,
    CountRecord,
    certify,
    certify_depth,
    certify_mabk_depth,
    certify_nonlocality_depth,
    certify_value,
    estimate,
    iter_records,
    parse_outcome,
    propagated_stderr,
    records_from_tensor,
    simulate_counts,
    visibility_report,
)
from diwed.correl import CorrelationTensor, SettingVector, sliwa_functional
from diwed.errors import DimensionMismatchError, InvalidInputError
from diwed.quantum import ansatz_strategy, expectation, pad_strategy, quantum_max, value_of


def _optimal_tensor(n):
    return expectation(ansatz_strategy(n, quantum_max(n).phi))


class TestCounts:
    """Parsing and estimating from raw counts."""

    def test_parse_outcome(self):
        """Test ASCII and Unicode minus signs."""
        assert parse_outcome("+-+") == (1, -1, 1)
        assert parse_outcome("+−") == (1, -1)
        with pytest.raises(InvalidInputError):
            parse_outcome("+0")

    def test_record_validation(self):
        """Test outcome length and sign checks."""
        with pytest.raises(DimensionMismatchError):
            CountRecord(SettingVector.from_string("01"), {"+": 3})
        with pytest.raises(InvalidInputError):
            CountRecord(SettingVector.from_string("0"), {"+": -1})
        with pytest.raises(InvalidInputError):
            CountRecord(SettingVector.from_string("0"), {"+": 0})

    def test_estimate_and_stderr(self):
        """Test E = 0.5 with stderr sqrt(0.75 / 100)."""
        records = iter_records(
            [
                {"setting": "0", "counts": {"+": 75, "-": 25}},
                {"setting": "1", "counts": {"+": 50, "-": 50}},
            ]
        )
        est = estimate(records)
        assert est.tensor.values.tolist() == [0.5, 0.0]
        assert est.stderr[0] == pytest.approx(math.sqrt(0.75 / 100))
        assert est.stderr[1] == pytest.approx(0.1)

    def test_missing_setting(self):
        """Test that every setting must be present."""
        records = iter_records([{"setting": "00", "counts": {"++": 1}}])
        with pytest.raises(InvalidInputError, match="missing settings"):
            estimate(records)

    def test_duplicate_setting(self):
        """Test that a setting may appear only once."""
        records = iter_records([{"setting": "0", "counts": {"+": 1}}] * 2)
        with pytest.raises(InvalidInputError, match="twice"):
            estimate(records)

    def test_malformed_record(self):
        """Test that records need setting and counts."""
        with pytest.raises(InvalidInputError):
            iter_records([{"setting": "0"}])

    @pytest.mark.parametrize("counts", [{"++": "lots"}, {"++": 2.5}, {"++": None}, {"++": True}, [["++", 4]]])
    def test_malformed_counts(self, counts):
        """Test that counts which are not integer maps raise InvalidInputError."""
        with pytest.raises(InvalidInputError):
            iter_records([{"setting": "00", "counts": counts}])

    def test_integral_counts_accepted(self):
        """Test that numeric strings, whole floats and numpy integers are counts."""
        record = CountRecord(SettingVector.from_string("0"), {"+": "7", "-": 3.0, (1,): np.int64(2)})
        assert record.counts == {(1,): 9, (-1,): 3}

    def test_records_must_be_a_list(self):
        """Test that a mapping in place of the record list is rejected."""
        with pytest.raises(InvalidInputError, match="must be a list"):
            iter_records({"setting": "0", "counts": {"+": 1}})

    def test_records_from_tensor(self):
        """Test deterministic counts reproduce correlators up to rounding."""
        t = _optimal_tensor(3)
        est = estimate(records_from_tensor(t, 100000))
        assert np.allclose(est.tensor.values, t.values, atol=2e-5)

    def test_simulated_counts_are_reproducible(self):
        """Test that the seed fixes the sampled counts."""
        s = ansatz_strategy(2, 1.0)
        a = [r.to_dict() for r in simulate_counts(s, 500, seed=3)]
        b = [r.to_dict() for r in simulate_counts(s, 500, seed=3)]
        assert a == b
        assert all(sum(r["counts"].values()) == 500 for r in a)


class TestCertifyValue:
    """Depth decisions from a witness value."""

    @pytest.mark.parametrize("value,depth", [(1.7, 4), (1.2, 2), (1.0, 1), (0.3, 1)])
    def test_five_party_depths(self, value, depth):
        """Test the depth ladder at n = 5."""
        report = certify_value(5, value)
        assert report.entanglement_depth == depth
        assert report.nonlocality_depth is None
        assert report.certified == (depth > 1)

    def test_comparison_is_strict(self):
        """Test that a value equal to a bound does not cross it."""
        report = certify_value(4, quantum_max(2).value)
        assert report.entanglement_depth == 2

    def test_margin_lowers_value(self):
        """Test that the margin is subtracted before comparison."""
        report = certify_value(5, 1.7, margin=0.1)
        assert report.adjusted == pytest.approx(1.6)
        assert report.entanglement_depth == 3

    def test_nonlocality_depth(self):
        """Test the no-signaling ladder 1, 2, 2.5 at n = 3."""
        report = certify_value(3, 2.2, witness="ns")
        assert report.nonlocality_depth == 3
        assert report.entanglement_depth is None

    def test_above_quantum_maximum_warns(self):
        """Test that values above Q_n are flagged and capped at depth n."""
        report = certify_value(3, 1.9)
        assert report.entanglement_depth == 3
        assert any("exceeds" in w for w in report.warnings)

    def test_mabk_flags_invalid_bound(self):
        """Test that the n = 6, k = 3 partition maximum is flagged."""
        report = certify_value(6, 2.5, witness="mabk")
        assert report.entanglement_depth == 3
        assert any("k=3" in w for w in report.warnings)

    def test_bad_arguments(self):
        """Test negative margins and unknown witnesses."""
        with pytest.raises(InvalidInputError):
            certify_value(3, 1.5, margin=-0.1)
        with pytest.raises(InvalidInputError):
            certify_value(3, 1.5, witness="chsh")

    def test_report_dict(self):
        """Test the JSON-ready report."""
        data = certify_value(3, 1.5).to_dict()
        assert data["witness"] == "iota"
        assert len(data["bounds"]) == 3
        assert data["bounds"][0]["k"] == 1

    @pytest.mark.parametrize("witness", ["iota", "ns", "mabk"])
    @pytest.mark.parametrize("n", range(2, 7))
    def test_depth_is_monotone_in_the_value(self, witness, n):
        """Test that a larger witness value never certifies a smaller depth."""
        depths = [certify_value(n, v, witness=witness).depth for v in np.linspace(-0.5, 2.0 ** (n - 1), 401)]
        assert all(b >= a for a, b in zip(depths, depths[1:]))
        assert depths[0] == 1

    @pytest.mark.parametrize("n,k", [(n, k) for n in range(2, 7) for k in range(2, n + 1)])
    def test_padded_optimum_has_exact_depth(self, n, k):
        """Test that the k-party optimum padded with |0> certifies depth exactly k."""
        s = pad_strategy(ansatz_strategy(k, quantum_max(k).phi), n)
        report = certify_value(n, value_of(sliwa_functional(n), s), margin=1e-7)
        assert report.entanglement_depth == k
        assert not report.warnings


class TestCertifyEstimate:
    """End-to-end certification from estimated correlators."""

    def test_optimal_three_party_counts(self):
        """Test that near-ideal GHZ_3 data certifies depth 3."""
        est = estimate(records_from_tensor(_optimal_tensor(3), 1_000_000))
        report = certify_depth(est, sigmas=3.0)
        assert report.entanglement_depth == 3
        assert report.margin > 0

    def test_exact_estimate_has_no_margin(self):
        """Test that zero standard errors leave the value unchanged."""
        est = CorrelatorEstimate.exact(_optimal_tensor(2))
        report = certify(est, 3.0, "iota")
        assert report.margin == 0.0
        assert report.observed == pytest.approx(math.sqrt(2))

    def test_propagated_stderr(self):
        """Test sqrt(sum beta^2 se^2) on uniform errors."""
        est = CorrelatorEstimate(CorrelationTensor.constant(2, 0.0), np.full(4, 0.1))
        assert propagated_stderr(sliwa_functional(2), est) == pytest.approx(0.1)

    def test_negative_sigmas_rejected(self):
        """Test that sigmas must be non-negative."""
        with pytest.raises(InvalidInputError):
            certify(CorrelatorEstimate.exact(_optimal_tensor(2)), -1.0, "iota")

    def test_visibility_report(self):
        """Test the GHZ_3 visibility needed to reach the local bound."""
        assert visibility_report(3, 1.0) == pytest.approx(0.6, abs=1e-9)
        with pytest.raises(InvalidInputError):
            visibility_report(3, 0.5)

    def test_nonlocality_from_estimate(self):
        """Test that the GHZ_3 optimum shows nonlocality depth 2 only."""
        report = certify_nonlocality_depth(CorrelatorEstimate.exact(_optimal_tensor(3)), sigmas=0.0)
        assert report.nonlocality_depth == 2
        assert report.witness == "ns"

    def test_mabk_from_estimate(self):
        """Test that vanishing correlators certify nothing with MABK."""
        report = certify_mabk_depth(CorrelatorEstimate.exact(CorrelationTensor.constant(3, 0.0)))
        assert report.entanglement_depth == 1
        assert not report.certified
        assert report.functional == "MABK_3"

    @pytest.mark.parametrize("witness", ["iota", "ns", "mabk"])
    def test_depth_is_monotone_in_sigmas(self, witness):
        """Test that a wider margin never certifies a larger depth."""
        est = estimate(simulate_counts(ansatz_strategy(4, quantum_max(4).phi), 2000, seed=3))
        reports = [certify(est, s, witness) for s in np.linspace(0.0, 10.0, 41)]
        assert all(b.depth <= a.depth for a, b in zip(reports, reports[1:]))
        assert all(b.margin >= a.margin for a, b in zip(reports, reports[1:]))
        assert all(r.observed == reports[0].observed for r in reports)
