"""
Tests for the correlation data model and the Bell functionals.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from diwed.correl import (
    BellFunctional,
    Behavior,
    CorrelationTensor,
    ProjectionPoint,
    SettingVector,
    behavior_from_correlators,
    check_no_signaling,
    correlators_from_behavior,
    evaluate,
    functional_from_coefficients,
    gamma_functional,
    mabk_functional,
    named_functional,
    sliwa_functional,
    zeta_mu,
)
from diwed.errors import DimensionMismatchError, InvalidInputError


class TestSettingVector:
    """Bitstring and index conversions."""

    def test_party_one_is_most_significant(self):
        """Test that x_1 is the leading bit of the index."""
        assert SettingVector.from_string("100").index == 4
        assert str(SettingVector.from_index(1, 3)) == "001"

    def test_rejects_non_binary(self):
        """Test that entries other than 0/1 raise."""
        with pytest.raises(InvalidInputError):
            SettingVector((0, 2))
        with pytest.raises(InvalidInputError):
            SettingVector.from_string("01a")


class TestFunctionals:
    """Coefficients of I_n, the gamma family and MABK."""

    def test_chsh_coefficients(self):
        """Test that I_2 is CHSH over full correlators."""
        assert sliwa_functional(2).coeffs.tolist() == [0.5, 0.5, 0.5, -0.5]

    def test_single_party(self):
        """Test that I_1 has coefficients (1, 0)."""
        assert sliwa_functional(1).coeffs.tolist() == [1.0, 0.0]

    def test_three_party_corner(self):
        """Test beta(111) = 1/4 - 1."""
        f = sliwa_functional(3)
        assert f["111"] == -0.75
        assert all(f[x] == 0.25 for x in range(7))

    def test_zero_parties_rejected(self):
        """Test that n = 0 raises."""
        with pytest.raises(InvalidInputError):
            sliwa_functional(0)

    def test_gamma_two_is_sliwa(self):
        """Test that gamma = 2 reproduces I_n."""
        for n in (2, 3, 5):
            assert gamma_functional(n, 2.0).same_coefficients(sliwa_functional(n))

    def test_gamma_one(self):
        """Test the n = 2, gamma = 1 coefficients."""
        assert gamma_functional(2, 1.0).coeffs.tolist() == [0.25, 0.25, 0.25, -0.75]

    @pytest.mark.parametrize("gamma", [0.0, -1.0, 2.5])
    def test_gamma_out_of_range(self, gamma):
        """Test that gamma outside (0, 2] raises."""
        with pytest.raises(InvalidInputError):
            gamma_functional(3, gamma)

    def test_mabk_two_parties(self):
        """Test that MABK_2 equals CHSH / 2."""
        assert mabk_functional(2).coeffs.tolist() == [0.5, 0.5, 0.5, -0.5]

    def test_mabk_three_parties(self):
        """Test that MABK_3 vanishes at even weight and is +-1/2 at odd weight."""
        f = mabk_functional(3)
        assert f["000"] == 0.0
        assert f["011"] == 0.0
        assert f["001"] == 0.5
        assert f["111"] == -0.5

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
    def test_mabk_matches_cosine_formula(self, n):
        """Test the exact coefficients against 2^((1-n)/2) cos(pi/4 (1-n+2w))."""
        f = mabk_functional(n)
        for x in range(1 << n):
            w = bin(x).count("1")
            expected = 2 ** ((1 - n) / 2) * math.cos(math.pi / 4 * (1 - n + 2 * w))
            assert f.coeffs[x] == pytest.approx(expected, abs=1e-12)

    def test_mabk_needs_two_parties(self):
        """Test that MABK_1 raises."""
        with pytest.raises(InvalidInputError):
            mabk_functional(1)

    def test_named_functional(self):
        """Test name dispatch and its error."""
        assert named_functional("mabk", 3).name == "MABK_3"
        assert named_functional("gamma", 2, 1.0).same_coefficients(gamma_functional(2, 1.0))
        with pytest.raises(InvalidInputError):
            named_functional("chsh", 2)

    def test_from_coefficients(self):
        """Test building a functional from a bitstring map."""
        f = functional_from_coefficients({"00": 1, "01": 0, "10": 0, "11": -1})
        assert f.n == 2 and f["11"] == -1.0
        with pytest.raises(DimensionMismatchError):
            functional_from_coefficients({"00": 1, "01": 0})


class TestEvaluation:
    """Evaluation and conversions between behaviors and correlators."""

    def test_constant_tensor_gives_local_bound(self):
        """Test that E = 1 everywhere gives I_n = 2 - 1 = 1."""
        for n in (2, 4, 6):
            assert evaluate(sliwa_functional(n), CorrelationTensor.constant(n)) == pytest.approx(1.0)

    def test_tensor_validation(self):
        """Test range and length checks of correlation tensors."""
        with pytest.raises(InvalidInputError):
            CorrelationTensor(2, [1.5, 0, 0, 0])
        with pytest.raises(DimensionMismatchError):
            CorrelationTensor(2, [0, 0, 0])

    def test_tiny_excess_is_clamped(self):
        """Test that values within tolerance of +-1 are clamped."""
        t = CorrelationTensor(1, [1.0 + 1e-12, -1.0])
        assert t.values[0] == 1.0

    def test_length_mismatch_raises(self):
        """Test that n must agree between functional and tensor."""
        with pytest.raises(DimensionMismatchError):
            evaluate(sliwa_functional(2), CorrelationTensor.constant(3))

    def test_evaluate_commutes_with_mixing(self):
        """Test that the value of a mixture is the mixture of the values."""
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            f = BellFunctional(n, rng.normal(size=1 << n))
            a = CorrelationTensor(n, rng.uniform(-1, 1, size=1 << n))
            b = CorrelationTensor(n, rng.uniform(-1, 1, size=1 << n))
            w = float(rng.uniform())
            mixed = evaluate(f, a.mix(b, w))
            assert mixed == pytest.approx(w * evaluate(f, a) + (1 - w) * evaluate(f, b), abs=1e-12)

    def test_evaluate_is_linear_in_the_functional(self):
        """Test that scaling and adding coefficients scales and adds values."""
        rng = np.random.default_rng(29)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            c1, c2 = rng.normal(size=(2, 1 << n))
            s = float(rng.normal())
            t = CorrelationTensor(n, rng.uniform(-1, 1, size=1 << n))
            combined = evaluate(BellFunctional(n, s * c1 + c2), t)
            parts = s * evaluate(BellFunctional(n, c1), t) + evaluate(BellFunctional(n, c2), t)
            assert combined == pytest.approx(parts, abs=1e-12)

    def test_mix_weight_range(self):
        """Test that mixing weights outside [0, 1] raise."""
        t = CorrelationTensor.constant(2, 0.0)
        with pytest.raises(InvalidInputError):
            t.mix(t, 1.5)

    def test_behavior_round_trip(self):
        """Test that correlators survive the NS behavior construction."""
        rng = np.random.default_rng(7)
        t = CorrelationTensor(3, rng.uniform(-1, 1, size=8))
        assert correlators_from_behavior(behavior_from_correlators(t)).allclose(t)

    def test_behavior_normalization_enforced(self):
        """Test that unnormalised behaviors raise."""
        with pytest.raises(InvalidInputError):
            Behavior(1, np.array([[0.5, 0.5], [0.6, 0.5]]))

    def test_behavior_dict_keys(self):
        """Test the outcome|setting key layout."""
        b = Behavior.uniform(1)
        assert b.as_dict() == {"0|0": 0.5, "0|1": 0.5, "1|0": 0.5, "1|1": 0.5}
        assert Behavior.from_dict(1, b.as_dict()).probability("1", "0") == 0.5


class TestNoSignaling:
    """Marginal independence checks."""

    def test_uniform_is_no_signaling(self):
        """Test that the uniform behavior passes."""
        assert check_no_signaling(Behavior.uniform(3))

    def test_signaling_box_detected(self):
        """Test a box where party 1's output copies party 2's setting."""
        p = np.zeros((4, 4))
        for x in range(4):
            x2 = x & 1
            a1 = x2
            p[(a1 << 1) | 0, x] = 1.0
        result = check_no_signaling(Behavior(2, p))
        assert not result.ok
        assert "P(a_{1}|x) depends on x_2" in result.violations


class TestProjection:
    """The (zeta, mu) projection."""

    def test_iota_is_linear_in_projection(self):
        """Test I_n = 2 mu - zeta on random tensors."""
        rng = np.random.default_rng(11)
        for n in (2, 3, 4):
            t = CorrelationTensor(n, rng.uniform(-1, 1, size=1 << n))
            point = zeta_mu(t)
            assert point.iota_value == pytest.approx(evaluate(sliwa_functional(n), t))

    def test_point_range(self):
        """Test that projection points outside [-1, 1] raise."""
        with pytest.raises(InvalidInputError):
            ProjectionPoint(zeta=1.2, mu=0.0)
