"""
Tests for producibility bounds across the I_n, no-signaling, MABK and gamma
families.
"""

import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from diwed.bounds import (
    Partition,
    algebraic_max,
    algebraic_max_witness,
    bound_table,
    gamma_producible_bound,
    mabk_depth_table,
    mabk_partition_bound,
    mabk_partition_exponent,
    mabk_producible_bound,
    ns_boundary,
    partitions_up_to,
    producible_ns_bound,
    producible_quantum_bound,
    product_boundary,
    sqrt2_power_label,
    visibility_threshold,
    witness_bound,
)
from diwed.correl import check_no_signaling, correlators_from_behavior, evaluate, sliwa_functional, zeta_mu
from diwed.errors import InvalidInputError
from diwed.quantum import quantum_max, u2_boundary

TABLE_IV = [
    (3, 3, (3,), 2),
    (4, 4, (4,), 3),
    (4, 3, (3, 1), 2),
    (5, 5, (5,), 4),
    (5, 4, (4, 1), 3),
    (5, 3, (3, 2), 2),
    (6, 6, (6,), 5),
    (6, 5, (5, 1), 4),
    (6, 4, (4, 2), 3),
    (6, 3, (3, 3), 3),
    (7, 7, (7,), 6),
    (7, 6, (6, 1), 5),
    (7, 5, (5, 2), 4),
    (7, 4, (4, 3), 4),
    (7, 3, (3, 3, 1), 3),
]


def _random_boundary_curves(rng, grid, m):
    """Concave non-decreasing piecewise-linear curves into [0, 1] with u(1) = 1."""
    curves = []
    for _ in range(m):
        slopes = np.sort(rng.uniform(0, 1, size=grid.size - 1))[::-1]
        steps = slopes * np.diff(grid)
        steps *= rng.uniform(0, 1) / steps.sum()
        u = np.concatenate([[0.0], np.cumsum(steps)])
        curves.append(u - u[-1] + 1.0)
    return curves


class TestPartitions:
    """Partition type and enumeration."""

    def test_enumeration_order(self):
        """Test reverse lexicographic order with a size cap."""
        parts = [p.parts for p in partitions_up_to(5, 3)]
        assert parts == [(3, 2), (3, 1, 1), (2, 2, 1), (2, 1, 1, 1), (1, 1, 1, 1, 1)]

    def test_exact_max(self):
        """Test filtering on the largest part."""
        assert [p.parts for p in partitions_up_to(5, 3, exact_max=True)] == [(3, 2), (3, 1, 1)]

    def test_partition_validation(self):
        """Test that parts must be positive and non-increasing."""
        with pytest.raises(InvalidInputError):
            Partition((1, 2))
        with pytest.raises(InvalidInputError):
            Partition((2, 0))
        assert Partition.of([1, 3, 2]).parts == (3, 2, 1)

    def test_partition_properties(self):
        """Test n, m and the singleton count."""
        p = Partition((3, 1, 1))
        assert (p.n, p.m, p.singletons, p.largest) == (5, 3, 2, 3)
        assert str(p) == "{3,1,1}"

    def test_k_range(self):
        """Test that k must lie in 1..n."""
        with pytest.raises(InvalidInputError):
            list(partitions_up_to(3, 4))


class TestSliwaBounds:
    """Quantum and no-signaling producibility bounds of I_n."""

    def test_local_rung(self):
        """Test that k = 1 is the local bound."""
        assert producible_quantum_bound(5, 1).bound == 1.0

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_bound_is_k_party_maximum(self, k):
        """Test that the k-producible bound equals Q_k regardless of n."""
        assert producible_quantum_bound(6, k).bound == quantum_max(k).value

    def test_ladder_is_increasing(self):
        """Test that bounds grow with k."""
        values = [b.bound for b in bound_table("iota", 6)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("k,expected", [(1, 1.0), (2, 2.0), (3, 2.5), (4, 2.75)])
    def test_ns_bound(self, k, expected):
        """Test 3 - 2^(2-k)."""
        assert producible_ns_bound(k, 6).bound == expected

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_algebraic_max_is_attained(self, n):
        """Test that the extremal box is no-signaling and reaches 3 - 2^(2-n)."""
        box = algebraic_max_witness(n)
        assert check_no_signaling(box)
        t = correlators_from_behavior(box)
        assert evaluate(sliwa_functional(n), t) == pytest.approx(algebraic_max(n))
        point = zeta_mu(t)
        assert point.mu == pytest.approx(ns_boundary(n, point.zeta))

    def test_visibility_threshold(self):
        """Test Q_k / Q_n."""
        assert visibility_threshold(5, 3) == pytest.approx(quantum_max(3).value / quantum_max(5).value)
        with pytest.raises(InvalidInputError):
            visibility_threshold(3, 3)

    def test_ns_boundary_range(self):
        """Test that zeta outside [-1, 1] raises."""
        with pytest.raises(InvalidInputError):
            ns_boundary(3, 1.5)


class TestProductBoundary:
    """Boundary of products of independent groups."""

    def test_single_group_is_identity(self):
        """Test that one curve is returned unchanged."""
        grid = np.linspace(-1, 1, 21)
        curve = np.array([u2_boundary(z) for z in grid])
        assert np.allclose(product_boundary(grid, [curve]), curve)

    def test_product_with_single_party(self):
        """Test that adding a party never lowers the boundary and keeps u(1) = 1."""
        grid = np.linspace(-1, 1, 41)
        curve = np.array([u2_boundary(z) for z in grid])
        single = (1 + grid) / 2
        out = product_boundary(grid, [curve, single])
        assert out[-1] == pytest.approx(1.0)
        assert np.all(out >= curve - 1e-12)

    def test_needs_a_group(self):
        """Test that an empty product raises."""
        with pytest.raises(InvalidInputError):
            product_boundary(np.linspace(-1, 1, 3), [])

    def test_negative_side_is_best_single_group(self):
        """Test that for zeta <= 0 the product boundary is the best single group's curve."""
        rng = np.random.default_rng(43)
        grid = np.linspace(-1, 1, 201)
        for _ in range(100):
            curves = _random_boundary_curves(rng, grid, int(rng.integers(2, 5)))
            out = product_boundary(grid, curves)
            expected = np.max(curves, axis=0)
            neg = grid <= 0
            assert np.allclose(out[neg], expected[neg], atol=1e-12, rtol=0)

    def test_grid_factorisations_never_beat_best_group(self):
        """Test every grid factorisation of a negative zeta against max_i u_i(zeta)."""
        rng = np.random.default_rng(47)
        grid = np.linspace(-1, 1, 201)
        sub = np.linspace(-1, 1, 41)
        for _ in range(100):
            m = int(rng.integers(2, 5))
            curves = _random_boundary_curves(rng, grid, m)
            heads = np.array(list(itertools.product(sub, repeat=m - 1)))
            prods = heads.prod(axis=1)
            head_values = np.prod([np.interp(heads[:, i], grid, curves[i]) for i in range(m - 1)], axis=0)
            for z in np.linspace(-1, -0.1, 10):
                ok = np.abs(prods) >= abs(z) - 1e-15
                last = np.clip(z / prods[ok], -1.0, 1.0)
                brute = float(np.max(head_values[ok] * np.interp(last, grid, curves[-1])))
                best_single = max(float(np.interp(z, grid, u)) for u in curves)
                assert brute <= best_single + 1e-12
                assert brute == pytest.approx(best_single, abs=1e-12)


class TestMabkBounds:
    """Partition bounds of the MABK functional."""

    @pytest.mark.parametrize("n,k,parts,exponent", TABLE_IV)
    def test_depth_table(self, n, k, parts, exponent):
        """Test the best partition and exponent per depth."""
        rows = {row_k: (p, e) for row_k, p, e in mabk_depth_table(n)}
        partition, e = rows[k]
        assert partition.parts == parts
        assert e == exponent

    def test_single_group(self):
        """Test 2^((n-1)/2) for one group."""
        assert mabk_partition_bound(Partition((4,))) == pytest.approx(2**1.5)

    def test_all_singletons_are_local(self):
        """Test that a fully product partition gives 1."""
        assert mabk_partition_exponent(Partition((1, 1, 1))) == 0

    @pytest.mark.parametrize("n,k", [(6, 3), (7, 4)])
    def test_invalid_domains_flagged(self, n, k):
        """Test bounds exceeding 2^((k-1)/2)."""
        wb = mabk_producible_bound(n, k)
        assert not wb.valid
        assert wb.bound > 2 ** ((k - 1) / 2)

    def test_n_equals_six_k_three_is_two_sqrt_two(self):
        """Test that {3,3} gives 2sqrt2 rather than 2."""
        assert mabk_producible_bound(6, 3).bound == pytest.approx(2 * np.sqrt(2))

    @pytest.mark.parametrize("n", range(3, 9))
    def test_one_below_full(self, n):
        """Test that k = n - 1 gives 2^((n-2)/2) and is valid."""
        wb = mabk_producible_bound(n, n - 1)
        assert wb.bound == pytest.approx(2 ** ((n - 2) / 2))
        assert wb.valid

    @pytest.mark.parametrize("e,label", [(0, "1"), (1, "sqrt2"), (2, "2"), (3, "2sqrt2"), (4, "4"), (5, "4sqrt2")])
    def test_labels(self, e, label):
        """Test powers of sqrt(2) written as in the literature."""
        assert sqrt2_power_label(e) == label


class TestDispatch:
    """witness_bound and the gamma family."""

    def test_dispatch(self):
        """Test family dispatch and its error."""
        assert witness_bound("ns", 4, 4).bound == 2.75
        assert witness_bound("mabk", 4, 4).bound == pytest.approx(2**1.5)
        with pytest.raises(InvalidInputError):
            witness_bound("chsh", 2, 2)

    def test_gamma_local_rung(self):
        """Test that k = 1 uses the local bound of the gamma functional."""
        assert gamma_producible_bound(3, 1, 1.0).bound == pytest.approx(1.0)

    def test_gamma_two_parties(self):
        """Test that gamma = 2 recovers sqrt(2) by see-saw and records provenance."""
        wb = gamma_producible_bound(3, 2, 2.0, restarts=5, seed=1)
        assert wb.bound == pytest.approx(np.sqrt(2), abs=1e-6)
        assert "seed=1" in wb.note

    def test_gamma_range(self):
        """Test that gamma must lie in (0, 2]."""
        with pytest.raises(InvalidInputError):
            gamma_producible_bound(3, 2, 3.0)


class TestMaximizerLocation:
    """Where linear tilts of concave and bounded curves peak."""

    def test_slow_rise_peaks_on_the_left(self):
        """Test that 2g(y) - y peaks in [-1, 0] when g rises by less than 1/2 there."""
        rng = np.random.default_rng(53)
        grid = np.linspace(-1, 1, 201)
        for _ in range(100):
            slopes = np.sort(rng.uniform(-2, 2, size=200))[::-1]
            rise = slopes[:100].sum() * (grid[1] - grid[0])
            if rise >= 0.5:
                slopes = slopes - (rise - 0.5 * rng.uniform())
            g = np.concatenate([[0.0], np.cumsum(slopes * (grid[1] - grid[0]))])
            g = g - g.min()
            if g.max() > 1:
                g = g / g.max()
            assert g[100] - g[0] < 0.5
            assert grid[int(np.argmax(2 * g - grid))] <= 1e-12

    def test_steeper_tilt_moves_maximizer_left(self):
        """Test h_s'(y_s) > h_s'(y) for every y right of the maximizer y_s of h_s, s' > s > 0."""
        rng = np.random.default_rng(59)
        grid = np.linspace(-1, 1, 201)
        for _ in range(100):
            g = rng.uniform(-1, 1, size=grid.size)
            s = float(rng.uniform(0.01, 3.0))
            s_prime = s + float(rng.uniform(0.01, 3.0))
            i = int(np.argmax(g - s * grid))
            h_prime = g - s_prime * grid
            assert np.all(h_prime[i] - h_prime[i + 1 :] > 0)
