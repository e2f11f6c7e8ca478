"""Producibility bounds for the I_n, gamma and MABK witnesses.

Every family reports a :class:`WitnessBound` on one depth scale: ``k = 1``
always means local (bounds come from :mod:`diwed.localset`), ``k >= 2`` means
states (or boxes) built from groups of at most ``k`` parties.
"""

import logging
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from diwed import config
from diwed.correl import Behavior, gamma_functional, parity_signs, sliwa_functional
from diwed.errors import InvalidInputError
from diwed.localset import local_bound
from diwed.quantum import gamma_ansatz_max, quantum_max, seesaw

logger = logging.getLogger(__name__)

FAMILIES = ("iota", "gamma", "mabk", "ns")


@dataclass(frozen=True)
class Partition:
    """Group sizes ``(n_1, ..., n_m)``, non-increasing."""

    parts: Tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts or any(p < 1 for p in parts):
            raise InvalidInputError(f"partition parts must be positive, got {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise InvalidInputError(f"partition parts must be non-increasing, got {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, sizes: Sequence[int]) -> "Partition":
        return cls(tuple(sorted(sizes, reverse=True)))

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def m(self) -> int:
        return len(self.parts)

    @property
    def singletons(self) -> int:
        """``L``: number of unentangled parties."""
        return sum(1 for p in self.parts if p == 1)

    @property
    def largest(self) -> int:
        return self.parts[0]

    def __str__(self) -> str:
        return "{" + ",".join(str(p) for p in self.parts) + "}"


@dataclass(frozen=True)
class WitnessBound:
    family: str
    n: int
    k: int
    bound: float
    valid: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _check_nk(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got n={n}, k={k}")


# === PARTITIONS ===


def _partitions(remaining: int, largest: int) -> Iterator[Tuple[int, ...]]:
    if remaining == 0:
        yield ()
        return
    for first in range(min(largest, remaining), 0, -1):
        for rest in _partitions(remaining - first, first):
            yield (first,) + rest


def partitions_up_to(n: int, k: int, exact_max: bool = False) -> Iterator[Partition]:
    """Partitions of ``n`` with largest part ``<= k`` (``== k`` with ``exact_max``).

    Yielded in reverse lexicographic order, e.g. ``{3,2}`` before ``{3,1,1}``.
    """
    _check_nk(n, k)
    for parts in _partitions(n, k):
        if exact_max and parts[0] != k:
            continue
        yield Partition(parts)


# === I_n AND NON-SIGNALING ===


def producible_quantum_bound(n: int, k: int) -> WitnessBound:
    """Largest ``I_n`` value of ``k``-producible states: the ``k``-party quantum maximum."""
    _check_nk(n, k)
    if k == 1:
        value = local_bound(sliwa_functional(1)).value
        return WitnessBound("iota", n, k, value, True, "local bound")
    return WitnessBound("iota", n, k, quantum_max(k).value, True, "ansatz optimum")


def producible_ns_bound(k: int, n: Optional[int] = None) -> WitnessBound:
    """``3 - 2**(2-k)``: largest ``I_n`` value of ``k``-producible no-signaling boxes."""
    n = k if n is None else n
    _check_nk(n, k)
    return WitnessBound("ns", n, k, 3.0 - 2.0 ** (2 - k), True, "algebraic maximum of I_k")


def algebraic_max(n: int) -> float:
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    return 3.0 - 2.0 ** (2 - n)


def algebraic_max_witness(n: int) -> Behavior:
    """No-signaling box ``2**-n (1 + prod a_i g(x))`` with ``g = +1`` except ``g(1...1) = -1``."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    g = np.ones(1 << n)
    g[-1] = -1.0
    p = (1.0 + np.outer(parity_signs(n), g)) / (1 << n)
    return Behavior(n, p)


def ns_boundary(n: int, zeta: float) -> float:
    """Upper boundary ``1 + 2**-n (zeta - 1)`` of the no-signaling projection."""
    if abs(zeta) > 1.0 + config.VALIDITY_TOL:
        raise InvalidInputError(f"zeta must lie in [-1, 1], got {zeta!r}")
    return 1.0 + (zeta - 1.0) / 2.0**n


def visibility_threshold(n: int, k: int) -> float:
    """Critical white-noise visibility of GHZ_n for the depth-``k`` witness."""
    if not 1 <= k < n <= 8:
        raise InvalidInputError(f"need 1 <= k < n <= 8, got n={n}, k={k}")
    return producible_quantum_bound(n, k).bound / quantum_max(n).value


def product_boundary(grid: np.ndarray, curves: Sequence[np.ndarray]) -> np.ndarray:
    """Upper boundary of the projection for a product of independent groups.

    ``best(z) = max prod_i u_i(zeta_i)`` over factorisations ``z = prod_i zeta_i``.
    Each ``u_i`` is given by its values on ``grid`` and read piecewise linearly in
    between; intermediate products are restricted to grid points, so every value
    returned is attained by an exact factorisation.

    Args:
        grid: Increasing points covering ``[-1, 1]``, containing 0 and 1.
        curves: One array of boundary values per group, aligned with ``grid``.

    Returns:
        Boundary values on ``grid``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if not curves:
        raise InvalidInputError("need at least one group")
    best = np.asarray(curves[0], dtype=np.float64)
    nonzero = grid != 0
    zero = ~nonzero
    for curve in curves[1:]:
        u = np.asarray(curve, dtype=np.float64)
        top = float(np.interp(1.0, grid, u))
        nxt = np.empty_like(best)
        for i, z in enumerate(grid):
            if z == 0.0:
                # either the product so far is 0, or the new group sits at 0
                options = [best[zero].max() * top] if zero.any() else []
                options.append(best[nonzero].max() * float(np.interp(0.0, grid, u)))
                nxt[i] = max(options)
                continue
            mask = nonzero & (np.abs(grid) >= abs(z))
            ratios = z / grid[mask]
            nxt[i] = float(np.max(best[mask] * np.interp(ratios, grid, u)))
        best = nxt
    return best


# === MABK ===


def mabk_partition_exponent(p: Partition) -> int:
    """``e`` with ``mabk_partition_bound(p) == 2**(e/2)``."""
    if p.n < 2:
        raise InvalidInputError("MABK bounds need n >= 2")
    if p.largest == 1:
        # fully product: local
        return 0
    if p.m == 1:
        return p.n - 1
    return p.n + p.singletons - 2 * p.m + 1


def mabk_partition_bound(p: Partition) -> float:
    """``2**((n + L - 2m + 1)/2)``; ``{n}`` gives ``2**((n-1)/2)``, all singletons give 1."""
    return 2.0 ** (mabk_partition_exponent(p) / 2)


def mabk_producible_bound(n: int, k: int) -> WitnessBound:
    """Best MABK value over partitions with groups of at most ``k`` parties.

    ``valid`` is False when that exceeds the textbook ``2**((k-1)/2)`` bound.
    """
    _check_nk(n, k)
    if n < 2:
        raise InvalidInputError("MABK bounds need n >= 2")
    best = max(partitions_up_to(n, k), key=mabk_partition_exponent)
    e = mabk_partition_exponent(best)
    valid = e == k - 1
    note = f"attained by {best}"
    if not valid:
        note += f"; exceeds 2^((k-1)/2) = {2.0 ** ((k - 1) / 2):.4f}"
    return WitnessBound("mabk", n, k, 2.0 ** (e / 2), valid, note)


def mabk_depth_table(n: int) -> List[Tuple[int, Partition, int]]:
    """Per depth ``k``: the first partition with largest part ``k`` maximising MABK.

    Returns ``(k, partition, exponent)`` rows, ``k`` descending.
    """
    rows = []
    for k in range(n, 0, -1):
        # max() keeps the first maximal element, i.e. canonical order breaks ties
        best = max(partitions_up_to(n, k, exact_max=True), key=mabk_partition_exponent)
        rows.append((k, best, mabk_partition_exponent(best)))
    return rows


# === GAMMA FAMILY ===


@lru_cache(maxsize=None)
def gamma_producible_bound(
    n: int,
    k: int,
    gamma: float,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
) -> WitnessBound:
    """Best see-saw value of the ``k``-party gamma functional.

    The note records the see-saw provenance and the ansatz value it is checked
    against; no closed form is known for ``gamma < 2``.
    """
    _check_nk(n, k)
    if not (0.0 < gamma <= 2.0):
        raise InvalidInputError(f"gamma must lie in (0, 2], got {gamma!r}")
    if k == 1:
        value = local_bound(gamma_functional(1, gamma)).value
        return WitnessBound("gamma", n, k, value, True, "local bound")
    result = seesaw(gamma_functional(k, gamma), restarts=restarts, seed=seed)
    ansatz = gamma_ansatz_max(k, gamma)
    if ansatz.value > result.value + 1e-6:
        logger.warning(
            "see-saw %.8f below ansatz %.8f for k=%d, gamma=%g",
            result.value,
            ansatz.value,
            k,
            gamma,
        )
    note = (
        f"see-saw: restarts={result.restarts}, seed={result.seed}; "
        f"ansatz value {ansatz.value:.10f} at phi={ansatz.phi:.10f}"
    )
    return WitnessBound("gamma", n, k, result.value, True, note)


def witness_bound(family: str, n: int, k: int, gamma: float = 2.0) -> WitnessBound:
    """Dispatch on ``family``."""
    if family == "iota":
        return producible_quantum_bound(n, k)
    if family == "ns":
        return producible_ns_bound(k, n)
    if family == "mabk":
        return mabk_producible_bound(n, k)
    if family == "gamma":
        return gamma_producible_bound(n, k, gamma)
    raise InvalidInputError(f"unknown family {family!r}; choose from {FAMILIES}")


def bound_table(family: str, n: int) -> List[WitnessBound]:
    """Bounds for ``k = 1 .. n``."""
    return [witness_bound(family, n, k) for k in range(1, n + 1)]


def sqrt2_power_label(exponent: int) -> str:
    """``2**(e/2)`` written as in the literature: 2, 2sqrt2, 4, ..."""
    whole, half = divmod(exponent, 2)
    base = "" if whole == 0 and half else str(2**whole)
    if half:
        return f"{base}sqrt2" if base else "sqrt2"
    return base
