"""Classical (local) analysis of full-correlation Bell functionals.

Deterministic strategies are indexed by base-4 digits, party 1 most
significant; digit ``c`` picks ``(a(0), a(1))`` from :data:`CHOICES`. Local
bounds and saturation tests run on integers after scaling dyadic coefficients
by a power of two, so they are exact.
"""

import itertools
import logging
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterator, Optional, Tuple

import numpy as np

from diwed.config import (
    MAX_ENUM_PARTIES,
    MAX_FACET_CORR_PARTIES,
    MAX_FACET_LOCAL_PARTIES,
    MAX_TRANSFORM_PARTIES,
    VALIDITY_TOL,
)
from diwed.correl import BellFunctional, Behavior, CorrelationTensor, evaluate
from diwed.errors import InvalidInputError, SaturationError
from diwed.utils.exact import fwht, integer_rank

logger = logging.getLogger(__name__)

CHOICES = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=np.int64)

# (1, a(0), a(1)) per choice: coordinates of a deterministic local box in the
# space of all-subset correlators
LOCAL_COORDS = np.array([(1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)], dtype=np.int64)

MAX_SCALE_EXPONENT = 40


@dataclass(frozen=True)
class DeterministicStrategy:
    """Per-party outputs ``(a_i(0), a_i(1))``."""

    assignments: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.assignments)
        if not pairs:
            raise InvalidInputError("a strategy needs at least one party")
        if any(v not in (1, -1) for pair in pairs for v in pair):
            raise InvalidInputError(f"outputs must be +1 or -1, got {pairs}")
        object.__setattr__(self, "assignments", pairs)

    @property
    def n(self) -> int:
        return len(self.assignments)

    @property
    def digits(self) -> Tuple[int, ...]:
        return tuple(int(np.flatnonzero((CHOICES == pair).all(axis=1))[0]) for pair in self.assignments)

    @property
    def index(self) -> int:
        out = 0
        for d in self.digits:
            out = out * 4 + d
        return out

    @classmethod
    def from_index(cls, index: int, n: int) -> "DeterministicStrategy":
        if not 0 <= index < 4**n:
            raise InvalidInputError(f"strategy index {index} out of range for n={n}")
        digits = [(index // 4 ** (n - 1 - i)) % 4 for i in range(n)]
        return cls(tuple(tuple(int(v) for v in CHOICES[d]) for d in digits))

    def tensor(self) -> CorrelationTensor:
        """``E(x) = prod_i a_i(x_i)``."""
        return CorrelationTensor(self.n, correlation_vectors(np.array([self.digits]))[0])

    def behavior(self) -> Behavior:
        size = 1 << self.n
        p = np.zeros((size, size))
        for x in range(size):
            outcome = 0
            for i, pair in enumerate(self.assignments):
                bit = (x >> (self.n - 1 - i)) & 1
                outcome = (outcome << 1) | (0 if pair[bit] == 1 else 1)
            p[outcome, x] = 1.0
        return Behavior(self.n, p)


@dataclass(frozen=True)
class LocalBound:
    value: float
    exact: Optional[Fraction]
    strategy: DeterministicStrategy

    @property
    def strategy_index(self) -> int:
        return self.strategy.index


@dataclass(frozen=True)
class WernerWolfResult:
    ok: bool
    table: np.ndarray

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class FacetReport:
    saturating_count: int
    affine_rank: int
    required_rank: int
    is_facet: bool
    space: str = "corr"
    n: int = 0
    saturating_strategies: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def enumerate_deterministic(n: int, start: int = 0, stop: Optional[int] = None) -> Iterator[DeterministicStrategy]:
    """Yield deterministic strategies in index order.

    ``start``/``stop`` select a contiguous index range so callers can split the
    ``4**n`` strategies into chunks.
    """
    if n < 1:
        raise InvalidInputError("party count must be at least 1")
    if n > MAX_ENUM_PARTIES:
        raise InvalidInputError(f"enumeration limited to n <= {MAX_ENUM_PARTIES}, got {n}")
    total = 4**n
    stop = total if stop is None else min(stop, total)
    for idx in range(start, stop):
        yield DeterministicStrategy.from_index(idx, n)


def strategy_digits(n: int) -> np.ndarray:
    """All ``4**n`` strategies as rows of base-4 digits."""
    return np.array(list(itertools.product(range(4), repeat=n)), dtype=np.int64).reshape(-1, n)


def correlation_vectors(digits: np.ndarray) -> np.ndarray:
    """Full-correlator vectors (length ``2**n``) for rows of strategy digits."""
    digits = np.asarray(digits, dtype=np.int64)
    rows = CHOICES[digits[:, 0]]
    for i in range(1, digits.shape[1]):
        rows = (rows[:, :, None] * CHOICES[digits[:, i]][:, None, :]).reshape(rows.shape[0], -1)
    return rows


def behavior_vectors(digits: np.ndarray) -> np.ndarray:
    """All-subset correlator vectors (length ``3**n``) for rows of strategy digits.

    Entry 0 is the constant 1, so the rows are already homogenised.
    """
    digits = np.asarray(digits, dtype=np.int64)
    rows = LOCAL_COORDS[digits[:, 0]]
    for i in range(1, digits.shape[1]):
        rows = (rows[:, :, None] * LOCAL_COORDS[digits[:, i]][:, None, :]).reshape(rows.shape[0], -1)
    return rows


def dyadic_scale(coeffs: np.ndarray) -> Optional[int]:
    """Smallest ``s`` with ``coeffs * 2**s`` integral, or None."""
    for s in range(MAX_SCALE_EXPONENT + 1):
        scaled = coeffs * float(2**s)
        if np.all(scaled == np.round(scaled)):
            return s
    return None


def _strategy_values(f: BellFunctional) -> Tuple[np.ndarray, Optional[int]]:
    """Value of ``f`` on every deterministic strategy, in strategy-index order.

    Integer-valued (scaled by ``2**s``) when the coefficients are dyadic.
    """
    s = dyadic_scale(f.coeffs)
    if s is None:
        logger.info("%s has non-dyadic coefficients, local values in floating point", f.name)
        t = f.coeffs.copy()
        choices = CHOICES.astype(np.float64)
    else:
        t = np.round(f.coeffs * float(2**s)).astype(np.int64)
        choices = CHOICES
    t = t.reshape((2,) * f.n)
    for _ in range(f.n):
        # contract the leading party axis; the new choice axis goes last
        t = np.tensordot(t, choices, axes=([0], [1]))
    return t.reshape(-1), s


def local_bound(f: BellFunctional) -> LocalBound:
    """Exact maximum of ``f`` over deterministic strategies.

    Ties go to the lowest strategy index.
    """
    if f.n > MAX_ENUM_PARTIES:
        raise InvalidInputError(f"local bound limited to n <= {MAX_ENUM_PARTIES}, got {f.n}")
    values, s = _strategy_values(f)
    best = int(np.argmax(values))
    strategy = DeterministicStrategy.from_index(best, f.n)
    if s is None:
        return LocalBound(value=float(values[best]), exact=None, strategy=strategy)
    exact = Fraction(int(values[best]), 2**s)
    logger.debug("local bound of %s = %s (strategy %d)", f.name, exact, best)
    return LocalBound(value=float(exact), exact=exact, strategy=strategy)


def werner_wolf_check(f: BellFunctional) -> WernerWolfResult:
    """Sign transform ``f(r) = sum_x beta(x) (-1)**(r.x)`` and the +-1 test."""
    if f.n > MAX_TRANSFORM_PARTIES:
        raise InvalidInputError(f"sign transform limited to n <= {MAX_TRANSFORM_PARTIES}, got {f.n}")
    table = fwht(f.coeffs)
    ok = bool(np.all(np.abs(np.abs(table) - 1.0) <= VALIDITY_TOL))
    return WernerWolfResult(ok=ok, table=table)


def sliwa_sign_table(n: int) -> np.ndarray:
    """Closed form of the ``I_n`` transform: ``-(-1)**|r| + 2 delta_{r,0}``."""
    pop = np.array([bin(r).count("1") for r in range(1 << n)])
    table = -((-1.0) ** pop)
    table[0] += 2.0
    return table


def werner_wolf_functional(signs: np.ndarray, name: str = "werner-wolf") -> BellFunctional:
    """Functional whose sign transform is ``signs`` (a +-1 array of length ``2**n``)."""
    signs = np.asarray(signs, dtype=np.float64)
    size = signs.shape[0]
    n = size.bit_length() - 1
    if size != 1 << n or n < 1:
        raise InvalidInputError("sign table length must be a power of two >= 2")
    if not np.all(np.abs(signs) == 1.0):
        raise InvalidInputError("sign table entries must be +1 or -1")
    return BellFunctional(n, fwht(signs) / size, name=name)


def _saturating_digits(f: BellFunctional, bound: float) -> np.ndarray:
    values, s = _strategy_values(f)
    if s is None:
        hits = np.flatnonzero(np.abs(values - bound) <= VALIDITY_TOL)
    else:
        scaled = bound * 2**s
        if scaled != round(scaled):
            hits = np.array([], dtype=np.int64)
        else:
            hits = np.flatnonzero(values == int(round(scaled)))
    if hits.size == 0:
        raise SaturationError(f"no deterministic strategy attains {bound!r} for {f.name}")
    if s is not None and np.any(values > int(round(bound * 2**s))):
        logger.warning("bound %r is below the local bound of %s", bound, f.name)
    digits = np.array([[(h // 4 ** (f.n - 1 - i)) % 4 for i in range(f.n)] for h in hits], dtype=np.int64)
    return digits


def facet_check_full_correlation(f: BellFunctional, bound: float) -> FacetReport:
    """Is ``f <= bound`` a facet of the local full-correlation polytope?"""
    if f.n > MAX_FACET_CORR_PARTIES:
        raise InvalidInputError(f"full-correlation facet check limited to n <= {MAX_FACET_CORR_PARTIES}")
    digits = _saturating_digits(f, bound)
    vertices = np.unique(correlation_vectors(digits), axis=0)
    homogenised = np.hstack([np.ones((vertices.shape[0], 1), dtype=np.int64), vertices])
    required = (1 << f.n) - 1
    rank = integer_rank(homogenised, upper=required + 1)
    return FacetReport(
        saturating_count=int(vertices.shape[0]),
        affine_rank=rank - 1,
        required_rank=required,
        is_facet=rank - 1 == required,
        space="corr",
        n=f.n,
        saturating_strategies=int(digits.shape[0]),
    )


def facet_check_local_polytope(f: BellFunctional, bound: float) -> FacetReport:
    """Is ``f <= bound`` a facet of the full local polytope (behavior space)?

    Deterministic behaviors are embedded through their all-subset correlators,
    an affine bijection of the no-signaling subspace of dimension ``3**n - 1``.
    """
    if f.n > MAX_FACET_LOCAL_PARTIES:
        raise InvalidInputError(f"behavior-space facet check limited to n <= {MAX_FACET_LOCAL_PARTIES}")
    if f.n == MAX_FACET_LOCAL_PARTIES:
        logger.warning("behavior-space facet check at n=%d is slow", f.n)
    digits = _saturating_digits(f, bound)
    vertices = behavior_vectors(digits)
    required = 3**f.n - 2
    rank = integer_rank(vertices, upper=required + 1)
    return FacetReport(
        saturating_count=int(vertices.shape[0]),
        affine_rank=rank - 1,
        required_rank=required,
        is_facet=rank - 1 == required,
        space="local",
        n=f.n,
        saturating_strategies=int(digits.shape[0]),
    )


def strategy_value(f: BellFunctional, strategy: DeterministicStrategy) -> float:
    return evaluate(f, strategy.tensor())
