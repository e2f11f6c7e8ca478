"""Correlation data model and Bell functionals.

Layout conventions shared by the whole package:

* A setting vector ``(x_1, ..., x_n)`` is stored as the integer whose binary
  digits are ``x_1 ... x_n`` with party 1 the most significant bit.
* Outcomes are ``+1`` / ``-1``. In bitstrings and integer indices an outcome
  bit ``0`` means ``+1`` and ``1`` means ``-1``, with the same party order.
* A :class:`CorrelationTensor` holds the ``2**n`` full correlators as a flat
  array indexed by setting integer; a :class:`Behavior` holds ``P(a|x)`` as a
  ``(2**n, 2**n)`` array indexed ``[outcome, setting]``.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from diwed.config import VALIDITY_TOL
from diwed.errors import DimensionMismatchError, InvalidInputError

logger = logging.getLogger(__name__)

SettingKey = Union["SettingVector", str, int]


def parity_signs(n: int) -> np.ndarray:
    """``prod_i a_i`` for every outcome index (bit 0 -> +1)."""
    idx = np.arange(1 << n)
    pop = np.array([bin(i).count("1") for i in idx], dtype=np.int64)
    return 1 - 2 * (pop & 1)


def index_to_bits(index: int, n: int) -> Tuple[int, ...]:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def bits_to_index(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


@dataclass(frozen=True)
class SettingVector:
    """Measurement choices ``(x_1, ..., x_n)`` of all parties."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 1:
            raise InvalidInputError("a setting vector needs at least one party")
        if any(b not in (0, 1) for b in bits):
            raise InvalidInputError(f"setting entries must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        return bits_to_index(self.bits)

    @classmethod
    def from_string(cls, text: str) -> "SettingVector":
        if not text or any(ch not in "01" for ch in text):
            raise InvalidInputError(f"setting bitstring must be over {{0,1}}, got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_index(cls, index: int, n: int) -> "SettingVector":
        if not 0 <= index < (1 << n):
            raise InvalidInputError(f"setting index {index} out of range for n={n}")
        return cls(index_to_bits(index, n))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def _resolve_setting(key: SettingKey, n: int) -> int:
    if isinstance(key, SettingVector):
        if key.n != n:
            raise DimensionMismatchError(f"setting has {key.n} parties, expected {n}")
        return key.index
    if isinstance(key, str):
        return _resolve_setting(SettingVector.from_string(key), n)
    return SettingVector.from_index(int(key), n).index


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.float64)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    """The ``2**n`` full correlators ``E(x)`` of an experiment.

    Values at most ``VALIDITY_TOL`` outside ``[-1, 1]`` are clamped (with a
    warning); anything further out is rejected.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("party count must be at least 1")
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.shape != (1 << self.n,):
            raise DimensionMismatchError(
                f"expected {1 << self.n} correlators for n={self.n}, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("correlators must be finite")
        excess = np.abs(values) - 1.0
        if np.any(excess > VALIDITY_TOL):
            worst = int(np.argmax(excess))
            raise InvalidInputError(
                f"correlator E({SettingVector.from_index(worst, self.n)}) = {values[worst]!r} outside [-1, 1]"
            )
        if np.any(excess > 0):
            logger.warning(
                "clamping %d correlator(s) exceeding [-1, 1] by at most %.2e",
                int(np.sum(excess > 0)),
                float(excess.max()),
            )
            values = np.clip(values, -1.0, 1.0)
        object.__setattr__(self, "values", _frozen(values))

    def __getitem__(self, key: SettingKey) -> float:
        return float(self.values[_resolve_setting(key, self.n)])

    def as_dict(self) -> Dict[str, float]:
        return {
            str(SettingVector.from_index(i, self.n)): float(v)
            for i, v in enumerate(self.values)
        }

    @classmethod
    def from_dict(cls, n: int, correlators: Dict[str, float]) -> "CorrelationTensor":
        if len(correlators) != 1 << n:
            raise DimensionMismatchError(
                f"expected {1 << n} correlator entries for n={n}, got {len(correlators)}"
            )
        values = np.zeros(1 << n)
        seen = set()
        for key, value in correlators.items():
            if len(key) != n:
                raise DimensionMismatchError(f"bitstring {key!r} does not have length {n}")
            i = SettingVector.from_string(key).index
            if i in seen:
                raise InvalidInputError(f"duplicate setting {key!r}")
            seen.add(i)
            values[i] = float(value)
        return cls(n, values)

    @classmethod
    def constant(cls, n: int, value: float = 1.0) -> "CorrelationTensor":
        return cls(n, np.full(1 << n, float(value)))

    def mix(self, other: "CorrelationTensor", weight: float) -> "CorrelationTensor":
        """``weight * self + (1 - weight) * other``."""
        _check_same_n(self.n, other.n)
        if not 0.0 <= weight <= 1.0:
            raise InvalidInputError("mixing weight must lie in [0, 1]")
        return CorrelationTensor(self.n, weight * self.values + (1 - weight) * other.values)

    def allclose(self, other: "CorrelationTensor", atol: float = 1e-10) -> bool:
        return self.n == other.n and bool(np.allclose(self.values, other.values, atol=atol, rtol=0))


@dataclass(frozen=True, eq=False)
class Behavior:
    """Joint conditional distribution ``P(a|x)``, stored ``[outcome, setting]``."""

    n: int
    probabilities: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("party count must be at least 1")
        size = 1 << self.n
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.shape != (size, size):
            raise DimensionMismatchError(f"behavior for n={self.n} must be {size}x{size}, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvalidInputError("probabilities must be finite")
        if np.any(p < -VALIDITY_TOL):
            raise InvalidInputError(f"negative probability {p.min()!r}")
        sums = p.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > VALIDITY_TOL)
        if bad.size:
            x = SettingVector.from_index(int(bad[0]), self.n)
            raise InvalidInputError(f"behavior not normalized at setting {x}: sum = {sums[bad[0]]!r}")
        object.__setattr__(self, "probabilities", _frozen(np.clip(p, 0.0, None)))

    def probability(self, outcome: Union[str, Sequence[int]], setting: SettingKey) -> float:
        """``P(a|x)`` with ``outcome`` as a 0/1 bitstring or a sequence of +-1."""
        if isinstance(outcome, str):
            a = SettingVector.from_string(outcome).index
        else:
            a = bits_to_index([0 if v == 1 else 1 for v in outcome])
        return float(self.probabilities[a, _resolve_setting(setting, self.n)])

    def as_dict(self) -> Dict[str, float]:
        out = {}
        for a in range(1 << self.n):
            for x in range(1 << self.n):
                key = f"{SettingVector.from_index(a, self.n)}|{SettingVector.from_index(x, self.n)}"
                out[key] = float(self.probabilities[a, x])
        return out

    @classmethod
    def from_dict(cls, n: int, probabilities: Dict[str, float]) -> "Behavior":
        size = 1 << n
        p = np.zeros((size, size))
        for key, value in probabilities.items():
            try:
                outcome, setting = key.split("|")
            except ValueError:
                raise InvalidInputError(f"behavior key {key!r} is not '<outcome>|<setting>'")
            if len(outcome) != n or len(setting) != n:
                raise DimensionMismatchError(f"behavior key {key!r} does not match n={n}")
            p[SettingVector.from_string(outcome).index, SettingVector.from_string(setting).index] = float(value)
        return cls(n, p)

    @classmethod
    def uniform(cls, n: int) -> "Behavior":
        size = 1 << n
        return cls(n, np.full((size, size), 1.0 / size))

    def mix(self, other: "Behavior", weight: float) -> "Behavior":
        _check_same_n(self.n, other.n)
        if not 0.0 <= weight <= 1.0:
            raise InvalidInputError("mixing weight must lie in [0, 1]")
        return Behavior(self.n, weight * self.probabilities + (1 - weight) * other.probabilities)


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Linear form ``sum_x beta(x) E(x)`` over full correlators."""

    n: int
    coeffs: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("party count must be at least 1")
        c = np.asarray(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape != (1 << self.n,):
            raise DimensionMismatchError(f"expected {1 << self.n} coefficients, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(c))

    def __getitem__(self, key: SettingKey) -> float:
        return float(self.coeffs[_resolve_setting(key, self.n)])

    def as_dict(self) -> Dict[str, float]:
        return {
            str(SettingVector.from_index(i, self.n)): float(v)
            for i, v in enumerate(self.coeffs)
        }

    def same_coefficients(self, other: "BellFunctional", atol: float = 0.0) -> bool:
        return self.n == other.n and bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))


@dataclass(frozen=True)
class ProjectionPoint:
    """``zeta = E(1...1)`` and ``mu`` = mean of all full correlators."""

    zeta: float
    mu: float

    def __post_init__(self):
        for name in ("zeta", "mu"):
            v = getattr(self, name)
            if abs(v) > 1.0 + VALIDITY_TOL:
                raise InvalidInputError(f"{name} = {v!r} outside [-1, 1]")

    @property
    def iota_value(self) -> float:
        return 2.0 * self.mu - self.zeta


@dataclass(frozen=True)
class NoSignalingResult:
    ok: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _check_same_n(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatchError(f"party counts differ: {a} vs {b}")


def _require_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError(f"party count must be a positive integer, got {n!r}")


def sliwa_functional(n: int) -> BellFunctional:
    """The ``I_n`` functional: ``2**(1-n)`` everywhere, minus 1 at ``x = 1...1``.

    Its local bound is 1.
    """
    _require_n(n)
    coeffs = np.full(1 << n, 2.0 ** (1 - n))
    coeffs[-1] -= 1.0
    return BellFunctional(n, coeffs, name=f"I_{n}")


def gamma_functional(n: int, gamma: float) -> BellFunctional:
    """One-parameter family ``gamma / 2**n``, minus 1 at ``x = 1...1``.

    ``gamma = 2`` gives :func:`sliwa_functional`.
    """
    _require_n(n)
    if not (0.0 < gamma <= 2.0):
        raise InvalidInputError(f"gamma must lie in (0, 2], got {gamma!r}")
    coeffs = np.full(1 << n, gamma / 2.0**n)
    coeffs[-1] -= 1.0
    return BellFunctional(n, coeffs, name=f"I_{n}^gamma={gamma:g}")


def mabk_functional(n: int) -> BellFunctional:
    """MABK written over full correlators.

    ``beta(x) = 2**((1-n)/2) * cos(pi/4 * (1 - n + 2 * sum(x)))``, evaluated
    exactly: every coefficient is 0 or a signed power of two.
    """
    _require_n(n)
    if n < 2:
        raise InvalidInputError("MABK needs at least two parties")
    weights = np.array([bin(i).count("1") for i in range(1 << n)], dtype=np.int64)
    phase = (1 - n + 2 * weights) % 8
    coeffs = np.zeros(1 << n)
    even = phase % 2 == 0
    # even phase only occurs for odd n: cos is 1, 0, -1 or 0
    coeffs[even] = np.array([1.0, 0.0, -1.0, 0.0])[phase[even] // 2] * 2.0 ** ((1 - n) // 2)
    # odd phase: cos = +-1/sqrt(2), folded into 2**(-n/2)
    coeffs[~even] = np.array([1.0, -1.0, -1.0, 1.0])[phase[~even] // 2] * 2.0 ** (-(n // 2))
    return BellFunctional(n, coeffs, name=f"MABK_{n}")


def functional_from_coefficients(coeffs: Dict[str, float], name: str = "custom") -> BellFunctional:
    """Build a functional from a ``{bitstring: beta}`` map covering every setting."""
    if not coeffs:
        raise InvalidInputError("empty coefficient map")
    n = len(next(iter(coeffs)))
    tensor = np.zeros(1 << n)
    if len(coeffs) != 1 << n:
        raise DimensionMismatchError(f"expected {1 << n} coefficients for n={n}, got {len(coeffs)}")
    for key, value in coeffs.items():
        if len(key) != n:
            raise DimensionMismatchError(f"bitstring {key!r} does not have length {n}")
        tensor[SettingVector.from_string(key).index] = float(value)
    return BellFunctional(n, tensor, name=name)


def evaluate(f: BellFunctional, t: CorrelationTensor) -> float:
    """``sum_x beta(x) E(x)``."""
    _check_same_n(f.n, t.n)
    return float(np.dot(f.coeffs, t.values))


def correlators_from_behavior(b: Behavior) -> CorrelationTensor:
    """``E(x) = sum_a prod_i a_i P(a|x)``."""
    values = parity_signs(b.n) @ b.probabilities
    return CorrelationTensor(b.n, values)


def behavior_from_correlators(t: CorrelationTensor) -> Behavior:
    """The no-signaling behavior ``P(a|x) = 2**-n (1 + prod_i a_i E(x))``.

    All marginals are uniform, so it reproduces ``t`` and nothing else.
    """
    size = 1 << t.n
    p = (1.0 + np.outer(parity_signs(t.n), t.values)) / size
    return Behavior(t.n, p)


def check_no_signaling(b: Behavior, tol: float = VALIDITY_TOL) -> NoSignalingResult:
    """Check that every party subset's marginal ignores the others' settings.

    Returns:
        ``NoSignalingResult`` whose ``violations`` lists one readable identity per
        (subset, foreign party) pair that fails, e.g. ``"P(a_{1}|x) depends on x_2"``.
    """
    n = b.n
    # axes 0..n-1 outcomes, n..2n-1 settings
    p = b.probabilities.reshape((2,) * (2 * n))
    violations = []
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            others = tuple(j for j in range(n) if j not in subset)
            marginal = p.sum(axis=others)
            # marginal axes: subset outcomes then all n settings
            for j in others:
                axis = size + j
                d = np.take(marginal, 0, axis=axis) - np.take(marginal, 1, axis=axis)
                if np.max(np.abs(d)) > tol:
                    parties = ",".join(str(i + 1) for i in subset)
                    violations.append(f"P(a_{{{parties}}}|x) depends on x_{j + 1}")
    return NoSignalingResult(ok=not violations, violations=violations)


def zeta_mu(t: CorrelationTensor) -> ProjectionPoint:
    """Project onto ``(E(1...1), mean E)``; ``I_n`` evaluates to ``2 mu - zeta``."""
    return ProjectionPoint(zeta=float(t.values[-1]), mu=float(t.values.mean()))


FUNCTIONALS = ("iota", "gamma", "mabk")


def named_functional(name: str, n: int, gamma: float = 2.0) -> BellFunctional:
    """``iota`` -> I_n, ``gamma`` -> the gamma family, ``mabk`` -> MABK."""
    if name == "iota":
        return sliwa_functional(n)
    if name == "gamma":
        return gamma_functional(n, gamma)
    if name == "mabk":
        return mabk_functional(n)
    raise InvalidInputError(f"unknown functional {name!r}; choose from {FUNCTIONALS}")
