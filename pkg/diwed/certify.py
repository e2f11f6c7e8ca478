"""Certify entanglement and nonlocality depth from measured counts.

Statistics: each setting is an independent sample, correlators get the
binomial standard error ``sqrt((1 - E**2) / N)`` and the witness value is
lowered by ``sigmas`` propagated standard errors before it is compared with
the bounds. Comparisons are strict.
"""

import logging
import math
import numbers
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from diwed import config
from diwed.bounds import (
    algebraic_max,
    mabk_producible_bound,
    producible_ns_bound,
    producible_quantum_bound,
)
from diwed.correl import (
    BellFunctional,
    CorrelationTensor,
    SettingVector,
    evaluate,
    mabk_functional,
    sliwa_functional,
)
from diwed.errors import DiwedError, DimensionMismatchError, InvalidInputError
from diwed.quantum import QuantumStrategy, outcome_probabilities, quantum_max

logger = logging.getLogger(__name__)

WITNESSES = ("iota", "ns", "mabk")
EXCESS_TOL = 1e-6

Outcome = Tuple[int, ...]


def parse_outcome(text: str) -> Outcome:
    """``"+-+"`` (ASCII or U+2212 minus) -> ``(1, -1, 1)``."""
    out = []
    for ch in text:
        if ch == "+":
            out.append(1)
        elif ch in "-−":
            out.append(-1)
        else:
            raise InvalidInputError(f"outcome strings use '+' and '-', got {text!r}")
    if not out:
        raise InvalidInputError("empty outcome string")
    return tuple(out)


def format_outcome(outcome: Outcome) -> str:
    return "".join("+" if a == 1 else "-" for a in outcome)


def _outcome_tuple(key) -> Outcome:
    try:
        return tuple(int(a) for a in key)
    except (TypeError, ValueError):
        raise InvalidInputError(f"outcome keys are '+'/'-' strings or +-1 tuples, got {key!r}")


def _count(value, outcome: Outcome, setting: SettingVector) -> int:
    where = f"{format_outcome(outcome)} at setting {setting}"
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, str)):
        raise InvalidInputError(f"count for {where} is not an integer: {value!r}")
    try:
        number = float(value)
    except ValueError:
        raise InvalidInputError(f"count for {where} is not an integer: {value!r}")
    if not number.is_integer():
        raise InvalidInputError(f"count for {where} is not an integer: {value!r}")
    if number < 0:
        raise InvalidInputError(f"negative count for {where}")
    return int(number)


@dataclass(frozen=True)
class CountRecord:
    setting: SettingVector
    counts: Dict[Outcome, int]

    def __post_init__(self):
        if not isinstance(self.counts, dict):
            raise InvalidInputError(f"counts for setting {self.setting} must map outcomes to integers")
        counts = {}
        for key, value in self.counts.items():
            outcome = parse_outcome(key) if isinstance(key, str) else _outcome_tuple(key)
            if len(outcome) != self.setting.n:
                raise DimensionMismatchError(
                    f"outcome {format_outcome(outcome)} has {len(outcome)} parties, setting {self.setting} has {self.setting.n}"
                )
            if any(a not in (1, -1) for a in outcome):
                raise InvalidInputError(f"outcomes must be +-1, got {outcome}")
            count = _count(value, outcome, self.setting)
            counts[outcome] = counts.get(outcome, 0) + count
        if sum(counts.values()) < 1:
            raise InvalidInputError(f"no counts recorded for setting {self.setting}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {
            "setting": str(self.setting),
            "counts": {format_outcome(k): v for k, v in sorted(self.counts.items(), reverse=True)},
        }


@dataclass(frozen=True, eq=False)
class CorrelatorEstimate:
    tensor: CorrelationTensor
    stderr: np.ndarray
    shots: Optional[np.ndarray] = None

    def __post_init__(self):
        se = np.asarray(self.stderr, dtype=np.float64).reshape(-1)
        if se.shape != self.tensor.values.shape:
            raise DimensionMismatchError("one standard error per correlator is required")
        if not np.all(np.isfinite(se)) or np.any(se < 0):
            raise InvalidInputError("standard errors must be finite and non-negative")
        object.__setattr__(self, "stderr", se)

    @classmethod
    def exact(cls, tensor: CorrelationTensor) -> "CorrelatorEstimate":
        return cls(tensor, np.zeros_like(tensor.values))

    @property
    def n(self) -> int:
        return self.tensor.n


@dataclass(frozen=True)
class BoundCheck:
    k: int
    bound: float
    crossed: bool
    valid: bool = True


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of comparing one witness value with its per-depth bounds.

    Depth fields hold the certified lower bound ``d`` (depth >= d); the one not
    addressed by the witness is None.
    """

    functional: str
    witness: str
    n: int
    observed: float
    adjusted: float
    margin: float
    sigmas: float
    bounds: Tuple[BoundCheck, ...]
    entanglement_depth: Optional[int] = None
    nonlocality_depth: Optional[int] = None
    warnings: Tuple[str, ...] = field(default=())
    statistics: str = "gaussian"

    @property
    def depth(self) -> int:
        return self.entanglement_depth if self.nonlocality_depth is None else self.nonlocality_depth

    @property
    def certified(self) -> bool:
        return self.depth > 1

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bounds"] = [asdict(b) for b in self.bounds]
        out["warnings"] = list(self.warnings)
        return out


def estimate(records: Sequence[CountRecord]) -> CorrelatorEstimate:
    """Full correlators and standard errors from per-setting counts."""
    if not records:
        raise InvalidInputError("no count records")
    n = records[0].setting.n
    size = 1 << n
    values = np.zeros(size)
    stderr = np.zeros(size)
    shots = np.zeros(size, dtype=np.int64)
    seen = set()
    for record in records:
        if record.setting.n != n:
            raise DimensionMismatchError(f"setting {record.setting} does not have {n} parties")
        x = record.setting.index
        if x in seen:
            raise InvalidInputError(f"setting {record.setting} appears twice")
        seen.add(x)
        total = record.total
        signed = sum(count * math.prod(outcome) for outcome, count in record.counts.items())
        e = signed / total
        values[x] = e
        stderr[x] = math.sqrt(max(0.0, 1.0 - e * e) / total)
        shots[x] = total
    if len(seen) != size:
        missing = [str(SettingVector.from_index(i, n)) for i in range(size) if i not in seen]
        raise InvalidInputError(f"missing settings: {', '.join(missing)}")
    return CorrelatorEstimate(CorrelationTensor(n, values), stderr, shots)


def estimate_from_tensor(tensor: CorrelationTensor, shots: Optional[int] = None) -> CorrelatorEstimate:
    """Estimate for correlators given directly.

    Without ``shots`` the correlators are taken as exact. With ``shots`` each
    setting gets the binomial error of that many samples.
    """
    if shots is None:
        return CorrelatorEstimate.exact(tensor)
    if shots < 1:
        raise InvalidInputError("shots must be positive")
    stderr = np.sqrt(np.clip(1.0 - tensor.values**2, 0.0, None) / shots)
    return CorrelatorEstimate(tensor, stderr, np.full(tensor.values.shape, shots, dtype=np.int64))


def propagated_stderr(f: BellFunctional, est: CorrelatorEstimate) -> float:
    """``sqrt(sum beta(x)**2 stderr(x)**2)``, settings taken as independent."""
    if f.n != est.n:
        raise DimensionMismatchError(f"functional has {f.n} parties, estimate has {est.n}")
    return float(np.sqrt(np.sum(f.coeffs**2 * est.stderr**2)))


def _certify(
    functional: str,
    witness: str,
    n: int,
    observed: float,
    margin: float,
    sigmas: float,
    bounds: List[Tuple[int, float, bool]],
    ceiling: float,
    ceiling_label: str,
) -> CertificationReport:
    adjusted = observed - margin
    checks = tuple(BoundCheck(k, b, adjusted > b, valid) for k, b, valid in bounds)
    crossed = [c.k for c in checks if c.crossed]
    depth = 1 + max(crossed) if crossed else 1
    warnings = []
    if adjusted > ceiling + EXCESS_TOL:
        depth = n
        warnings.append(f"exceeds {ceiling_label} ({ceiling:.6f})")
        logger.warning("%s value %.6f exceeds %s %.6f", functional, adjusted, ceiling_label, ceiling)
    for c in checks:
        if not c.valid:
            warnings.append(f"k={c.k} bound {c.bound:.6f} exceeds 2^((k-1)/2); partition maximum used")
    depth = min(depth, n)
    kwargs = {"nonlocality_depth": depth} if witness == "ns" else {"entanglement_depth": depth}
    return CertificationReport(
        functional=functional,
        witness=witness,
        n=n,
        observed=float(observed),
        adjusted=float(adjusted),
        margin=float(margin),
        sigmas=float(sigmas),
        bounds=checks,
        warnings=tuple(warnings),
        **kwargs,
    )


def witness_functional(witness: str, n: int) -> BellFunctional:
    if witness in ("iota", "ns"):
        return sliwa_functional(n)
    if witness == "mabk":
        return mabk_functional(n)
    raise InvalidInputError(f"unknown witness {witness!r}; choose from {WITNESSES}")


def certify_value(
    n: int,
    observed: float,
    witness: str = "iota",
    margin: float = 0.0,
    sigmas: float = 0.0,
) -> CertificationReport:
    """Certify from an already computed witness value.

    Args:
        n: Party count.
        observed: Witness value.
        witness: ``iota`` (entanglement, I_n), ``ns`` (nonlocality, I_n) or
            ``mabk`` (entanglement, MABK).
        margin: Amount subtracted from ``observed`` before comparison.
        sigmas: Recorded in the report only.
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if margin < 0:
        raise InvalidInputError("margin must be non-negative")
    if witness == "mabk" and n < 2:
        raise InvalidInputError("MABK needs at least two parties")
    name = witness_functional(witness, n).name
    if witness == "iota":
        bounds = [(k, producible_quantum_bound(n, k).bound, True) for k in range(1, n + 1)]
        return _certify(name, witness, n, observed, margin, sigmas, bounds, quantum_max(n).value, "n-partite quantum bound")
    if witness == "ns":
        bounds = [(k, producible_ns_bound(k, n).bound, True) for k in range(1, n + 1)]
        return _certify(name, witness, n, observed, margin, sigmas, bounds, algebraic_max(n), "n-partite no-signaling bound")
    if witness == "mabk":
        checks = []
        for k in range(1, n + 1):
            wb = mabk_producible_bound(n, k)
            checks.append((k, wb.bound, wb.valid))
        return _certify(name, witness, n, observed, margin, sigmas, checks, 2.0 ** ((n - 1) / 2), "n-partite quantum bound")
    raise InvalidInputError(f"unknown witness {witness!r}; choose from {WITNESSES}")


def _certify_estimate(est: CorrelatorEstimate, sigmas: float, witness: str) -> CertificationReport:
    if sigmas < 0:
        raise InvalidInputError("sigmas must be non-negative")
    f = witness_functional(witness, est.n)
    observed = evaluate(f, est.tensor)
    margin = sigmas * propagated_stderr(f, est)
    return certify_value(est.n, observed, witness, margin, sigmas)


def certify_depth(est: CorrelatorEstimate, sigmas: float = config.DEFAULT_SIGMAS) -> CertificationReport:
    """Entanglement depth certified by ``I_n`` against the producible quantum bounds."""
    return _certify_estimate(est, sigmas, "iota")


def certify_nonlocality_depth(est: CorrelatorEstimate, sigmas: float = config.DEFAULT_SIGMAS) -> CertificationReport:
    """Nonlocality depth certified by ``I_n`` against ``3 - 2**(2-k)``."""
    return _certify_estimate(est, sigmas, "ns")


def certify_mabk_depth(est: CorrelatorEstimate, sigmas: float = config.DEFAULT_SIGMAS) -> CertificationReport:
    """Entanglement depth certified by MABK against the partition maxima."""
    return _certify_estimate(est, sigmas, "mabk")


def certify(est: CorrelatorEstimate, sigmas: float, witness: str) -> CertificationReport:
    return _certify_estimate(est, sigmas, witness)


def visibility_report(n: int, observed: float) -> float:
    """Smallest GHZ visibility consistent with ``observed`` under white noise.

    Accepts ``1 <= observed <= quantum_max(n)``.
    """
    top = quantum_max(n).value
    if not (1.0 <= observed <= top + config.VALIDITY_TOL):
        raise InvalidInputError(f"observed value must lie in [1, {top:.6f}] for n={n}, got {observed!r}")
    return min(1.0, observed / top)


def simulate_counts(strategy: QuantumStrategy, shots: int, seed: Optional[int] = None) -> List[CountRecord]:
    """Sample ``shots`` outcomes per setting from a strategy's Born-rule behavior."""
    if shots < 1:
        raise InvalidInputError("shots must be positive")
    seed = config.DEFAULT_SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    behavior = outcome_probabilities(strategy)
    n = strategy.n
    records = []
    for x in range(1 << n):
        p = behavior.probabilities[:, x]
        draws = rng.multinomial(shots, p / p.sum())
        counts = {}
        for a, c in enumerate(draws):
            if c:
                bits = SettingVector.from_index(a, n).bits
                counts[tuple(1 - 2 * b for b in bits)] = int(c)
        records.append(CountRecord(SettingVector.from_index(x, n), counts))
    return records


def records_from_tensor(tensor: CorrelationTensor, shots: int) -> List[CountRecord]:
    """Deterministic counts reproducing ``tensor`` up to rounding (two outcomes per setting)."""
    records = []
    n = tensor.n
    plus = (1,) * n
    minus = (-1,) + (1,) * (n - 1)
    for x in range(1 << n):
        up = int(round(shots * (1 + tensor.values[x]) / 2))
        records.append(CountRecord(SettingVector.from_index(x, n), {plus: up, minus: shots - up}))
    return records


def iter_records(raw: Iterable[dict]) -> List[CountRecord]:
    """Records from ``{"setting": "010", "counts": {"++-": 12}}`` dictionaries."""
    if not isinstance(raw, (list, tuple)):
        raise InvalidInputError(f"records must be a list, got {type(raw).__name__}")
    out = []
    for item in raw:
        try:
            setting = SettingVector.from_string(item["setting"])
            counts = item["counts"]
            out.append(CountRecord(setting, counts))
        except DiwedError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError):
            raise InvalidInputError(f"malformed record {item!r}")
    return out
