"""n-qubit simulation: states, +-1 observables, correlators and the see-saw.

States are dense vectors with party 1 on the most significant qubit, matching
the setting and outcome layout of :mod:`diwed.correl`. Tensor contractions go
through ``numpy.einsum`` in sublist form; index blocks are

* ``[0, n)``   bra qubits
* ``[n, 2n)``  ket qubits
* ``[2n, 3n)`` setting bits
* ``[3n, 4n)`` outcome bits
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from diwed import config
from diwed.correl import BellFunctional, Behavior, CorrelationTensor, evaluate, zeta_mu
from diwed.errors import DegenerateOptimizationError, DimensionMismatchError, InvalidInputError

logger = logging.getLogger(__name__)

IDENTITY = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])

SCAN_POINTS = 4001
SOS_DEGENERATE_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= config.MAX_STATE_QUBITS:
            raise InvalidInputError(f"qubit count must lie in [1, {config.MAX_STATE_QUBITS}], got {self.n}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (1 << self.n,):
            raise DimensionMismatchError(f"expected {1 << self.n} amplitudes, got {amps.shape[0]}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > config.NORM_TOL:
            raise InvalidInputError(f"state norm {norm!r} differs from 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n = amps.shape[0].bit_length() - 1
        if amps.shape[0] != 1 << n:
            raise InvalidInputError("amplitude count must be a power of two")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidInputError("zero vector is not a state")
        return cls(n, amps / norm)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)

    def kron(self, other: "StateVector") -> "StateVector":
        return StateVector(self.n + other.n, np.kron(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class QubitObservable:
    """``identity * 1 + bloch . sigma`` with spectrum in {+1, -1}.

    Either ``bloch`` is a unit vector and ``identity`` is 0, or ``bloch`` is zero
    and ``identity`` is +1 or -1 (a trivial observable, used only where
    explicitly allowed).
    """

    bloch: np.ndarray
    identity: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.bloch, dtype=np.float64).reshape(-1)
        if b.shape != (3,):
            raise InvalidInputError("Bloch vector must have three components")
        norm = float(np.linalg.norm(b))
        if self.identity == 0.0:
            if abs(norm - 1.0) > config.NORM_TOL:
                raise InvalidInputError(f"Bloch vector norm {norm!r} differs from 1")
        elif abs(self.identity) != 1.0 or norm != 0.0:
            raise InvalidInputError("a trivial observable is +-identity with zero Bloch vector")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bloch", b)
        object.__setattr__(self, "identity", float(self.identity))

    @classmethod
    def xy(cls, angle: float) -> "QubitObservable":
        return cls(np.array([math.cos(angle), math.sin(angle), 0.0]))

    @classmethod
    def trivial(cls, sign: float = 1.0) -> "QubitObservable":
        return cls(np.zeros(3), identity=1.0 if sign >= 0 else -1.0)

    @property
    def is_trivial(self) -> bool:
        return self.identity != 0.0

    def matrix(self) -> np.ndarray:
        return self.identity * IDENTITY + np.tensordot(self.bloch, PAULIS, axes=1)


SIGMA_Z = QubitObservable(np.array([0.0, 0.0, 1.0]))

ObservablePair = Tuple[QubitObservable, QubitObservable]


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    state: StateVector
    observables: Tuple[ObservablePair, ...]

    def __post_init__(self):
        pairs = tuple(tuple(pair) for pair in self.observables)
        if len(pairs) != self.state.n:
            raise DimensionMismatchError(f"{len(pairs)} observable pairs for a {self.state.n}-qubit state")
        if any(len(pair) != 2 for pair in pairs):
            raise InvalidInputError("each party needs exactly two observables")
        object.__setattr__(self, "observables", pairs)

    @property
    def n(self) -> int:
        return self.state.n


@dataclass(frozen=True)
class AnsatzParameters:
    n: int
    phi: float
    alpha: float


class AnsatzOptimum(NamedTuple):
    phi: float
    value: float


@dataclass(frozen=True, eq=False)
class SeesawResult:
    """Best see-saw strategy plus the provenance needed to reproduce it.

    Unpacks as ``strategy, value``.
    """

    strategy: QuantumStrategy
    value: float
    history: Tuple[float, ...]
    seed: int
    restarts: int
    restart_values: Tuple[float, ...]
    histories: Tuple[Tuple[float, ...], ...] = field(default=())
    degenerate_restarts: int = 0

    def __iter__(self) -> Iterator:
        return iter((self.strategy, self.value))


# === STATES ===


def _check_qubits(n: int) -> None:
    if not 1 <= n <= config.MAX_STATE_QUBITS:
        raise InvalidInputError(f"n must lie in [1, {config.MAX_STATE_QUBITS}], got {n}")


def ghz(n: int) -> StateVector:
    _check_qubits(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return StateVector(n, amps)


def w_state(n: int) -> StateVector:
    _check_qubits(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[[1 << (n - 1 - i) for i in range(n)]] = 1 / math.sqrt(n)
    return StateVector(n, amps)


def product_zero(n: int) -> StateVector:
    _check_qubits(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def _cz_phases(n: int, edges: Sequence[Tuple[int, int]]) -> np.ndarray:
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    exponent = np.zeros(1 << n, dtype=np.int64)
    for i, j in edges:
        exponent += bits[:, i] & bits[:, j]
    return 1 - 2 * (exponent & 1)


def cluster_linear(n: int) -> StateVector:
    """CZ on every neighbouring pair of ``|+>^n``."""
    _check_qubits(n)
    edges = [(i, i + 1) for i in range(n - 1)]
    return StateVector(n, _cz_phases(n, edges) / math.sqrt(1 << n))


def cluster_ring(n: int) -> StateVector:
    """Linear cluster closed by ``CZ(n, 1)``; the closing gate is skipped for n <= 2."""
    _check_qubits(n)
    edges = [(i, i + 1) for i in range(n - 1)]
    if n > 2:
        edges.append((n - 1, 0))
    return StateVector(n, _cz_phases(n, edges) / math.sqrt(1 << n))


STATE_BUILDERS: dict = {
    "ghz": ghz,
    "w": w_state,
    "cluster-linear": cluster_linear,
    "cluster-ring": cluster_ring,
}


def named_state(name: str, n: int) -> StateVector:
    try:
        builder = STATE_BUILDERS[name]
    except KeyError:
        raise InvalidInputError(f"unknown state {name!r}; choose from {sorted(STATE_BUILDERS)}")
    return builder(n)


# === CONTRACTIONS ===


def _stack(pair: Sequence[QubitObservable]) -> np.ndarray:
    """``[setting, bra, ket]`` array of a party's two observables."""
    return np.stack([pair[0].matrix(), pair[1].matrix()])


def _operands(psi: np.ndarray, stacks: Sequence[np.ndarray], skip: Optional[int] = None) -> list:
    n = len(stacks)
    ops = [np.conj(psi), list(range(n)), psi, list(range(n, 2 * n))]
    for i, stack in enumerate(stacks):
        if i != skip:
            ops += [stack, [2 * n + i, i, n + i]]
    return ops


def _expectation_array(psi: np.ndarray, stacks: Sequence[np.ndarray]) -> np.ndarray:
    n = len(stacks)
    out = np.einsum(*_operands(psi, stacks), list(range(2 * n, 3 * n)), optimize="greedy")
    return out.reshape(-1)


def expectation(s: QuantumStrategy) -> CorrelationTensor:
    """``E(x) = <psi| A_{x_1} (x) ... (x) A_{x_n} |psi>``."""
    stacks = [_stack(pair) for pair in s.observables]
    values = _expectation_array(s.state.tensor(), stacks)
    if np.max(np.abs(values.imag)) > 1e-10:
        logger.warning("correlators carry imaginary residue %.2e", float(np.max(np.abs(values.imag))))
    return CorrelationTensor(s.n, values.real)


def bell_operator(f: BellFunctional, observables: Sequence[ObservablePair]) -> np.ndarray:
    """``sum_x beta(x) A_{x_1} (x) ... (x) A_{x_n}`` as a ``2**n`` square matrix."""
    n = f.n
    if len(observables) != n:
        raise DimensionMismatchError(f"{len(observables)} observable pairs for n={n}")
    ops = [f.coeffs.reshape((2,) * n), list(range(2 * n, 3 * n))]
    for i, pair in enumerate(observables):
        ops += [_stack(pair), [2 * n + i, i, n + i]]
    out = np.einsum(*ops, list(range(2 * n)), optimize="greedy")
    return out.reshape(1 << n, 1 << n)


def _effective_operator(f: BellFunctional, psi: np.ndarray, stacks: Sequence[np.ndarray], party: int) -> np.ndarray:
    """``N[s, bra, ket]``: the Bell value is ``sum_s sum(A_s * N[s])`` for ``party``."""
    n = f.n
    ops = _operands(psi, stacks, skip=party)
    ops += [f.coeffs.reshape((2,) * n), list(range(2 * n, 3 * n))]
    return np.einsum(*ops, [2 * n + party, party, n + party], optimize="greedy")


def outcome_probabilities(s: QuantumStrategy) -> Behavior:
    """Born-rule behavior ``P(a|x)`` of a strategy."""
    n = s.n
    psi = s.state.tensor()
    ops = [np.conj(psi), list(range(n)), psi, list(range(n, 2 * n))]
    for i, pair in enumerate(s.observables):
        stack = _stack(pair)
        # [setting, outcome, bra, ket]; outcome 0 projects on +1
        proj = np.stack([(IDENTITY + stack) / 2, (IDENTITY - stack) / 2], axis=1)
        ops += [proj, [2 * n + i, 3 * n + i, i, n + i]]
    out = np.einsum(*ops, list(range(3 * n, 4 * n)) + list(range(2 * n, 3 * n)), optimize="greedy")
    p = out.real.reshape(1 << n, 1 << n)
    return Behavior(n, np.clip(p, 0.0, None) / p.sum(axis=0, keepdims=True))


def noisy_state_expectation(s: QuantumStrategy, visibility: float) -> CorrelationTensor:
    """Correlators of ``v |psi><psi| + (1 - v) 1/2**n`` with the same observables."""
    if not 0.0 <= visibility <= 1.0:
        raise InvalidInputError("visibility must lie in [0, 1]")
    pure = expectation(s).values
    noise = np.ones(1)
    for pair in s.observables:
        noise = np.kron(noise, np.array([pair[0].identity, pair[1].identity]))
    return CorrelationTensor(s.n, visibility * pure + (1 - visibility) * noise)


def pad_strategy(s: QuantumStrategy, n: int) -> QuantumStrategy:
    """Append parties in ``|0>`` that measure ``sigma_z`` for both settings."""
    if n < s.n:
        raise InvalidInputError(f"cannot pad a {s.n}-party strategy down to {n}")
    if n == s.n:
        return s
    state = s.state.kron(product_zero(n - s.n))
    return QuantumStrategy(state, s.observables + ((SIGMA_Z, SIGMA_Z),) * (n - s.n))


# === ANSATZ ===


def _xy_ghz_strategy(n: int, angle0: float, angle1: float) -> QuantumStrategy:
    pair = (QubitObservable.xy(angle0), QubitObservable.xy(angle1))
    return QuantumStrategy(ghz(n), (pair,) * n)


def ansatz_parameters(n: int, phi: float) -> AnsatzParameters:
    return AnsatzParameters(n=n, phi=phi, alpha=-(n - 1) * phi / (2 * n))


def _check_phi(phi: float, upper: float) -> None:
    if not (0.0 <= phi <= upper + 1e-12):
        raise InvalidInputError(f"phi must lie in [0, {upper:.6f}], got {phi!r}")


def ansatz_strategy(n: int, phi: float) -> QuantumStrategy:
    """GHZ with XY-plane observables at ``alpha`` and ``phi + alpha``.

    On this strategy ``zeta = cos((n+1) phi / 2)`` and ``mu = cos(phi/2)**(n+1)``.
    """
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    _check_phi(phi, math.pi / 2)
    params = ansatz_parameters(n, phi)
    return _xy_ghz_strategy(n, params.alpha, params.phi + params.alpha)


def ansatz_value(n: int, phi: float) -> float:
    """``2 cos(phi/2)**(n+1) - cos((n+1) phi / 2)``."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    _check_phi(phi, math.pi / 2)
    return 2 * math.cos(phi / 2) ** (n + 1) - math.cos((n + 1) * phi / 2)


def ansatz_projection(n: int, phi: float) -> Tuple[float, float]:
    """``(zeta, mu)`` along the ansatz curve."""
    return math.cos((n + 1) * phi / 2), math.cos(phi / 2) ** (n + 1)


def _scan_maximum(
    value: Callable[[float], float],
    slope: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
) -> AnsatzOptimum:
    """Maximise a smooth 1-D function: grid for slope sign changes, then brentq."""
    grid = np.linspace(lo, hi, SCAN_POINTS)
    d = slope(grid)
    candidates = [lo, hi]
    for i in np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0)):
        if d[i + 1] == 0:
            candidates.append(float(grid[i + 1]))
            continue
        candidates.append(brentq(lambda t: float(slope(np.array([t]))[0]), grid[i], grid[i + 1], xtol=1e-15))
    best = max(candidates, key=lambda t: (value(t), -t))
    return AnsatzOptimum(phi=float(best), value=float(value(best)))


@lru_cache(maxsize=None)
def quantum_max(n: int) -> AnsatzOptimum:
    """Maximum of :func:`ansatz_value` over ``phi`` in ``[0, pi/2]``."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if n == 1:
        return AnsatzOptimum(phi=0.0, value=1.0)

    def slope(t: np.ndarray) -> np.ndarray:
        return -(n + 1) * np.cos(t / 2) ** n * np.sin(t / 2) + (n + 1) / 2 * np.sin((n + 1) * t / 2)

    # slope vanishes at 0, start just past it
    return _scan_maximum(lambda t: ansatz_value(n, t), slope, 1e-9, math.pi / 2)


def gamma_ansatz_value(n: int, phi: float, gamma: float) -> float:
    """``gamma cos(phi/2)**(n+1) - cos((n+1) phi / 2)`` for ``phi`` in ``[0, pi]``."""
    _check_phi(phi, math.pi)
    return gamma * math.cos(phi / 2) ** (n + 1) - math.cos((n + 1) * phi / 2)


def gamma_ansatz_strategy(n: int, phi: float) -> QuantumStrategy:
    _check_phi(phi, math.pi)
    params = ansatz_parameters(n, phi)
    return _xy_ghz_strategy(n, params.alpha, params.phi + params.alpha)


def gamma_ansatz_max(n: int, gamma: float) -> AnsatzOptimum:
    """Best value of the gamma-family along the ansatz curve."""
    if not (0.0 < gamma <= 2.0):
        raise InvalidInputError(f"gamma must lie in (0, 2], got {gamma!r}")
    if n < 1:
        raise InvalidInputError("n must be at least 1")

    def slope(t: np.ndarray) -> np.ndarray:
        return -gamma * (n + 1) / 2 * np.cos(t / 2) ** n * np.sin(t / 2) + (n + 1) / 2 * np.sin((n + 1) * t / 2)

    return _scan_maximum(lambda t: gamma_ansatz_value(n, t, gamma), slope, 0.0, math.pi)


# === SEE-SAW ===


def random_observable(rng: np.random.Generator) -> QubitObservable:
    """Uniform on the Bloch sphere."""
    while True:
        v = rng.normal(size=3)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return QubitObservable(v / norm)


def _top_eigenvector(op: np.ndarray) -> np.ndarray:
    _, vecs = np.linalg.eigh(op)
    return vecs[:, -1]


def _best_observable(
    n_s: np.ndarray, previous: QubitObservable, allow_trivial: bool
) -> Tuple[QubitObservable, bool]:
    g = np.real(np.einsum("kop,op->k", PAULIS, n_s))
    g0 = float(np.real(np.trace(n_s)))
    norm = float(np.linalg.norm(g))
    if allow_trivial and abs(g0) > norm:
        return QubitObservable.trivial(np.sign(g0)), False
    if norm < config.DEGENERACY_TOL:
        return previous, True
    return QubitObservable(g / norm), False


@dataclass
class _RestartOutcome:
    value: float
    state: np.ndarray
    observables: List[List[QubitObservable]]
    history: List[float]
    degenerate: bool


def _value(f: BellFunctional, psi: np.ndarray, observables: Sequence[Sequence[QubitObservable]]) -> float:
    stacks = [_stack(pair) for pair in observables]
    return float(np.dot(f.coeffs, _expectation_array(psi.reshape((2,) * f.n), stacks).real))


def _run_restart(
    f: BellFunctional,
    fixed_state: Optional[StateVector],
    rng: np.random.Generator,
    allow_trivial: bool,
    max_sweeps: int,
    tol: float,
) -> _RestartOutcome:
    n = f.n
    obs = [[random_observable(rng), random_observable(rng)] for _ in range(n)]
    if fixed_state is None:
        psi = _top_eigenvector(bell_operator(f, obs))
    else:
        psi = fixed_state.amplitudes
    value = _value(f, psi, obs)
    history = [value]
    degenerate = False
    for _ in range(max_sweeps):
        degenerate = True
        tensor = psi.reshape((2,) * n)
        for j in range(n):
            stacks = [_stack(pair) for pair in obs]
            eff = _effective_operator(f, tensor, stacks, j)
            for s in (0, 1):
                obs[j][s], stalled = _best_observable(eff[s], obs[j][s], allow_trivial)
                degenerate &= stalled
        if fixed_state is None:
            psi = _top_eigenvector(bell_operator(f, obs))
        new_value = _value(f, psi, obs)
        history.append(new_value)
        converged = abs(new_value - value) < tol
        value = new_value
        if converged:
            break
    return _RestartOutcome(value=value, state=psi, observables=obs, history=history, degenerate=degenerate)


def _seesaw(
    f: BellFunctional,
    fixed_state: Optional[StateVector],
    restarts: Optional[int],
    seed: Optional[int],
    threads: Optional[int],
    allow_trivial: bool,
    max_sweeps: Optional[int],
    tol: Optional[float],
) -> SeesawResult:
    restarts = config.DEFAULT_RESTARTS if restarts is None else restarts
    seed = config.DEFAULT_SEED if seed is None else seed
    threads = config.DEFAULT_THREADS if threads is None else threads
    max_sweeps = config.MAX_SWEEPS if max_sweeps is None else max_sweeps
    tol = config.SEESAW_TOL if tol is None else tol
    if restarts < 1:
        raise InvalidInputError("at least one restart is required")
    if f.n > config.MAX_ENUM_PARTIES:
        raise InvalidInputError(f"see-saw limited to n <= {config.MAX_ENUM_PARTIES}")
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]

    def work(rng: np.random.Generator) -> _RestartOutcome:
        return _run_restart(f, fixed_state, rng, allow_trivial, max_sweeps, tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, rngs))
    else:
        outcomes = [work(rng) for rng in rngs]

    live = [i for i, o in enumerate(outcomes) if not o.degenerate]
    if not live:
        raise DegenerateOptimizationError(
            f"all {restarts} restarts stalled on a vanishing effective operator for {f.name}"
        )
    # ties go to the lowest restart index
    best = max(live, key=lambda i: (outcomes[i].value, -i))
    winner = outcomes[best]
    state = StateVector.normalized(winner.state)
    strategy = QuantumStrategy(state, tuple(tuple(pair) for pair in winner.observables))
    logger.info(
        "see-saw %s: best %.10f from restart %d of %d (seed %d)",
        f.name,
        winner.value,
        best,
        restarts,
        seed,
    )
    return SeesawResult(
        strategy=strategy,
        value=winner.value,
        history=tuple(winner.history),
        seed=seed,
        restarts=restarts,
        restart_values=tuple(o.value for o in outcomes),
        histories=tuple(tuple(o.history) for o in outcomes),
        degenerate_restarts=restarts - len(live),
    )


def seesaw(
    f: BellFunctional,
    n: Optional[int] = None,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    max_sweeps: Optional[int] = None,
    tol: Optional[float] = None,
) -> SeesawResult:
    """Alternate exact state and observable maximisations of ``f``.

    Args:
        f: Functional to maximise.
        n: Party count; must match ``f.n`` when given.
        restarts: Independent random starts, merged by best value.
        seed: Root seed; each restart gets its own spawned stream.
        threads: Worker threads for the restarts.
        max_sweeps: Sweep cap per restart.
        tol: Stop once a sweep changes the value by less than this.

    Returns:
        ``SeesawResult``; its value is achievable, hence a lower bound on the
        quantum maximum.
    """
    if n is not None and n != f.n:
        raise DimensionMismatchError(f"n={n} but functional has {f.n} parties")
    return _seesaw(f, None, restarts, seed, threads, False, max_sweeps, tol)


def seesaw_fixed_state(
    f: BellFunctional,
    state: StateVector,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    allow_trivial: bool = False,
    max_sweeps: Optional[int] = None,
    tol: Optional[float] = None,
) -> SeesawResult:
    """See-saw over observables only, with ``state`` held fixed.

    Observables are traceless unit Bloch vectors. With ``allow_trivial`` a
    party may also answer a constant +-1 for a setting, which widens the search
    to every projective qubit measurement.
    """
    if state.n != f.n:
        raise DimensionMismatchError(f"{state.n}-qubit state for a {f.n}-party functional")
    return _seesaw(f, state, restarts, seed, threads, allow_trivial, max_sweeps, tol)


# === BOUNDARY CONSTRUCTIONS ===

BOUNDARY_TARGETS = ("minus_one", "zero")


def boundary_strategy(n: int, target: str) -> QuantumStrategy:
    """GHZ strategies reaching the extreme points of the projection at zeta = -1 or 0."""
    if n not in (3, 4, 5):
        raise InvalidInputError(f"boundary strategies are tabulated for n in 3..5, got {n}")
    if target == "minus_one":
        angle1 = math.pi / n
        angle0 = (3 * n + 1) * math.pi / (n * (n + 1))
    elif target == "zero":
        angle1 = math.pi / (2 * n)
        angle0 = (1 - n) * math.pi / (2 * n * (n + 1))
    else:
        raise InvalidInputError(f"target must be one of {BOUNDARY_TARGETS}, got {target!r}")
    return _xy_ghz_strategy(n, angle0, angle1)


def u2_boundary(zeta: float) -> float:
    """Upper boundary ``cos(arccos(zeta)/3)**3`` of the two-party projection."""
    if abs(zeta) > 1.0 + config.VALIDITY_TOL:
        raise InvalidInputError(f"zeta must lie in [-1, 1], got {zeta!r}")
    zeta = min(1.0, max(-1.0, zeta))
    return math.cos(math.acos(zeta) / 3) ** 3


def u2_optimal_strategy(zeta: float) -> QuantumStrategy:
    """``Phi+`` with the measurements that attain :func:`u2_boundary` at ``zeta``."""
    if abs(zeta) > 1.0:
        raise InvalidInputError(f"zeta must lie in [-1, 1], got {zeta!r}")
    theta = math.acos(zeta)
    a0 = QubitObservable.xy(-theta / 6)
    a1 = QubitObservable.xy(theta / 2)
    return QuantumStrategy(ghz(2), ((a0, a1), (a0, a1)))


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise DimensionMismatchError(f"expected a 4x4 density operator, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise InvalidInputError("density operator must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise InvalidInputError("density operator must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise InvalidInputError("density operator must be positive semidefinite")
    return rho


def sos_identity_check(
    rho: np.ndarray,
    a0: QubitObservable,
    a1: QubitObservable,
    b0: QubitObservable,
    b1: QubitObservable,
) -> Tuple[float, float]:
    """Both sides of the sum-of-squares certificate for the two-party boundary.

    ``lhs = u2(zeta) - mu`` and ``rhs`` is a positive combination of squared
    operator expectations, so ``lhs == rhs >= 0`` proves ``mu <= u2(zeta)``.
    """
    rho = _check_density(rho)

    def ev(op: np.ndarray) -> float:
        return float(np.real(np.trace(rho @ op)))

    A = [np.kron(o.matrix(), IDENTITY) for o in (a0, a1)]
    B = [np.kron(IDENTITY, o.matrix()) for o in (b0, b1)]
    corr = [[ev(A[x] @ B[y]) for y in (0, 1)] for x in (0, 1)]
    zeta = corr[1][1]
    mu = sum(map(sum, corr)) / 4
    c = math.cos(math.acos(min(1.0, max(-1.0, zeta))) / 3)
    lp, lm = 2 * c + 1, 2 * c - 1
    lhs = c**3 - mu
    P, Q = A[0] + B[0], A[1] + B[1]
    first = lm * P - Q
    second = lp * A[0] + A[1] - lp * B[0] - B[1]
    if lm > SOS_DEGENERATE_TOL:
        rhs = (lp * ev(first @ first) + lm * ev(second @ second)) / (16 * lp * lm)
    else:
        # near zeta = -1 the first square is O(lm): <Q^2> = 2 (1 + zeta) = 2 (c + 1) lm**2
        first_over_lm = lm * ev(P @ P) - ev(P @ Q + Q @ P) + 2 * (c + 1) * lm
        rhs = (first_over_lm + ev(second @ second) / lp) / 16
    return lhs, rhs


def projection_of(s: QuantumStrategy):
    """Shortcut for ``zeta_mu(expectation(s))``."""
    return zeta_mu(expectation(s))


def value_of(f: BellFunctional, s: QuantumStrategy) -> float:
    return evaluate(f, expectation(s))
