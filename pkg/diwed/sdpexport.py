"""Level-1 moment matrices with partial-transpose constraints, exported as SDPA.

Each party contributes the monomials ``1, A0, A1``; a global monomial is a
tuple of local indices and the moment matrix is ``chi[s, t] = <M_s M_t>``
(real, symmetric relaxation). Local products are words:

    0 = 1, 1 = A0, 2 = A1, 3 = A0 A1, 4 = A1 A0

An entry without words 3/4 is a correlator on the parties carrying A0/A1, read
from ``P(a|x)`` at ``x = 0`` on the other parties. Any other entry is a free
variable ``u``, shared by all entries with the same word up to swapping 3 and 4.

Solvers read SDPA as: minimise ``c.y`` subject to ``sum_i y_i F_i - F_0 >= 0``.
Bell values are maximised, so the objective holds ``-beta`` and the bound is
minus the solver optimum.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from diwed.bounds import Partition
from diwed.config import MAX_SDP_PARTIES
from diwed.correl import BellFunctional, Behavior, SettingVector, parity_signs
from diwed.errors import DimensionMismatchError, ExportError, InvalidInputError
from diwed.quantum import IDENTITY, QuantumStrategy, outcome_probabilities

logger = logging.getLogger(__name__)

WORD_NAMES = ("1", "A0", "A1", "A0A1", "A1A0")
SWAP_WORD = (0, 1, 2, 4, 3)

Term = Tuple[int, float]
Entry = Tuple[int, int, int, int, float]


def _local_word(p: int, q: int) -> int:
    if p == 0:
        return q
    if q == 0:
        return p
    if p == q:
        return 0
    return 3 if p == 1 else 4


def _canonical(word: Tuple[int, ...]) -> Tuple[int, ...]:
    return min(word, tuple(SWAP_WORD[w] for w in word))


@dataclass(frozen=True)
class MonomialIndex:
    """Per-party local monomial indices (0 = 1, 1 = A0, 2 = A1)."""

    local: Tuple[int, ...]

    @property
    def index(self) -> int:
        out = 0
        for v in self.local:
            out = out * 3 + v
        return out

    def __str__(self) -> str:
        return "*".join(WORD_NAMES[v] for v in self.local)


@dataclass(frozen=True, eq=False)
class MomentStructure:
    """Which variables fill each entry of the level-1 moment matrix.

    ``terms[i][j]`` lists ``(variable, coefficient)``; variables
    ``0 .. 4**n - 1`` are ``P(a|x)`` at ``x * 2**n + a``, the rest are the free
    ``u`` in ``u_words`` order.
    """

    n: int
    level: int
    monomials: Tuple[MonomialIndex, ...]
    u_words: Tuple[Tuple[int, ...], ...]
    terms: Tuple[Tuple[Tuple[Term, ...], ...], ...]
    free: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.monomials)

    @property
    def p_count(self) -> int:
        return 4**self.n

    @property
    def u_count(self) -> int:
        return len(self.u_words)

    @property
    def variable_count(self) -> int:
        return self.p_count + self.u_count

    def variable_name(self, var: int, prefix: str = "") -> str:
        if var < self.p_count:
            x, a = divmod(var, 1 << self.n)
            return f"{prefix}P({SettingVector.from_index(a, self.n)}|{SettingVector.from_index(x, self.n)})"
        word = self.u_words[var - self.p_count]
        return f"{prefix}u[" + ",".join(WORD_NAMES[w] for w in word) + "]"

    def basis_matrix(self, var: int) -> np.ndarray:
        """``F`` matrix of one variable."""
        dim = self.dimension
        out = np.zeros((dim, dim))
        for i in range(dim):
            for j in range(dim):
                for v, c in self.terms[i][j]:
                    if v == var:
                        out[i, j] += c
        return out

    def moment_matrix(self, p_values: np.ndarray, u_values: np.ndarray) -> np.ndarray:
        """``chi = sum P F + sum u F`` for given variable values."""
        y = np.concatenate([np.asarray(p_values, dtype=np.float64), np.asarray(u_values, dtype=np.float64)])
        if y.shape != (self.variable_count,):
            raise DimensionMismatchError(f"expected {self.variable_count} values, got {y.shape[0]}")
        dim = self.dimension
        chi = np.zeros((dim, dim))
        for i in range(dim):
            for j in range(dim):
                chi[i, j] = sum(c * y[v] for v, c in self.terms[i][j])
        return chi


def p_index(n: int, outcome: int, setting: int) -> int:
    return setting * (1 << n) + outcome


def build_moment_structure(n: int, level: int = 1) -> MomentStructure:
    if level != 1:
        raise InvalidInputError(f"only level 1 is supported, got {level}")
    if not 1 <= n <= MAX_SDP_PARTIES:
        raise InvalidInputError(f"moment structures limited to 1 <= n <= {MAX_SDP_PARTIES}, got {n}")
    monomials = tuple(MonomialIndex(m) for m in itertools.product(range(3), repeat=n))
    dim = len(monomials)
    signs = parity_signs(1)  # (+1, -1) per local outcome bit
    u_index: Dict[Tuple[int, ...], int] = {}
    words = [[None] * dim for _ in range(dim)]
    for i, s in enumerate(monomials):
        for j, t in enumerate(monomials):
            words[i][j] = tuple(_local_word(p, q) for p, q in zip(s.local, t.local))
    # u variables numbered in canonical-word order for a stable catalog
    free_words = sorted({_canonical(w) for row in words for w in row if max(w) >= 3})
    for k, w in enumerate(free_words):
        u_index[w] = k
    p_count = 4**n
    terms = []
    free = np.zeros((dim, dim), dtype=bool)
    for i in range(dim):
        row = []
        for j in range(dim):
            w = words[i][j]
            if max(w) >= 3:
                row.append(((p_count + u_index[_canonical(w)], 1.0),))
                free[i, j] = True
                continue
            x = 0
            for v in w:
                x = (x << 1) | (1 if v == 2 else 0)
            entry = []
            for a in range(1 << n):
                coef = 1
                for party, v in enumerate(w):
                    if v:
                        coef *= int(signs[(a >> (n - 1 - party)) & 1])
                entry.append((p_index(n, a, x), float(coef)))
            row.append(tuple(entry))
        terms.append(tuple(row))
    logger.debug("moment structure n=%d: dimension %d, %d free variables", n, dim, len(free_words))
    return MomentStructure(
        n=n,
        level=level,
        monomials=monomials,
        u_words=tuple(free_words),
        terms=tuple(terms),
        free=free,
    )


def partial_transpose_indexing(structure: MomentStructure, group: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Entry pairing of ``chi^{T_group}``.

    Returns ``(rows, cols)`` with ``chi^{T_group}[i, j] = chi[rows[i, j], cols[i, j]]``.
    Parties are 1-based. The map swaps row and column local indices of the
    parties in ``group``; applying it twice gives the identity.
    """
    parties = sorted(set(int(p) for p in group))
    if not parties:
        raise InvalidInputError("partial transpose needs a non-empty group")
    if parties[0] < 1 or parties[-1] > structure.n:
        raise InvalidInputError(f"group {parties} outside parties 1..{structure.n}")
    n = structure.n
    dim = structure.dimension
    local = np.array([m.local for m in structure.monomials], dtype=np.int64)
    powers = 3 ** np.arange(n - 1, -1, -1)
    mask = np.zeros(n, dtype=bool)
    mask[[p - 1 for p in parties]] = True
    s = np.broadcast_to(local[:, None, :], (dim, dim, n))
    t = np.broadcast_to(local[None, :, :], (dim, dim, n))
    new_s = np.where(mask, t, s)
    new_t = np.where(mask, s, t)
    return new_s @ powers, new_t @ powers


@dataclass(frozen=True)
class SdpProblem:
    """An SDPA-sparse problem plus the catalog that names its parts.

    ``entries`` holds ``(var, block, i, j, value)`` with 1-based blocks and
    indices, ``i <= j``, var 0 being the constant matrix ``F_0``. Blocks with a
    negative size are diagonal (linear inequalities).
    """

    n_vars: int
    block_sizes: Tuple[int, ...]
    objective: Tuple[float, ...]
    entries: Tuple[Entry, ...]
    variable_names: Tuple[str, ...] = ()
    block_labels: Tuple[str, ...] = ()
    meta: Dict[str, Union[str, int, float, list]] = field(default_factory=dict)

    def sidecar(self) -> dict:
        return {
            "format": "sdpa-sparse",
            "variables": {str(i + 1): name for i, name in enumerate(self.variable_names)},
            "blocks": {str(i + 1): label for i, label in enumerate(self.block_labels)},
            "meta": self.meta,
        }


class _Builder:
    """Accumulates SDPA entries block by block."""

    def __init__(self):
        self.entries: Dict[Tuple[int, int, int, int], float] = {}
        self.sizes: List[int] = []
        self.labels: List[str] = []
        self.lp_rows: List[Tuple[Dict[int, float], float]] = []

    def add(self, var: int, block: int, i: int, j: int, value: float) -> None:
        if value == 0.0:
            return
        if i > j:
            i, j = j, i
        key = (var, block, i, j)
        total = self.entries.get(key, 0.0) + value
        if total == 0.0:
            self.entries.pop(key, None)
        else:
            self.entries[key] = total

    def new_block(self, size: int, label: str) -> int:
        self.sizes.append(size)
        self.labels.append(label)
        return len(self.sizes)

    def psd_block(
        self,
        structure: MomentStructure,
        label: str,
        offset: int,
        rows: Optional[np.ndarray] = None,
        cols: Optional[np.ndarray] = None,
        constant: Optional[np.ndarray] = None,
        extra_u: Sequence[int] = (),
    ) -> None:
        """A moment-matrix block; ``rows``/``cols`` re-index it (partial transpose).

        Variable ``v`` of the structure maps to SDPA variable ``offset + v + 1``.
        ``constant`` replaces the P part by fixed values placed in ``F_0``;
        ``extra_u`` lists further offsets whose u variables add into the block.
        """
        dim = structure.dimension
        block = self.new_block(dim, label)
        for i in range(dim):
            for j in range(i, dim):
                si, sj = (i, j) if rows is None else (int(rows[i, j]), int(cols[i, j]))
                if structure.free[si, sj] or constant is None:
                    offsets = [offset] if constant is None or not extra_u else list(extra_u)
                    for v, c in structure.terms[si][sj]:
                        if constant is not None and v < structure.p_count:
                            continue
                        for off in offsets:
                            self.add(off + v + 1, block, i + 1, j + 1, c)
                else:
                    value = sum(c * constant[v] for v, c in structure.terms[si][sj])
                    # sum y F - F_0 >= 0 with the fixed part C means F_0 = -C
                    self.add(0, block, i + 1, j + 1, -value)

    def row(self, terms: Dict[int, float], constant: float = 0.0) -> None:
        """``sum terms * y - constant >= 0``."""
        self.lp_rows.append((terms, constant))

    def equality(self, terms: Dict[int, float], constant: float = 0.0) -> None:
        self.row(terms, constant)
        self.row({v: -c for v, c in terms.items()}, -constant)

    def flush_lp(self, label: str) -> None:
        if not self.lp_rows:
            return
        block = self.new_block(-len(self.lp_rows), label)
        for r, (terms, constant) in enumerate(self.lp_rows, start=1):
            for v, c in terms.items():
                self.add(v, block, r, r, c)
            self.add(0, block, r, r, constant)
        self.lp_rows = []

    def problem(self, n_vars: int, objective: Sequence[float], names: Sequence[str], meta: dict) -> SdpProblem:
        entries = tuple(sorted((v, b, i, j, val) for (v, b, i, j), val in self.entries.items()))
        return SdpProblem(
            n_vars=n_vars,
            block_sizes=tuple(self.sizes),
            objective=tuple(float(c) for c in objective),
            entries=entries,
            variable_names=tuple(names),
            block_labels=tuple(self.labels),
            meta=meta,
        )


def _behavior_rows(builder: _Builder, n: int, offset: int, normalized: bool) -> None:
    """Positivity, normalisation and no-signaling rows for one P block.

    Unnormalised blocks only require every setting to carry the same weight.
    """
    size = 1 << n

    def var(a: int, x: int) -> int:
        return offset + p_index(n, a, x) + 1

    for x in range(size):
        for a in range(size):
            builder.row({var(a, x): 1.0})
    for x in range(size):
        total = {var(a, x): 1.0 for a in range(size)}
        if normalized:
            builder.equality(total, 1.0)
        elif x:
            for a in range(size):
                total[var(a, 0)] = total.get(var(a, 0), 0.0) - 1.0
            builder.equality(total)
    for party in range(n):
        bit = 1 << (n - 1 - party)
        for x in range(size):
            if x & bit:
                continue
            for a in range(size):
                if a & bit:
                    continue
                terms = {
                    var(a, x): 1.0,
                    var(a | bit, x): 1.0,
                    var(a, x | bit): -1.0,
                    var(a | bit, x | bit): -1.0,
                }
                builder.equality(terms)


def _groups_of(partition: Union[Partition, Sequence[Sequence[int]]], n: int) -> List[Tuple[int, ...]]:
    """Party groups (1-based); an integer partition fills consecutive parties."""
    if isinstance(partition, Partition):
        if partition.n != n:
            raise InvalidInputError(f"partition {partition} is not a partition of {n}")
        groups, start = [], 1
        for size in partition.parts:
            groups.append(tuple(range(start, start + size)))
            start += size
        return groups
    groups = [tuple(sorted(int(p) for p in g)) for g in partition]
    flat = sorted(p for g in groups for p in g)
    if flat != list(range(1, n + 1)):
        raise InvalidInputError(f"groups {groups} do not partition parties 1..{n}")
    return groups


def set_partitions(n: int, k: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """Set partitions of parties ``1..n`` into blocks of at most ``k``."""
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got n={n}, k={k}")

    def grow(i: int, blocks: List[List[int]]) -> Iterator[Tuple[Tuple[int, ...], ...]]:
        if i > n:
            yield tuple(tuple(b) for b in blocks)
            return
        for b in blocks:
            if len(b) < k:
                b.append(i)
                yield from grow(i + 1, blocks)
                b.pop()
        blocks.append([i])
        yield from grow(i + 1, blocks)
        blocks.pop()

    yield from grow(1, [])


def producible_sdp(f: BellFunctional, partition: Union[Partition, Sequence[Sequence[int]]], level: int = 1) -> SdpProblem:
    """Upper bound on ``f`` over states that are products across ``partition``."""
    structure = build_moment_structure(f.n, level)
    groups = _groups_of(partition, f.n)
    n = f.n
    builder = _Builder()
    builder.psd_block(structure, "chi", 0)
    for g in groups:
        if len(g) == n:
            continue
        rows, cols = partial_transpose_indexing(structure, g)
        builder.psd_block(structure, "chi^T" + "".join(str(p) for p in g), 0, rows, cols)
    _behavior_rows(builder, n, 0, normalized=True)
    builder.flush_lp("behavior")
    objective = np.zeros(structure.variable_count)
    signs = parity_signs(n)
    for x in range(1 << n):
        for a in range(1 << n):
            objective[p_index(n, a, x)] = -f.coeffs[x] * signs[a]
    names = [structure.variable_name(v) for v in range(structure.variable_count)]
    meta = {
        "problem": "producible-bound",
        "functional": f.name,
        "n": n,
        "level": level,
        "groups": [list(g) for g in groups],
        "sense": "minimize; bound = -optimum",
    }
    return builder.problem(structure.variable_count, objective, names, meta)


def membership_sdp(b: Behavior, k: int, level: int = 1) -> SdpProblem:
    """Feasibility problem: can ``b`` come from a ``k``-producible state?

    One moment block per set partition into groups of at most ``k``, each PPT
    across its groups; their sum must reproduce ``b``. Infeasible means depth
    at least ``k + 1``.
    """
    n = b.n
    structure = build_moment_structure(n, level)
    components = list(set_partitions(n, k))
    per = structure.variable_count
    observed = np.zeros(structure.p_count)
    for x in range(1 << n):
        for a in range(1 << n):
            observed[p_index(n, a, x)] = b.probabilities[a, x]
    builder = _Builder()
    offsets = [j * per for j in range(len(components))]
    builder.psd_block(structure, "chi", 0, constant=observed, extra_u=offsets)
    for j, groups in enumerate(components):
        tag = "|".join("".join(str(p) for p in g) for g in groups)
        builder.psd_block(structure, f"chi[{tag}]", offsets[j])
        for g in groups:
            if len(g) == n:
                continue
            rows, cols = partial_transpose_indexing(structure, g)
            builder.psd_block(structure, f"chi[{tag}]^T" + "".join(str(p) for p in g), offsets[j], rows, cols)
        _behavior_rows(builder, n, offsets[j], normalized=False)
    for v in range(structure.p_count):
        builder.equality({off + v + 1: 1.0 for off in offsets}, float(observed[v]))
    builder.flush_lp("behavior")
    names = [
        structure.variable_name(v, prefix=f"[{j + 1}]")
        for j in range(len(components))
        for v in range(per)
    ]
    meta = {
        "problem": "membership",
        "n": n,
        "k": k,
        "level": level,
        "components": [[list(g) for g in groups] for groups in components],
        "sense": "feasibility; infeasible => entanglement depth >= k + 1",
    }
    return builder.problem(per * len(components), np.zeros(per * len(components)), names, meta)


# === SDPA I/O ===


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_sdpa(problem: SdpProblem, path: Union[str, Path]) -> Path:
    """Write ``path`` in SDPA sparse format and the naming sidecar next to it."""
    path = Path(path)
    lines = [
        str(problem.n_vars),
        str(len(problem.block_sizes)),
        " ".join(str(s) for s in problem.block_sizes),
        " ".join(repr(float(c)) for c in problem.objective),
    ]
    lines += [f"{v} {b} {i} {j} {val!r}" for v, b, i, j, val in problem.entries]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        sidecar_path(path).write_text(json.dumps(problem.sidecar(), indent=2, sort_keys=True), encoding="utf-8")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}") from e
    logger.info("wrote %s: %d variables, blocks %s", path, problem.n_vars, problem.block_sizes)
    return path


def _numbers(line: str) -> List[str]:
    for ch in "{}(),":
        line = line.replace(ch, " ")
    return line.split()


def read_sdpa(path: Union[str, Path]) -> SdpProblem:
    """Parse a file written by :func:`write_sdpa` (sidecar optional)."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ExportError(f"cannot read {path}: {e}") from e
    lines = [ln for ln in raw if ln.strip() and ln.lstrip()[0] not in "\"*"]
    if len(lines) < 4:
        raise ExportError(f"{path} is not an SDPA sparse file")
    try:
        n_vars = int(_numbers(lines[0])[0])
        n_blocks = int(_numbers(lines[1])[0])
        sizes = tuple(int(s) for s in _numbers(lines[2])[:n_blocks])
        objective = tuple(float(c) for c in _numbers(lines[3])[:n_vars])
        entries = []
        for ln in lines[4:]:
            v, b, i, j, val = _numbers(ln)[:5]
            entries.append((int(v), int(b), int(i), int(j), float(val)))
    except (ValueError, IndexError) as e:
        raise ExportError(f"malformed SDPA file {path}: {e}") from e
    names, labels, meta = (), (), {}
    side = sidecar_path(path)
    if side.exists():
        data = json.loads(side.read_text(encoding="utf-8"))
        names = tuple(data["variables"][str(i + 1)] for i in range(len(data.get("variables", {}))))
        labels = tuple(data["blocks"][str(i + 1)] for i in range(len(data.get("blocks", {}))))
        meta = data.get("meta", {})
    return SdpProblem(
        n_vars=n_vars,
        block_sizes=sizes,
        objective=objective,
        entries=tuple(sorted(entries)),
        variable_names=names,
        block_labels=labels,
        meta=meta,
    )


def export_producible_sdp(
    f: BellFunctional,
    p: Union[Partition, Sequence[Sequence[int]]],
    level: int = 1,
    path: Union[str, Path] = "producible.dat-s",
) -> SdpProblem:
    problem = producible_sdp(f, p, level)
    write_sdpa(problem, path)
    return problem


def export_membership_sdp(b: Behavior, k: int, level: int = 1, path: Union[str, Path] = "membership.dat-s") -> SdpProblem:
    problem = membership_sdp(b, k, level)
    write_sdpa(problem, path)
    return problem


def quantum_moment_assignment(structure: MomentStructure, strategy: QuantumStrategy) -> Tuple[np.ndarray, np.ndarray]:
    """``P`` and ``u`` values realised by a strategy (real parts of the moments)."""
    if strategy.n != structure.n:
        raise DimensionMismatchError(f"{strategy.n}-party strategy for an n={structure.n} structure")
    n = structure.n
    behavior = outcome_probabilities(strategy)
    p = np.zeros(structure.p_count)
    for x in range(1 << n):
        for a in range(1 << n):
            p[p_index(n, a, x)] = behavior.probabilities[a, x]
    psi = strategy.state.amplitudes
    u = np.zeros(structure.u_count)
    for k, word in enumerate(structure.u_words):
        op = np.ones((1, 1), dtype=np.complex128)
        for party, w in enumerate(word):
            a0, a1 = (o.matrix() for o in strategy.observables[party])
            local = (IDENTITY, a0, a1, a0 @ a1, a1 @ a0)[w]
            op = np.kron(op, local)
        u[k] = float(np.real(np.conj(psi) @ op @ psi))
    return p, u


def solver_gap(problem: SdpProblem, solver_optimum: float, expected: float) -> float:
    """Difference between the bound implied by an external optimum and ``expected``."""
    if problem.meta.get("problem") != "producible-bound":
        raise InvalidInputError("solver values are only compared for producible-bound problems")
    return -solver_optimum - expected
