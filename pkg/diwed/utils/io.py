"""JSON readers and writers for the toolkit's file formats.

Formats (see ``knowledge/file_formats.md``):

* correlators: ``{"n": 3, "correlators": {"000": 0.5, ...}}``
* behavior:    ``{"n": 2, "probabilities": {"01|10": 0.25, ...}}``
* counts:      ``{"records": [{"setting": "01", "counts": {"+-": 12, ...}}, ...]}``
  (a bare list of records is accepted too)
* strategy:    ``{"n": 2, "state": {"real": [...], "imag": [...]},
  "observables": [[{"bloch": [x, y, z], "identity": 0.0}, {...}], ...]}``
"""

import json
import logging
from pathlib import Path
from typing import Any, List, Union

import numpy as np

from diwed.certify import CountRecord, iter_records
from diwed.correl import Behavior, CorrelationTensor
from diwed.errors import DiwedError, InvalidInputError
from diwed.quantum import QuantumStrategy, QubitObservable, StateVector

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dumps(data: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent."""
    return json.dumps(data, sort_keys=True, indent=2)


def load_json(source: Union[PathLike, dict, list]) -> Any:
    """Parse a path or a JSON string; already-parsed data passes through."""
    if isinstance(source, (dict, list)):
        return source
    text = str(source)
    if not text.lstrip().startswith(("{", "[")):
        try:
            text = Path(text).read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidInputError(f"cannot read {source}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"invalid JSON: {e}") from e


def _field(data: dict, key: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise InvalidInputError(f"expected a JSON object with a {key!r} field")
    return data[key]


def correlators_to_dict(t: CorrelationTensor) -> dict:
    return {"n": t.n, "correlators": t.as_dict()}


def read_correlators(source: Union[PathLike, dict]) -> CorrelationTensor:
    data = load_json(source)
    values = _field(data, "correlators")
    if not isinstance(values, dict) or not values:
        raise InvalidInputError("'correlators' must be a non-empty object keyed by setting bitstrings")
    try:
        n = int(data.get("n", len(next(iter(values)))))
        return CorrelationTensor.from_dict(n, values)
    except DiwedError:
        raise
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"malformed correlator file: {e}") from e


def behavior_to_dict(b: Behavior) -> dict:
    return {"n": b.n, "probabilities": b.as_dict()}


def read_behavior(source: Union[PathLike, dict]) -> Behavior:
    data = load_json(source)
    probabilities = _field(data, "probabilities")
    if not isinstance(probabilities, dict) or not probabilities:
        raise InvalidInputError("'probabilities' must be a non-empty object keyed by '<outcome>|<setting>'")
    try:
        n = int(data.get("n", len(next(iter(probabilities)).split("|")[0])))
        return Behavior.from_dict(n, probabilities)
    except DiwedError:
        raise
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"malformed behavior file: {e}") from e


def counts_to_dict(records: List[CountRecord]) -> dict:
    return {"records": [r.to_dict() for r in records]}


def read_counts(source: Union[PathLike, dict, list]) -> List[CountRecord]:
    data = load_json(source)
    raw = data if isinstance(data, list) else _field(data, "records")
    return iter_records(raw)


def strategy_to_dict(s: QuantumStrategy) -> dict:
    amps = s.state.amplitudes
    return {
        "n": s.n,
        "state": {"real": [float(v) for v in amps.real], "imag": [float(v) for v in amps.imag]},
        "observables": [
            [{"bloch": [float(c) for c in o.bloch], "identity": o.identity} for o in pair]
            for pair in s.observables
        ],
    }


def read_strategy(source: Union[PathLike, dict]) -> QuantumStrategy:
    data = load_json(source)
    if isinstance(data, dict) and "state" not in data and "strategy" in data:
        # optimize --format json nests the strategy
        data = data["strategy"]
    state = _field(data, "state")
    try:
        real = np.asarray(_field(state, "real"), dtype=np.float64)
        imag = np.asarray(state.get("imag", np.zeros_like(real)), dtype=np.float64)
        psi = StateVector.normalized(real + 1j * imag)
        pairs = []
        for pair in _field(data, "observables"):
            pairs.append(tuple(QubitObservable(np.asarray(o["bloch"]), float(o.get("identity", 0.0))) for o in pair))
        return QuantumStrategy(psi, tuple(pairs))
    except DiwedError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InvalidInputError(f"malformed strategy file: {e}") from e


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(dumps(data) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path
