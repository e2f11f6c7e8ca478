"""Command-line front end.

Each subcommand builds a :class:`CommandConfig` and hands it to :func:`run`,
which returns the exit status and the artifact; the typer layer only prints.
Exit codes: 0 ok, 1 reproduction mismatch (``tables``), 2 usage or input error
(a JSON error object goes to stderr).
"""

import csv
import io as _io
import logging
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import typer

from diwed import config
from diwed.bounds import (
    FAMILIES,
    Partition,
    gamma_producible_bound,
    ns_boundary,
    producible_quantum_bound,
    witness_bound,
)
from diwed.certify import WITNESSES, CorrelatorEstimate, certify, estimate, estimate_from_tensor, simulate_counts
from diwed.correl import FUNCTIONALS, named_functional
from diwed.errors import DiwedError, InvalidInputError
from diwed.localset import facet_check_full_correlation, facet_check_local_polytope, local_bound
from diwed.quantum import (
    STATE_BUILDERS,
    ansatz_projection,
    ansatz_strategy,
    ansatz_value,
    gamma_ansatz_max,
    named_state,
    outcome_probabilities,
    quantum_max,
    seesaw,
    seesaw_fixed_state,
    u2_boundary,
)
from diwed.sdpexport import export_membership_sdp, export_producible_sdp, solver_gap
from diwed.tables import TABLES, TABLE_V_MAX_N, reproduce_table
from diwed.utils import formatters
from diwed.utils.io import (
    dumps,
    read_behavior,
    read_correlators,
    read_counts,
    read_strategy,
    strategy_to_dict,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("bound", "optimize", "certify", "facet", "tables", "export-sdp", "scan")
CURVES = ("ansatz", "gamma", "boundary")
FORMATS = ("text", "json")


@dataclass(frozen=True)
class CommandConfig:
    """Everything one subcommand needs; unset fields fall back to ``diwed.config``."""

    subcommand: str
    n: Optional[int] = None
    k: Optional[int] = None
    gamma: float = 2.0
    phi: Optional[float] = None
    family: str = "iota"
    functional: str = "iota"
    witness: str = "iota"
    state: Optional[str] = None
    allow_trivial: bool = False
    space: str = "corr"
    table: str = "all"
    problem: str = "producible"
    partition: Optional[str] = None
    curve: str = "ansatz"
    points: int = 201
    level: int = 1
    max_n: int = TABLE_V_MAX_N
    solver_value: Optional[float] = None
    restarts: Optional[int] = None
    seed: Optional[int] = None
    threads: Optional[int] = None
    sigmas: Optional[float] = None
    input_path: Optional[str] = None
    strategy_path: Optional[str] = None
    correlators_path: Optional[str] = None
    shots: Optional[int] = None
    output_path: Optional[str] = None
    format: str = "text"

    def resolved(self) -> "CommandConfig":
        return replace(
            self,
            restarts=config.DEFAULT_RESTARTS if self.restarts is None else self.restarts,
            seed=config.DEFAULT_SEED if self.seed is None else self.seed,
            threads=config.DEFAULT_THREADS if self.threads is None else self.threads,
            sigmas=config.DEFAULT_SIGMAS if self.sigmas is None else self.sigmas,
        )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidInputError(message)


def validate(c: CommandConfig) -> None:
    """Subcommand-specific checks, run before any work is done."""
    _require(c.subcommand in SUBCOMMANDS, f"unknown subcommand {c.subcommand!r}")
    _require(c.format in FORMATS, f"format must be one of {FORMATS}")
    _require(c.restarts is None or c.restarts >= 1, "restarts must be positive")
    _require(c.threads is None or c.threads >= 1, "threads must be positive")
    _require(c.sigmas is None or c.sigmas >= 0, "sigmas must be non-negative")
    _require(0.0 < c.gamma <= 2.0, "gamma must lie in (0, 2]")
    if c.subcommand == "bound":
        _require(c.family in FAMILIES, f"family must be one of {FAMILIES}")
        _require(c.n is not None or c.k is not None, "bound needs --n or --k")
    elif c.subcommand == "optimize":
        _require(c.functional in FUNCTIONALS, f"functional must be one of {FUNCTIONALS}")
        _require(c.n is not None and c.n >= 1, "optimize needs --n")
        _require(c.state is None or c.state in STATE_BUILDERS, f"state must be one of {sorted(STATE_BUILDERS)}")
        _require(not c.allow_trivial or c.state is not None, "--allow-trivial needs --state")
    elif c.subcommand == "certify":
        sources = [p for p in (c.input_path, c.strategy_path, c.correlators_path) if p is not None]
        _require(len(sources) == 1, "certify needs exactly one of --input, --strategy or --correlators")
        _require(c.strategy_path is None or c.shots is not None, "certify --strategy needs --shots")
        _require(c.shots is None or c.shots >= 1, "shots must be positive")
        _require(c.witness in WITNESSES, f"witness must be one of {WITNESSES}")
    elif c.subcommand == "facet":
        _require(c.n is not None and c.n >= 2, "facet needs --n >= 2")
        _require(c.space in ("corr", "local"), "space must be 'corr' or 'local'")
        _require(c.functional in FUNCTIONALS, f"functional must be one of {FUNCTIONALS}")
    elif c.subcommand == "tables":
        _require(c.table == "all" or c.table.upper() in TABLES, f"table must be 'all' or one of {TABLES}")
    elif c.subcommand == "export-sdp":
        _require(c.problem in ("producible", "membership"), "problem must be 'producible' or 'membership'")
        _require(c.output_path is not None, "export-sdp needs --output")
        _require(c.functional in FUNCTIONALS, f"functional must be one of {FUNCTIONALS}")
        if c.problem == "producible":
            _require(c.n is not None, "producible export needs --n")
        else:
            _require(c.n is not None or c.input_path is not None, "membership export needs --n or --input")
            _require(c.k is not None and c.k >= 1, "membership export needs --k")
    elif c.subcommand == "scan":
        _require(c.curve in CURVES, f"curve must be one of {CURVES}")
        _require(c.n is not None and c.n >= 1, "scan needs --n")
        _require(c.points >= 2, "scan needs at least two points")


def _parse_partition(text: str) -> Partition:
    try:
        return Partition.of([int(p) for p in text.replace("{", "").replace("}", "").split(",") if p.strip()])
    except ValueError as e:
        raise InvalidInputError(f"partition must look like '2,1', got {text!r}") from e


# === SUBCOMMANDS ===


def _bound(c: CommandConfig) -> Tuple[int, str]:
    n = c.n if c.n is not None else c.k
    if c.k is None:
        bounds = [witness_bound(c.family, n, k, c.gamma) for k in range(1, n + 1)]
        if c.format == "json":
            return 0, dumps([b.to_dict() for b in bounds])
        return 0, formatters.format_bound_table(bounds)
    if c.family == "gamma":
        b = gamma_producible_bound(n, c.k, c.gamma, c.restarts, c.seed)
    else:
        b = witness_bound(c.family, n, c.k, c.gamma)
    return 0, dumps(b.to_dict()) if c.format == "json" else formatters.format_bound(b)


def _optimize(c: CommandConfig) -> Tuple[int, str]:
    f = named_functional(c.functional, c.n, c.gamma)
    if c.state:
        result = seesaw_fixed_state(
            f,
            named_state(c.state, c.n),
            restarts=c.restarts,
            seed=c.seed,
            threads=c.threads,
            allow_trivial=c.allow_trivial,
        )
    else:
        result = seesaw(f, restarts=c.restarts, seed=c.seed, threads=c.threads)
    if c.format == "text":
        return 0, formatters.format_seesaw(result, f.name, c.state)
    payload = {
        "functional": f.name,
        "n": c.n,
        "state": c.state,
        "allow_trivial": c.allow_trivial,
        "value": result.value,
        "seed": result.seed,
        "restarts": result.restarts,
        "restart_values": list(result.restart_values),
        "degenerate_restarts": result.degenerate_restarts,
        "history": list(result.history),
        "strategy": strategy_to_dict(result.strategy),
    }
    return 0, dumps(payload)


def _estimate(c: CommandConfig) -> CorrelatorEstimate:
    if c.strategy_path:
        strategy = read_strategy(c.strategy_path)
        logger.info("simulating %d shots per setting, seed %d", c.shots, c.seed)
        return estimate(simulate_counts(strategy, c.shots, c.seed))
    if c.correlators_path:
        return estimate_from_tensor(read_correlators(c.correlators_path), c.shots)
    return estimate(read_counts(c.input_path))


def _certify(c: CommandConfig) -> Tuple[int, str]:
    est = _estimate(c)
    report = certify(est, c.sigmas, c.witness)
    if c.format == "text":
        return 0, formatters.format_certification(report)
    payload = report.to_dict()
    payload["correlators"] = est.tensor.as_dict()
    payload["stderr"] = [float(s) for s in est.stderr]
    return 0, dumps(payload)


def _facet(c: CommandConfig) -> Tuple[int, str]:
    f = named_functional(c.functional, c.n, c.gamma)
    bound = local_bound(f).value
    check = facet_check_full_correlation if c.space == "corr" else facet_check_local_polytope
    report = check(f, bound)
    if c.format == "json":
        payload = report.to_dict()
        payload.update(functional=f.name, bound=bound)
        return 0, dumps(payload)
    return 0, formatters.format_facet(report)


def _tables(c: CommandConfig) -> Tuple[int, str]:
    names = TABLES if c.table == "all" else (c.table.upper(),)
    reports = [
        reproduce_table(t, restarts=c.restarts, seed=c.seed, threads=c.threads, max_n=c.max_n)
        for t in names
    ]
    code = 0 if all(r.ok for r in reports) else 1
    if c.format == "json":
        return code, dumps([r.to_dict() for r in reports])
    text = "\n\n".join(
        formatters.format_table_rows(f"TABLE {r.table}: {r.title}", [row.to_dict() for row in r.rows])
        for r in reports
    )
    return code, text


def _export_sdp(c: CommandConfig) -> Tuple[int, str]:
    if c.problem == "producible":
        f = named_functional(c.functional, c.n, c.gamma)
        partition = _parse_partition(c.partition) if c.partition else Partition((c.n,))
        problem = export_producible_sdp(f, partition, c.level, c.output_path)
    else:
        if c.input_path:
            behavior = read_behavior(c.input_path)
        else:
            # the ansatz-optimal GHZ behavior
            behavior = outcome_probabilities(ansatz_strategy(c.n, quantum_max(c.n).phi))
        problem = export_membership_sdp(behavior, c.k, c.level, c.output_path)
    payload = {
        "path": str(c.output_path),
        "sidecar": str(c.output_path) + ".json",
        "n_vars": problem.n_vars,
        "block_sizes": list(problem.block_sizes),
        "meta": problem.meta,
    }
    if c.solver_value is not None and c.problem == "producible":
        payload["implied_bound"] = -c.solver_value
        if c.functional == "iota":
            expected = producible_quantum_bound(c.n, partition.largest).bound
            payload["expected_bound"] = expected
            payload["gap"] = solver_gap(problem, c.solver_value, expected)
    if c.format == "json":
        return 0, dumps(payload)
    text = formatters.format_sdp_summary(problem.meta, problem.block_sizes, problem.n_vars, str(c.output_path))
    if "implied_bound" in payload:
        text += f"\nSolver bound: {payload['implied_bound']:.8f}"
        if "gap" in payload:
            text += f" (expected {payload['expected_bound']:.8f}, gap {payload['gap']:+.2e})"
    return 0, text


def scan_rows(c: CommandConfig) -> Tuple[List[str], List[List[float]]]:
    """Header and rows of a curve sweep."""
    n = c.n
    if c.curve == "ansatz":
        header = ["phi", "value", "zeta", "mu"]
        rows = []
        phis = [c.phi] if c.phi is not None else np.linspace(0.0, math.pi / 2, c.points)
        for phi in phis:
            zeta, mu = ansatz_projection(n, float(phi))
            rows.append([float(phi), ansatz_value(n, float(phi)), zeta, mu])
        return header, rows
    if c.curve == "gamma":
        header = ["gamma", "phi", "value"]
        rows = []
        for g in np.linspace(2.0 / c.points, 2.0, c.points):
            best = gamma_ansatz_max(n, float(g))
            rows.append([float(g), best.phi, best.value])
        return header, rows
    header = ["zeta", "quantum", "no_signaling"]
    rows = []
    if n == 2:
        for zeta in np.linspace(-1.0, 1.0, c.points):
            rows.append([float(zeta), u2_boundary(float(zeta)), ns_boundary(2, float(zeta))])
    else:
        # along the ansatz curve, ordered by zeta
        for phi in np.linspace(0.0, 2 * math.pi / (n + 1), c.points)[::-1]:
            zeta, mu = ansatz_projection(n, float(phi))
            rows.append([zeta, mu, ns_boundary(n, zeta)])
    return header, rows


def _scan(c: CommandConfig) -> Tuple[int, str]:
    header, rows = scan_rows(c)
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return 0, buffer.getvalue()


_DISPATCH = {
    "bound": _bound,
    "optimize": _optimize,
    "certify": _certify,
    "facet": _facet,
    "tables": _tables,
    "export-sdp": _export_sdp,
    "scan": _scan,
}


def error_payload(e: Exception) -> str:
    return dumps({"error": type(e).__name__, "message": str(e)})


def run(c: CommandConfig) -> Tuple[int, str, str]:
    """Execute one subcommand.

    Returns:
        ``(exit status, stdout artifact, stderr text)``.
    """
    try:
        validate(c)
        c = c.resolved()
        code, out = _DISPATCH[c.subcommand](c)
    except DiwedError as e:
        logger.debug("%s failed", c.subcommand, exc_info=True)
        return 2, "", error_payload(e)
    if c.output_path and c.subcommand not in ("export-sdp",):
        try:
            Path(c.output_path).write_text(out + "\n", encoding="utf-8")
        except OSError as e:
            return 2, "", error_payload(e)
        return code, "", ""
    return code, out, ""


# === TYPER SURFACE ===

app = typer.Typer(help="Device-independent entanglement-depth witnesses.", no_args_is_help=True)


@dataclass
class GlobalOptions:
    seed: Optional[int] = None
    threads: Optional[int] = None
    format: str = "text"


def _emit(ctx: typer.Context, c: CommandConfig) -> None:
    opts: GlobalOptions = ctx.obj or GlobalOptions()
    c = replace(
        c,
        seed=opts.seed if c.seed is None else c.seed,
        threads=opts.threads if c.threads is None else c.threads,
        format=opts.format,
    )
    code, out, err = run(c)
    if out:
        typer.echo(out)
    if err:
        typer.echo(err, err=True)
    raise typer.Exit(code)


@app.callback()
def main(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, help="Root seed for every random stream."),
    threads: Optional[int] = typer.Option(None, help="Worker threads for see-saw restarts."),
    format: str = typer.Option("text", "--format", help="text or json."),
    log_level: str = typer.Option(config.LOG_LEVEL, help="Logging level (stderr)."),
):
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = GlobalOptions(seed=seed, threads=threads, format=format)


@app.command()
def bound(
    ctx: typer.Context,
    family: str = typer.Option("iota", help=f"One of {', '.join(FAMILIES)}."),
    n: Optional[int] = typer.Option(None, help="Party count (defaults to k)."),
    k: Optional[int] = typer.Option(None, help="Depth; omit for the whole table."),
    gamma: float = typer.Option(2.0, help="gamma for the gamma family."),
    restarts: Optional[int] = typer.Option(None),
):
    """Producibility bound of a witness family."""
    _emit(ctx, CommandConfig("bound", n=n, k=k, family=family, gamma=gamma, restarts=restarts))


@app.command()
def optimize(
    ctx: typer.Context,
    n: int = typer.Option(..., help="Party count."),
    functional: str = typer.Option("iota", help=f"One of {', '.join(FUNCTIONALS)}."),
    state: Optional[str] = typer.Option(None, help="Fix the state: ghz, w, cluster-linear, cluster-ring."),
    allow_trivial: bool = typer.Option(False, "--allow-trivial", help="With --state, let parties answer a constant outcome."),
    restarts: Optional[int] = typer.Option(None),
    gamma: float = typer.Option(2.0),
    output: Optional[str] = typer.Option(None, help="Write the artifact here."),
):
    """See-saw maximisation of a functional."""
    _emit(
        ctx,
        CommandConfig(
            "optimize",
            n=n,
            functional=functional,
            state=state,
            allow_trivial=allow_trivial,
            restarts=restarts,
            gamma=gamma,
            output_path=output,
        ),
    )


@app.command("certify")
def certify_cmd(
    ctx: typer.Context,
    input: Optional[str] = typer.Option(None, "--input", help="Counts JSON file."),
    strategy: Optional[str] = typer.Option(None, help="Strategy JSON file to sample counts from."),
    correlators: Optional[str] = typer.Option(None, help="Correlator JSON file."),
    shots: Optional[int] = typer.Option(None, help="Samples per setting for --strategy or --correlators."),
    witness: str = typer.Option("iota", help=f"One of {', '.join(WITNESSES)}."),
    sigmas: Optional[float] = typer.Option(None, help="Statistical margin in standard errors."),
    output: Optional[str] = typer.Option(None),
):
    """Certify depth from measured counts, simulated counts or correlators."""
    _emit(
        ctx,
        CommandConfig(
            "certify",
            witness=witness,
            sigmas=sigmas,
            input_path=input,
            strategy_path=strategy,
            correlators_path=correlators,
            shots=shots,
            output_path=output,
        ),
    )


@app.command()
def facet(
    ctx: typer.Context,
    n: int = typer.Option(..., help="Party count."),
    space: str = typer.Option("corr", help="corr (full-correlation) or local (behavior space)."),
    functional: str = typer.Option("iota"),
):
    """Facet check of a functional at its local bound."""
    _emit(ctx, CommandConfig("facet", n=n, space=space, functional=functional))


@app.command()
def tables(
    ctx: typer.Context,
    table: str = typer.Option("all", help=f"all or one of {', '.join(TABLES)}."),
    restarts: Optional[int] = typer.Option(None),
    max_n: int = typer.Option(TABLE_V_MAX_N, help="Largest n reproduced for table V."),
):
    """Reproduce published tables; exit 1 on any mismatch."""
    _emit(ctx, CommandConfig("tables", table=table, restarts=restarts, max_n=max_n))


@app.command("export-sdp")
def export_sdp(
    ctx: typer.Context,
    output: str = typer.Option(..., help="SDPA sparse file to write."),
    problem: str = typer.Option("producible", help="producible (bound) or membership (feasibility)."),
    n: Optional[int] = typer.Option(None),
    k: Optional[int] = typer.Option(None, help="Depth tested by a membership problem."),
    functional: str = typer.Option("iota"),
    partition: Optional[str] = typer.Option(None, help="Group sizes, e.g. '2,1'."),
    input: Optional[str] = typer.Option(None, "--input", help="Behavior JSON for membership."),
    gamma: float = typer.Option(2.0),
    solver_value: Optional[float] = typer.Option(None, help="Optimum reported by an external solver."),
):
    """Export a level-1 moment-matrix SDP."""
    _emit(
        ctx,
        CommandConfig(
            "export-sdp",
            n=n,
            k=k,
            functional=functional,
            partition=partition,
            problem=problem,
            input_path=input,
            output_path=output,
            gamma=gamma,
            solver_value=solver_value,
        ),
    )


@app.command()
def scan(
    ctx: typer.Context,
    n: int = typer.Option(..., help="Party count."),
    curve: str = typer.Option("ansatz", help=f"One of {', '.join(CURVES)}."),
    points: int = typer.Option(201),
    phi: Optional[float] = typer.Option(None, help="Single ansatz angle instead of a sweep."),
    output: Optional[str] = typer.Option(None),
):
    """Sweep a curve and emit CSV."""
    _emit(ctx, CommandConfig("scan", n=n, curve=curve, points=points, phi=phi, output_path=output))


if __name__ == "__main__":
    app()
