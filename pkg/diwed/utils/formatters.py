"""Text rendering of bounds, certification reports and reproduction tables.

Every renderer returns a plain string made of boxed sections, for terminals and
MCP clients alike. JSON output is produced elsewhere (``to_dict`` + ``io.dumps``).
"""

from typing import Iterable, List, Optional, Sequence

from diwed.bounds import WitnessBound
from diwed.certify import CertificationReport
from diwed.localset import FacetReport
from diwed.quantum import SeesawResult

WIDTH = 80


def _box(title: str) -> str:
    inner = WIDTH - 2
    return (
        "╔" + "═" * inner + "╗\n"
        "║" + title.center(inner) + "║\n"
        "╚" + "═" * inner + "╝\n"
    )


def _rule() -> str:
    return "─" * WIDTH


def format_bound(b: WitnessBound) -> str:
    result = _box("WITNESS BOUND")
    result += f"Family: {b.family}\n"
    result += f"Parties: n={b.n}, depth k={b.k}\n"
    result += f"Bound: {b.bound:.10f}\n"
    if not b.valid:
        result += "Validity: ⚠ exceeds the textbook k-producible bound\n"
    if b.note:
        result += f"Note: {b.note}\n"
    return result + _rule()


def format_bound_table(bounds: Sequence[WitnessBound]) -> str:
    if not bounds:
        return "No bounds to show."
    first = bounds[0]
    result = _box(f"{first.family.upper()} BOUNDS, n={first.n}")
    result += f"{'k':>3}  {'bound':>14}  note\n"
    for b in bounds:
        flag = " ⚠" if not b.valid else ""
        result += f"{b.k:>3}  {b.bound:>14.10f}  {b.note}{flag}\n"
    return result + _rule()


def format_certification(report: CertificationReport) -> str:
    """Report with one line per depth bound, marking the ones crossed."""
    result = _box("CERTIFICATION")
    kind = "nonlocality" if report.nonlocality_depth is not None else "entanglement"
    result += f"Functional: {report.functional} ({report.witness} witness)\n"
    result += f"Observed: {report.observed:.6f}\n"
    if report.margin:
        result += f"Margin: {report.margin:.6f} ({report.sigmas:g} sigma, {report.statistics})\n"
        result += f"Adjusted: {report.adjusted:.6f}\n"
    result += "\n"
    result += f"{'k':>3}  {'bound':>12}  crossed\n"
    for c in report.bounds:
        mark = "✔" if c.crossed else "·"
        flag = "  (partition maximum)" if not c.valid else ""
        result += f"{c.k:>3}  {c.bound:>12.6f}  {mark}{flag}\n"
    result += "\n"
    if report.certified:
        result += f"Certified: {kind} depth ≥ {report.depth}\n"
    else:
        result += f"Certified: nothing beyond {kind} depth 1\n"
    for w in report.warnings:
        result += f"⚠ {w}\n"
    return result + _rule()


def format_facet(report: FacetReport) -> str:
    space = "full-correlation polytope" if report.space == "corr" else "local polytope (behavior space)"
    result = _box("FACET CHECK")
    result += f"Space: {space}, n={report.n}\n"
    result += f"Saturating vertices: {report.saturating_count} ({report.saturating_strategies} strategies)\n"
    result += f"Affine rank: {report.affine_rank} / required {report.required_rank}\n"
    result += f"Facet: {'yes' if report.is_facet else 'no'}\n"
    return result + _rule()


def format_seesaw(result_: SeesawResult, functional: str, state: Optional[str] = None) -> str:
    result = _box("SEE-SAW OPTIMUM")
    result += f"Functional: {functional}\n"
    if state:
        result += f"State (fixed): {state}\n"
    result += f"Value: {result_.value:.10f}\n"
    result += f"Restarts: {result_.restarts} (seed {result_.seed})"
    if result_.degenerate_restarts:
        result += f", {result_.degenerate_restarts} degenerate"
    result += "\n"
    result += f"Sweeps (best restart): {len(result_.history)}\n\n"
    result += "Observables (Bloch vectors, setting 0 | setting 1):\n"
    for i, pair in enumerate(result_.strategy.observables, 1):
        cells = []
        for o in pair:
            if o.is_trivial:
                cells.append(f"{'+' if o.identity > 0 else '-'}1")
            else:
                cells.append("(" + ", ".join(f"{c:+.4f}" for c in o.bloch) + ")")
        result += f"  party {i}: {cells[0]} | {cells[1]}\n"
    return result + _rule()


def format_table_rows(title: str, rows: Iterable[dict]) -> str:
    """Rows with ``label``, ``computed``, ``expected``, ``delta``, ``ok`` keys."""
    rows: List[dict] = list(rows)
    result = _box(title)
    result += f"{'entry':<28}{'computed':>14}{'expected':>14}{'delta':>12}  ok\n"
    for r in rows:
        mark = "✔" if r["ok"] else "✘"
        result += f"{r['label']:<28}{r['computed']:>14.6f}{r['expected']:>14.6f}{r['delta']:>12.2e}  {mark}\n"
    failed = sum(1 for r in rows if not r["ok"])
    result += "\n"
    result += "All entries within tolerance\n" if not failed else f"{failed} entr{'y' if failed == 1 else 'ies'} outside tolerance\n"
    return result + _rule()


def format_sdp_summary(meta: dict, block_sizes: Sequence[int], n_vars: int, path: str) -> str:
    result = _box("SDP EXPORT")
    result += f"Problem: {meta.get('problem', 'sdp')}\n"
    result += f"File: {path}\n"
    result += f"Variables: {n_vars}\n"
    result += f"Blocks: {len(block_sizes)} (sizes {', '.join(str(s) for s in block_sizes)})\n"
    result += f"Sense: {meta.get('sense', '')}\n"
    result += "\n💡 Solve externally with any SDPA-format solver; names are in the .json sidecar\n"
    return result + _rule()


def format_error_message(error_type: str, error_details: str, suggestions: list = None) -> str:
    """Format error messages with helpful suggestions."""
    result = _box("ERROR")
    result += f"Error Type: {error_type}\n"
    result += f"Details: {error_details}\n\n"

    if suggestions:
        result += "Suggestions:\n"
        for suggestion in suggestions:
            result += f"  • {suggestion}\n"
        result += "\n"

    result += "💡 Use 'knowledge://witness-guide' resource for usage help\n"
    result += _rule()
    return result
