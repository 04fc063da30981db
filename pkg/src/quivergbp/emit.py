"""DOT, JSON and plain-text renderings.  All output is deterministic."""

from __future__ import annotations

import json

from .algebra import BoundPathAlgebra
from .gbp import CopyOrigin, ExpandedPresentation, GbpAlgebra
from .quiver import Quiver
from .simplify import SearchReport

FORMAT_VERSION = 1
_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def algebra_label(a: BoundPathAlgebra, fallback: str = "A") -> str:
    """``k`` or ``k²`` for semisimple algebras, otherwise the algebra's name."""
    if not a.quiver.arrows:
        n = len(a.quiver.vertices)
        return "k" if n == 1 else "k" + str(n).translate(_SUPERSCRIPT)
    return a.name or fallback


def emit_dot(obj: Quiver | GbpAlgebra | BoundPathAlgebra, name: str | None = None) -> str:
    if isinstance(obj, BoundPathAlgebra):
        name = name or obj.name
        obj = obj.quiver
    lines = [f"digraph {_q(name or getattr(obj, 'name', None) or 'Q')} {{", "  rankdir=LR;"]
    if isinstance(obj, GbpAlgebra):
        q = obj.gamma
        for v in q.vertices:
            label = algebra_label(obj.algebra_at(v), f"A{v}")
            lines.append(f"  {_q(v)} [label={_q(f'{label} ({v})')}];")
    else:
        q = obj
        lines += [f"  {_q(v)};" for v in q.vertices]
    for a in q.arrows:
        lines.append(f"  {_q(a.source)} -> {_q(a.target)} [label={_q(a.name)}];")
    return "\n".join(lines + ["}"]) + "\n"


# ---------- JSON ----------

def quiver_to_json(q: Quiver) -> dict:
    return {"vertices": list(q.vertices),
            "arrows": [[a.name, a.source, a.target] for a in q.arrows]}


def algebra_to_json(a: BoundPathAlgebra) -> dict:
    return {"name": a.name, "quiver": quiver_to_json(a.quiver),
            "relations": [str(r) for r in a.relations]}


def gbp_to_json(g: GbpAlgebra) -> dict:
    return {
        "gamma": quiver_to_json(g.gamma),
        "family": {v: {"label": algebra_label(a, f"A{v}"), **algebra_to_json(a)}
                   for v, a in g.family},
        "relations_I": [str(r) for r in g.relations],
    }


def expansion_to_json(e: ExpandedPresentation, name: str | None = None) -> dict:
    origins = {}
    for arrow, o in e.arrow_origin.items():
        if isinstance(o, CopyOrigin):
            origins[arrow] = {"copy_of": o.gamma_arrow, "from": o.source, "to": o.target}
        else:
            origins[arrow] = {"internal_to": o.gamma_vertex, "arrow": o.arrow}
    return {
        "format": FORMAT_VERSION,
        "gbp": name,
        "quiver": quiver_to_json(e.quiver),
        "vertex_origin": {v: list(o) for v, o in e.vertex_origin.items()},
        "arrow_origin": origins,
        "relations": [str(r) for r in e.algebra.relations],
    }


def report_to_json(report: SearchReport, algebra: BoundPathAlgebra) -> dict:
    results = []
    for r in report.results:
        results.append({
            "partition": [list(b) for b in r.partition.blocks],
            "rgs": "".join(map(str, r.rgs)) if max(r.rgs, default=0) < 10 else list(r.rgs),
            "labelling": r.labelling.describe(),
            "trivial": r.trivial,
            "equivalent_to": list(r.equivalent_to),
            **gbp_to_json(r.gbp),
        })
    return {
        "format": FORMAT_VERSION,
        "input": algebra_to_json(algebra),
        "vertex_order": list(report.vertex_order),
        "partitions_examined": report.partitions_examined,
        "coherent_partitions": report.coherent_partitions,
        "results": results,
        "simplifiable": report.simplifiable,
        "diagnostics": list(report.diagnostics),
    }


def dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def report_summary(report: SearchReport) -> str:
    lines = [
        f"algebra: {report.input_name or '?'}",
        f"partitions examined: {report.partitions_examined}",
        f"coherent partitions: {report.coherent_partitions}",
    ]
    for i, r in enumerate(report.results):
        kind = "trivial" if r.trivial else "NON-TRIVIAL"
        gamma = r.gbp.gamma
        family = ", ".join(f"{v}:{algebra_label(a, 'A' + v)}" for v, a in r.gbp.family)
        same = f"; equivalent to #{', #'.join(map(str, r.equivalent_to))}" if r.equivalent_to else ""
        lines.append(f"  #{i} {r.partition} {kind}: gamma {len(gamma.vertices)} vertices, "
                     f"{len(gamma.arrows)} arrows; family {family}; "
                     f"|I| = {len(r.gbp.relations)}{same}")
    lines += [f"  ! {d}" for d in report.diagnostics]
    lines.append("simplifiable: " + ("yes" if report.simplifiable else "no"))
    return "\n".join(lines) + "\n"


def emit_report(report: SearchReport, algebra: BoundPathAlgebra, fmt: str = "json") -> str:
    if fmt == "json":
        return dump_json(report_to_json(report, algebra))
    return report_summary(report)
