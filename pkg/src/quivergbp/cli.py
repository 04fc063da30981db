"""Command-line interface.

Exit codes: 0 ok, 1 usage, 2 parse, 3 validation, 4 cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .algebra import DEFAULT_NMAX, Status, check_admissible, dimension
from .dsl import Document, ParseError, document_for_gbp, parse, serialize
from .emit import dump_json, emit_dot, emit_report, expansion_to_json, gbp_to_json
from .errors import CapExceeded, InconclusiveAdmissibility, ValidationError
from .gbp import expand, validate_gbp
from .quiver import VertexPartition
from .simplify import (DEFAULT_LABELLING_CAP, build_simplification, canonical_labelling,
                       enumerate_labellings, is_coherent, is_compatible, search_simplifications)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_CAP = range(5)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load(path: str) -> Document:
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return parse(source, path)


def _algebra(doc: Document, name: str):
    if name not in doc.algebras:
        raise UsageError(f"no algebra named {name!r} (have: {', '.join(doc.algebras) or 'none'})")
    return doc.algebras[name]


def _gbp(doc: Document, name: str):
    if name not in doc.gbps:
        raise UsageError(f"no gbp named {name!r} (have: {', '.join(doc.gbps) or 'none'})")
    return doc.gbps[name]


def cmd_check(args, out) -> int:
    doc = _load(args.file)
    failed = False
    for name, a in doc.algebras.items():
        adm = check_admissible(a, args.nmax)
        line = f"algebra {name}: {adm.status.value}"
        if adm.status is Status.ADMISSIBLE:
            line += f" (J^{adm.bound} in I)"
        else:
            line += f": {adm.reason}"
            failed = True
        print(line, file=out)
    for name, g in doc.gbps.items():
        problems = validate_gbp(g, args.nmax)
        print(f"gbp {name}: " + ("valid" if not problems else "invalid"), file=out)
        for msg in problems:
            print(f"  {msg}", file=out)
        failed = failed or bool(problems)
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_expand(args, out) -> int:
    doc = _load(args.file)
    e = expand(_gbp(doc, args.gbp), args.nmax)
    if args.format == "json":
        out.write(dump_json(expansion_to_json(e, args.gbp)))
    elif args.format == "dot":
        out.write(emit_dot(e.quiver, args.gbp))
    else:
        name = f"{args.gbp}_expanded"
        out.write(serialize(Document({name: replace(e.algebra, name=name)})))
    return EXIT_OK


def cmd_simplify(args, out) -> int:
    doc = _load(args.file)
    a = _algebra(doc, args.algebra)
    try:
        p = (VertexPartition.parse(args.partition) if args.partition
             else VertexPartition.identity(a.quiver.vertices))
    except ValueError as exc:
        raise UsageError(f"bad --partition: {exc}") from exc
    if not p.covers(a.quiver):
        raise UsageError(f"partition {p.spec()} does not cover the vertices of {args.algebra}")
    check = is_coherent(a.quiver, p)
    if not check:
        print(f"not coherent: {check}", file=out)
        return EXIT_VALIDATION
    if args.labelling is None:
        z = canonical_labelling(a.quiver, p)
    else:
        zs = enumerate_labellings(a.quiver, p, cap=args.labelling + 1)
        if args.labelling >= len(zs):
            raise UsageError(f"labelling index {args.labelling} out of range ({len(zs)} available)")
        z = zs[args.labelling]
    check = is_compatible(a.relations, z, strict=args.strict, nmax=args.nmax)
    if not check:
        print(f"not compatible: {check}", file=out)
        return EXIT_VALIDATION
    g = build_simplification(a, z, nmax=args.nmax, strict=args.strict)
    name = f"{args.algebra}_simplified"
    if args.format == "json":
        out.write(dump_json({"format": 1, "partition": [list(b) for b in p.blocks],
                             "labelling": z.describe(), **gbp_to_json(g)}))
    elif args.format == "dot":
        out.write(emit_dot(g, name))
    else:
        out.write(serialize(document_for_gbp(g, name)))
    return EXIT_OK


def cmd_search(args, out) -> int:
    doc = _load(args.file)
    a = _algebra(doc, args.algebra)
    report = search_simplifications(a, labelling_cap=args.labelling_cap,
                                    max_vertices=args.max_vertices,
                                    all_labellings=args.all_labellings,
                                    strict=args.strict, nmax=args.nmax)
    out.write(emit_report(report, a, args.format))
    return EXIT_OK


def cmd_dim(args, out) -> int:
    doc = _load(args.file)
    print(dimension(_algebra(doc, args.algebra), args.nmax), file=out)
    return EXIT_OK


def cmd_dot(args, out) -> int:
    doc = _load(args.file)
    if args.target in doc.gbps:
        out.write(emit_dot(doc.gbps[args.target], args.target))
    elif args.target in doc.algebras:
        out.write(emit_dot(doc.algebras[args.target], args.target))
    else:
        raise UsageError(f"no algebra or gbp named {args.target!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quivergbp", description=__doc__.splitlines()[0])
    parser.add_argument("--nmax", type=int, default=DEFAULT_NMAX,
                        help="largest n tried when certifying J^n in I (default %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="validate blocks and test admissibility")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("expand", help="expanded presentation of a gbp block")
    p.add_argument("file")
    p.add_argument("--gbp", required=True)
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("simplify", help="simplification for one partition")
    p.add_argument("file")
    p.add_argument("--algebra", required=True)
    p.add_argument("--partition", help='blocks such as "1,2|3|4,5,6" (default: singletons)')
    p.add_argument("--labelling", type=int, help="index into the labelling enumeration")
    p.add_argument("--strict", action="store_true", help="literal set reading of closure")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("search", help="search all partitions for simplifications")
    p.add_argument("file")
    p.add_argument("--algebra", required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--labelling-cap", type=int, default=DEFAULT_LABELLING_CAP)
    p.add_argument("--max-vertices", type=int, default=12)
    p.add_argument("--all-labellings", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("dim", help="dimension of an algebra block")
    p.add_argument("file")
    p.add_argument("--algebra", required=True)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("dot", help="DOT rendering of an algebra or gbp block")
    p.add_argument("file")
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, InconclusiveAdmissibility) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        for d in getattr(exc, "diagnostics", ()):
            print(f"  {d}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
