"""Command line front end.

Every subcommand reads mesh files, prints exactly one summary line of
compact JSON to stdout, and optionally writes artifacts (--json, --dot,
--csv). Outputs are byte-identical across repeated runs with the same
inputs and seed.

Exit codes: 0 success (compare: Equivalent), 1 NotEquivalent,
2 Inconclusive, 3 selftest failure, 64 usage error, 65 bad or
inconsistent input data, 66 unreadable input file.
"""

import argparse
import json
import sys

from .advect import apply_map, map_from_dict
from .circulation import (
    check_circulation_axioms,
    circulation_function,
    solve_circulations,
)
from .equivalence import Tolerances, compare_cosets, compare_functions
from .errors import ReebflowError
from .freezing import freeze
from .invariants import edge_moments, global_moments, invariants_to_csv
from .mesh import dump_mesh_json, load_mesh, validate
from .reeb import build_reeb, graph_to_dot, graph_to_json
from .selftest import run_selftest

EXIT_SELFTEST = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_IO = 66


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract wants 64
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(doc: dict) -> None:
    line = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    sys.stdout.write(line + "\n")


def _read_mesh(path: str, fmt: str):
    with open(path, "rb") as fh:
        data = fh.read()
    return load_mesh(data, fmt)


def _write(path: str, payload) -> None:
    mode = "wb" if isinstance(payload, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(payload)


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _tolerances(args) -> Tolerances | None:
    fields = {}
    for name in ("tol_f", "tol_mass", "tol_profile", "tol_area", "tol_circ"):
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    return Tolerances(**fields) if fields else None


def _cmd_validate(args) -> int:
    mesh = _read_mesh(args.mesh, args.format)
    report = validate(mesh)
    counts = {"min": 0, "saddle": 0, "max": 0}
    for c in report.critical_points:
        counts[c.kind] += 1
    doc = {
        "genus": report.genus,
        "euler_characteristic": report.euler_characteristic,
        "total_area": report.total_area,
        "vertices": mesh.n_vertices,
        "triangles": mesh.n_triangles,
        "critical_points": counts,
    }
    if args.json:
        _write(args.json, json.dumps(doc, sort_keys=True).encode("ascii"))
    _emit(doc)
    return 0


def _cmd_reeb(args) -> int:
    mesh = _read_mesh(args.mesh, args.format)
    graph = build_reeb(mesh, n_levels=args.levels)
    if args.dot:
        _write(args.dot, graph_to_dot(graph))
    if args.json:
        _write(args.json, graph_to_json(graph))
    _emit({
        "vertices": graph.n_vertices,
        "edges": graph.n_edges,
        "b1": graph.b1(),
        "total_mass": graph.total_mass,
    })
    return 0


def _cmd_invariants(args) -> int:
    mesh = _read_mesh(args.mesh, args.format)
    graph = build_reeb(mesh, n_levels=args.levels)
    doc = {
        "b1": graph.b1(),
        "total_mass": graph.total_mass,
        "global_moments": [float(m) for m in global_moments(graph)],
        "edges": [
            {
                "id": e.id, "src": e.src, "dst": e.dst, "mass": e.mass,
                "moments": [float(m) for m in edge_moments(graph, e.id)],
            }
            for e in graph.edges
        ],
    }
    if args.csv:
        _write(args.csv, invariants_to_csv(graph))
    if args.json:
        _write(args.json, json.dumps(doc, sort_keys=True).encode("ascii"))
    _emit({
        "b1": doc["b1"],
        "total_mass": doc["total_mass"],
        "global_moments": doc["global_moments"],
    })
    return 0


def _cmd_circulation(args) -> int:
    mesh = _read_mesh(args.mesh, args.format)
    graph = build_reeb(mesh, n_levels=args.levels)
    space = solve_circulations(graph)  # NoCirculation on nonzero mean
    cg = circulation_function(mesh, graph)
    report = check_circulation_axioms(cg)
    if args.json:
        doc = cg.to_dict()
        doc["basis"] = [[float(x) for x in vec] for vec in space.basis]
        doc["dimension"] = space.dimension
        _write(args.json, json.dumps(doc, sort_keys=True).encode("ascii"))
    _emit({
        "c_minus": [float(c) for c in cg.c_minus],
        "dimension": space.dimension,
        "worst_residual": report.worst(),
        "axioms_pass": report.passed,
    })
    return 0


def _cmd_freezing(args) -> int:
    mesh = _read_mesh(args.mesh, args.format)
    graph = build_reeb(mesh, n_levels=args.levels)
    fz = freeze(mesh, graph)
    if args.json:
        _write(args.json, fz.to_json())
    _emit({
        "reduced_vertices": fz.reduced.n_vertices,
        "reduced_edges": fz.reduced.n_edges,
        "b1": graph.b1(),
        "half_twist": {str(k): int(v) for k, v in fz.half_twist.items()},
    })
    return 0


def _cmd_compare(args) -> int:
    mesh_f = _read_mesh(args.mesh_f, args.format)
    mesh_g = _read_mesh(args.mesh_g, args.format)
    tol = _tolerances(args)
    cosets = (mesh_f.has_cochain() and mesh_g.has_cochain()
              and args.group != "ham")
    if cosets:
        verdict = compare_cosets(mesh_f, mesh_g, args.group, tol)
    else:
        verdict = compare_functions(mesh_f, mesh_g, args.group, tol)
    payload = verdict.to_json()
    if args.json:
        _write(args.json, payload)
    sys.stdout.buffer.write(payload + b"\n")
    return verdict.exit_code


def _cmd_advect(args) -> int:
    mesh = _read_mesh(args.mesh, args.format)
    with open(args.map, "rb") as fh:
        doc = json.loads(fh.read())
    out = apply_map(mesh, map_from_dict(doc))
    if args.json:
        _write(args.json, dump_mesh_json(out))
    _emit({
        "kind": doc.get("kind"),
        "vertices": out.n_vertices,
        "triangles": out.n_triangles,
        "cochain": out.has_cochain(),
    })
    return 0


def _cmd_selftest(args) -> int:
    ok = run_selftest(seed=args.seed)
    return 0 if ok else EXIT_SELFTEST


def _add_common(sub, levels=False, json_out=True):
    sub.add_argument("--format", choices=("json", "off"), default="json",
                     help="input mesh format")
    if levels:
        sub.add_argument("--levels", type=int, default=64,
                         help="uniform profile samples per edge")
    if json_out:
        sub.add_argument("--json", metavar="PATH",
                         help="write the full JSON artifact here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reebflow", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)

    p = subs.add_parser("validate", help="check the closed-surface axioms")
    p.add_argument("mesh")
    _add_common(p)
    p.set_defaults(func=_cmd_validate)

    p = subs.add_parser("reeb", help="build the measured Reeb graph")
    p.add_argument("mesh")
    _add_common(p, levels=True)
    p.add_argument("--dot", metavar="PATH", help="write a DOT rendering")
    p.set_defaults(func=_cmd_reeb)

    p = subs.add_parser("invariants", help="edge and global moments")
    p.add_argument("mesh")
    _add_common(p, levels=True)
    p.add_argument("--csv", metavar="PATH", help="write the moment table")
    p.set_defaults(func=_cmd_invariants)

    p = subs.add_parser("circulation",
                        help="circulation function of the mesh cochain")
    p.add_argument("mesh")
    _add_common(p, levels=True)
    p.set_defaults(func=_cmd_circulation)

    p = subs.add_parser("freezing", help="freezing data of the level circles")
    p.add_argument("mesh")
    _add_common(p, levels=True)
    p.set_defaults(func=_cmd_freezing)

    p = subs.add_parser("compare", help="decide equivalence of two fields")
    p.add_argument("mesh_f")
    p.add_argument("mesh_g")
    _add_common(p)
    p.add_argument("--group", choices=("sdiff", "sdiff0", "ham"),
                   default="sdiff")
    for name in ("tol-f", "tol-mass", "tol-profile", "tol-area", "tol-circ"):
        p.add_argument(f"--{name}", type=_positive_float, default=None)
    p.set_defaults(func=_cmd_compare)

    p = subs.add_parser("advect", help="apply an area-preserving map")
    p.add_argument("mesh")
    p.add_argument("map", help="map description JSON")
    _add_common(p)
    p.set_defaults(func=_cmd_advect)

    p = subs.add_parser("selftest", help="run the acceptance criteria")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ReebflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
