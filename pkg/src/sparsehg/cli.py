"""Command-line frontend: ``python -m sparsehg <command> ...``.

Every command writes one report (JSON by default, CSV with ``--format csv``)
to ``--out`` or stdout.  Exit codes: 0 success, 1 invalid input or usage,
2 internal inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction

from .audit import audit, canonicity_suite, worst_partition_deviation
from .counting import count_hom, hom_density, relative_density
from .errors import InconsistencyError, ValidationError
from .functions import TupleFunction, constant, cylinder, edge_indicator
from .hypergraph import Hypergraph, build, format_hypergraph, random_gnp, read_hypergraph
from .measures import RelativeMeasure, fubini_worst_deviation, iterated_integrate
from .regularity import RemovalConfig, energy_increment, removal_experiment
from .seminorms import gowers_norm_partial, gowers_norm_power
from .templates import Template, index_name, parse_index, read_template, sort_indices

BUILTIN_PATTERNS = {
    "edge": lambda k: build(k, k, [range(k)]),
    "triangle": lambda k: build(3, 2, [(0, 1), (1, 2), (0, 2)]) if k == 2 else None,
    "tetrahedron": lambda k: build(4, 3, [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]) if k == 3 else None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _probability(s: str) -> float:
    x = float(s)
    if not 0 <= x <= 1:
        raise argparse.ArgumentTypeError(f"{s} is not in [0, 1]")
    return x


def _positive_int(s: str) -> int:
    x = int(s)
    if x < 1:
        raise argparse.ArgumentTypeError(f"{s} is not a positive integer")
    return x


def _nonneg_int(s: str) -> int:
    x = int(s)
    if x < 0:
        raise argparse.ArgumentTypeError(f"{s} is negative")
    return x


def _positive_float(s: str) -> float:
    x = float(s)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"{s} is not positive")
    return x


def _index_list(s: str) -> list:
    return [parse_index(t.strip()) for t in s.split(",") if t.strip()]


def _float_list(s: str) -> list[float]:
    return [float(t) for t in s.split(",") if t.strip()]


def _assignment(s: str) -> dict:
    out = {}
    for item in filter(None, (t.strip() for t in s.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected index=vertex, got {item!r}")
        out[parse_index(key.strip())] = int(val)
    return out


def _family(s: str) -> list[tuple]:
    return [tuple(_index_list(part)) for part in s.split(";") if part.strip()]


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sparsehg", description="Counting measures, uniformity norms and "
                "removal experiments on finite hypergraphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed_required=False):
        sp.add_argument("--out", help="report path (default stdout)")
        sp.add_argument("--format", choices=["json", "csv"], default="json")
        sp.add_argument("--threads", type=_positive_int, default=None,
                        help="worker processes (default: available CPUs)")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamp, runtime and thread count from the report")
        sp.add_argument("--seed", type=int, required=seed_required, default=None)

    def measure_args(sp):
        sp.add_argument("--graph", required=True)
        sp.add_argument("--template", required=True)
        sp.add_argument("--params", type=_assignment, default={},
                        help="parameter values, e.g. w=3,u=0")

    def fn_args(sp, required=True):
        sp.add_argument("--fn", required=required,
                        help="edge-indicator | balanced-edge | const:<c> | cyl:<index>=<vertex>")
        sp.add_argument("--edge", type=_index_list, default=None,
                        help="indices read by edge-indicator/balanced-edge")

    g = sub.add_parser("gen", help="sample G^(k)(n, p)")
    g.add_argument("--n", type=_nonneg_int, required=True)
    g.add_argument("--k", type=_positive_int, required=True)
    g.add_argument("--p", type=_probability, required=True)
    common(g, seed_required=True)

    c = sub.add_parser("count", help="homomorphism counts")
    c.add_argument("--pattern", required=True)
    c.add_argument("--graph", required=True)
    c.add_argument("--gamma", help="ambient graph for the relative density")
    common(c)

    nm = sub.add_parser("norm", help="uniformity seminorm U^(V,J) of a built-in function")
    measure_args(nm)
    fn_args(nm)
    nm.add_argument("--J", type=_index_list, default=None, help="doubled indices (default: all of V)")
    common(nm)

    fb = sub.add_parser("fubini", help="worst Fubini deviation of a measure")
    measure_args(fb)
    fb.add_argument("--V0", type=_index_list, default=None,
                    help="outer block (default: worst over all proper partitions)")
    fn_args(fb, required=False)
    common(fb)

    au = sub.add_parser("audit", help="randomness audit of a graph")
    au.add_argument("--graph", required=True)
    au.add_argument("--d", type=_positive_int, default=2)
    au.add_argument("--deltas", type=_float_list, default=[0.05, 0.1, 0.2])
    au.add_argument("--samples", type=_positive_int, default=200)
    au.add_argument("--max-vertices", type=_positive_int, default=None)
    au.add_argument("--max-edges", type=_positive_int, default=None)
    au.add_argument("--canonicity", action="store_true", help="also run the canonicity checks")
    common(au, seed_required=True)

    rm = sub.add_parser("remove", help="removal experiment")
    rm.add_argument("--n", type=_positive_int, required=True)
    rm.add_argument("--k", type=_positive_int, default=2)
    rm.add_argument("--p", type=_probability, default=1.0)
    rm.add_argument("--pattern", default="triangle", help="pattern file or triangle|edge|tetrahedron")
    rm.add_argument("--delta", type=float, required=True)
    rm.add_argument("--epsilon", type=float, default=0.1)
    rm.add_argument("--trials", type=_positive_int, default=1)
    rm.add_argument("--thin", type=_probability, default=0.5)
    rm.add_argument("--dense", action="store_true")
    common(rm, seed_required=True)

    pj = sub.add_parser("project", help="energy-increment regularization of a built-in function")
    measure_args(pj)
    fn_args(pj)
    pj.add_argument("--family", type=_family, default=None,
                    help="index sets separated by ';', e.g. 'a;b' (default: singletons of V)")
    pj.add_argument("--eps", type=_positive_float, default=0.1)
    pj.add_argument("--max-rounds", type=_nonneg_int, default=None)
    common(pj)
    return p


def _default_edge(T: Template, k: int) -> tuple:
    active = T.active_edges()
    if active:
        return active[0]
    free = sort_indices(T.free)
    if len(free) < k:
        raise ValidationError("cannot choose indices for the edge indicator; pass --edge")
    return free[:k]


def builtin_function(spec: str, graph: Hypergraph, T: Template, edge=None) -> TupleFunction:
    """Resolve a named built-in tuple function."""
    if spec in ("edge-indicator", "balanced-edge"):
        idx = tuple(edge) if edge else _default_edge(T, graph.k)
        if len(idx) != graph.k:
            raise ValidationError(f"edge indicator needs {graph.k} indices, got {len(idx)}")
        f = edge_indicator(graph, idx)
        return f - graph.density() if spec == "balanced-edge" else f
    if spec.startswith("const:"):
        return constant(float(spec[6:]))
    if spec.startswith("cyl:"):
        key, sep, val = spec[4:].partition("=")
        if not sep:
            raise ValidationError("cyl expects cyl:<index>=<vertex>")
        return cylinder(graph.n, parse_index(key), int(val))
    raise ValidationError(f"unknown function {spec!r}")


def _load_pattern(name: str, k: int) -> Hypergraph:
    if name in BUILTIN_PATTERNS and not os.path.exists(name):
        K = BUILTIN_PATTERNS[name](k)
        if K is None:
            raise ValidationError(f"built-in pattern {name!r} is not {k}-uniform")
        return K
    return read_hypergraph(name)


def _measure(args) -> RelativeMeasure:
    G = read_hypergraph(args.graph)
    T = read_template(args.template)
    return RelativeMeasure(G, T, args.params)


def _frac(x: Fraction) -> dict:
    return {"exact": str(x), "value": float(x)}


def cmd_gen(args, workers):
    return random_gnp(args.n, args.k, args.p, args.seed)


def cmd_count(args, workers):
    K = read_hypergraph(args.pattern)
    A = read_hypergraph(args.graph)
    hom = count_hom(K, A, workers)
    out = {"hom": hom, "density": _frac(hom_density(K, A))}
    if args.gamma:
        out["relative_density"] = _frac(relative_density(K, A, read_hypergraph(args.gamma)))
    return out


def cmd_norm(args, workers):
    m = _measure(args)
    f = builtin_function(args.fn, m.graph, m.template, args.edge)
    J = frozenset(args.J) if args.J is not None else m.template.free
    return {
        "J": [index_name(i) for i in sort_indices(J)],
        "norm": gowers_norm_partial(m, f, J),
        "box_integral": gowers_norm_power(m, f, J) if J else m.integrate(f),
        "support": m.support_count(workers),
    }


def cmd_fubini(args, workers):
    m = _measure(args)
    out = {"support": m.support_count(workers)}
    if args.V0 is None:
        dev, (V0, V1) = worst_partition_deviation(m.graph, m.template, m.params)
    else:
        V0 = frozenset(args.V0)
        V1 = m.template.free - V0
        dev, _ = fubini_worst_deviation(m, V0, V1)
    out.update({"V0": [index_name(i) for i in sort_indices(V0)],
                "V1": [index_name(i) for i in sort_indices(V1)],
                "deviation": _frac(dev)})
    if args.fn:
        f = builtin_function(args.fn, m.graph, m.template, args.edge)
        out["direct_integral"] = m.integrate(f)
        out["iterated_integral"] = iterated_integrate(m, V0, V1, f)
    return out


def cmd_audit(args, workers):
    G = read_hypergraph(args.graph)
    rep = audit(G, args.d, args.deltas, args.samples, args.seed,
                max_vertices=args.max_vertices, max_edges=args.max_edges, workers=workers)
    out = rep.to_dict()
    if args.canonicity:
        out["canonicity"] = canonicity_suite(G, seed=args.seed)
    return out


def cmd_remove(args, workers, timing):
    K = _load_pattern(args.pattern, args.k)
    cfg = RemovalConfig(n=args.n, k=args.k, p=args.p, pattern=K, delta=args.delta,
                        epsilon=args.epsilon, trials=args.trials, seed=args.seed,
                        thin=args.thin, dense=args.dense)
    return removal_experiment(cfg, workers=workers, timing=timing)


def cmd_project(args, workers):
    m = _measure(args)
    f = builtin_function(args.fn, m.graph, m.template, args.edge)
    family = args.family if args.family is not None else [(i,) for i in m.order]
    res = energy_increment(m, f, family, args.eps, max_rounds=args.max_rounds)
    out = res.to_dict()
    out["family"] = [[index_name(i) for i in sort_indices(I)] for I in family]
    return out


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for key, val in d.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            flat.update(_flatten(val, name + "."))
        elif isinstance(val, (list, tuple)):
            flat[name] = json.dumps(val, sort_keys=True)
        else:
            flat[name] = val
    return flat


def to_csv(report: dict) -> str:
    """One row per trial or audited shape when the report has them, else a single row."""
    meta = {k: v for k, v in report.items() if k not in ("trials", "records")}
    rows = report.get("trials") or report.get("records")
    if isinstance(rows, list) and rows and isinstance(rows[0], dict):
        table = [{**_flatten(r), **_flatten({"report": meta})} for r in rows]
    else:
        table = [_flatten(report)]
    fields = sorted({k for row in table for k in row})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(table)
    return buf.getvalue()


def _config(args) -> dict:
    skip = {"out", "format", "threads", "no_timestamp"}
    conf = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(val, dict):
            val = {index_name(i): v for i, v in val.items()}
        elif isinstance(val, list):
            val = [[index_name(i) for i in v] if isinstance(v, tuple) else
                   (index_name(v) if not isinstance(v, float) else v) for v in val]
        conf[key] = val
    return conf


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    workers = args.threads or os.cpu_count() or 1
    start = time.perf_counter()
    try:
        if args.command == "gen":
            H = cmd_gen(args, workers)
            _write(format_hypergraph(H), args.out)
            return 0
        handlers = {"count": cmd_count, "norm": cmd_norm, "fubini": cmd_fubini,
                    "audit": cmd_audit, "project": cmd_project}
        if args.command == "remove":
            result = cmd_remove(args, workers, timing=not args.no_timestamp)
        else:
            result = handlers[args.command](args, workers)
    except InconsistencyError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report = {"command": args.command, "config": _config(args), "result": result}
    if not args.no_timestamp:
        report["execution"] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "runtime_s": time.perf_counter() - start,
            "threads": workers,
        }
    if args.format == "csv":
        flat = dict(result) if isinstance(result, dict) else {"result": result}
        flat.update({"command": args.command, "config": report["config"]})
        if "execution" in report:
            flat["execution"] = report["execution"]
        text = to_csv(flat)
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    _write(text, args.out)
    return 0


def main() -> None:
    sys.exit(run())
