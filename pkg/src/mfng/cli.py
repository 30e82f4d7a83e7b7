"""Command-line front end.

Subcommands: moments, features, degree-dist, fit, sample, compare.  All
output is deterministic byte for byte given the same inputs and seed (no
timestamps, fixed orderings, fixed float formatting).

Exit codes: 0 success, 1 usage error, 2 bad input data (parse, schema, or
validation failure), 3 runtime failure (e.g. the fast sampler stalled).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .errors import (
    MfngError,
    ParseError,
    SchemaError,
    StalledError,
)
from .fit import FitConfig, _expected_feature, fit as fit_measure
from .features import (
    degree_distribution,
    feature_vector,
    from_edge_list,
)
from .measure import (
    DEFAULT_FEATURES,
    GeneratingMeasure,
    edge_moments,
    expected_feature_vector,
    make_measure,
    parse_feature,
)
from .sampler import FastSamplerConfig, fast_sample, naive_sample, noisy_sample

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def read_edge_list(path: str) -> list[tuple[int, int]]:
    """Parse a whitespace-separated edge list.

    Lines starting with '#' and blank lines are skipped; every other line
    must hold exactly two integers.  Pairs come back in file order with no
    interpretation (no deduping, no symmetrizing).
    """
    pairs: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(
                    f"{path}:{lineno}: expected two integers, got {len(parts)} fields",
                    line=lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: expected two integers, got {stripped!r}",
                    line=lineno) from None
            pairs.append((u, v))
    return pairs


def _fmt(value: float) -> str:
    """17 significant digits: enough to round-trip a double exactly."""
    return format(float(value), ".17g")


def write_measure(measure: GeneratingMeasure, path: str) -> None:
    """Serialize a measure as a small JSON document (full float precision)."""
    lengths = "[" + ", ".join(_fmt(x) for x in measure.lengths.tolist()) + "]"
    rows = ",\n    ".join(
        "[" + ", ".join(_fmt(x) for x in row) + "]"
        for row in measure.probs.tolist())
    text = (
        "{\n"
        f'  "schema_version": {SCHEMA_VERSION},\n'
        f'  "m": {measure.m},\n'
        f'  "k": {measure.k},\n'
        f'  "lengths": {lengths},\n'
        f'  "probs": [\n    {rows}\n  ]\n'
        "}\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_measure(path: str) -> GeneratingMeasure:
    """Load and validate a measure document."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: measure document must be a JSON object")
    for key in ("schema_version", "m", "k", "lengths", "probs"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: unsupported schema_version {doc['schema_version']!r}")
    m, k = doc["m"], doc["k"]
    if not isinstance(m, int) or not isinstance(k, int):
        raise SchemaError(f"{path}: m and k must be integers")
    lengths = doc["lengths"]
    probs = doc["probs"]
    if (not isinstance(lengths, list) or len(lengths) != m
            or not all(isinstance(x, (int, float)) for x in lengths)):
        raise SchemaError(f"{path}: lengths must be a list of {m} numbers")
    if (not isinstance(probs, list) or len(probs) != m
            or not all(isinstance(row, list) and len(row) == m
                       and all(isinstance(x, (int, float)) for x in row)
                       for row in probs)):
        raise SchemaError(f"{path}: probs must be a {m}x{m} matrix")
    return make_measure(lengths, probs, k)


def write_edge_list(graph, path: str, header_lines: Sequence[str]) -> None:
    """Write edges one per line, endpoints ascending, lines sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for u, v in graph.edge_array().tolist():
            fh.write(f"{u}\t{v}\n")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _emit_table(rows: list[tuple], header: tuple, fmt: str, out) -> None:
    """Aligned text ('text') or RFC-4180-style CSV ('csv')."""
    if fmt == "csv":
        out.write(",".join(header) + "\r\n")
        for row in rows:
            out.write(",".join(row) + "\r\n")
        return
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for row in rows:
        out.write("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n")


def _parse_features_arg(spec: str) -> tuple[str, ...]:
    keys = tuple(key.strip() for key in spec.split(",") if key.strip())
    if not keys:
        raise SchemaError("empty feature list")
    for key in keys:
        parse_feature(key)
    return keys


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_moments(args) -> int:
    measure = read_measure(args.measure)
    features = _parse_features_arg(args.features)
    expectations = expected_feature_vector(measure, args.nodes, features)
    moments = edge_moments(measure, args.nodes)
    rows = [(key, _fmt(value)) for key, value in expectations.items()]
    rows.append(("edge_std", _fmt(moments.std)))
    _emit_table(rows, ("feature", "expected"), args.format, sys.stdout)
    return EXIT_OK


def cmd_features(args) -> int:
    graph = from_edge_list(read_edge_list(args.graph))
    counts = feature_vector(graph, _parse_features_arg(args.features))
    rows = [("nodes", str(graph.n))]
    rows += [(key, str(value)) for key, value in counts.items()]
    _emit_table(rows, ("feature", "count"), args.format, sys.stdout)
    return EXIT_OK


def cmd_degree_dist(args) -> int:
    graph = from_edge_list(read_edge_list(args.graph))
    dist = degree_distribution(graph)
    ccdf = dist.ccdf()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("degree,count,ccdf\r\n")
        for d, count in enumerate(dist.counts.tolist()):
            c = _fmt(ccdf[d]) if ccdf.size else _fmt(0.0)
            fh.write(f"{d},{count},{c}\r\n")
    sys.stdout.write(f"wrote {dist.counts.size} degree rows to {args.out}\n")
    return EXIT_OK


def cmd_fit(args) -> int:
    graph = from_edge_list(read_edge_list(args.graph))
    target = feature_vector(graph, DEFAULT_FEATURES)
    k = None if args.k == "auto" else int(args.k)
    config = FitConfig(
        m=args.m, k=k, restarts=args.restarts, seed=args.seed)
    result = fit_measure(target, graph.n, config)
    sys.stdout.write(
        f"fit: m={args.m} k={result.k} objective={_fmt(result.objective)} "
        f"restart={result.restart} of {result.restarts}\n")
    rows = []
    for key, observed in target.items():
        expected = _expected_feature(result.measure, graph.n, key)
        rows.append((key, str(observed), _fmt(expected), _fmt(result.ratios[key])))
    _emit_table(rows, ("feature", "actual", "expected", "ratio"), args.format, sys.stdout)
    write_measure(result.measure, args.out)
    sys.stdout.write(f"wrote measure to {args.out}\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    measure = read_measure(args.measure)
    rng = np.random.default_rng(args.seed)
    config = FastSamplerConfig(accuracy=args.accuracy)
    if args.method == "naive":
        graph = naive_sample(args.nodes, measure, rng)
    elif args.method == "fast":
        graph = fast_sample(args.nodes, measure, config, rng)
    elif args.method == "noisy":
        graph = noisy_sample(args.nodes, measure, args.noise, config, rng)
    else:  # pragma: no cover - argparse restricts choices
        raise SchemaError(f"unknown method {args.method!r}")
    header = [
        "mfng sample",
        f"measure: {args.measure}",
        f"method: {args.method}",
        f"nodes: {args.nodes}",
        f"seed: {args.seed}",
        f"accuracy: {_fmt(args.accuracy)}",
    ]
    if args.method == "noisy":
        header.append(f"noise: {_fmt(args.noise)}")
    write_edge_list(graph, args.out, header)
    sys.stdout.write(f"wrote {graph.edge_count} edges on {graph.n} nodes to {args.out}\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    graph = from_edge_list(read_edge_list(args.graph))
    measure = read_measure(args.measure)
    features = _parse_features_arg(args.features)
    actual = feature_vector(graph, features)
    expected = expected_feature_vector(measure, graph.n, features)
    rows = []
    for key, count in actual.items():
        exp = expected.value(key)
        ratio = _fmt(exp / count) if count > 0 else ""
        rows.append((key, str(count), _fmt(exp), ratio))
    _emit_table(rows, ("feature", "actual", "expected", "ratio"), args.format, sys.stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfng", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    default_features = ",".join(DEFAULT_FEATURES)

    p = sub.add_parser("moments", help="expected feature values of a measure")
    p.add_argument("--measure", required=True, help="measure JSON file")
    p.add_argument("--nodes", type=int, required=True, help="number of nodes n")
    p.add_argument("--features", default=default_features,
                   help=f"comma-separated feature keys (default {default_features})")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("features", help="exact feature counts of a graph")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--features", default=default_features)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("degree-dist", help="degree histogram and CCDF as CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_degree_dist)

    p = sub.add_parser("fit", help="fit a measure to a graph's counts")
    p.add_argument("--graph", required=True)
    p.add_argument("--m", type=int, required=True, help="number of categories")
    p.add_argument("--k", default="auto",
                   help="recursion depth, or 'auto' to sweep around log_m(n)")
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output measure JSON path")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="sample a graph from a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--method", choices=("fast", "naive", "noisy"), default="fast")
    p.add_argument("--accuracy", type=float, default=1.0,
                   help="fast-sampler accuracy parameter (Poisson rate divisor)")
    p.add_argument("--noise", type=float, default=0.0,
                   help="noise amplitude for --method noisy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output edge-list path")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("compare", help="graph counts vs. measure expectations")
    p.add_argument("--graph", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--features", default=default_features)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    try:
        k = args.k  # validate 'auto'/int early for fit
    except AttributeError:
        k = None
    if k is not None and k != "auto":
        try:
            int(k)
        except ValueError:
            sys.stderr.write(f"usage error: --k must be an integer or 'auto', got {k!r}\n")
            return EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except StalledError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME
    except MfngError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except ArithmeticError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
