"""Command line front end: every operation behind one executable, JSON out.

Output is machine-first: compact JSON with sorted keys, so the same
invocation with the same seed is byte-identical.  Exact entries travel as
strings through the same formatter the library parses, floats as their
shortest round-trip repr.  --pretty only re-indents.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from typing import Optional

from .exact import ExactMatrix, format_scalar, load_matrix, rank as exact_rank
from .graphs import (
    Digraph,
    GraphFormatError,
    VertexPartition,
    adjacency,
    degree_partition,
    hermitian_adjacency,
    parse_graph_line,
)
from .pencils import (
    DEFAULT_TRIALS,
    RELATION_KINDS,
    SpectrumRelation,
    cospectrality_check,
)
from .snf import last_invariant_factor, smith_normal_form

EXIT_OK = 0
EXIT_STRICT = 1
EXIT_USAGE = 2
EXIT_CONTRADICTION = 3

_HEADERS = (">>graph6<<", ">>digraph6<<")


class CliError(Exception):
    """Usage-level failure with a message for stderr."""


def _default_seed() -> int:
    raw = os.environ.get("SPECTRA_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"SPECTRA_SEED must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# input loading and serialization
# ---------------------------------------------------------------------------


def _load_graph(path: str):
    """One graph6/digraph6 value from a file, or from stdin for '-'."""
    if path == "-":
        line = sys.stdin.readline()
        if not line:
            raise CliError("expected a graph6 line on stdin")
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                line = fh.readline()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}") from None
    line = line.strip()
    for header in _HEADERS:
        if line.startswith(header):
            line = line[len(header):]
    if not line:
        raise CliError(f"no graph data in {path}")
    try:
        return parse_graph_line(line)
    except GraphFormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _parse_partition(spec: str, n: int) -> Optional[VertexPartition]:
    """'degree' -> None (per-graph default); 'explicit:0,1/2,3' or '0,1/2,3'."""
    if spec == "degree":
        return None
    body = spec[len("explicit:"):] if spec.startswith("explicit:") else spec
    classes = []
    for chunk in body.split("/"):
        chunk = chunk.strip()
        if not chunk:
            raise CliError(f"empty class in partition spec {spec!r}")
        try:
            classes.append([int(tok) for tok in chunk.split(",")])
        except ValueError:
            raise CliError(f"non-integer vertex in partition spec {spec!r}") from None
    try:
        return VertexPartition(n, classes)
    except ValueError as exc:
        raise CliError(f"invalid partition {spec!r}: {exc}") from None


def _matrix_json(m: ExactMatrix) -> list:
    return [[format_scalar(x) for x in row] for row in m.entries]


def _float_json(x) -> str:
    if isinstance(x, complex) or (hasattr(x, "imag") and float(x.imag) != 0.0):
        re, im = float(x.real), float(x.imag)
        sign = "+" if im >= 0 else "-"
        return f"{re!r}{sign}{abs(im)!r}i"
    return repr(float(x.real if hasattr(x, "real") else x))


def _numeric_matrix_json(q) -> list:
    return [[_float_json(x) for x in row] for row in q.tolist()]


def _emit(payload: dict, args) -> None:
    text = json.dumps(
        payload,
        sort_keys=True,
        indent=2 if args.pretty else None,
        separators=None if args.pretty else (",", ":"),
    )
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _relation_for(args, g) -> SpectrumRelation:
    part = _parse_partition(args.partition, g.n)
    try:
        return SpectrumRelation(args.relation, part)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _cmd_check(args) -> int:
    g = _load_graph(args.graph_a)
    h = _load_graph(args.graph_b)
    relation = _relation_for(args, g)
    try:
        result = cospectrality_check(
            g, h, relation, mode=args.mode, trials=args.trials, seed=args.seed
        )
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from None
    _emit(
        {
            "command": "check",
            "relation": result.relation,
            "equal": result.equal,
            "mode": result.mode,
            "trials": result.trials,
            "prime": result.prime,
            "seed": result.seed,
            "reason": result.reason,
        },
        args,
    )
    return EXIT_STRICT if args.strict and not result.equal else EXIT_OK


def _shared_partition_or_none(g, h, explicit: Optional[VertexPartition]):
    if explicit is not None:
        return explicit, None
    pg, ph = degree_partition(g), degree_partition(h)
    if pg.classes != ph.classes:
        return None, "degree partitions differ"
    return pg, None


def _cmd_reconstruct_q(args) -> int:
    from .similarity import (
        orthogonal_similarity_exists,
        reconstruct_q_constructive,
        reconstruct_q_exact,
    )

    g = _load_graph(args.graph_a)
    h = _load_graph(args.graph_b)
    if isinstance(g, Digraph) != isinstance(h, Digraph):
        raise CliError("cannot mix a graph with a digraph")
    if g.n != h.n:
        raise CliError(f"order mismatch: {g.n} vs {h.n}")
    hermitian = isinstance(g, Digraph)
    a = hermitian_adjacency(g) if hermitian else adjacency(g)
    b = hermitian_adjacency(h) if hermitian else adjacency(h)
    part, mismatch = _shared_partition_or_none(
        g, h, _parse_partition(args.partition, g.n)
    )

    payload: dict = {"command": "reconstruct-q", "order": g.n}
    if mismatch:
        payload.update(
            {
                "exists": False,
                "status": "refuted",
                "path_used": None,
                "q": None,
                "level": None,
                "walk_divisor": None,
                "divisibility_ok": None,
                "residuals": None,
                "reason": mismatch,
            }
        )
        _emit(payload, args)
        return EXIT_STRICT if args.strict else EXIT_OK

    exists = orthogonal_similarity_exists(a, b, part)
    path = args.path
    res = None
    path_used = None
    if path in ("exact", "auto"):
        res = reconstruct_q_exact(a, b, part)
        path_used = "exact"
    if path == "constructive" or (
        path == "auto" and res is not None and res.status == "rank-deficient"
    ):
        res = reconstruct_q_constructive(a, b, part, tol=args.tol)
        path_used = "constructive"

    cert = res.certificate
    q_json = None
    if cert is not None and cert.q is not None:
        if isinstance(cert.q, ExactMatrix):
            q_json = _matrix_json(cert.q)
        else:
            q_json = _numeric_matrix_json(cert.q)
    payload.update(
        {
            "exists": exists,
            "status": res.status,
            "path_used": path_used,
            "q": q_json,
            "level": cert.level if cert else None,
            "walk_divisor": cert.walk_divisor if cert else None,
            "divisibility_ok": cert.divisibility_ok if cert else None,
            "residuals": dict(cert.residuals) if cert and cert.residuals else None,
            "reason": res.reason,
        }
    )
    _emit(payload, args)
    return EXIT_STRICT if args.strict and res.status != "certified" else EXIT_OK


def _cmd_snf(args) -> int:
    try:
        with open(args.load, "r", encoding="utf-8") as fh:
            m = load_matrix(fh.read())
    except OSError as exc:
        raise CliError(f"cannot read {args.load}: {exc}") from None
    except ValueError as exc:
        raise CliError(f"{args.load}: {exc}") from None
    if not m.is_integral():
        raise CliError("Smith normal form needs an integer matrix")
    dec = smith_normal_form(m)
    _emit(
        {
            "command": "snf",
            "rows": m.rows,
            "cols": m.cols,
            "u": _matrix_json(dec.u),
            "s": _matrix_json(dec.s),
            "v": _matrix_json(dec.v),
            "invariant_factors": list(dec.invariant_factors),
            "rank": dec.rank,
            "verified": dec.verify(m),
        },
        args,
    )
    return EXIT_OK


def _cmd_walk(args) -> int:
    from .similarity import extended_walk_matrix

    g = _load_graph(args.graph_a)
    hermitian = isinstance(g, Digraph)
    a = hermitian_adjacency(g) if hermitian else adjacency(g)
    part = _parse_partition(args.partition, g.n) or degree_partition(g)
    whole = VertexPartition(g.n, [range(g.n)])
    w = extended_walk_matrix(a, whole).columns
    wt = extended_walk_matrix(a, part).columns
    w_rank = exact_rank(w)
    wt_rank = exact_rank(wt)
    full = wt_rank == g.n
    d_n = None
    if full and wt.is_integral():
        d_n = last_invariant_factor(wt)
    _emit(
        {
            "command": "walk",
            "order": g.n,
            "partition": [sorted(block) for block in part.classes],
            "walk_matrix": _matrix_json(w),
            "walk_rank": w_rank,
            "extended_walk_matrix": _matrix_json(wt),
            "extended_rank": wt_rank,
            "full_row_rank": full,
            "d_n": d_n,
        },
        args,
    )
    return EXIT_OK


def _cmd_search(args) -> int:
    from .search import (
        SearchConfig,
        TheoremContradiction,
        run_search,
        verify_theorem_equivalence,
        write_mates_csv,
    )

    part = _parse_partition(args.partition, args.n)
    try:
        relation = SpectrumRelation(args.relation, part)
        config = SearchConfig(
            n=args.n,
            relation=relation,
            source=args.source,
            mode=args.mode,
            trials=args.trials,
            seed=args.seed,
            jobs=args.jobs,
            budget=args.budget,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None

    if args.verify:
        try:
            rep = verify_theorem_equivalence(config)
        except TheoremContradiction as exc:
            _emit(
                {
                    "command": "search",
                    "error": "theorem-contradiction",
                    "reproducer": exc.reproducer,
                },
                args,
            )
            return EXIT_CONTRADICTION
        except ValueError as exc:
            raise CliError(str(exc)) from None
        payload = asdict(rep)
        payload["command"] = "search"
        payload["verify"] = True
        _emit(payload, args)
        return EXIT_OK

    rep = run_search(config)
    payload = {
        "command": "search",
        "verify": False,
        "config": rep.config,
        "buckets": rep.buckets,
        "pairs_tested": rep.pairs_tested,
        "comparisons": rep.comparisons,
        "classes": rep.classes,
        "mates": [asdict(r) for r in rep.mates],
        "contradictions": list(rep.contradictions),
        "truncated": rep.truncated,
    }
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_mates_csv(rep.mates, fh)
    _emit(payload, args)
    return EXIT_STRICT if args.strict and not rep.mates else EXIT_OK


def _cmd_probe(args) -> int:
    from .search import digraph_offdiagonal_probe

    try:
        rep = digraph_offdiagonal_probe(
            args.n, seed=args.seed, budget=args.budget, trials=args.trials
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload = asdict(rep)
    payload["command"] = "probe"
    _emit(payload, args)
    return EXIT_CONTRADICTION if rep.inconsistencies else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(sub, partition=True, pit=True):
    sub.add_argument("--out", help="write JSON here instead of stdout")
    sub.add_argument("--pretty", action="store_true", help="indent the JSON")
    if partition:
        sub.add_argument(
            "--partition",
            default="degree",
            help="'degree' (default) or explicit classes like 0,1/2,3",
        )
    if pit:
        sub.add_argument(
            "--mode", choices=("prob", "det"), default="prob",
            help="probabilistic or deterministic identity testing",
        )
        sub.add_argument(
            "--trials", type=int, default=DEFAULT_TRIALS,
            help="evaluation points per probabilistic comparison",
        )
    sub.add_argument(
        "--seed", type=int, default=None,
        help="PIT seed; defaults to $SPECTRA_SEED or 0",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cospectral",
        description="Cospectrality under determinantal pencils, with "
        "similarity certificates, Smith normal forms, and mate search.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    c = subs.add_parser("check", help="compare two graphs under a relation")
    c.add_argument("graph_a", help="graph6/digraph6 file, or - for stdin")
    c.add_argument("graph_b")
    c.add_argument(
        "--relation", default="S", type=str.upper, choices=RELATION_KINDS,
        help="which pencil to compare",
    )
    c.add_argument("--strict", action="store_true",
                   help="exit 1 when the verdict is negative")
    _add_common(c)
    c.set_defaults(func=_cmd_check)

    r = subs.add_parser("reconstruct-q", help="existence and reconstruction of Q")
    r.add_argument("graph_a")
    r.add_argument("graph_b")
    r.add_argument("--path", choices=("auto", "exact", "constructive"),
                   default="auto", help="reconstruction route")
    r.add_argument("--tol", type=float, default=1e-9,
                   help="numeric tolerance for the constructive route")
    r.add_argument("--strict", action="store_true",
                   help="exit 1 without a certificate")
    _add_common(r, pit=False)
    r.set_defaults(func=_cmd_reconstruct_q)

    s = subs.add_parser("snf", help="Smith normal form of an integer matrix")
    s.add_argument("--load", required=True,
                   help="matrix file: 'rows cols' header then entries")
    _add_common(s, partition=False, pit=False)
    s.set_defaults(func=_cmd_snf)

    w = subs.add_parser("walk", help="walk matrices, ranks, last invariant factor")
    w.add_argument("graph_a", help="graph6/digraph6 file, or - for stdin")
    _add_common(w, pit=False)
    w.set_defaults(func=_cmd_walk)

    se = subs.add_parser("search", help="mate search over a labeled family")
    se.add_argument("--n", type=int, required=True)
    se.add_argument(
        "--relation", default="S", type=str.upper, choices=RELATION_KINDS,
    )
    se.add_argument("--source", default="builtin",
                    help="'builtin' or a file with one graph per line")
    se.add_argument("--jobs", type=int, default=1, help="bucket workers")
    se.add_argument("--budget", type=int, default=None, help="cap on mate pairs")
    se.add_argument("--csv", help="also export the mate list as CSV")
    se.add_argument("--verify", action="store_true",
                    help="run the equivalence sweep instead of mate search")
    se.add_argument("--strict", action="store_true",
                    help="exit 1 when no mates are found")
    _add_common(se)
    se.set_defaults(func=_cmd_search)

    p = subs.add_parser("probe", help="diagonal-only versus full Hermitian pencil")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=int, default=200, help="digraph samples")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    _add_common(p, partition=False, pit=False)
    p.set_defaults(func=_cmd_probe)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        try:
            args.seed = _default_seed()
        except CliError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
