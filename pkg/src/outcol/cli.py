"""Command line front end: gen, solve, partition, reduce, oracle, scan, spectrum.

Digraphs travel between subcommands in the shared text format, so the
natural unit of composition is a shell pipeline:

    outcol gen p7 | outcol solve -

gen and reduce emit that raw text. The remaining subcommands print one
JSON report with sorted keys; two runs with the same flags, seed and
input bytes produce identical output outside the isolated "timing"
field. Exit codes: 0 solved, 1 the instance provably has no solution
(a certificate is attached), 2 usage or input errors (message on
standard error).

Seeds default to 0 so pipelines are reproducible; pass `--seed random`
to draw one from the operating system (the report records the value).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from outcol import __version__
from outcol.catalog import (
    ExceptionCatalog,
    NamedDigraph,
    build,
    canonical_form,
    digraph_from_canonical,
    save_catalog,
)
from outcol.digraph import (
    Colouring,
    Digraph,
    TwoPartition,
    from_text,
    is_semicomplete,
    is_strong,
    to_text,
    verify_kpartition,
    verify_out_colouring,
)
from outcol.kpartition import (
    Exhausted,
    PartitionConfig,
    paley_spectrum,
    partition_k,
    partition_k_inout,
    partition_r,
)
from outcol.oracle import (
    EnumerationSpec,
    brute_force_out_colouring,
    brute_force_partition_k,
    enumerate_digraphs,
)
from outcol.outcolour import (
    rebalance,
    solve_2outregular,
    solve_semicomplete,
    three_out_colouring,
    validate_certificate,
)
from outcol.reductions import (
    Hypergraph,
    hypergraph_to_symmetric_digraph,
    nae_to_bipartite_tournament,
    nae_to_nice_partition_digraph,
    parse_nae,
    total_domination_bridge,
)


class _UsageError(Exception):
    pass


class _Ctx:
    """Mutable per-run facts echoed into the report."""

    def __init__(self) -> None:
        self.digest: str | None = None
        self.seed: int | None = None


# -- input plumbing -----------------------------------------------------------


def _read_input(path: str, ctx: _Ctx) -> str:
    if path == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise _UsageError(f"cannot read {path!r}: {e}") from e
    ctx.digest = hashlib.sha256(data).hexdigest()
    return data.decode()


def _read_digraph(path: str, ctx: _Ctx) -> Digraph:
    return from_text(_read_input(path, ctx))


def _resolve_seed(token: str, ctx: _Ctx) -> int:
    if token == "random":
        seed = int.from_bytes(os.urandom(4), "big")
    else:
        try:
            seed = int(token)
        except ValueError as e:
            raise _UsageError(f"--seed takes an integer or 'random', got {token!r}") from e
    ctx.seed = seed
    return seed


def _resolve_threads(args: argparse.Namespace) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    env = os.environ.get("OUTCOL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise _UsageError(f"OUTCOL_THREADS must be an integer, got {env!r}") from e
    return 1


def _parse_hypergraph(text: str) -> Hypergraph:
    """Read `p hyp <n> <m>` plus edge lines of 1-based vertices ending in 0."""
    n = None
    edges: list[tuple[int, ...]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "hyp":
                raise _UsageError(f"bad hypergraph header {line!r}")
            n = int(parts[2])
            continue
        if n is None:
            raise _UsageError("edge line before 'p hyp' header")
        nums = [int(t) for t in line.split()]
        if not nums or nums[-1] != 0 or len(nums) < 2:
            raise _UsageError(f"edge line must list vertices then 0: {line!r}")
        if any(v < 1 or v > n for v in nums[:-1]):
            raise _UsageError(f"vertex out of range 1..{n}: {line!r}")
        edges.append(tuple(v - 1 for v in nums[:-1]))
    if n is None:
        raise _UsageError("missing 'p hyp <n> <m>' header")
    if not edges:
        raise _UsageError("hypergraph has no edges")
    return Hypergraph(n, tuple(edges))


# -- payload encoding ---------------------------------------------------------


def _cert_payload(cert) -> dict:
    body = dataclasses.asdict(cert)
    body["type"] = type(cert).__name__
    return body


def _colouring_payload(col: Colouring) -> list[int]:
    return list(col.colours)


def _partition_payload(p: TwoPartition) -> dict:
    return {"part1": list(p.part1), "part2": list(p.part2)}


def _plain_value(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, tuple)):
        if all(not isinstance(x, (list, tuple, dict)) for x in v):
            return " ".join(str(x) for x in v)
        return json.dumps(v, sort_keys=True)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _emit(
    command: list[str],
    ctx: _Ctx,
    status: str,
    payload: dict,
    seconds: float,
    fmt: str,
) -> None:
    if fmt == "plain":
        print(f"status: {status}")
        for key in sorted(payload):
            print(f"{key}: {_plain_value(payload[key])}")
        return
    report = {
        "command": command,
        "input_sha256": ctx.digest,
        "payload": payload,
        "seed": ctx.seed,
        "status": status,
        "timing": {"seconds": round(seconds, 6)},
    }
    print(json.dumps(report, indent=2, sort_keys=True))


# -- subcommands --------------------------------------------------------------


def _run_gen(args: argparse.Namespace, ctx: _Ctx) -> int:
    name = args.name
    if args.params:
        name = f"{name}({','.join(str(p) for p in args.params)})"
    d = build(name)
    text = to_text(d)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.figure:
        from outcol.report import render_adjacency

        render_adjacency(args.figure, d, title=name)
    return 0


def _run_solve(args: argparse.Namespace, ctx: _Ctx) -> tuple[str, dict]:
    d = _read_digraph(args.file, ctx)
    if args.colours == 3:
        if args.balanced:
            raise _UsageError("--balanced applies to 2-colour runs only")
        col = three_out_colouring(d)
        if verify_out_colouring(d, col) is not None:
            raise RuntimeError("internal: unverified colouring")
        return "ok", {"colouring": _colouring_payload(col), "verified": True}

    if is_semicomplete(d):
        outcome = solve_semicomplete(d)
        if outcome.colouring is not None and args.balanced:
            outcome = rebalance(d, outcome.colouring)
    elif d.n > 0 and all(d.out_degree(v) == 2 for v in range(d.n)):
        if args.balanced:
            raise _UsageError("--balanced needs a semicomplete input")
        outcome = solve_2outregular(d)
    else:
        raise _UsageError(
            "unsupported digraph: need semicomplete or 2-out-regular input"
        )

    if outcome.colouring is not None:
        if verify_out_colouring(d, outcome.colouring) is not None:
            raise RuntimeError("internal: unverified colouring")
        status = "ok"
        payload = {"colouring": _colouring_payload(outcome.colouring), "verified": True}
    else:
        if not validate_certificate(d, outcome.certificate):
            raise RuntimeError("internal: invalid certificate")
        status = "no-solution"
        payload = {"certificate": _cert_payload(outcome.certificate), "verified": True}

    if args.certify:
        if d.n > 20:
            raise _UsageError("--certify is exhaustive and capped at 20 vertices")
        oracle_says = (
            brute_force_out_colouring(d, 2, balanced=args.balanced) is not None
        )
        if oracle_says != (status == "ok"):
            raise RuntimeError("internal: solver and oracle disagree")
        payload["oracle_agrees"] = True
    return status, payload


def _run_partition(args: argparse.Namespace, ctx: _Ctx) -> tuple[str, dict]:
    d = _read_digraph(args.file, ctx)
    seed = _resolve_seed(args.seed, ctx)
    cfg = PartitionConfig(
        k=args.k, epsilon=args.epsilon, max_retries=args.max_retries, seed=seed
    )

    if args.r > 1:
        if args.stats:
            raise _UsageError("--stats applies to 2-partition runs only")
        if args.inout:
            raise _UsageError("--inout applies to 2-partition runs only")
        res = partition_r(d, args.r, args.k, cfg, force=args.force)
        if isinstance(res, Exhausted):
            return "no-solution", {"attempts": res.attempts}
        for part in res:
            held = set(part)
            for v in range(d.n):
                if len(held.intersection(d.out_neighbours(v))) < args.k:
                    raise RuntimeError("internal: unverified partition")
        return "ok", {"parts": [list(p) for p in res]}

    run = partition_k_inout if args.inout else partition_k
    res = run(d, cfg, force=args.force)
    if isinstance(res, Exhausted):
        status = "no-solution"
        payload = {"attempts": res.attempts, "threshold": cfg.threshold}
    else:
        if verify_kpartition(d, res.partition, args.k) is not None:
            raise RuntimeError("internal: unverified partition")
        if args.inout and verify_kpartition(d.converse(), res.partition, args.k):
            raise RuntimeError("internal: unverified partition")
        status = "ok"
        payload = _partition_payload(res.partition)
        payload["attempt"] = res.attempt
        payload["threshold"] = cfg.threshold

    if args.stats:
        from outcol.report import render_attempt_trace, write_stats_csv

        write_stats_csv(args.stats, res.stats)
        figure = str(Path(args.stats).with_suffix(".png"))
        render_attempt_trace(figure, res.stats, cfg.threshold)
        payload["stats_csv"] = args.stats
        payload["stats_figure"] = figure
    return status, payload


def _run_reduce(args: argparse.Namespace, ctx: _Ctx) -> int:
    text = _read_input(args.infile, ctx)
    if args.kind in ("nae2bt", "nae2nice"):
        formula = parse_nae(text)
        if args.kind == "nae2bt":
            red = nae_to_bipartite_tournament(formula)
        else:
            red = nae_to_nice_partition_digraph(formula)
    elif args.kind == "hyp2sym":
        red = hypergraph_to_symmetric_digraph(_parse_hypergraph(text))
    else:
        g = from_text(text)
        red = total_domination_bridge(g.n, list(g.arcs()))

    out_text = to_text(red.digraph)
    if args.out:
        Path(args.out).write_text(out_text)
    else:
        sys.stdout.write(out_text)

    map_path = args.map
    if map_path is None and args.out:
        map_path = args.out + ".map.json"
    if map_path:
        Path(map_path).write_text(
            json.dumps(red.manifest(), indent=2, sort_keys=True) + "\n"
        )
    return 0


def _run_oracle(args: argparse.Namespace, ctx: _Ctx) -> tuple[str, dict]:
    d = _read_digraph(args.file, ctx)
    if args.partition_k is not None:
        p = brute_force_partition_k(d, args.partition_k, balanced=args.balanced)
        if p is None:
            return "no-solution", {"k": args.partition_k}
        if verify_kpartition(d, p, args.partition_k) is not None:
            raise RuntimeError("internal: unverified partition")
        payload = _partition_payload(p)
        payload["k"] = args.partition_k
        return "ok", payload
    col = brute_force_out_colouring(d, args.colours, balanced=args.balanced)
    if col is None:
        return "no-solution", {"colours": args.colours}
    if verify_out_colouring(d, col) is not None:
        raise RuntimeError("internal: unverified colouring")
    return "ok", {"colouring": _colouring_payload(col), "verified": True}


_PREDICATES = {
    "all": None,
    "min-out-2": lambda d: d.min_out_degree() >= 2,
    "min-out-3": lambda d: d.min_out_degree() >= 3,
    "two-out-regular": lambda d: all(d.out_degree(v) == 2 for v in range(d.n)),
    "strong": is_strong,
}


def _run_scan(args: argparse.Namespace, ctx: _Ctx) -> tuple[str, dict]:
    kind = {"tournaments": "tournament", "semicomplete": "semicomplete"}[args.kind]
    spec = EnumerationSpec(
        n=args.n, kind=kind, predicate=_PREDICATES[args.predicate], dedup="canonical"
    )
    forms: set[bytes] = set()

    def visitor(d: Digraph, code: int) -> None:
        forms.add(canonical_form(d))

    stats = enumerate_digraphs(spec, visitor, threads=_resolve_threads(args))
    members = [digraph_from_canonical(f) for f in sorted(forms)]
    source = f"scan {args.kind} n={args.n} predicate={args.predicate}"
    cat = ExceptionCatalog(
        classes=tuple(
            NamedDigraph(f"class-{i:03d}", d) for i, d in enumerate(members)
        ),
        source=source,
    )
    out_dir = Path(args.out)
    save_catalog(cat, out_dir)
    from outcol.report import render_scan_profile

    render_scan_profile(out_dir / "profile.png", members, title=source)
    return "ok", {
        "classes": len(members),
        "matched": stats.visited,
        "out_dir": str(out_dir),
        "total": stats.total,
    }


def _run_spectrum(args: argparse.Namespace, ctx: _Ctx) -> tuple[str, dict]:
    pairs = paley_spectrum(args.q)
    payload = {"eigenvalues": [[v, m] for v, m in pairs], "q": args.q}
    if args.figure:
        from outcol.report import render_spectrum

        render_spectrum(args.figure, args.q, pairs)
        payload["figure"] = args.figure
    return "ok", payload


# -- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="outcol",
        description="out-colourings and degree-constrained partitions of digraphs",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("json", "plain"), default="json",
        help="report style (default json)",
    )
    common.add_argument(
        "--threads", type=int, default=None,
        help="worker threads; env OUTCOL_THREADS is the fallback, the flag wins",
    )

    p = sub.add_parser("gen", help="emit a named digraph in the text format")
    p.add_argument("name", help="rt5, t7, p7, cd3, paley, bkr, or a catalog class")
    p.add_argument("params", nargs="*", type=int, help="numeric parameters, e.g. gen paley 11")
    p.add_argument("--out", help="write here instead of standard output")
    p.add_argument("--figure", help="render the adjacency matrix here")
    p.set_defaults(run=_run_gen, raw=True)

    p = sub.add_parser(
        "solve", parents=[common],
        help="decide 2-out-colourability, or 3-colour with --colours 3",
    )
    p.add_argument("file", help="digraph in the text format, - for standard input")
    p.add_argument("--balanced", action="store_true", help="demand class sizes within one")
    p.add_argument("--colours", type=int, choices=(2, 3), default=2)
    p.add_argument(
        "--certify", action="store_true",
        help="cross-check the answer against the exhaustive oracle (n <= 20)",
    )
    p.set_defaults(run=_run_solve, raw=False)

    p = sub.add_parser(
        "partition", parents=[common],
        help="randomized degree-constrained partition",
    )
    p.add_argument("file", help="digraph in the text format, - for standard input")
    p.add_argument("--k", type=int, required=True, help="out-neighbours demanded in each part")
    p.add_argument("--r", type=int, default=1, help="number of parts (default 2-partition)")
    p.add_argument("--inout", action="store_true", help="demand k in- and out-neighbours")
    p.add_argument("--seed", default="0", help="integer or 'random'")
    p.add_argument("--max-retries", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--force", action="store_true", help="run below the degree threshold")
    p.add_argument("--stats", help="write per-attempt CSV here, plus a .png alongside")
    p.set_defaults(run=_run_partition, raw=False)

    p = sub.add_parser("reduce", help="build a hardness-reduction digraph")
    p.add_argument("kind", choices=("nae2bt", "nae2nice", "hyp2sym", "tds"))
    p.add_argument("infile", help="clause/hypergraph/graph input, - for standard input")
    p.add_argument("--out", help="write the digraph here instead of standard output")
    p.add_argument("--map", help="index-map sidecar path (default <out>.map.json)")
    p.set_defaults(run=_run_reduce, raw=True)

    p = sub.add_parser("oracle", parents=[common], help="exhaustive ground truth")
    p.add_argument("file", help="digraph in the text format, - for standard input")
    p.add_argument("--colours", type=int, default=2)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--partition-k", dest="partition_k", type=int, default=None)
    p.set_defaults(run=_run_oracle, raw=False)

    p = sub.add_parser(
        "scan", parents=[common],
        help="enumerate a class, write matching members to a directory",
    )
    p.add_argument("kind", choices=("tournaments", "semicomplete"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--predicate", choices=sorted(_PREDICATES), default="all")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(run=_run_scan, raw=False)

    p = sub.add_parser("spectrum", parents=[common], help="Paley tournament eigenvalues")
    p.add_argument("q", type=int)
    p.add_argument("--figure", help="render a stem plot here")
    p.set_defaults(run=_run_spectrum, raw=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    command = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(command)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    ctx = _Ctx()
    start = time.perf_counter()
    try:
        if args.raw:
            return args.run(args, ctx)
        status, payload = args.run(args, ctx)
    except _UsageError as e:
        print(f"outcol: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as e:
        print(f"outcol: {e}", file=sys.stderr)
        if ctx.digest is not None and not args.raw:
            _emit(
                command, ctx, "error", {"message": str(e)},
                time.perf_counter() - start, getattr(args, "format", "json"),
            )
        return 2
    _emit(command, ctx, status, payload, time.perf_counter() - start, args.format)
    return 0 if status == "ok" else 1


if __name__ == "__main__":
    sys.exit(main())
