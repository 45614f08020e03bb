"""Command-line entry point exposing every workflow.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 remote-resolver
failure without fallback, 4 internal invariant violation. Diagnostics go to
stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
from pathlib import Path

from . import bench as bench_mod
from . import corpus, parsing
from .resolvers import (
    RemoteResolver,
    Resolver,
    SearchResolver,
    Status,
    TokenLimits,
    TrivialResolver,
    TrivialStrategy,
)
from .router import RouteThresholds, extract_features, hybrid_resolve, route
from .search import SearchParams
from .similarity import Granularity, similarity
from .stub_server import StubServer

ENDPOINT_ENV_VAR = "SBCR_REMOTE_URL"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_REMOTE = 3
EXIT_INTERNAL = 4

DEFAULTS = {
    "neighbors": 5,
    "stagnation": 10,
    "max_evals": 2000,
    "time_budget": None,
    "wallclock": False,
    "top_n": 100,
    "seed": 0,
    "endpoint": None,
    "deadline": 10.0,
    "input_token_limit": 300,
    "output_token_limit": 100,
    "non_english_tau": 0.05,
    "balance_beta": 0.2,
}


class _UsageError(Exception):
    pass


class _InputError(Exception):
    pass


class _RemoteError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--neighbors", type=int, default=None, help="neighbors drawn per iteration")
    parser.add_argument("--stagnation", type=int, default=None, help="non-improving iterations before a restart")
    parser.add_argument("--max-evals", type=int, default=None, help="evaluation-count budget (deterministic)")
    parser.add_argument("--time-budget", type=float, default=None, help="wall-clock budget in seconds")
    parser.add_argument("--wallclock", action="store_true", default=None, help="use the wall-clock budget instead of evaluation counts")
    parser.add_argument("--top-n", type=int, default=None, help="ranked candidate list capacity")
    parser.add_argument("--seed", type=int, default=None, help="random seed")


def _add_router_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input-token-limit", type=float, default=None, help="route to search above this size")
    parser.add_argument("--non-english-tau", type=float, default=None, help="route to search above this non-ASCII fraction")
    parser.add_argument("--balance-beta", type=float, default=None, help="route to search at or below this |balance|")


def _add_remote_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--endpoint", default=None, help=f"remote resolver URL (or ${ENDPOINT_ENV_VAR})")
    parser.add_argument("--deadline", type=float, default=None, help="remote request deadline in seconds")
    parser.add_argument("--output-token-limit", type=int, default=None, help="remote output token limit")


def build_parser() -> _Parser:
    parser = _Parser(prog="sbcr", description="Search-based merge conflict resolution toolkit")
    parser.add_argument("--config", default=None, help="JSON config file merged under the flags")
    parser.add_argument("--show-config", action="store_true", help="print the effective config and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="validate and filter a record stream")
    p.add_argument("records", help="line-delimited JSON records ('-' for stdin)")
    p.add_argument("--out", default="-", help="accepted records output (default stdout)")
    p.add_argument("--rejects", default=None, help="rejection report sidecar file")
    p.add_argument("--no-combination-filter", action="store_true", help="keep resolutions that add new lines")

    p = sub.add_parser("split", help="deterministically split records into train/valid/test")
    p.add_argument("records", help="line-delimited JSON records")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ratios", default="0.8,0.1,0.1", help="train,valid,test ratios summing to 1")
    p.add_argument("--out-dir", default=".", help="directory for train/valid/test.jsonl and split.json")

    p = sub.add_parser("resolve", help="resolve a conflicted file (or extract its chunks)")
    p.add_argument("file", help="conflicted text file")
    p.add_argument("--engine", default="sbcr", help="sbcr | trivial:<strategy> | remote | hybrid")
    p.add_argument("--out", default="-", help="resolved file output (default stdout)")
    p.add_argument("--records", action="store_true", help="emit chunk records instead of resolving")
    _add_search_flags(p)
    _add_remote_flags(p)
    _add_router_flags(p)

    p = sub.add_parser("bench", help="run a resolver over a dataset and write result rows")
    p.add_argument("records", help="line-delimited JSON records with ground truth")
    p.add_argument("--engine", default="sbcr", help="sbcr | trivial:<strategy> | remote | hybrid")
    p.add_argument("--out", default="-", help="result rows output (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="record-level parallelism")
    p.add_argument("--trim-trailing-ws", action="store_true", help="trim trailing whitespace before scoring")
    _add_search_flags(p)
    _add_remote_flags(p)
    _add_router_flags(p)

    p = sub.add_parser("tune", help="grid-search engine parameters on a sample")
    p.add_argument("records", help="line-delimited JSON records with ground truth")
    p.add_argument("--sample", type=int, default=100, help="sample size drawn with --seed")
    p.add_argument("--grid-neighbors", default="1,5,9", help="comma-separated neighbor counts")
    p.add_argument("--grid-budgets", default=None, help="comma-separated budgets (evaluations, or seconds with --wallclock)")
    p.add_argument("--grid-stagnation", default="5,10,20", help="comma-separated stagnation limits")
    p.add_argument("--ranking", choices=["best-similarity", "exact-match"], default="best-similarity", help="average-ranking interpretation")
    p.add_argument("--out", default="-", help="tuning table CSV output (default stdout)")
    p.add_argument("--jobs", type=int, default=1)
    _add_search_flags(p)

    p = sub.add_parser("compare", help="paired comparison of two result files")
    p.add_argument("results_a")
    p.add_argument("results_b")
    p.add_argument("--extremes", type=int, default=10, help="ids to keep from each tail")
    p.add_argument("--out", default="-", help="report JSON output (default stdout)")
    p.add_argument("--csv-dir", default=None, help="also write sim_diff.csv and balance_histogram.csv here")

    p = sub.add_parser("route", help="route records between engines (decisions only with --dry-run)")
    p.add_argument("records", help="line-delimited JSON records")
    p.add_argument("--dry-run", action="store_true", help="log decisions without resolving")
    p.add_argument("--decisions", default="-", help="decision log output (default stdout)")
    p.add_argument("--out", default=None, help="result rows output when resolving")
    _add_search_flags(p)
    _add_remote_flags(p)
    _add_router_flags(p)

    p = sub.add_parser("serve-stub", help="run the stub generative resolver")
    p.add_argument("--mode", default="echo-v1", help="echo-v1 | echo-v2 | empty | truncate | slow | garbage")
    p.add_argument("--port", type=int, default=8731)
    p.add_argument("--delay", type=float, default=2.0, help="sleep for slow mode, seconds")
    p.add_argument("--verbose", action="store_true")

    return parser


def _load_config(path: str | None) -> dict:
    config = dict(DEFAULTS)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _InputError(f"cannot read config {path}: {exc}")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise _UsageError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    if config["endpoint"] is None:
        config["endpoint"] = os.environ.get(ENDPOINT_ENV_VAR)
    return config


_FLAG_KEYS = {
    "neighbors": "neighbors",
    "stagnation": "stagnation",
    "max_evals": "max_evals",
    "time_budget": "time_budget",
    "wallclock": "wallclock",
    "top_n": "top_n",
    "seed": "seed",
    "endpoint": "endpoint",
    "deadline": "deadline",
    "input_token_limit": "input_token_limit",
    "output_token_limit": "output_token_limit",
    "non_english_tau": "non_english_tau",
    "balance_beta": "balance_beta",
}


def _effective_config(args: argparse.Namespace) -> dict:
    """Built-in defaults, overridden by the config file, overridden by explicit flags."""
    config = _load_config(args.config)
    for attr, key in _FLAG_KEYS.items():
        value = getattr(args, attr, None)
        if value is not None:
            config[key] = value
    return config


def _search_params(config: dict) -> SearchParams:
    use_time = bool(config["wallclock"]) or config["time_budget"] is not None
    try:
        if use_time:
            budget = config["time_budget"]
            if budget is None:
                raise _UsageError("--wallclock requires --time-budget")
            return SearchParams(
                neighbors_per_iteration=config["neighbors"],
                max_stagnation_iterations=config["stagnation"],
                max_execution_time=float(budget),
                top_n=config["top_n"],
                seed=config["seed"],
            )
        return SearchParams(
            neighbors_per_iteration=config["neighbors"],
            max_stagnation_iterations=config["stagnation"],
            max_evaluations=int(config["max_evals"]),
            top_n=config["top_n"],
            seed=config["seed"],
        )
    except ValueError as exc:
        raise _UsageError(str(exc))


def _thresholds(config: dict) -> RouteThresholds:
    return RouteThresholds(
        input_token_limit=config["input_token_limit"],
        non_english_tau=config["non_english_tau"],
        balance_beta=config["balance_beta"],
    )


def _remote_resolver(config: dict) -> RemoteResolver:
    if not config["endpoint"]:
        raise _UsageError(f"remote engine needs --endpoint or ${ENDPOINT_ENV_VAR}")
    return RemoteResolver(
        endpoint=config["endpoint"],
        limits=TokenLimits(int(config["input_token_limit"]), int(config["output_token_limit"])),
        deadline=config["deadline"],
    )


def _build_resolver(engine: str, config: dict) -> Resolver:
    # evaluation-budget mode keeps outputs byte-reproducible, so no wall clock
    deterministic = not (bool(config["wallclock"]) or config["time_budget"] is not None)
    trivial_clock = (lambda: 0.0) if deterministic else None
    if engine == "sbcr":
        return SearchResolver(_search_params(config))
    if engine.startswith("trivial:"):
        name = engine.split(":", 1)[1]
        try:
            strategy = TrivialStrategy(name)
        except ValueError:
            raise _UsageError(f"unknown trivial strategy {name!r}; expected one of "
                              f"{[s.value for s in TrivialStrategy]}")
        return TrivialResolver(strategy, clock=trivial_clock)
    if engine == "remote":
        return _remote_resolver(config)
    if engine == "hybrid":
        search = SearchResolver(_search_params(config))
        generative = _remote_resolver(config)
        thresholds = _thresholds(config)

        class _Hybrid(Resolver):
            resolver_id = "hybrid"

            def resolve(self, chunk):
                return hybrid_resolve(chunk, search, generative, thresholds)

        return _Hybrid()
    raise _UsageError(f"unknown engine {engine!r}")


def _open_out(path: str):
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _InputError(f"cannot read {path}: {exc}")


def _load_dataset(path: str) -> list[corpus.ConflictRecord]:
    try:
        if path == "-":
            records, rejects = corpus.ingest_records(sys.stdin)
        else:
            records, rejects = corpus.load_records(path)
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}")
    for report in rejects:
        print(f"warning: {path}:{report.line}: {report.reason}: {report.detail}", file=sys.stderr)
    return records


def _cmd_ingest(args, config) -> int:
    flags = corpus.FilterFlags(combination=not args.no_combination_filter)
    try:
        if args.records == "-":
            records, rejections = corpus.ingest_records(sys.stdin, flags)
        else:
            with open(args.records, encoding="utf-8") as fh:
                records, rejections = corpus.ingest_records(fh, flags)
    except OSError as exc:
        raise _InputError(f"cannot read {args.records}: {exc}")
    out = _open_out(args.out)
    try:
        for record in records:
            out.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    rejects_path = args.rejects or (args.out + ".rejects.jsonl" if args.out != "-" else None)
    if rejects_path:
        corpus.write_rejections(rejects_path, rejections)
    print(f"accepted {len(records)}, rejected {len(rejections)}", file=sys.stderr)
    return EXIT_OK


def _cmd_split(args, config) -> int:
    records = _load_dataset(args.records)
    try:
        parts = [float(x) for x in args.ratios.split(",")]
        if len(parts) != 3:
            raise ValueError("need exactly three ratios")
    except ValueError as exc:
        raise _UsageError(f"bad --ratios: {exc}")
    try:
        split = corpus.split_dataset([r.id for r in records], config["seed"], (parts[0], parts[1], parts[2]))
    except ValueError as exc:
        raise _UsageError(str(exc))
    by_id = {r.id: r for r in records}
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, ids in (("train", split.train_ids), ("valid", split.valid_ids), ("test", split.test_ids)):
        corpus.write_records(out_dir / f"{name}.jsonl", [by_id[i] for i in ids])
    with open(out_dir / "split.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "seed": split.seed,
                "ratios": list(split.ratios),
                "train_ids": list(split.train_ids),
                "valid_ids": list(split.valid_ids),
                "test_ids": list(split.test_ids),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(
        f"split {len(records)} records into {len(split.train_ids)}/{len(split.valid_ids)}/{len(split.test_ids)}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_resolve(args, config) -> int:
    text = _read_text(args.file)
    try:
        parsed = parsing.parse_conflicted_file(text)
    except parsing.MarkerError as exc:
        raise _InputError(f"{args.file}: {exc}")
    if args.records:
        out = _open_out(args.out)
        try:
            for record in parsing.extract_records(parsed, path=args.file if args.file != "-" else ""):
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
        finally:
            if out is not sys.stdout:
                out.close()
        return EXIT_OK
    resolver = _build_resolver(args.engine, config)
    resolutions = []
    for chunk in parsed.chunks:
        if not chunk.v1_lines and not chunk.v2_lines:
            resolutions.append([])  # both sides deleted everything
            continue
        candidate = resolver.resolve(chunk)
        if candidate.status is Status.FAILED and args.engine != "hybrid":
            if args.engine == "remote":
                raise _RemoteError(f"remote resolver failed: {candidate.detail}")
            raise _InputError(f"resolver failed: {candidate.detail}")
        resolutions.append(list(candidate.lines))
    rendered = parsing.render_resolved(parsed, resolutions)
    out = _open_out(args.out)
    try:
        out.write(rendered)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_bench(args, config) -> int:
    records = _load_dataset(args.records)
    resolver = _build_resolver(args.engine, config)
    rows = bench_mod.run_benchmark(records, resolver, jobs=args.jobs, trim_trailing=args.trim_trailing_ws)
    out = _open_out(args.out)
    try:
        for row in rows:
            out.write(json.dumps(row.to_json(), ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _parse_grid_values(text: str, kind) -> list:
    try:
        return [kind(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise _UsageError(f"bad grid value: {exc}")


def _cmd_tune(args, config) -> int:
    records = _load_dataset(args.records)
    if not records:
        raise _InputError("tuning dataset is empty")
    sample_size = min(args.sample, len(records))
    sample = random.Random(config["seed"]).sample(records, sample_size)
    wallclock = bool(config["wallclock"])
    budgets_text = args.grid_budgets or ("10,20,40" if wallclock else "500,2000")
    neighbors = _parse_grid_values(args.grid_neighbors, int)
    stagnation = _parse_grid_values(args.grid_stagnation, int)
    budgets = _parse_grid_values(budgets_text, float if wallclock else int)
    try:
        grid = [
            SearchParams(
                neighbors_per_iteration=k,
                max_stagnation_iterations=s,
                max_execution_time=b if wallclock else None,
                max_evaluations=None if wallclock else b,
                top_n=config["top_n"],
            )
            for k in neighbors
            for b in budgets
            for s in stagnation
        ]
    except ValueError as exc:
        raise _UsageError(str(exc))
    rows = bench_mod.tune_grid(sample, grid, config["seed"], ranking=args.ranking, jobs=args.jobs)
    if args.out == "-":
        writer = csv.writer(sys.stdout)
        writer.writerow(["configuration", "budget_kind", "top1_similarity_count", "average_ranking", "average_similarity", "average_time"])
        for row in rows:
            writer.writerow([row.config_label, row.budget_kind, row.top1_count, repr(row.avg_ranking), repr(row.avg_similarity), repr(row.avg_time)])
    else:
        bench_mod.write_tuning_csv(args.out, rows)
    return EXIT_OK


def _cmd_compare(args, config) -> int:
    try:
        rows_a = bench_mod.read_result_rows(args.results_a)
        rows_b = bench_mod.read_result_rows(args.results_b)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise _InputError(f"cannot read result rows: {exc}")
    try:
        report = bench_mod.compare_results(rows_a, rows_b, m=args.extremes)
    except ValueError as exc:
        raise _InputError(str(exc))
    if args.out == "-":
        json.dump(report.to_json(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        bench_mod.write_comparison_report(args.out, report)
    if args.csv_dir:
        csv_dir = Path(args.csv_dir)
        csv_dir.mkdir(parents=True, exist_ok=True)
        bench_mod.write_sim_diff_csv(csv_dir / "sim_diff.csv", report)
        bench_mod.write_balance_histogram_csv(csv_dir / "balance_histogram.csv", report)
    return EXIT_OK


def _cmd_route(args, config) -> int:
    records = _load_dataset(args.records)
    thresholds = _thresholds(config)
    decisions_out = _open_out(args.decisions)
    rows = []
    try:
        if args.dry_run:
            for record in records:
                decision = route(extract_features(record), thresholds)
                decisions_out.write(json.dumps(_decision_json(record.id, decision)) + "\n")
        else:
            search = SearchResolver(_search_params(config))
            generative = _remote_resolver(config)
            for record in records:
                logged = []
                candidate = hybrid_resolve(record, search, generative, thresholds, on_decision=logged.append)
                decisions_out.write(json.dumps(_decision_json(record.id, logged[0])) + "\n")
                rows.append((record, candidate))
    finally:
        if decisions_out is not sys.stdout:
            decisions_out.close()
    if rows and args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for record, candidate in rows:
                row = bench_mod.ResultRow(
                    conflict_id=record.id,
                    resolver_id=candidate.resolver_id,
                    sim_line=similarity(candidate.lines, record.resolution_lines, Granularity.LINE),
                    sim_char=similarity(candidate.lines, record.resolution_lines, Granularity.CHAR),
                    elapsed=candidate.elapsed,
                    status=candidate.status.value,
                    balance=extract_features(record).balance,
                )
                fh.write(json.dumps(row.to_json(), ensure_ascii=False) + "\n")
    return EXIT_OK


def _decision_json(record_id: str, decision) -> dict:
    return {
        "id": record_id,
        "rule": decision.rule.value,
        "target": decision.target.value,
        "features": decision.features.to_json(),
    }


def _cmd_serve_stub(args, config) -> int:
    try:
        server = StubServer(mode=args.mode, port=args.port, slow_delay=args.delay, verbose=args.verbose)
    except (ValueError, OSError) as exc:
        raise _UsageError(str(exc))
    print(f"stub resolver ({args.mode}) listening on {server.url}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "split": _cmd_split,
    "resolve": _cmd_resolve,
    "bench": _cmd_bench,
    "tune": _cmd_tune,
    "compare": _cmd_compare,
    "route": _cmd_route,
    "serve-stub": _cmd_serve_stub,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help exits 0; usage errors exit 1
        return int(exc.code or 0)
    try:
        config = _effective_config(args)
        if args.show_config:
            json.dump(config, sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
            return EXIT_OK
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return _COMMANDS[args.command](args, config)
    except _UsageError as exc:
        print(f"sbcr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _InputError as exc:
        print(f"sbcr: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _RemoteError as exc:
        print(f"sbcr: remote error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except BrokenPipeError:
        return EXIT_OK
    except Exception as exc:  # invariant violations and bugs
        print(f"sbcr: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
