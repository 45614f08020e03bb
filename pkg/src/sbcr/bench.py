"""Benchmark runner, parameter tuning, and paired comparison analyses.

Result rows are written as line-delimited JSON; comparison reports as a
single JSON document with CSV exports of the per-conflict similarity
differences and the balance histogram, ready for external plotting.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

from .corpus import ConflictRecord
from .resolvers import Resolver
from .router import extract_features
from .search import SearchParams, candidate_lines, rrhc_resolve
from .similarity import Granularity, similarity
from .stats import cles, wilcoxon_signed_rank

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ResultRow:
    """One resolver run on one conflict, scored against the developer resolution.

    ``balance`` is carried along from the record so comparison reports can
    bucket outcomes by content balance without re-reading the dataset.
    """

    conflict_id: str
    resolver_id: str
    sim_line: float
    sim_char: float
    elapsed: float
    status: str
    balance: float = 0.0

    def to_json(self) -> dict:
        return {
            "conflict_id": self.conflict_id,
            "resolver_id": self.resolver_id,
            "sim_line": self.sim_line,
            "sim_char": self.sim_char,
            "elapsed": self.elapsed,
            "status": self.status,
            "balance": self.balance,
        }

    @staticmethod
    def from_json(obj: dict) -> "ResultRow":
        return ResultRow(
            conflict_id=obj["conflict_id"],
            resolver_id=obj["resolver_id"],
            sim_line=float(obj["sim_line"]),
            sim_char=float(obj["sim_char"]),
            elapsed=float(obj["elapsed"]),
            status=obj["status"],
            balance=float(obj.get("balance", 0.0)),
        )


def run_benchmark(
    records: Sequence[ConflictRecord],
    resolver: Resolver,
    *,
    jobs: int = 1,
    trim_trailing: bool = False,
) -> list[ResultRow]:
    """Resolve every record and score the candidate against the ground truth.

    Rows are merged in conflict-id order regardless of worker scheduling, so
    runs with different ``jobs`` values produce identical output. The
    record's resolution_lines field is the ground truth; resolver failures
    are recorded as rows scored against their (possibly empty) output.
    """

    def score(record: ConflictRecord) -> ResultRow:
        candidate = resolver.resolve(record)
        return ResultRow(
            conflict_id=record.id,
            resolver_id=candidate.resolver_id,
            sim_line=similarity(candidate.lines, record.resolution_lines, Granularity.LINE, trim_trailing=trim_trailing),
            sim_char=similarity(candidate.lines, record.resolution_lines, Granularity.CHAR, trim_trailing=trim_trailing),
            elapsed=candidate.elapsed,
            status=candidate.status.value,
            balance=extract_features(record).balance,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(score, records))
    else:
        rows = [score(record) for record in records]
    return sorted(rows, key=lambda row: row.conflict_id)


RankingMode = Literal["best-similarity", "exact-match"]


@dataclass(frozen=True)
class TuningRow:
    """One grid configuration with the four tuning metrics."""

    params: SearchParams
    top1_count: int
    avg_ranking: float
    avg_similarity: float
    avg_time: float

    @property
    def config_label(self) -> str:
        budget = (
            self.params.max_evaluations
            if self.params.max_evaluations is not None
            else self.params.max_execution_time
        )
        return f"{self.params.neighbors_per_iteration},{budget},{self.params.max_stagnation_iterations}"

    @property
    def budget_kind(self) -> str:
        return "evaluations" if self.params.max_evaluations is not None else "seconds"


def tune_grid(
    records: Sequence[ConflictRecord],
    grid: Sequence[SearchParams],
    seed: int,
    *,
    ranking: RankingMode = "best-similarity",
    jobs: int = 1,
) -> list[TuningRow]:
    """Run every grid configuration over the sample and rank them by average similarity.

    Per configuration: top1 counts records whose best candidate matches the
    ground truth exactly (char similarity 1.0); the ranking metric averages
    the 1-based position, in the engine's score-ordered top-N list, of the
    candidate most similar to the ground truth ("best-similarity" mode) or
    of the first exact match ("exact-match" mode), with penalty N+1 when no
    such candidate is listed.
    """
    if not records:
        raise ValueError("tuning sample is empty")
    if not grid:
        raise ValueError("tuning grid is empty")
    rows = []
    for base_params in grid:
        params = dataclasses.replace(base_params, seed=seed)

        def measure(record: ConflictRecord) -> tuple[int, int, float, float]:
            result = rrhc_resolve(record, params)
            truth = record.resolution_lines
            best_sim = similarity(candidate_lines(result.best, record), truth, Granularity.CHAR)
            rank = params.top_n + 1
            best_ranked_sim = -1.0
            for position, entry in enumerate(result.ranked, start=1):
                sim = similarity(candidate_lines(entry.candidate, record), truth, Granularity.CHAR)
                if ranking == "exact-match":
                    if sim == 1.0:
                        rank = position
                        break
                elif sim > best_ranked_sim:
                    best_ranked_sim = sim
                    rank = position
            return (1 if best_sim == 1.0 else 0), rank, best_sim, result.elapsed

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                measured = list(pool.map(measure, records))
        else:
            measured = [measure(record) for record in records]
        n = len(records)
        rows.append(
            TuningRow(
                params=params,
                top1_count=sum(m[0] for m in measured),
                avg_ranking=sum(m[1] for m in measured) / n,
                avg_similarity=sum(m[2] for m in measured) / n,
                avg_time=sum(m[3] for m in measured) / n,
            )
        )
    return sorted(rows, key=lambda row: -row.avg_similarity)


BALANCE_BUCKETS = 20  # 0.1-wide buckets over [-1, 1]


def _balance_bucket(balance: float) -> int:
    index = int((balance + 1.0) * 10.0)
    return min(BALANCE_BUCKETS - 1, max(0, index))


@dataclass(frozen=True)
class ComparisonReport:
    resolver_a: str
    resolver_b: str
    n: int
    wins_a: int
    wins_b: int
    ties: int
    wilcoxon_p: float
    cles_a_over_b: float
    sim_diff: tuple[tuple[str, float], ...]  # (conflict_id, sim_a - sim_b), id-ordered
    balance_histogram: dict[str, tuple[int, ...]]  # outcome class -> 20 bucket counts
    extremes_a: tuple[str, ...]  # ids where a outperformed b the most
    extremes_b: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "resolver_a": self.resolver_a,
            "resolver_b": self.resolver_b,
            "n": self.n,
            "wins_a": self.wins_a,
            "wins_b": self.wins_b,
            "ties": self.ties,
            "wilcoxon_p": self.wilcoxon_p,
            "cles_a_over_b": self.cles_a_over_b,
            "sim_diff": [{"conflict_id": cid, "diff": diff} for cid, diff in self.sim_diff],
            "balance_histogram": {
                "bucket_low_edges": [round(-1.0 + 0.1 * i, 1) for i in range(BALANCE_BUCKETS)],
                **{key: list(values) for key, values in self.balance_histogram.items()},
            },
            "extremes_a": list(self.extremes_a),
            "extremes_b": list(self.extremes_b),
        }


def compare_results(
    rows_a: Sequence[ResultRow], rows_b: Sequence[ResultRow], m: int = 10
) -> ComparisonReport:
    """Pair two result sets by conflict id and compute the full comparison analysis."""
    by_id_a = {row.conflict_id: row for row in rows_a}
    by_id_b = {row.conflict_id: row for row in rows_b}
    if len(by_id_a) != len(rows_a) or len(by_id_b) != len(rows_b):
        raise ValueError("duplicate conflict ids within one result set")
    mismatched = sorted(set(by_id_a) ^ set(by_id_b))
    if mismatched:
        raise ValueError(f"conflict id sets differ; first mismatched id: {mismatched[0]}")

    ids = sorted(by_id_a)
    diffs = [(cid, by_id_a[cid].sim_char - by_id_b[cid].sim_char) for cid in ids]
    wins_a = sum(1 for _, d in diffs if d > TIE_TOLERANCE)
    wins_b = sum(1 for _, d in diffs if d < -TIE_TOLERANCE)
    ties = len(diffs) - wins_a - wins_b

    histogram = {
        "a_wins": [0] * BALANCE_BUCKETS,
        "b_wins": [0] * BALANCE_BUCKETS,
        "ties": [0] * BALANCE_BUCKETS,
    }
    for cid, d in diffs:
        outcome = "a_wins" if d > TIE_TOLERANCE else "b_wins" if d < -TIE_TOLERANCE else "ties"
        histogram[outcome][_balance_bucket(by_id_a[cid].balance)] += 1

    a_tail = sorted(diffs, key=lambda item: (-item[1], item[0]))
    b_tail = sorted(diffs, key=lambda item: (item[1], item[0]))
    return ComparisonReport(
        resolver_a=rows_a[0].resolver_id if rows_a else "",
        resolver_b=rows_b[0].resolver_id if rows_b else "",
        n=len(diffs),
        wins_a=wins_a,
        wins_b=wins_b,
        ties=ties,
        wilcoxon_p=wilcoxon_signed_rank([d for _, d in diffs]),
        cles_a_over_b=cles(
            [by_id_a[cid].sim_char for cid in ids], [by_id_b[cid].sim_char for cid in ids]
        ),
        sim_diff=tuple(diffs),
        balance_histogram={key: tuple(values) for key, values in histogram.items()},
        extremes_a=tuple(cid for cid, _ in a_tail[:m]),
        extremes_b=tuple(cid for cid, _ in b_tail[:m]),
    )


def write_result_rows(path: str | Path, rows: Iterable[ResultRow]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row.to_json(), ensure_ascii=False) + "\n")


def read_result_rows(path: str | Path) -> list[ResultRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(ResultRow.from_json(json.loads(line)))
    return rows


def write_comparison_report(path: str | Path, report: ComparisonReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")


def write_sim_diff_csv(path: str | Path, report: ComparisonReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["conflict_id", "sim_diff"])
        for cid, diff in report.sim_diff:
            writer.writerow([cid, repr(diff)])


def write_balance_histogram_csv(path: str | Path, report: ComparisonReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bucket_low_edge", "a_wins", "b_wins", "ties"])
        for i in range(BALANCE_BUCKETS):
            writer.writerow(
                [
                    round(-1.0 + 0.1 * i, 1),
                    report.balance_histogram["a_wins"][i],
                    report.balance_histogram["b_wins"][i],
                    report.balance_histogram["ties"][i],
                ]
            )


def write_tuning_csv(path: str | Path, rows: Sequence[TuningRow]) -> None:
    """CSV with one row per configuration and the four tuning metric columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["configuration", "budget_kind", "top1_similarity_count", "average_ranking", "average_similarity", "average_time"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.config_label,
                    row.budget_kind,
                    row.top1_count,
                    repr(row.avg_ranking),
                    repr(row.avg_similarity),
                    repr(row.avg_time),
                ]
            )
