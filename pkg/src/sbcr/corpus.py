"""Dataset handling: load, validate, filter, deduplicate, and split conflict records.

Records arrive as line-delimited JSON objects:

    {"id", "project", "commit", "path", "language",
     "base": [...], "v1": [...], "v2": [...], "resolution": [...]}

where the arrays hold text lines without trailing newline characters.
"""

from __future__ import annotations

import json
import math
import random
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence


class Language(str, Enum):
    JAVA = "Java"
    CSHARP = "CSharp"
    JAVASCRIPT = "JavaScript"
    TYPESCRIPT = "TypeScript"
    OTHER = "Other"


_LANGUAGE_ALIASES = {
    "java": Language.JAVA,
    "csharp": Language.CSHARP,
    "c#": Language.CSHARP,
    "cs": Language.CSHARP,
    "javascript": Language.JAVASCRIPT,
    "js": Language.JAVASCRIPT,
    "typescript": Language.TYPESCRIPT,
    "ts": Language.TYPESCRIPT,
}


def parse_language(name: str) -> Language:
    """Map a language tag to the enum; unknown tags become OTHER."""
    return _LANGUAGE_ALIASES.get(name.strip().lower(), Language.OTHER)


@dataclass(frozen=True)
class ConflictRecord:
    """One real-world conflict: base, the two conflicting versions, and the developer resolution."""

    id: str
    project: str
    commit_hash: str
    file_path: str
    language: Language
    base_lines: tuple[str, ...]
    v1_lines: tuple[str, ...]
    v2_lines: tuple[str, ...]
    resolution_lines: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "project": self.project,
            "commit": self.commit_hash,
            "path": self.file_path,
            "language": self.language.value,
            "base": list(self.base_lines),
            "v1": list(self.v1_lines),
            "v2": list(self.v2_lines),
            "resolution": list(self.resolution_lines),
        }


@dataclass(frozen=True)
class FilterFlags:
    """Toggles for record validation during ingestion.

    ``combination`` rejects records whose resolution uses any line absent
    from both versions (multiset containment on exact raw text).
    """

    combination: bool = True


@dataclass(frozen=True)
class RejectionReport:
    """Machine-readable reason for a rejected input record."""

    line: int
    id: str | None
    reason: str  # empty-both-sides | not-combination | malformed | duplicate-id
    detail: str = ""

    def to_json(self) -> dict:
        return {"line": self.line, "id": self.id, "reason": self.reason, "detail": self.detail}


@dataclass(frozen=True)
class DatasetSplit:
    train_ids: tuple[str, ...]
    valid_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float]


def _string_list(value) -> tuple[str, ...] | None:
    if not isinstance(value, list) or any(not isinstance(x, str) for x in value):
        return None
    return tuple(value)


_HEX_DIGITS = set("0123456789abcdefABCDEF")


def _record_from_json(obj: dict) -> ConflictRecord | str:
    """Build a record from a decoded JSON object, or return a malformation detail."""
    if not isinstance(obj, dict):
        return "record is not a JSON object"
    for key in ("id", "project", "commit", "path", "language"):
        if not isinstance(obj.get(key), str):
            return f"missing or non-string field {key!r}"
    if not obj["id"]:
        return "empty id"
    commit = obj["commit"]
    if not commit or any(c not in _HEX_DIGITS for c in commit):
        return "commit is not a hex string"
    lists = {}
    for key in ("base", "v1", "v2", "resolution"):
        lines = _string_list(obj.get(key))
        if lines is None:
            return f"field {key!r} is not a list of strings"
        lists[key] = lines
    return ConflictRecord(
        id=obj["id"],
        project=obj["project"],
        commit_hash=commit,
        file_path=obj["path"],
        language=parse_language(obj["language"]),
        base_lines=lists["base"],
        v1_lines=lists["v1"],
        v2_lines=lists["v2"],
        resolution_lines=lists["resolution"],
    )


def is_combination(resolution: Sequence[str], v1: Sequence[str], v2: Sequence[str]) -> bool:
    """True iff every resolution line occurs in v1 or v2 (multiset containment, exact text)."""
    available = Counter(v1)
    available.update(v2)
    needed = Counter(resolution)
    return all(available[line] >= count for line, count in needed.items())


def ingest_records(
    stream: Iterable[str],
    filters: FilterFlags = FilterFlags(),
) -> tuple[list[ConflictRecord], list[RejectionReport]]:
    """Read line-delimited JSON records, validate them, and report rejections.

    A malformed line is reported and skipped without aborting the stream.
    Duplicate ids keep the first occurrence. Blank lines are ignored.
    """
    accepted: list[ConflictRecord] = []
    rejections: list[RejectionReport] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            rejections.append(RejectionReport(line_no, None, "malformed", f"invalid JSON: {exc}"))
            continue
        built = _record_from_json(obj)
        if isinstance(built, str):
            rec_id = obj.get("id") if isinstance(obj, dict) and isinstance(obj.get("id"), str) else None
            rejections.append(RejectionReport(line_no, rec_id, "malformed", built))
            continue
        if built.id in seen_ids:
            rejections.append(RejectionReport(line_no, built.id, "duplicate-id", "id already ingested"))
            continue
        if not built.v1_lines and not built.v2_lines:
            seen_ids.add(built.id)
            rejections.append(RejectionReport(line_no, built.id, "empty-both-sides", "both versions empty"))
            continue
        if filters.combination and not is_combination(
            built.resolution_lines, built.v1_lines, built.v2_lines
        ):
            seen_ids.add(built.id)
            rejections.append(
                RejectionReport(line_no, built.id, "not-combination", "resolution uses lines absent from both versions")
            )
            continue
        seen_ids.add(built.id)
        accepted.append(built)
    return accepted, rejections


def load_records(path: str | Path, filters: FilterFlags = FilterFlags()) -> tuple[list[ConflictRecord], list[RejectionReport]]:
    """Ingest records from a file path."""
    with open(path, encoding="utf-8") as fh:
        return ingest_records(fh, filters)


def write_records(path: str | Path, records: Iterable[ConflictRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


def write_rejections(path: str | Path, rejections: Iterable[RejectionReport]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for report in rejections:
            fh.write(json.dumps(report.to_json(), ensure_ascii=False) + "\n")


def preserves_partial_order(
    resolution: Sequence[str], v1: Sequence[str], v2: Sequence[str]
) -> bool:
    """True iff the resolution is an interleaving of subsequences of v1 and v2.

    Equivalently: the resolution can be produced by deleting lines from each
    version and merging the survivors without reordering within a version.
    Duplicated line texts are handled by position. The check walks the
    resolution keeping a Pareto frontier of (v1 consumed, v2 consumed) pairs;
    matching each line at its earliest still-available occurrence dominates
    any later choice, so the frontier stays small.
    """
    if not resolution:
        return True
    positions1: dict[str, list[int]] = {}
    for i, line in enumerate(v1):
        positions1.setdefault(line, []).append(i)
    positions2: dict[str, list[int]] = {}
    for j, line in enumerate(v2):
        positions2.setdefault(line, []).append(j)

    def earliest(positions: list[int] | None, start: int) -> int | None:
        if not positions:
            return None
        k = bisect_left(positions, start)
        return positions[k] if k < len(positions) else None

    frontier: set[tuple[int, int]] = {(0, 0)}
    for line in resolution:
        occ1 = positions1.get(line)
        occ2 = positions2.get(line)
        nxt: set[tuple[int, int]] = set()
        for i, j in frontier:
            p = earliest(occ1, i)
            if p is not None:
                nxt.add((p + 1, j))
            q = earliest(occ2, j)
            if q is not None:
                nxt.add((i, q + 1))
        if not nxt:
            return False
        frontier = _pareto_minimal(nxt)
    return True


def _pareto_minimal(states: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Drop states dominated by another state that consumed no more of either version."""
    keep: set[tuple[int, int]] = set()
    for i, j in sorted(states):
        if not any(ki <= i and kj <= j for ki, kj in keep):
            keep.add((i, j))
    return keep


def dedupe_by_commit(
    records_a: Sequence[ConflictRecord], records_b: Sequence[ConflictRecord]
) -> list[ConflictRecord]:
    """Merge two datasets, dropping every record whose commit hash appears in both.

    Conservative exclusion: a shared commit hash removes the records from
    both sides of the merge, not just one.
    """
    hashes_a = {r.commit_hash for r in records_a}
    hashes_b = {r.commit_hash for r in records_b}
    shared = hashes_a & hashes_b
    merged = list(records_a) + list(records_b)
    return [r for r in merged if r.commit_hash not in shared]


def split_dataset(
    ids: Sequence[str], seed: int, ratios: tuple[float, float, float]
) -> DatasetSplit:
    """Deterministically shuffle ids and cut them into train/valid/test partitions.

    Cut points are floor(n * r_train) and floor(n * (r_train + r_valid));
    the remainder goes to test. Ratios must sum to 1 within 1e-9.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ValueError("ratios must be three non-negative numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    shuffled = list(ids)
    random.Random(seed).shuffle(shuffled)
    n = len(shuffled)
    cut1 = math.floor(n * ratios[0])
    cut2 = math.floor(n * (ratios[0] + ratios[1]))
    return DatasetSplit(
        train_ids=tuple(shuffled[:cut1]),
        valid_ids=tuple(shuffled[cut1:cut2]),
        test_ids=tuple(shuffled[cut2:]),
        seed=seed,
        ratios=(ratios[0], ratios[1], ratios[2]),
    )


def bundled_sample_path() -> Path:
    """Path of the 50-record sample dataset shipped with the package."""
    return Path(__file__).parent / "data" / "sample_conflicts.jsonl"
