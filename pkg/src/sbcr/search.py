"""Random Restart Hill Climbing over partial-order-constrained line interleavings.

A candidate resolution is an ordered selection of lines drawn from the two
conflicting versions; lines from the same version may never be reordered.
Candidates are scored by the mean of their line-level similarity to each
parent version, and the search walks the neighborhood induced by three
operators (add a line, remove a line, exchange two positions).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from enum import IntEnum
from heapq import heappush, heappop
from typing import Callable, NamedTuple, Protocol, Sequence

from .similarity import lcs_length


class Version(IntEnum):
    V1 = 1
    V2 = 2


class SourceLineRef(NamedTuple):
    """A reference to one source line: which version it came from and its 0-based index there."""

    version: Version
    index: int


Candidate = tuple[SourceLineRef, ...]


class ChunkLike(Protocol):
    v1_lines: Sequence[str]
    v2_lines: Sequence[str]


@dataclass(frozen=True)
class SearchParams:
    """Engine configuration.

    Exactly one budget must be set: ``max_execution_time`` (wall-clock
    seconds) or ``max_evaluations`` (deterministic, machine-independent).
    """

    neighbors_per_iteration: int = 5
    max_stagnation_iterations: int = 10
    max_execution_time: float | None = None
    max_evaluations: int | None = None
    top_n: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.neighbors_per_iteration < 1:
            raise ValueError("neighbors_per_iteration must be >= 1")
        if self.max_stagnation_iterations < 1:
            raise ValueError("max_stagnation_iterations must be >= 1")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        has_time = self.max_execution_time is not None
        has_evals = self.max_evaluations is not None
        if has_time == has_evals:
            raise ValueError("exactly one of max_execution_time / max_evaluations must be set")
        if has_time and self.max_execution_time <= 0:
            raise ValueError("max_execution_time must be positive")
        if has_evals and self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")


class ScoredCandidate(NamedTuple):
    candidate: Candidate
    score: float


@dataclass(frozen=True)
class SearchResult:
    best: Candidate
    best_score: float
    ranked: tuple[ScoredCandidate, ...]
    evaluations: int
    restarts: int
    elapsed: float


def is_valid_candidate(candidate: Sequence[SourceLineRef], chunk: ChunkLike) -> bool:
    """Check the candidate invariants: in-range refs, no duplicates, per-version index order."""
    sizes = {Version.V1: len(chunk.v1_lines), Version.V2: len(chunk.v2_lines)}
    last = {Version.V1: -1, Version.V2: -1}
    for ref in candidate:
        if not 0 <= ref.index < sizes[ref.version]:
            return False
        if ref.index <= last[ref.version]:
            return False
        last[ref.version] = ref.index
    return True


def candidate_lines(candidate: Sequence[SourceLineRef], chunk: ChunkLike) -> list[str]:
    """Materialize the candidate's text lines in candidate order."""
    return [
        chunk.v1_lines[ref.index] if ref.version is Version.V1 else chunk.v2_lines[ref.index]
        for ref in candidate
    ]


def concat_candidate(chunk: ChunkLike) -> Candidate:
    """All of v1 followed by all of v2; the trivial concatenation resolution."""
    return tuple(
        [SourceLineRef(Version.V1, i) for i in range(len(chunk.v1_lines))]
        + [SourceLineRef(Version.V2, j) for j in range(len(chunk.v2_lines))]
    )


def _mean_parent_similarity(lines: list[str], v1: Sequence[str], v2: Sequence[str]) -> float:
    n = len(lines)
    s1 = 1.0 if n + len(v1) == 0 else 2.0 * lcs_length(lines, v1) / (n + len(v1))
    s2 = 1.0 if n + len(v2) == 0 else 2.0 * lcs_length(lines, v2) / (n + len(v2))
    return (s1 + s2) / 2.0


def evaluate(candidate: Sequence[SourceLineRef], chunk: ChunkLike) -> float:
    """Score a candidate: mean of its line-level similarity to each parent version."""
    if not is_valid_candidate(candidate, chunk):
        raise ValueError("invalid candidate for this chunk")
    return _mean_parent_similarity(candidate_lines(candidate, chunk), chunk.v1_lines, chunk.v2_lines)


def random_candidate(chunk: ChunkLike, rng: random.Random) -> Candidate:
    """Draw a uniformly interleaved candidate over an independent 1/2 line selection.

    Each source line is kept with probability 1/2; the kept lines of the two
    versions are merged by repeatedly taking the next line from a side with
    probability proportional to its remaining count, which makes every valid
    interleaving of the chosen subsets equally likely.
    """
    take1 = [SourceLineRef(Version.V1, i) for i in range(len(chunk.v1_lines)) if rng.random() < 0.5]
    take2 = [SourceLineRef(Version.V2, j) for j in range(len(chunk.v2_lines)) if rng.random() < 0.5]
    merged: list[SourceLineRef] = []
    i = j = 0
    while i < len(take1) and j < len(take2):
        remaining1 = len(take1) - i
        remaining2 = len(take2) - j
        if rng.random() * (remaining1 + remaining2) < remaining1:
            merged.append(take1[i])
            i += 1
        else:
            merged.append(take2[j])
            j += 1
    merged.extend(take1[i:])
    merged.extend(take2[j:])
    return tuple(merged)


def _addition_window(candidate: Candidate, ref: SourceLineRef) -> tuple[int, int]:
    """Inclusive slot range where ref may be inserted without breaking version order."""
    lo = 0
    hi = len(candidate)
    for pos, existing in enumerate(candidate):
        if existing.version is not ref.version:
            continue
        if existing.index < ref.index:
            lo = pos + 1
        elif hi == len(candidate):
            hi = pos
    return lo, hi


def _unused_refs(candidate: Candidate, chunk: ChunkLike) -> list[SourceLineRef]:
    used = set(candidate)
    refs = [SourceLineRef(Version.V1, i) for i in range(len(chunk.v1_lines))]
    refs += [SourceLineRef(Version.V2, j) for j in range(len(chunk.v2_lines))]
    return [r for r in refs if r not in used]


def _try_exchange(candidate: Candidate, rng: random.Random) -> Candidate | None:
    """Swap a uniformly drawn position pair; reject draws that break version order.

    Gives up after len(candidate)**2 draws. A candidate containing lines from
    both versions always has a legal swap (any adjacent cross-version pair),
    so the cap only ends hopeless rejection streaks quickly.
    """
    n = len(candidate)
    if n < 2:
        return None
    if len({ref.version for ref in candidate}) < 2:
        return None  # same-version swaps always reorder that version
    for _ in range(n * n):
        p = rng.randrange(n)
        q = rng.randrange(n)
        if p == q:
            continue
        swapped = list(candidate)
        swapped[p], swapped[q] = swapped[q], swapped[p]
        if _order_ok(swapped):
            return tuple(swapped)
    return None


def _order_ok(refs: Sequence[SourceLineRef]) -> bool:
    last1 = last2 = -1
    for ref in refs:
        if ref.version is Version.V1:
            if ref.index <= last1:
                return False
            last1 = ref.index
        else:
            if ref.index <= last2:
                return False
            last2 = ref.index
    return True


_ADD, _REMOVE, _EXCHANGE = "add", "remove", "exchange"


def neighbor(candidate: Candidate, chunk: ChunkLike, rng: random.Random) -> Candidate:
    """Apply one uniformly chosen applicable operator; always returns a valid candidate.

    Returns the input unchanged only when no operator applies, which happens
    exactly when both versions are empty.
    """
    operators = []
    unused = _unused_refs(candidate, chunk)
    if unused:
        operators.append(_ADD)
    if candidate:
        operators.append(_REMOVE)
    if len(candidate) >= 2 and len({ref.version for ref in candidate}) == 2:
        operators.append(_EXCHANGE)
    while operators:
        op = operators[rng.randrange(len(operators))]
        if op == _ADD:
            ref = unused[rng.randrange(len(unused))]
            lo, hi = _addition_window(candidate, ref)
            slot = rng.randint(lo, hi)
            return candidate[:slot] + (ref,) + candidate[slot:]
        if op == _REMOVE:
            pos = rng.randrange(len(candidate))
            return candidate[:pos] + candidate[pos + 1 :]
        swapped = _try_exchange(candidate, rng)
        if swapped is not None:
            return swapped
        operators.remove(_EXCHANGE)
    return candidate


class _TopN:
    """Bounded best-scores structure, deduplicated by element sequence.

    Ties rank by discovery order; eviction removes the lowest score,
    preferring the latest discovery among equals.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._heap: list[tuple[float, int, Candidate]] = []
        self._members: set[Candidate] = set()
        self._counter = 0

    def offer(self, candidate: Candidate, score: float) -> None:
        if candidate in self._members:
            return
        self._counter += 1
        heappush(self._heap, (score, -self._counter, candidate))
        self._members.add(candidate)
        if len(self._heap) > self.capacity:
            _, _, evicted = heappop(self._heap)
            self._members.remove(evicted)

    def ranked(self) -> tuple[ScoredCandidate, ...]:
        ordered = sorted(self._heap, key=lambda item: (-item[0], -item[1]))
        return tuple(ScoredCandidate(candidate, score) for score, _, candidate in ordered)


class _Canonical:
    """Chunk view whose equal lines share one string object, speeding up LCS equality checks."""

    __slots__ = ("v1_lines", "v2_lines")

    def __init__(self, chunk: ChunkLike):
        pool: dict[str, str] = {}
        self.v1_lines = [pool.setdefault(line, line) for line in chunk.v1_lines]
        self.v2_lines = [pool.setdefault(line, line) for line in chunk.v2_lines]


def rrhc_resolve(
    chunk: ChunkLike,
    params: SearchParams,
    *,
    clock: Callable[[], float] | None = None,
    check_invariants: bool = False,
) -> SearchResult:
    """Run Random Restart Hill Climbing on one conflict chunk.

    The first climb starts from the v1+v2 concatenation; after
    ``max_stagnation_iterations`` consecutive non-improving iterations the
    search restarts from a random candidate. Every evaluated candidate is
    offered to the ranked top-N list.

    ``clock`` supplies wall time. With an evaluation budget it defaults to
    a constant clock so results (elapsed included) are bit-for-bit
    reproducible; with a time budget it defaults to time.monotonic.
    """
    if not chunk.v1_lines and not chunk.v2_lines:
        raise ValueError("chunk has no content on either side")
    if clock is None:
        clock = time.monotonic if params.max_execution_time is not None else lambda: 0.0

    view = _Canonical(chunk)
    rng = random.Random(params.seed)
    top = _TopN(params.top_n)
    scores: dict[Candidate, float] = {}
    start = clock()
    evaluations = 0
    restarts = 0
    best: Candidate | None = None
    best_score = -1.0

    max_evals = params.max_evaluations

    def evaluate_budgeted(candidate: Candidate) -> float | None:
        nonlocal evaluations, best, best_score
        if max_evals is not None and evaluations >= max_evals:
            return None
        evaluations += 1
        if check_invariants:
            assert is_valid_candidate(candidate, view), "engine produced an invalid candidate"
        score = scores.get(candidate)
        if score is None:
            score = _mean_parent_similarity(
                candidate_lines(candidate, view), view.v1_lines, view.v2_lines
            )
            scores[candidate] = score
        top.offer(candidate, score)
        if score > best_score:
            best, best_score = candidate, score
        return score

    current = concat_candidate(chunk)
    current_score = evaluate_budgeted(current)
    stagnation = 0
    k = params.neighbors_per_iteration

    while current_score is not None:
        if max_evals is not None and evaluations >= max_evals:
            break
        if params.max_execution_time is not None and clock() - start >= params.max_execution_time:
            break
        best_neighbor: Candidate | None = None
        best_neighbor_score = -1.0
        exhausted = False
        for _ in range(k):
            moved = neighbor(current, view, rng)
            score = evaluate_budgeted(moved)
            if score is None:
                exhausted = True
                break
            if score > best_neighbor_score:
                best_neighbor, best_neighbor_score = moved, score
        if exhausted:
            break
        if best_neighbor is not None and best_neighbor_score > current_score:
            current, current_score = best_neighbor, best_neighbor_score
            stagnation = 0
        else:
            stagnation += 1
        if stagnation >= params.max_stagnation_iterations:
            restarts += 1
            stagnation = 0
            current = random_candidate(view, rng)
            current_score = evaluate_budgeted(current)

    assert best is not None
    return SearchResult(
        best=best,
        best_score=best_score,
        ranked=top.ranked(),
        evaluations=evaluations,
        restarts=restarts,
        elapsed=clock() - start,
    )
