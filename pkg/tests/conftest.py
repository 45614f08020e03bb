"""Shared test helpers: tiny chunk type, random generators, and brute-force oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

from sbcr.search import SourceLineRef, Version, evaluate


@dataclass
class Chunk:
    v1_lines: list[str]
    v2_lines: list[str]
    base_lines: list[str] | None = None


def random_chunk(rng: random.Random, max_side: int = 4, alphabet: Sequence[str] = ("a", "b", "c")) -> Chunk:
    """Random chunk over a small alphabet; duplicates are likely by design."""
    n1 = rng.randint(0, max_side)
    n2 = rng.randint(0, max_side)
    if n1 == 0 and n2 == 0:
        n1 = 1
    return Chunk(
        v1_lines=[rng.choice(alphabet) for _ in range(n1)],
        v2_lines=[rng.choice(alphabet) for _ in range(n2)],
    )


def interleavings(xs: Sequence, ys: Sequence) -> Iterator[tuple]:
    """Every merge of xs and ys that keeps both internal orders."""
    if not xs:
        yield tuple(ys)
        return
    if not ys:
        yield tuple(xs)
        return
    for rest in interleavings(xs[1:], ys):
        yield (xs[0],) + rest
    for rest in interleavings(xs, ys[1:]):
        yield (ys[0],) + rest


def all_candidates(chunk: Chunk) -> Iterator[tuple[SourceLineRef, ...]]:
    """Every valid candidate: each subset pair of the versions, every interleaving."""
    refs1 = [SourceLineRef(Version.V1, i) for i in range(len(chunk.v1_lines))]
    refs2 = [SourceLineRef(Version.V2, j) for j in range(len(chunk.v2_lines))]
    for size1 in range(len(refs1) + 1):
        for subset1 in combinations(refs1, size1):
            for size2 in range(len(refs2) + 1):
                for subset2 in combinations(refs2, size2):
                    yield from interleavings(subset1, subset2)


def brute_force_optimum(chunk: Chunk) -> float:
    """Exhaustive-enumeration maximum of the evaluation function."""
    return max(evaluate(candidate, chunk) for candidate in all_candidates(chunk))


def achievable_sequences(v1: Sequence[str], v2: Sequence[str]) -> set[tuple[str, ...]]:
    """All line sequences reachable by deleting within each version and interleaving."""
    chunk = Chunk(v1_lines=list(v1), v2_lines=list(v2))
    out: set[tuple[str, ...]] = set()
    for candidate in all_candidates(chunk):
        out.add(
            tuple(
                (v1 if ref.version is Version.V1 else v2)[ref.index]
                for ref in candidate
            )
        )
    return out


CONTENT_POOL = [
    "int x = 1;",
    "return value;",
    "}",
    "",
    "  spaced()",
    " <<<<<<< not a marker",
    "========",
    "|||||||x",
    "\ttabbed",
    "final piece",
]


def make_conflicted_file(rng: random.Random) -> str:
    """Random well-formed conflicted file; LF or CRLF, optional diff3 base sections."""
    eol = rng.choice(["\n", "\r\n"])
    diff3 = rng.random() < 0.5
    parts: list[str] = []

    def content_block(max_lines: int) -> None:
        for _ in range(rng.randint(0, max_lines)):
            parts.append(rng.choice(CONTENT_POOL) + eol)

    content_block(4)
    for _ in range(rng.randint(1, 4)):
        label = rng.choice(["", " HEAD", " branch-a", " temp label"])
        parts.append("<<<<<<<" + label + eol)
        content_block(3)
        if diff3 and rng.random() < 0.8:
            parts.append("|||||||" + rng.choice(["", " base"]) + eol)
            content_block(2)
        parts.append("=======" + eol)
        content_block(3)
        parts.append(">>>>>>>" + rng.choice(["", " theirs"]) + eol)
        content_block(4)
    text = "".join(parts)
    if rng.random() < 0.3 and text.endswith(eol):
        text = text[: -len(eol)]  # drop the final newline
    return text


def lcs_oracle(a: Sequence, b: Sequence) -> int:
    """Plain recursive-memo LCS, independent of the rolling-row implementation."""
    memo: dict[tuple[int, int], int] = {}

    def go(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        key = (i, j)
        if key in memo:
            return memo[key]
        if a[i] == b[j]:
            value = 1 + go(i + 1, j + 1)
        else:
            value = max(go(i + 1, j), go(i, j + 1))
        memo[key] = value
        return value

    return go(0, 0)
