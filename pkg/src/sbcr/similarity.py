"""Sequence similarity primitives shared by the search objective and the benchmark metric.

The similarity score is the LCS ratio 2*LCS(a, b) / (|a| + |b|), applied either
to line sequences directly or to the character stream obtained by joining the
lines with a single LF.
"""

from __future__ import annotations

from enum import Enum
from typing import Sequence


class Granularity(Enum):
    LINE = "line"
    CHAR = "char"


def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence of two sequences.

    Elements are compared by exact equality. Runs the classic row-rolling
    dynamic program using O(min(|a|, |b|)) memory; common prefixes and
    suffixes are stripped first since real conflict candidates share
    long runs with their parents.
    """
    if len(a) < len(b):
        a, b = b, a
    # strip common prefix/suffix; they are always part of an LCS
    lo = 0
    hi_a, hi_b = len(a), len(b)
    while lo < hi_b and a[lo] == b[lo]:
        lo += 1
    while hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    common = lo + (len(b) - hi_b)
    a = a[lo:hi_a]
    b = b[lo:hi_b]
    if not b:
        return common
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0  # row[j] from the previous iteration of the outer loop
        for j, y in enumerate(b, start=1):
            cur = row[j]
            if x == y:
                row[j] = prev + 1
            elif row[j - 1] > cur:
                row[j] = row[j - 1]
            prev = cur
    return common + row[-1]


def flatten_lines(lines: Sequence[str]) -> str:
    """Join a line list into the char-granularity stream (single LF separators, no trailing LF)."""
    return "\n".join(lines)


def similarity(
    a: Sequence[str],
    b: Sequence[str],
    granularity: Granularity = Granularity.LINE,
    *,
    trim_trailing: bool = False,
) -> float:
    """LCS ratio between two line lists at the given granularity, in [0, 1].

    Defined as 1.0 when both sides are empty. ``trim_trailing`` strips
    trailing whitespace from every line first; it exists for reporting
    only and is never used by the search objective.
    """
    if trim_trailing:
        a = [line.rstrip() for line in a]
        b = [line.rstrip() for line in b]
    if granularity is Granularity.CHAR:
        sa: Sequence = flatten_lines(a)
        sb: Sequence = flatten_lines(b)
    else:
        sa, sb = a, b
    total = len(sa) + len(sb)
    if total == 0:
        return 1.0
    return 2.0 * lcs_length(sa, sb) / total
