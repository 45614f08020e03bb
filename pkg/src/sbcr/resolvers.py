"""Uniform resolver interface: search adapter, trivial baselines, remote client, local stub.

Every resolver is total: ``resolve`` returns a ResolutionCandidate for any
well-formed chunk and maps its own failures to status FAILED instead of
raising.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import requests

from .search import SearchParams, candidate_lines, rrhc_resolve

DEFAULT_INPUT_TOKEN_LIMIT = 300
DEFAULT_OUTPUT_TOKEN_LIMIT = 100

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def estimate_tokens(lines: Sequence[str]) -> int:
    """Token-count proxy: split on word boundaries, one token per punctuation character.

    Approximates a BPE count closely enough to act as a monotone size proxy
    for routing and truncation checks.
    """
    return sum(len(_TOKEN_RE.findall(line)) for line in lines)


def truncate_to_tokens(lines: Sequence[str], limit: int) -> list[str]:
    """Keep the first ``limit`` tokens, cutting inside a line at a token boundary."""
    kept: list[str] = []
    remaining = limit
    for line in lines:
        if remaining <= 0:
            break
        matches = list(_TOKEN_RE.finditer(line))
        if len(matches) <= remaining:
            kept.append(line)
            remaining -= len(matches)
        else:
            kept.append(line[: matches[remaining - 1].end()])
            remaining = 0
    return kept


class Status(Enum):
    OK = "ok"
    EMPTY = "empty"
    TRUNCATED = "truncated"
    FAILED = "failed"


@dataclass(frozen=True)
class ResolutionCandidate:
    lines: tuple[str, ...]
    resolver_id: str
    elapsed: float
    status: Status
    detail: str = ""


def _success(lines: Sequence[str], resolver_id: str, elapsed: float) -> ResolutionCandidate:
    status = Status.EMPTY if not lines else Status.OK
    return ResolutionCandidate(tuple(lines), resolver_id, elapsed, status)


def _failure(resolver_id: str, elapsed: float, detail: str) -> ResolutionCandidate:
    return ResolutionCandidate((), resolver_id, elapsed, Status.FAILED, detail)


class TrivialStrategy(Enum):
    TAKE_V1 = "take-v1"
    TAKE_V2 = "take-v2"
    TAKE_BASE = "take-base"
    CONCAT_V1_V2 = "concat-v1-v2"
    CONCAT_V2_V1 = "concat-v2-v1"


class Resolver:
    """Base resolver; subclasses implement _generate and inherit failure mapping."""

    resolver_id = "resolver"

    def __init__(self, clock: Callable[[], float] | None = None):
        self._clock = clock if clock is not None else time.perf_counter

    def resolve(self, chunk) -> ResolutionCandidate:
        start = self._clock()
        try:
            lines = self._generate(chunk)
        except Exception as exc:  # totality: resolver failures are data, not crashes
            return _failure(self.resolver_id, self._clock() - start, str(exc))
        return _success(lines, self.resolver_id, self._clock() - start)

    def _generate(self, chunk) -> Sequence[str]:
        raise NotImplementedError


class SearchResolver(Resolver):
    """Adapter running the hill-climbing engine and returning its best candidate."""

    resolver_id = "sbcr"

    def __init__(self, params: SearchParams, clock: Callable[[], float] | None = None):
        super().__init__(clock=None)
        self.params = params
        self._engine_clock = clock

    def resolve(self, chunk) -> ResolutionCandidate:
        try:
            result = rrhc_resolve(chunk, self.params, clock=self._engine_clock)
        except Exception as exc:
            return _failure(self.resolver_id, 0.0, str(exc))
        return _success(candidate_lines(result.best, chunk), self.resolver_id, result.elapsed)


class TrivialResolver(Resolver):
    """The classic one-step strategies: take one side, the base, or a concatenation."""

    def __init__(self, strategy: TrivialStrategy, clock: Callable[[], float] | None = None):
        super().__init__(clock)
        self.strategy = strategy
        self.resolver_id = f"trivial:{strategy.value}"

    def _generate(self, chunk) -> Sequence[str]:
        s = self.strategy
        if s is TrivialStrategy.TAKE_V1:
            return list(chunk.v1_lines)
        if s is TrivialStrategy.TAKE_V2:
            return list(chunk.v2_lines)
        if s is TrivialStrategy.TAKE_BASE:
            base = getattr(chunk, "base_lines", None)
            if base is None:
                raise ValueError("chunk has no base section")
            return list(base)
        if s is TrivialStrategy.CONCAT_V1_V2:
            return list(chunk.v1_lines) + list(chunk.v2_lines)
        return list(chunk.v2_lines) + list(chunk.v1_lines)


@dataclass(frozen=True)
class TokenLimits:
    input_limit: int = DEFAULT_INPUT_TOKEN_LIMIT
    output_limit: int = DEFAULT_OUTPUT_TOKEN_LIMIT


def _classify_response(
    lines: Sequence[str], truncated_flag: bool, output_limit: int
) -> Status:
    if not lines:
        return Status.EMPTY
    if truncated_flag or estimate_tokens(lines) == output_limit:
        return Status.TRUNCATED
    return Status.OK


class RemoteResolver(Resolver):
    """HTTP client for an external generative resolver speaking the /v1/resolve protocol.

    Requests are idempotent (a pure POST of the chunk content), bounded by a
    deadline, and capped to ``max_inflight`` concurrent calls.
    """

    resolver_id = "remote"

    def __init__(
        self,
        endpoint: str,
        limits: TokenLimits = TokenLimits(),
        deadline: float = 10.0,
        max_inflight: int = 8,
        clock: Callable[[], float] | None = None,
    ):
        super().__init__(clock)
        self.endpoint = endpoint.rstrip("/")
        self.limits = limits
        self.deadline = deadline
        self._slots = threading.Semaphore(max_inflight)

    def resolve(self, chunk) -> ResolutionCandidate:
        payload = {
            "base": list(getattr(chunk, "base_lines", None) or []),
            "v1": list(chunk.v1_lines),
            "v2": list(chunk.v2_lines),
            "input_token_limit": self.limits.input_limit,
            "output_token_limit": self.limits.output_limit,
        }
        start = self._clock()
        with self._slots:
            try:
                response = requests.post(
                    f"{self.endpoint}/v1/resolve", json=payload, timeout=self.deadline
                )
            except requests.RequestException as exc:
                return _failure(self.resolver_id, self._clock() - start, f"request failed: {exc}")
        elapsed = self._clock() - start
        if response.status_code != 200:
            detail = ""
            try:
                detail = response.json().get("error", "")
            except ValueError:
                pass
            return _failure(
                self.resolver_id, elapsed, f"HTTP {response.status_code}: {detail or 'remote error'}"
            )
        try:
            body = response.json()
            lines = body["lines"]
            truncated = bool(body.get("truncated", False))
            if not isinstance(lines, list) or any(not isinstance(x, str) for x in lines):
                raise ValueError("lines is not a list of strings")
        except (ValueError, KeyError, TypeError) as exc:
            return _failure(self.resolver_id, elapsed, f"bad response body: {exc}")
        status = _classify_response(lines, truncated, self.limits.output_limit)
        return ResolutionCandidate(tuple(lines), self.resolver_id, elapsed, status)


STUB_MODES = ("echo-v1", "echo-v2", "empty", "truncate", "slow", "garbage")


def stub_response(mode: str, v1: Sequence[str], v2: Sequence[str], output_limit: int) -> tuple[list[str], bool]:
    """Shared stub behavior: the (lines, truncated) pair a stub in ``mode`` produces."""
    if mode == "echo-v1":
        return list(v1), False
    if mode == "echo-v2":
        return list(v2), False
    if mode == "empty":
        return [], False
    if mode == "truncate":
        source = list(v1) if v1 else list(v2)
        return truncate_to_tokens(source, output_limit), True
    if mode == "slow":
        return list(v1), False
    raise ValueError(f"unknown stub mode {mode!r}")


class StubGenerativeResolver(Resolver):
    """In-process stand-in for a generative resolver, reproducing its failure modes.

    Counts resolve calls so tests can assert a resolver was never consulted.
    """

    def __init__(
        self,
        mode: str = "echo-v1",
        limits: TokenLimits = TokenLimits(),
        slow_delay: float = 0.05,
        clock: Callable[[], float] | None = None,
    ):
        if mode not in STUB_MODES:
            raise ValueError(f"unknown stub mode {mode!r}; expected one of {STUB_MODES}")
        super().__init__(clock)
        self.mode = mode
        self.limits = limits
        self.slow_delay = slow_delay
        self.calls = 0
        self._lock = threading.Lock()
        self.resolver_id = f"stub:{mode}"

    def resolve(self, chunk) -> ResolutionCandidate:
        with self._lock:
            self.calls += 1
        start = self._clock()
        if self.mode == "slow":
            time.sleep(self.slow_delay)
        if self.mode == "garbage":
            return _failure(self.resolver_id, self._clock() - start, "bad response body: not JSON")
        lines, truncated = stub_response(self.mode, chunk.v1_lines, chunk.v2_lines, self.limits.output_limit)
        elapsed = self._clock() - start
        status = _classify_response(lines, truncated, self.limits.output_limit)
        return ResolutionCandidate(tuple(lines), self.resolver_id, elapsed, status)
