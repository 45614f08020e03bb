"""Hybrid meta-resolver: rule-based routing between the search engine and a generative resolver.

Rules fire in a fixed order: oversized conflicts, then non-English content,
then balanced content all go to the search engine; everything else goes to
the generative resolver, with a search fallback when the generative result
is empty, truncated, or failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .resolvers import (
    DEFAULT_INPUT_TOKEN_LIMIT,
    ResolutionCandidate,
    Resolver,
    Status,
    estimate_tokens,
)

FALLBACK_RESOLVER_ID = "generative→search-fallback"


@dataclass(frozen=True)
class ConflictFeatures:
    token_estimate: int
    balance: float  # (|v1| - |v2|) / (|v1| + |v2|) in lines; 0 when both empty
    non_ascii_fraction: float

    def to_json(self) -> dict:
        return {
            "token_estimate": self.token_estimate,
            "balance": self.balance,
            "non_ascii_fraction": self.non_ascii_fraction,
        }


class RouteTarget(Enum):
    SEARCH = "search"
    GENERATIVE = "generative"


class RouteRule(Enum):
    TOKEN_LIMIT = "token-limit"
    NON_ENGLISH = "non-english"
    BALANCED = "balanced"
    DEFAULT = "default"


@dataclass(frozen=True)
class RouteDecision:
    target: RouteTarget
    rule: RouteRule
    features: ConflictFeatures


@dataclass(frozen=True)
class RouteThresholds:
    """Routing knobs. Degenerate values disable rules: an infinite token limit
    disables the size rule, tau=1 the language rule, beta=-1 the balance rule."""

    input_token_limit: float = DEFAULT_INPUT_TOKEN_LIMIT
    non_english_tau: float = 0.05
    balance_beta: float = 0.2


def extract_features(chunk) -> ConflictFeatures:
    """Deterministic routing features for one chunk (base included in the size proxy)."""
    base = getattr(chunk, "base_lines", None) or []
    all_lines = list(base) + list(chunk.v1_lines) + list(chunk.v2_lines)
    n1, n2 = len(chunk.v1_lines), len(chunk.v2_lines)
    balance = 0.0 if n1 + n2 == 0 else (n1 - n2) / (n1 + n2)
    text = "".join(all_lines)
    non_ascii = sum(1 for ch in text if ord(ch) > 127)
    fraction = 0.0 if not text else non_ascii / len(text)
    return ConflictFeatures(
        token_estimate=estimate_tokens(all_lines),
        balance=balance,
        non_ascii_fraction=fraction,
    )


def route(features: ConflictFeatures, thresholds: RouteThresholds = RouteThresholds()) -> RouteDecision:
    """Apply the routing rules in their fixed precedence order; first match wins."""
    if features.token_estimate > thresholds.input_token_limit:
        return RouteDecision(RouteTarget.SEARCH, RouteRule.TOKEN_LIMIT, features)
    if features.non_ascii_fraction > thresholds.non_english_tau:
        return RouteDecision(RouteTarget.SEARCH, RouteRule.NON_ENGLISH, features)
    if abs(features.balance) <= thresholds.balance_beta:
        return RouteDecision(RouteTarget.SEARCH, RouteRule.BALANCED, features)
    return RouteDecision(RouteTarget.GENERATIVE, RouteRule.DEFAULT, features)


def hybrid_resolve(
    chunk,
    search_resolver: Resolver,
    generative_resolver: Resolver,
    thresholds: RouteThresholds = RouteThresholds(),
    on_decision: Callable[[RouteDecision], None] | None = None,
) -> ResolutionCandidate:
    """Route the chunk, resolve it, and fall back to search on generative failure.

    The fallback fires when the generative candidate is EMPTY, TRUNCATED, or
    FAILED; the returned candidate is then re-labelled so downstream records
    show the fallback path.
    """
    decision = route(extract_features(chunk), thresholds)
    if on_decision is not None:
        on_decision(decision)
    if decision.target is RouteTarget.SEARCH:
        return search_resolver.resolve(chunk)
    candidate = generative_resolver.resolve(chunk)
    if candidate.status in (Status.EMPTY, Status.TRUNCATED, Status.FAILED):
        fallback = search_resolver.resolve(chunk)
        why = f"generative {candidate.status.value}"
        if candidate.detail:
            why += f": {candidate.detail}"
        return ResolutionCandidate(
            lines=fallback.lines,
            resolver_id=FALLBACK_RESOLVER_ID,
            elapsed=candidate.elapsed + fallback.elapsed,
            status=fallback.status,
            detail=why,
        )
    return candidate
