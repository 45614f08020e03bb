import random
from collections import Counter

import pytest
from conftest import Chunk, brute_force_optimum, random_chunk

from sbcr.search import (
    SearchParams,
    SourceLineRef,
    Version,
    candidate_lines,
    concat_candidate,
    evaluate,
    is_valid_candidate,
    neighbor,
    random_candidate,
    rrhc_resolve,
)


def ref(version: int, index: int) -> SourceLineRef:
    return SourceLineRef(Version.V1 if version == 1 else Version.V2, index)


def test_evaluate_spec_examples():
    chunk = Chunk(["x"], ["y"])
    assert abs(evaluate((ref(1, 0), ref(2, 0)), chunk) - 2 / 3) < 1e-9

    chunk = Chunk(["a", "b"], ["c", "d"])
    full_v1 = (ref(1, 0), ref(1, 1))
    assert evaluate(full_v1, chunk) == 0.5
    assert evaluate((), chunk) == 0.0


def test_evaluate_rejects_invalid_candidates():
    chunk = Chunk(["a"], ["b"])
    with pytest.raises(ValueError):
        evaluate((ref(1, 0), ref(1, 0)), chunk)  # duplicate ref
    with pytest.raises(ValueError):
        evaluate((ref(1, 5),), chunk)  # out of range
    with pytest.raises(ValueError):
        evaluate((ref(1, 1), ref(1, 0)), Chunk(["a", "b"], []))  # reordered


def test_evaluate_perfect_score_only_when_versions_equal():
    rng = random.Random(2)
    for _ in range(300):
        chunk = random_chunk(rng, max_side=3)
        score = evaluate(random_candidate(chunk, rng), chunk)
        if score == 1.0:
            assert chunk.v1_lines == chunk.v2_lines


def test_random_candidate_one_sided():
    chunk = Chunk([], ["y"])
    rng = random.Random(0)
    seen = Counter(random_candidate(chunk, rng) for _ in range(10_000))
    assert set(seen) == {(), (ref(2, 0),)}
    assert abs(seen[()] / 10_000 - 0.5) < 0.02


def test_random_candidate_deterministic_per_seed():
    chunk = Chunk(["a", "b", "c"], ["d", "e"])
    assert random_candidate(chunk, random.Random(5)) == random_candidate(chunk, random.Random(5))


def test_random_candidate_uniform_interleaving():
    # conditioned on both lines included, each order should appear half the time
    chunk = Chunk(["a"], ["b"])
    rng = random.Random(9)
    draws = [random_candidate(chunk, rng) for _ in range(40_000)]
    both = [d for d in draws if len(d) == 2]
    assert len(both) >= 9000
    first_v1 = sum(1 for d in both if d[0].version is Version.V1)
    assert abs(first_v1 / len(both) - 0.5) < 0.02


def test_neighbor_empty_candidate_only_addition():
    chunk = Chunk(["a", "b"], ["c"])
    rng = random.Random(1)
    for _ in range(50):
        moved = neighbor((), chunk, rng)
        assert len(moved) == 1
        assert is_valid_candidate(moved, chunk)


def test_neighbor_full_candidate_no_addition():
    chunk = Chunk(["a", "b"], ["c"])
    full = concat_candidate(chunk)
    rng = random.Random(4)
    for _ in range(200):
        moved = neighbor(full, chunk, rng)
        assert moved != full
        assert len(moved) <= len(full)  # removal or exchange, never addition
        assert is_valid_candidate(moved, chunk)


def test_neighbor_no_operator_applicable_returns_input():
    chunk = Chunk([], [])
    assert neighbor((), chunk, random.Random(0)) == ()


def test_neighbor_fuzz_validity():
    rng = random.Random(33)
    for _ in range(20_000):
        chunk = random_chunk(rng, max_side=5)
        current = random_candidate(chunk, rng)
        moved = neighbor(current, chunk, rng)
        assert is_valid_candidate(moved, chunk), (chunk, current, moved)
        assert len(set(moved)) == len(moved)
        if chunk.v1_lines or chunk.v2_lines:
            assert moved != current


def eval_params(**kwargs) -> SearchParams:
    defaults = dict(neighbors_per_iteration=5, max_stagnation_iterations=10, max_evaluations=2000, seed=0)
    defaults.update(kwargs)
    return SearchParams(**defaults)


def test_rrhc_identical_versions_reaches_perfect_score():
    result = rrhc_resolve(Chunk(["x"], ["x"]), eval_params(max_evaluations=50))
    assert result.best_score == 1.0
    assert candidate_lines(result.best, Chunk(["x"], ["x"])) == ["x"]


def test_rrhc_single_evaluation_returns_concat():
    chunk = Chunk(["a"], ["b"])
    result = rrhc_resolve(chunk, eval_params(max_evaluations=1))
    assert result.best == concat_candidate(chunk)
    assert result.evaluations == 1
    assert result.ranked[0].candidate == result.best


def test_rrhc_rejects_empty_chunk_and_bad_params():
    with pytest.raises(ValueError):
        rrhc_resolve(Chunk([], []), eval_params())
    with pytest.raises(ValueError):
        SearchParams(neighbors_per_iteration=0, max_evaluations=10)
    with pytest.raises(ValueError):
        SearchParams(max_stagnation_iterations=0, max_evaluations=10)
    with pytest.raises(ValueError):
        SearchParams(max_evaluations=0)
    with pytest.raises(ValueError):
        SearchParams(max_execution_time=-1.0)
    with pytest.raises(ValueError):
        SearchParams(max_execution_time=5.0, max_evaluations=10)
    with pytest.raises(ValueError):
        SearchParams()  # no budget at all


def test_rrhc_deterministic_bit_for_bit():
    rng = random.Random(6)
    for _ in range(10):
        chunk = random_chunk(rng, max_side=4)
        params = eval_params(seed=rng.randrange(2**32), max_evaluations=500)
        first = rrhc_resolve(chunk, params)
        second = rrhc_resolve(chunk, params)
        assert first == second


def test_rrhc_best_monotone_in_budget():
    # an evaluation-budget run is a prefix of a longer run with the same seed
    rng = random.Random(8)
    for _ in range(10):
        chunk = random_chunk(rng, max_side=4)
        seed = rng.randrange(2**32)
        scores = [
            rrhc_resolve(chunk, eval_params(seed=seed, max_evaluations=n)).best_score
            for n in (1, 10, 100, 1000)
        ]
        assert scores == sorted(scores)


def test_rrhc_score_bounded_by_brute_force():
    rng = random.Random(13)
    for _ in range(20):
        chunk = random_chunk(rng, max_side=3)
        result = rrhc_resolve(chunk, eval_params(seed=rng.randrange(2**32), max_evaluations=300))
        assert result.best_score <= brute_force_optimum(chunk) + 1e-12


def test_rrhc_ranked_list_sorted_and_deduplicated():
    chunk = Chunk(["a", "b", "a"], ["b", "a"])
    result = rrhc_resolve(chunk, eval_params(max_evaluations=3000, top_n=20))
    scores = [entry.score for entry in result.ranked]
    assert scores == sorted(scores, reverse=True)
    assert len(result.ranked) <= 20
    candidates = [entry.candidate for entry in result.ranked]
    assert len(set(candidates)) == len(candidates)
    assert result.ranked[0].candidate == result.best
    assert result.ranked[0].score == result.best_score


def test_rrhc_validity_closure_debug_mode():
    rng = random.Random(21)
    for _ in range(5):
        chunk = random_chunk(rng, max_side=4)
        rrhc_resolve(chunk, eval_params(seed=1, max_evaluations=2000), check_invariants=True)


def test_rrhc_time_budget_with_fake_clock():
    ticks = iter(range(1000))
    params = SearchParams(
        neighbors_per_iteration=2, max_stagnation_iterations=3, max_execution_time=10.0, seed=0
    )
    result = rrhc_resolve(Chunk(["a", "b"], ["c"]), params, clock=lambda: next(ticks))
    assert result.elapsed >= 10.0
    assert result.evaluations > 0


def test_rrhc_restarts_counted():
    # a chunk whose landscape has immediate plateaus forces restarts quickly
    result = rrhc_resolve(Chunk([], ["y"]), eval_params(max_evaluations=500, max_stagnation_iterations=2))
    assert result.restarts > 0
    assert result.best_score == 0.5
