import random
import sys

from conftest import lcs_oracle

from sbcr.similarity import Granularity, lcs_length, similarity


def test_lcs_hand_checked():
    assert lcs_length(["A", "B", "C"], ["A", "C"]) == 2
    assert lcs_length("abcde", "abcde") == 5
    assert lcs_length("abc", "xyz") == 0
    assert lcs_length([], ["x"]) == 0
    assert lcs_length([], []) == 0


def test_lcs_matches_recursive_oracle():
    rng = random.Random(42)
    sys.setrecursionlimit(10000)
    for _ in range(1000):
        a = [rng.choice("abcd") for _ in range(rng.randint(0, 12))]
        b = [rng.choice("abcd") for _ in range(rng.randint(0, 12))]
        assert lcs_length(a, b) == lcs_oracle(a, b), (a, b)


def test_lcs_bounded_by_shorter_sequence():
    rng = random.Random(7)
    for _ in range(500):
        a = [rng.choice("ab") for _ in range(rng.randint(0, 9))]
        b = [rng.choice("ab") for _ in range(rng.randint(0, 9))]
        assert lcs_length(a, b) <= min(len(a), len(b))


def test_similarity_line_level_example():
    assert abs(similarity(["x", "y", "z"], ["x", "z"]) - 0.8) < 1e-12


def test_similarity_identical_and_empty():
    assert similarity(["a", "b"], ["a", "b"]) == 1.0
    assert similarity([], ["a"]) == 0.0
    assert similarity([], []) == 1.0
    assert similarity([], [], Granularity.CHAR) == 1.0


def test_similarity_char_level_joins_with_lf():
    # "ab\ncd" vs "ab\nce": LCS = 4 ("ab\nc"), lengths 5 and 5
    assert abs(similarity(["ab", "cd"], ["ab", "ce"], Granularity.CHAR) - 0.8) < 1e-12


def test_similarity_symmetry_and_bounds_fuzz():
    rng = random.Random(3)
    for _ in range(10_000):
        a = [rng.choice("abc") for _ in range(rng.randint(0, 6))]
        b = [rng.choice("abc") for _ in range(rng.randint(0, 6))]
        g = rng.choice([Granularity.LINE, Granularity.CHAR])
        s_ab = similarity(a, b, g)
        s_ba = similarity(b, a, g)
        assert s_ab == s_ba
        assert 0.0 <= s_ab <= 1.0
        if g is Granularity.LINE:
            assert (s_ab == 1.0) == (a == b)
        else:
            assert (s_ab == 1.0) == ("\n".join(a) == "\n".join(b))


def test_trim_trailing_flag():
    assert similarity(["x  "], ["x"]) < 1.0
    assert similarity(["x  "], ["x"], trim_trailing=True) == 1.0
