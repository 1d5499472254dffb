"""GF(2) matrices, the erasure decoder, and failure probabilities."""

import random
from fractions import Fraction as F

import pytest

from nmavc import (
    GF2Matrix,
    SingularReport,
    delta_exact,
    delta_monte_carlo,
    ecc_decode,
    ecc_encode,
    gf2_invert,
    hamming_7_4,
    min_distance,
    random_full_rank,
    single_parity,
)
from nmavc.errors import BudgetExceededError
from nmavc.gf2 import bits_to_int, int_to_bits, rank_of_columns
from oracles import lex_min_reconstruction


def test_bit_packing_round_trip():
    for bits in ("0", "1", "1011", "0000", "111111"):
        assert int_to_bits(bits_to_int(bits), len(bits)) == bits


def test_encode_examples():
    ident = GF2Matrix.identity(3)
    assert ecc_encode(ident, "101") == "101"
    g = GF2Matrix.from_rows(["101", "011"])
    assert ecc_encode(g, "11") == "110"
    assert ecc_encode(g, "00") == "000"


def test_invert_examples():
    assert gf2_invert(GF2Matrix.identity(3)) == GF2Matrix.identity(3)
    a = GF2Matrix.from_rows(["11", "01"])
    inv = gf2_invert(a)
    assert inv == a  # self-inverse
    assert a.matmul(inv) == GF2Matrix.identity(2)
    singular = gf2_invert(GF2Matrix.from_rows(["11", "11"]))
    assert singular == SingularReport(rank=1)


def test_inverse_property_random():
    rng = random.Random(30)
    for _ in range(40):
        n = rng.randint(1, 6)
        a = random_full_rank(n, n, rng)
        inv = gf2_invert(a)
        assert a.matmul(inv) == GF2Matrix.identity(n)
        assert inv.matmul(a) == GF2Matrix.identity(n)


def test_decode_no_erasures_round_trip():
    g = hamming_7_4()
    for u in ("0000", "1010", "1111"):
        result = ecc_decode(g, ecc_encode(g, u))
        assert result.message == u


def test_decode_worked_example():
    g = GF2Matrix.from_rows(["101", "011"])
    result = ecc_decode(g, "1e0")
    assert result.message == "11"
    assert result.reconstruction.indices == (0, 2)
    # Re-encoding agrees with the received word on the reconstruction set.
    word = ecc_encode(g, result.message)
    for j in result.reconstruction.indices:
        assert word[j] == "1e0"[j]


def test_decode_all_erased():
    g = GF2Matrix.identity(2)
    assert ecc_decode(g, "ee") is None


def test_decode_deterministic_and_lex_minimal():
    rng = random.Random(31)
    for _ in range(25):
        m = rng.randint(1, 3)
        n = rng.randint(m, 6)
        g = random_full_rank(m, n, rng)
        for _ in range(8):
            erased = frozenset(
                j for j in range(n) if rng.random() < 0.4
            )
            word = "".join("e" if j in erased else "0" for j in range(n))
            first = ecc_decode(g, word)
            second = ecc_decode(g, word)
            oracle = lex_min_reconstruction(g, erased)
            if oracle is None:
                assert first is None and second is None
            else:
                assert first.reconstruction.indices == oracle
                assert second.reconstruction.indices == oracle


def test_decode_within_minimum_distance():
    # Any erasure pattern of weight < d is correctable.
    for g in (single_parity(3), hamming_7_4()):
        d = min_distance(g)
        n = g.ncols
        from itertools import combinations

        from nmavc import all_bitstrings

        for u in all_bitstrings(g.nrows):
            word = ecc_encode(g, u)
            for weight in range(d):
                for pattern in combinations(range(n), weight):
                    erased = "".join(
                        "e" if j in pattern else word[j] for j in range(n)
                    )
                    assert ecc_decode(g, erased).message == u


def test_reencode_agrees_on_reconstruction_set():
    # For arbitrary (not necessarily codeword) erased words, re-encoding
    # the decoded message reproduces the received bits on R.
    rng = random.Random(33)
    for _ in range(30):
        m = rng.randint(1, 3)
        n = rng.randint(m, 6)
        g = random_full_rank(m, n, rng)
        word = "".join(rng.choice("01e") for _ in range(n))
        result = ecc_decode(g, word)
        if result is None:
            continue
        recoded = ecc_encode(g, result.message)
        for j in result.reconstruction.indices:
            assert recoded[j] == word[j]


def test_max_erasures_variant():
    g = hamming_7_4()
    word = ecc_encode(g, "1011")
    erased = "e" + word[1:]
    assert ecc_decode(g, erased, max_erasures=0) is None
    assert ecc_decode(g, erased, max_erasures=1).message == "1011"


def test_min_distances_of_stock_codes():
    assert min_distance(single_parity(4)) == 2
    assert min_distance(hamming_7_4()) == 3
    assert min_distance(GF2Matrix.identity(3)) == 1


def test_delta_exact_examples():
    assert delta_exact(GF2Matrix.identity(2), F(1, 10)) == F(19, 100)
    assert delta_exact(hamming_7_4(), F(0)) == 0
    assert delta_exact(hamming_7_4(), F(1)) == 1


def test_delta_exact_budget():
    with pytest.raises(BudgetExceededError):
        delta_exact(random_full_rank(2, 21, 0), F(1, 10), budget=20)


def test_delta_monte_carlo_degenerate():
    g = GF2Matrix.identity(2)
    assert delta_monte_carlo(g, F(0), 1000, 0) == (0.0, 0.0)
    assert delta_monte_carlo(g, F(1), 1000, 0) == (1.0, 0.0)


def test_delta_monte_carlo_near_exact():
    g = GF2Matrix.identity(2)
    exact = float(delta_exact(g, F(1, 10)))
    estimate, ci95 = delta_monte_carlo(g, F(1, 10), 100_000, 5)
    assert abs(estimate - exact) <= ci95


def test_delta_monte_carlo_deterministic():
    g = hamming_7_4()
    assert delta_monte_carlo(g, F(1, 5), 10_000, 7) == delta_monte_carlo(
        g, F(1, 5), 10_000, 7
    )


def test_random_full_rank_has_full_rank():
    rng = random.Random(32)
    for _ in range(20):
        m = rng.randint(1, 5)
        n = rng.randint(m, 8)
        assert random_full_rank(m, n, rng).rank() == m


def test_rank_of_columns():
    g = GF2Matrix.from_rows(["101", "011"])
    assert rank_of_columns(g, [0, 1]) == 2
    assert rank_of_columns(g, [0]) == 1
    assert rank_of_columns(g, []) == 0


def test_matrix_json_round_trip():
    g = hamming_7_4()
    assert GF2Matrix.from_json(g.to_json()) == g
