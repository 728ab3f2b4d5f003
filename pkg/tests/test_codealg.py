import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_payoff, brute_recoverable
from paralink.codealg import (Code, CodeError, Portion, code_payoff, format_code, from_columns, gf_rank,
                              is_reducible, is_systematic_code, matroid_of_code, parse_code, payoff_breakdown,
                              portion_worths, recoverable_portions, reduce_code)
from paralink.matroid import validate_rank
from paralink.model import make_scenario

A, B, C = Portion(0, 1), Portion(1, 1), Portion(2, 1)


def columns_of(code):
    return [code.column(i) for i in range(code.n_links)]


# -- parsing -----------------------------------------------------------------

def test_parse_parity_code():
    code = parse_code("A,B,A+B", 2)
    assert columns_of(code) == [[1, 0], [0, 1], [1, 1]]


def test_parse_two_portions():
    code = parse_code("A1,A2,A1+A2", 2)
    assert code.portions == (Portion(0, 1), Portion(0, 2))
    assert code.portion_counts == (2,)
    assert columns_of(code) == [[1, 0], [0, 1], [1, 1]]


def test_parse_ternary_coefficient():
    code = parse_code("A,B,A+B,A+C,B+2C", 3)
    assert columns_of(code) == [[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 1], [0, 1, 2]]


def test_parse_reduces_coefficients_mod_q():
    assert parse_code("4A", 3).symbols == (((A, 1),),)


@pytest.mark.parametrize("text, q", [
    ("", 2), ("A,,B", 2), ("A+", 2), ("a", 2), ("A0", 2), ("2A", 2), ("3B", 3),
    ("A+A", 2), ("A2", 2), ("A1,A3", 2), ("-,-", 2), ("A*B", 2), ("A", 4), ("A", 263),
])
def test_parse_errors(text, q):
    with pytest.raises(CodeError):
        parse_code(text, q)


@pytest.mark.parametrize("text, expected", [
    ("B , B,-", "B,B,-"),
    ("1A+1B", "A+B"),
    ("A2+A1", "A1+A2"),
    ("B+2C, A", "B+2C,A"),
    ("-,A,A", "-,A,A"),
])
def test_format_normalizes(text, expected):
    assert format_code(parse_code(text, 3)) == expected


code_texts = st.lists(
    st.lists(st.tuples(st.integers(0, 3), st.integers(1, 2)), min_size=1, max_size=3, unique=True),
    min_size=1, max_size=5)


@settings(max_examples=100, deadline=None)
@given(code_texts)
def test_format_round_trip(layout):
    symbols = tuple(tuple(sorted((Portion(msg, 1), coeff) for msg, coeff in {m: c for m, c in sym}.items()))
                    for sym in layout)
    code = Code(3, symbols)
    assert parse_code(format_code(code), 3) == code


def test_round_trip_multi_portion():
    code = parse_code("A1+2B,A2,A1+A2+B", 3)
    assert parse_code(format_code(code), 3) == code


# -- elimination and decoding ------------------------------------------------

def test_gf_rank_examples():
    assert gf_rank([[1, 0], [0, 1], [1, 1]], 2) == 2
    assert gf_rank([[1, 1], [2, 2]], 3) == 1
    assert gf_rank([[1, 2], [2, 1]], 3) == 1  # (2,1) = 2*(1,2) mod 3
    assert gf_rank([[1, 2], [2, 1]], 5) == 2


def test_recoverable_examples():
    assert recoverable_portions(parse_code("A,B,A+B"), 0b110) == {A, B}
    assert recoverable_portions(parse_code("A1,A2,A1+A2"), 0b100) == set()
    assert recoverable_portions(parse_code("A,A,A"), 0b010) == {A}
    assert recoverable_portions(parse_code("A,B,A+B"), 0) == set()


def test_recoverable_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(150):
        q = int(rng.choice([2, 3, 5]))
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        cols = [rng.integers(0, q, m) for _ in range(n)]
        if not any(c.any() for c in cols):
            continue
        code = from_columns(cols, q)
        portions = code.ground_portions(m)
        full_cols = [code.column(i, portions) for i in range(n)]
        for s in range(1 << n):
            up = [i for i in range(n) if (s >> i) & 1]
            expected = {portions[t] for t in brute_recoverable(full_cols, q, m, up)}
            assert set(recoverable_portions(code, s)) == expected & set(code.portions)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.data())
def test_decoding_monotone(seed, data):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 4)), int(rng.integers(1, 6))
    cols = [rng.integers(0, 3, m) for _ in range(n)]
    cols[0][0] = 1
    code = from_columns(cols, 3)
    s = data.draw(st.integers(0, (1 << n) - 1))
    extra = data.draw(st.integers(0, (1 << n) - 1))
    assert recoverable_portions(code, s) <= recoverable_portions(code, s | extra)


# -- payoff ------------------------------------------------------------------

def test_payoff_repetition(three_links_one_msg):
    pay = code_payoff(parse_code("A,A,A"), three_links_one_msg)
    assert pay == pytest.approx(brute_payoff([[1], [1], [1]], 2, [1.0], [0.9, 0.8, 0.7]), abs=1e-12)
    assert pay == pytest.approx(0.994, abs=1e-12)
    assert pay == pytest.approx(1 - 0.1 * 0.2 * 0.3, abs=1e-12)


def test_payoff_direct_links(three_links):
    assert code_payoff(parse_code("A,B,-"), three_links) == pytest.approx(2 * 0.9 + 1 * 0.8, abs=1e-12)


def test_payoff_split_parity(three_links_one_msg):
    pay = code_payoff(parse_code("A1,A2,A1+A2"), three_links_one_msg)
    oracle = brute_payoff([[1, 0], [0, 1], [1, 1]], 2, [1.0, 1.0], [0.9, 0.8, 0.7])
    assert pay == pytest.approx(oracle, abs=1e-12)
    assert pay == pytest.approx(1.882, abs=1e-12)


def test_payoff_parity(three_links):
    pay = code_payoff(parse_code("A,B,A+B"), three_links)
    oracle = brute_payoff([[1, 0], [0, 1], [1, 1]], 2, [2.0, 1.0], [0.9, 0.8, 0.7])
    assert pay == pytest.approx(oracle, abs=1e-12)
    assert pay == pytest.approx(2.838, abs=1e-12)


def test_payoff_dimension_checks(three_links):
    with pytest.raises(CodeError):
        code_payoff(parse_code("A,B"), three_links)
    with pytest.raises(CodeError):
        code_payoff(parse_code("A,B,C"), three_links)


def test_breakdown_sums_to_payoff(three_links):
    code = parse_code("A,B,A+B")
    rows = payoff_breakdown(code, three_links)
    assert [r[0] for r in rows] == list(range(8))
    assert sum(r[1] * r[3] for r in rows) == pytest.approx(code_payoff(code, three_links), abs=1e-12)


def random_code(rng, q=3, max_m=3, max_n=5):
    m, n = int(rng.integers(1, max_m + 1)), int(rng.integers(1, max_n + 1))
    cols = []
    for _ in range(n):
        col = np.zeros(m, dtype=int)
        while not col.any():
            col = rng.integers(0, q, m)
        cols.append(col)
    return from_columns(cols, q), m


def random_unit_scenario(rng, m, n):
    return make_scenario(rng.random(n), rng.uniform(1, 100, m))


def test_payoff_matches_brute_force_random():
    rng = np.random.default_rng(11)
    for _ in range(60):
        code, m = random_code(rng, max_n=4)
        sc = random_unit_scenario(rng, m, code.n_links)
        portions = code.ground_portions(m)
        cols = [code.column(i, portions) for i in range(code.n_links)]
        oracle = brute_payoff(cols, 3, portion_worths(code, sc, m), sc.success)
        assert code_payoff(code, sc) == pytest.approx(oracle, abs=1e-9)


def test_payoff_monotone_in_success():
    rng = np.random.default_rng(12)
    for _ in range(100):
        code, m = random_code(rng)
        outage = rng.uniform(0.02, 0.98, code.n_links)
        worths = rng.uniform(1, 100, m)
        base = code_payoff(code, make_scenario(outage, worths))
        i = int(rng.integers(code.n_links))
        outage[i] -= 0.01
        assert code_payoff(code, make_scenario(outage, worths)) >= base - 1e-12


def test_permutation_dominance():
    rng = np.random.default_rng(13)
    good, swapped = parse_code("A,B,A+B"), parse_code("B,A+B,A")
    for _ in range(500):
        outage = np.sort(rng.random(3))
        worths = np.sort(rng.uniform(1, 100, 2))[::-1]
        sc = make_scenario(outage, worths)
        assert code_payoff(good, sc) >= code_payoff(swapped, sc) - 1e-12


def test_parity_code_is_mds():
    code = parse_code("A,B,A+B")
    for pair in itertools.combinations(range(3), 2):
        assert gf_rank([code.column(i) for i in pair], 2) == 2


# -- systematic and reduction --------------------------------------------------

@pytest.mark.parametrize("text, q, expected", [
    ("A,B,A+B", 2, True),
    ("A,B,A+B,A+C,B+2C", 3, False),
    ("A1,A2,A1+A2", 2, True),
    ("A,A,A", 2, True),
    ("2A,B,A+B", 3, True),
    ("A+B,A", 2, False),
])
def test_is_systematic(text, q, expected):
    assert is_systematic_code(parse_code(text, q)) is expected


def test_reduce_examples():
    assert format_code(reduce_code(parse_code("A,B,A+B,A+C"))) == "A,B,A+B,C"
    assert format_code(reduce_code(parse_code("A,B,A+B"))) == "A,B,A+B"
    assert format_code(reduce_code(parse_code("A+B"))) == "A"
    assert not is_reducible(parse_code("A,B,A+B,A+C,B+2C", 3))


def test_reduce_prefers_worthier_message():
    sc = make_scenario([0.1], [1.0, 5.0])
    assert format_code(reduce_code(parse_code("A+B"), sc)) == "B"


def test_reduce_renumbers_portions():
    sc = make_scenario([0.1, 0.1], [1.0, 5.0])
    reduced = reduce_code(parse_code("A1+B,A2"), sc)
    assert format_code(reduced) == "B,A"


def test_reduce_never_decreases_payoff():
    rng = np.random.default_rng(14)
    checked = 0
    while checked < 1000:
        code, m = random_code(rng, max_n=4)
        reduced = reduce_code(code)
        sc = random_unit_scenario(rng, m, code.n_links)
        assert code_payoff(reduced, sc) >= code_payoff(code, sc) - 1e-9
        checked += 1


# -- matroid of a code -------------------------------------------------------------

def test_matroid_of_parity_code():
    rf = matroid_of_code(parse_code("A,B,A+B"))
    x2, x3 = rf.ground.link_bit(1), rf.ground.link_bit(2)
    assert rf(x2 | x3) == 2
    assert rf(x2 | x3 | 0b1) == 2
    assert validate_rank(rf).ok


def test_matroid_of_repetition():
    rf = matroid_of_code(parse_code("A,A,A"))
    for s in range(1, 8):
        assert rf(rf.ground.links_to_mask(s)) == 1


def test_matroid_messages_full_rank():
    rng = np.random.default_rng(15)
    for _ in range(30):
        code, m = random_code(rng, max_n=4)
        rf = matroid_of_code(code, m)
        assert rf(rf.ground.messages_mask) == rf.m
        assert validate_rank(rf).ok


def test_matroid_rejects_empty_symbol():
    with pytest.raises(CodeError):
        matroid_of_code(parse_code("A,-,A"))
