import numpy as np
import pytest

import thermoshift as ts
from thermoshift import InadmissibleWordError

from support import full2, golden, three_letter


def test_build_full_shift_primitivity():
    sp = ts.build_shift(2, [[1, 1], [1, 1]])
    assert sp.primitivity_exponent == 1
    assert sp.is_primitive


def test_build_golden_mean_primitivity():
    sp = ts.build_shift(2, [[1, 1], [1, 0]])
    assert sp.primitivity_exponent == 2
    a = sp.matrix_array
    assert (a @ a > 0).all() and (a == 0).any()


def test_build_non_primitive_flagged():
    sp = ts.build_shift(2, [[1, 0], [0, 1]])
    assert sp.primitivity_exponent is None
    with pytest.raises(ts.NonPrimitiveError):
        sp.require_primitive("test op")
    # period-2 permutation matrix is also non-primitive but valid
    assert ts.build_shift(2, [[0, 1], [1, 0]]).primitivity_exponent is None


def test_build_rejects_zero_row_and_column():
    with pytest.raises(ValueError, match="row 1"):
        ts.build_shift(2, [[1, 1], [0, 0]])
    with pytest.raises(ValueError, match="column 1"):
        ts.build_shift(2, [[1, 0], [1, 0]])
    with pytest.raises(ValueError, match="0 or 1"):
        ts.build_shift(2, [[1, 2], [1, 1]])
    with pytest.raises(ValueError, match="metric_base"):
        ts.build_shift(2, [[1, 1], [1, 1]], metric_base=1.0)


def test_admissible_word_counts():
    assert full2().count_words(10) == 1024
    assert golden().count_words(10) == 144
    assert sorted(golden().admissible_words(1)) == [(0,), (1,)]
    assert golden().count_words(1) == 2


@pytest.mark.parametrize("space", [full2(), golden(), three_letter(),
                                   ts.build_shift(2, [[1, 0], [0, 1]])])
def test_enumeration_matches_matrix_counts(space):
    for n in range(1, 15):
        assert len(list(space.admissible_words(n))) == space.count_words(n)


def test_count_words_big_integers():
    sp = ts.full_shift(4)
    assert sp.count_words(64) == 4**64


def test_admissibility_check_names_transition():
    with pytest.raises(InadmissibleWordError, match="1->1"):
        golden().check_admissible("0110")
    assert golden().is_admissible("0101")
    assert not golden().is_admissible("11")
    assert not golden().is_admissible((0, 2))


def test_past_word_periodic_extension():
    past = ts.past_word(golden(), "01")
    assert past.symbol(-1) == 1
    assert past.symbol(-2) == 0
    assert past.symbol(-3) == 1
    assert past.suffix(4) == (1, 0, 1, 0)[::-1] == (0, 1, 0, 1)


def test_past_word_rejects_bad_wrap():
    # "1" repeats to ...111 which contains the forbidden 11
    with pytest.raises(InadmissibleWordError, match="1->0|1->1"):
        ts.past_word(golden(), "1")
    with pytest.raises(ValueError):
        ts.past_word(golden(), "")


def test_bracket_full_shift():
    sp = full2()
    point = ts.bracket(sp, ts.past_word(sp, "0"), "11")
    assert point.symbol(-1) == 0 and point.symbol(-7) == 0
    assert point.symbol(0) == 1 and point.symbol(1) == 1
    with pytest.raises(ValueError, match="not represented"):
        point.symbol(2)


def test_bracket_golden_mean_splice():
    sp = golden()
    past = ts.past_word(sp, "01")    # ends in 1
    with pytest.raises(InadmissibleWordError, match="1->1"):
        ts.bracket(sp, past, "1")
    point = ts.bracket(sp, past, "0")
    assert point.symbol(0) == 0


def test_bracket_reproduces_coordinates():
    sp = golden()
    past = ts.past_word(sp, "0010")
    future = (1, 0, 0, 1)
    point = ts.bracket(sp, past, future)
    for j in range(-9, 0):
        assert point.symbol(j) == past.symbol(j)
    for j, s in enumerate(future):
        assert point.symbol(j) == s


def test_shifted_cylinder_constraints_spec_cases():
    sp = full2()
    a = ts.cylinder(sp, -1, "00")
    past0 = ts.past_word(sp, "0")
    past1 = ts.past_word(sp, "1")
    fc = ts.shifted_cylinder_constraints(sp, a, past0, 0)
    assert fc == ts.FiberConstraint(offset=0, symbols=(0,))
    assert ts.shifted_cylinder_constraints(sp, a, past1, 0) is None
    fc5 = ts.shifted_cylinder_constraints(sp, a, past0, 5)
    assert fc5 == ts.FiberConstraint(offset=4, symbols=(0, 0))


def test_shifted_cylinder_constraints_pure_past_and_boundary():
    sp = golden()
    past = ts.past_word(sp, "01")    # ...0101, ends in 1
    # cylinder entirely in the past, matching: trivial constraint
    a = ts.cylinder(sp, -2, "01")
    fc = ts.shifted_cylinder_constraints(sp, a, past, 0)
    assert fc is not None and fc.is_trivial
    # boundary admissibility: y0 = 1 cannot follow past ending in 1
    b = ts.cylinder(sp, 0, "1")
    assert ts.shifted_cylinder_constraints(sp, b, past, 0) is None
    # but with a gap, 1 -> 0 -> 1 is reachable
    c = ts.cylinder(sp, 1, "1")
    assert ts.shifted_cylinder_constraints(sp, c, past, 0) == \
        ts.FiberConstraint(offset=1, symbols=(1,))


def _member(space, word, cyl, past, i):
    # does the fiber point with future `word` lie in sigma^{-i}(cyl)?
    for t, z in enumerate(cyl.symbols):
        c = i + cyl.start + t
        if c <= -1:
            if past.symbol(c) != z:
                return False
        else:
            if c >= len(word) or word[c] != z:
                return False
    return True


@pytest.mark.parametrize("space,past_sym", [(full2(), "0"), (golden(), "01"),
                                            (three_letter(), "0")])
def test_shifted_constraints_match_brute_force(space, past_sym):
    past = ts.past_word(space, past_sym)
    cyls = [ts.cylinder(space, -1, w) for w in space.admissible_words(2)]
    cyls += [ts.cylinder(space, 0, w) for w in space.admissible_words(1)]
    for cyl in cyls:
        for i in range(0, 8):
            length = i + max(cyl.end, 0) + 1
            fc = ts.shifted_cylinder_constraints(space, cyl, past, i)
            for w in space.admissible_words(length):
                if not space.allows(past.symbol(-1), w[0]):
                    continue
                member = _member(space, w, cyl, past, i)
                if fc is None:
                    assert not member
                else:
                    satisfied = all(w[c] == s for c, s in fc.coordinates().items())
                    assert member == satisfied


def test_higher_block_recode_identity():
    sp = golden()
    rec = ts.higher_block_recode(sp, 1)
    assert rec.blocks == ((0,), (1,))
    assert rec.encode("0101") == (0, 1, 0, 1)
    assert rec.decode((0, 1, 0)) == (0, 1, 0)
    assert rec.block_space.matrix == sp.matrix


def test_higher_block_recode_golden_two_blocks():
    rec = ts.higher_block_recode(golden(), 2)
    assert rec.blocks == ((0, 0), (0, 1), (1, 0))
    assert rec.block_space.k == 3
    w = (0, 0, 1, 0, 1)
    assert rec.decode(rec.encode(w)) == w


def test_higher_block_recode_full_shift_counts():
    sp = full2()
    rec = ts.higher_block_recode(sp, 2)
    assert rec.block_space.k == 4
    for n in range(2, 13):
        assert rec.block_space.count_words(n - 1) == sp.count_words(n)
    rec3 = ts.higher_block_recode(golden(), 3)
    for n in range(3, 13):
        assert rec3.block_space.count_words(n - 2) == golden().count_words(n)


def test_higher_block_recode_rejects_zero():
    with pytest.raises(ValueError, match="N=0"):
        ts.higher_block_recode(full2(), 0)


def test_recode_transport_roundtrip_battery():
    rng = np.random.default_rng(3)
    for space in (full2(), golden(), three_letter()):
        for n_blocks in (1, 2, 3):
            rec = ts.higher_block_recode(space, n_blocks)
            for length in range(n_blocks, n_blocks + 5):
                for w in space.admissible_words(length):
                    assert rec.decode(rec.encode(w)) == w


def test_cylinder_validation():
    with pytest.raises(InadmissibleWordError, match="1->1"):
        ts.cylinder(golden(), -1, "11")
    cyl = ts.cylinder(golden(), -2, "010")
    assert cyl.end == 0 and cyl.span == 3 and cyl.symbol_at(-1) == 1
