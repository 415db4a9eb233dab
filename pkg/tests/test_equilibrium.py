import math
from fractions import Fraction

import numpy as np
import pytest

import thermoshift as ts
from thermoshift import enumeration as en

from support import battery_pairs, battery_potentials, default_past, full2, \
    golden, three_letter

PHI = (1 + math.sqrt(5)) / 2


def test_perron_all_ones():
    pd = ts.perron(np.ones((2, 2)))
    assert pd.rho == pytest.approx(2.0, abs=1e-12)
    assert pd.right == pytest.approx([0.5, 0.5])
    assert np.dot(pd.left, pd.right) == pytest.approx(1.0)


def test_perron_golden_mean():
    pd = ts.perron(np.array([[1.0, 1.0], [1.0, 0.0]]), tol=1e-12)
    assert abs(pd.rho - PHI) < 1e-12
    assert pd.residual < 1e-12


def test_perron_rank_one_rows():
    p = 0.3
    pd = ts.perron(np.array([[p, p], [1 - p, 1 - p]]))
    assert pd.rho == pytest.approx(1.0, abs=1e-13)


def test_perron_refuses_non_primitive():
    with pytest.raises(ts.NonPrimitiveError):
        ts.perron(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        ts.perron(np.array([[1.0, -1.0], [1.0, 1.0]]))


def test_perron_non_convergence_diagnostic():
    with pytest.raises(ts.ConvergenceError) as err:
        ts.perron(np.array([[1.0, 1.0], [1.0, 0.0]]), max_iter=2)
    assert err.value.residual is not None


def test_perron_exact_rank_one():
    pd = ts.perron_exact([[Fraction(1, 2), Fraction(1, 2)],
                          [Fraction(1, 2), Fraction(1, 2)]])
    assert pd.rho == 1
    assert pd.right == (Fraction(1, 2), Fraction(1, 2))
    assert sum(l * r for l, r in zip(pd.left, pd.right)) == 1


def test_perron_exact_irrational_refused():
    with pytest.raises(ts.ExactArithmeticError):
        ts.perron_exact([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(0)]])


def test_pressure_examples():
    g1 = ts.constant_weight_potential(full2(), Fraction(1, 2))
    assert abs(ts.pressure_spectral(g1)) < 1e-13
    for p in (Fraction(3, 10), Fraction(1, 7), Fraction(9, 10)):
        g2 = ts.bernoulli_potential(full2(), [p, 1 - p])
        assert abs(ts.pressure_spectral(g2)) < 1e-13
    z = ts.zero_potential(golden())
    assert ts.pressure_spectral(z) == pytest.approx(math.log(PHI), abs=1e-10)


def test_pressure_spectral_requires_primitive():
    sp = ts.build_shift(2, [[1, 0], [0, 1]])
    with pytest.raises(ts.NonPrimitiveError):
        ts.pressure_spectral(ts.zero_potential(sp))


def test_pressure_bowen_exact_values():
    z2 = ts.zero_potential(full2())
    for n in (1, 5, 9):
        assert ts.pressure_bowen(z2, n) == pytest.approx(math.log(2), abs=1e-13)
    g2 = ts.bernoulli_potential(full2(), [Fraction(3, 10), Fraction(7, 10)])
    for n in (1, 4, 8):
        assert abs(ts.pressure_bowen(g2, n)) < 1e-13
    zg = ts.zero_potential(golden())
    assert ts.pressure_bowen(zg, 10) == pytest.approx(math.log(144) / 10, abs=1e-12)


def test_pressure_bowen_matches_enumeration():
    rng = np.random.default_rng(11)
    for space in (golden(), three_letter()):
        g = ts.random_potential(space, (0, 2), rng)
        for n in (1, 3, 6):
            assert ts.pressure_bowen(g, n) == \
                pytest.approx(en.bowen_sum_enum(g, n), abs=1e-12)
        g3 = ts.random_potential(space, (0, 3), rng)
        assert ts.pressure_bowen(g3, 4) == \
            pytest.approx(en.bowen_sum_enum(g3, 4), abs=1e-12)


def test_bowen_series_converges_geometrically():
    for space in (full2(), golden(), three_letter()):
        for g in battery_potentials(space, count=3):
            p = ts.pressure_spectral(g)
            series = ts.bowen_series(g, (20, 40, 60))
            gaps = [abs(d - p) for d in series.diffs]
            assert gaps[-1] <= 1e-8
            assert gaps[2] <= gaps[0] + 1e-12


def test_equilibrium_bernoulli():
    g2 = ts.bernoulli_potential(full2(), [Fraction(3, 10), Fraction(7, 10)])
    st = ts.equilibrium_state(g2)
    assert st.pi == pytest.approx([0.3, 0.7], abs=1e-12)
    assert st.q == pytest.approx(np.array([[0.3, 0.7], [0.3, 0.7]]), abs=1e-12)
    assert st.pressure == pytest.approx(0.0, abs=1e-13)


def test_equilibrium_parry_golden():
    st = ts.equilibrium_state(ts.zero_potential(golden()))
    assert st.pi == pytest.approx([PHI**2 / (1 + PHI**2), 1 / (1 + PHI**2)],
                                  abs=1e-12)
    assert st.pi == pytest.approx([0.7236068, 0.2763932], abs=1e-7)
    assert st.q == pytest.approx(np.array([[1 / PHI, 1 / PHI**2], [1.0, 0.0]]),
                                 abs=1e-12)
    assert st.entropy == pytest.approx(math.log(PHI), abs=1e-12)


def test_equilibrium_constant_on_full_shift():
    c = 0.37
    st = ts.equilibrium_state(ts.constant_potential(full2(), c))
    assert st.pressure == pytest.approx(math.log(2) + c, abs=1e-12)
    assert st.pi == pytest.approx([0.5, 0.5], abs=1e-12)


def test_variational_equality_holds():
    for space in (full2(), golden(), three_letter()):
        for g in battery_potentials(space, count=4):
            st = ts.equilibrium_state(g)
            assert st.variational_residual <= 1e-12


def test_cylinder_measures():
    g2 = ts.bernoulli_potential(full2(), [Fraction(3, 10), Fraction(7, 10)])
    st = ts.equilibrium_state(g2)
    assert st.cylinder_measure("0") == pytest.approx(0.3, abs=1e-13)
    assert st.cylinder_measure("00") == pytest.approx(0.09, abs=1e-13)
    parry = ts.equilibrium_state(ts.zero_potential(golden()))
    value, admissible = parry.cylinder_measure_detail("11")
    assert value == 0.0 and not admissible
    # shift invariance: the start index is irrelevant
    a0 = ts.TwoSidedCylinder(0, (0, 1))
    a5 = ts.TwoSidedCylinder(-5, (0, 1))
    assert parry.cylinder_measure(a0) == parry.cylinder_measure(a5)


def test_cylinder_measure_kolmogorov_and_invariance_window3():
    rng = np.random.default_rng(12)
    g = ts.random_potential(golden(), (0, 3), rng)
    st = ts.equilibrium_state(g)
    assert st.recoding.length == 2
    total = sum(st.cylinder_measure(w) for w in golden().admissible_words(4))
    assert total == pytest.approx(1.0, abs=1e-12)
    for w in golden().admissible_words(3):
        ext = sum(st.cylinder_measure(w + (s,))
                  for s in golden().successors[w[-1]])
        assert ext == pytest.approx(st.cylinder_measure(w), abs=1e-13)
    # short words sum block masses
    assert st.cylinder_measure("0") + st.cylinder_measure("1") == \
        pytest.approx(1.0, abs=1e-13)


def test_variational_score_examples():
    z2 = ts.zero_potential(full2())
    uni = np.full((2, 2), 0.5)
    score = ts.variational_score(full2(), [0.5, 0.5], uni, z2)
    assert score == pytest.approx(math.log(2), abs=1e-14)

    zg = ts.zero_potential(golden())
    st = ts.equilibrium_state(zg)
    eq_score = ts.variational_score(golden(), st.pi, st.q, zg)
    assert eq_score == pytest.approx(math.log(PHI), abs=1e-12)

    biased = np.array([[0.9, 0.1], [1.0, 0.0]])
    pi = ts.stationary_distribution(biased)
    biased_score = ts.variational_score(golden(), pi, biased, zg)
    assert biased_score < math.log(PHI) - 1e-4


def test_variational_score_rejects_bad_input():
    zg = ts.zero_potential(golden())
    with pytest.raises(ValueError, match="sum to 1"):
        ts.variational_score(golden(), [0.5, 0.5], np.array([[0.6, 0.3], [1, 0]]), zg)
    with pytest.raises(ValueError, match="forbidden"):
        ts.variational_score(golden(), [0.5, 0.5],
                             np.array([[0.5, 0.5], [0.5, 0.5]]), zg)
    with pytest.raises(ValueError, match="stationary"):
        ts.variational_score(golden(), [0.9, 0.1],
                             np.array([[0.5, 0.5], [1.0, 0.0]]), zg)


def test_variational_principle_random_chains():
    rng = np.random.default_rng(13)
    for space in (full2(), golden()):
        g = battery_potentials(space, count=1)[0]
        p = ts.pressure_spectral(g)
        for _ in range(50):
            q = np.where(space.matrix_bool,
                         rng.uniform(0.05, 1.0, size=(space.k, space.k)), 0.0)
            q /= q.sum(axis=1, keepdims=True)
            pi = ts.stationary_distribution(q)
            assert ts.variational_score(space, pi, q, g) <= p + 1e-12


def test_fiber_measure_full_shift_is_fair_coin():
    g1 = ts.constant_weight_potential(full2(), Fraction(1, 2))
    fib = ts.conditional_unstable_measure(ts.past_word(full2(), "0"), g1)
    for n in (1, 3, 6):
        for w in full2().admissible_words(n):
            assert fib.mass(w) == pytest.approx(2.0**-n, abs=1e-14)


def test_fiber_measure_golden_forced_step():
    zg = ts.zero_potential(golden())
    past = ts.past_word(golden(), "01")     # ends in 1
    fib = ts.conditional_unstable_measure(past, zg)
    assert fib.mass("0") == pytest.approx(1.0, abs=1e-13)
    assert fib.mass("1") == 0.0
    assert fib.entry_distribution == pytest.approx([1.0, 0.0], abs=1e-13)


def test_fiber_measure_total_mass_and_kolmogorov():
    rng = np.random.default_rng(14)
    for space, past_sym in ((full2(), "0"), (golden(), "0"), (three_letter(), "0")):
        g = ts.random_potential(space, (0, 2), rng)
        fib = ts.conditional_unstable_measure(ts.past_word(space, past_sym), g)
        for length in (1, 2, 4):
            total = sum(fib.mass(w) for w in space.admissible_words(length))
            assert total == pytest.approx(1.0, abs=1e-12)
        for w in space.admissible_words(3):
            ext = sum(fib.mass(w + (s,)) for s in space.successors[w[-1]])
            assert ext == pytest.approx(fib.mass(w), abs=1e-13)
        # offset evaluation matches the enumeration oracle
        for off in (0, 1, 3):
            for w in space.admissible_words(2):
                assert fib.mass(w, offset=off) == \
                    pytest.approx(en.fiber_mass_enum(fib, w, offset=off), abs=1e-12)


def test_fiber_rejects_two_sided_potential():
    rng = np.random.default_rng(15)
    g = ts.random_potential(full2(), (1, 1), rng)
    with pytest.raises(ValueError, match="shift_reduce"):
        ts.conditional_unstable_measure(ts.past_word(full2(), "0"), g)


def test_fiber_depends_only_on_bounded_past_suffix():
    rng = np.random.default_rng(16)
    g = ts.random_potential(golden(), (0, 2), rng)
    st = ts.equilibrium_state(g)
    f_short = ts.conditional_unstable_measure(ts.past_word(golden(), "01"), g,
                                              state=st)
    f_long = ts.conditional_unstable_measure(ts.past_word(golden(), "010101"), g,
                                             state=st)
    for w in golden().admissible_words(4):
        assert f_short.mass(w) == f_long.mass(w)


def test_fiber_pinned_conditioning():
    rng = np.random.default_rng(17)
    g = ts.random_potential(golden(), (0, 2), rng)
    st = ts.equilibrium_state(g)
    past = ts.past_word(golden(), "0")
    free = ts.conditional_unstable_measure(past, g, state=st)
    pinned = ts.conditional_unstable_measure(past, g, state=st, pinned="0")
    assert pinned.mass("0") == pytest.approx(1.0, abs=1e-13)
    assert pinned.mass("1") == 0.0
    for w in golden().admissible_words(3):
        if w[0] != 0:
            assert pinned.mass(w) == 0.0
        else:
            assert pinned.mass(w) == \
                pytest.approx(free.mass(w) / free.mass("0"), abs=1e-12)
    with pytest.raises(ts.InadmissibleWordError):
        ts.conditional_unstable_measure(ts.past_word(golden(), "01"), g,
                                        state=st, pinned="1")


def test_gibbs_report_bernoulli_is_exactly_one():
    g1 = ts.constant_weight_potential(full2(), Fraction(1, 2))
    st = ts.equilibrium_state(g1, exact=True)
    fib = ts.conditional_unstable_measure(ts.past_word(full2(), "0"), g1, state=st)
    rep = ts.gibbs_ratio_report(fib, g1, n_max=12, n_min=1, exact=True)
    assert rep.depth == 0
    assert rep.min_ratio == Fraction(1) and rep.max_ratio == Fraction(1)
    rep_f = ts.gibbs_ratio_report(fib, g1, n_max=12, n_min=1)
    assert rep_f.min_ratio == pytest.approx(1.0, abs=1e-12)


def test_gibbs_report_golden_parry():
    zg = ts.zero_potential(golden())
    fib = ts.conditional_unstable_measure(ts.past_word(golden(), "0"), zg)
    rep = ts.gibbs_ratio_report(fib, zg, n_max=15, n_min=5)
    assert rep.spread == 0.0
    assert rep.min_ratio == pytest.approx(1 / PHI, abs=1e-12)
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-12)
    rep_enum = ts.gibbs_ratio_report(fib, zg, n_max=8, n_min=5,
                                     method="enumeration")
    assert rep_enum.min_ratio == pytest.approx(rep.min_ratio, abs=1e-12)
    assert rep_enum.max_ratio == pytest.approx(rep.max_ratio, abs=1e-12)


def test_gibbs_report_closed_matches_enumeration_window2():
    rng = np.random.default_rng(18)
    for space in (full2(), golden()):
        g = ts.random_potential(space, (0, 2), rng)
        fib = ts.conditional_unstable_measure(ts.past_word(space, "0"), g)
        closed = ts.gibbs_ratio_report(fib, g, n_max=8, n_min=4)
        brute = ts.gibbs_ratio_report(fib, g, n_max=8, n_min=4,
                                      method="enumeration")
        for (n1, lo1, hi1), (n2, lo2, hi2) in zip(closed.rows, brute.rows):
            assert lo1 == pytest.approx(lo2, rel=1e-10)
            assert hi1 == pytest.approx(hi2, rel=1e-10)
        # deeper cylinders than the window: tail extremes via path products
        closed3 = ts.gibbs_ratio_report(fib, g, n_max=7, n_min=4, depth=3)
        brute3 = ts.gibbs_ratio_report(fib, g, n_max=7, n_min=4, depth=3,
                                       method="enumeration")
        for (n1, lo1, hi1), (n2, lo2, hi2) in zip(closed3.rows, brute3.rows):
            assert lo1 == pytest.approx(lo2, rel=1e-10)
            assert hi1 == pytest.approx(hi2, rel=1e-10)


def test_gibbs_report_shallow_depth_brackets_pointwise_ratios():
    # below depth r-1 the Birkhoff sum varies inside a cylinder; the report
    # must bracket the ratio of every point of the cylinder
    rng = np.random.default_rng(19)
    g = ts.random_potential(full2(), (0, 2), rng)
    fib = ts.conditional_unstable_measure(ts.past_word(full2(), "0"), g)
    n = 5
    shallow = ts.gibbs_ratio_report(fib, g, n_max=n, n_min=n, depth=0)
    assert shallow.method == "enumeration"
    p = fib.state.pressure
    for w in full2().admissible_words(n):
        for ext in ((0,), (1,)):
            ratio = fib.mass(w) / math.exp(ts.birkhoff_sum(g, w + ext, n) - n * p)
            assert shallow.min_ratio - 1e-12 <= ratio <= shallow.max_ratio + 1e-12


def test_gibbs_report_validation():
    zg = ts.zero_potential(golden())
    other = ts.bernoulli_potential(golden(), [Fraction(1, 3), Fraction(2, 3)])
    fib = ts.conditional_unstable_measure(ts.past_word(golden(), "0"), zg)
    with pytest.raises(ValueError, match="match"):
        ts.gibbs_ratio_report(fib, other, n_max=5)
    pinned = ts.conditional_unstable_measure(ts.past_word(golden(), "0"), zg,
                                             pinned="0")
    with pytest.raises(ValueError, match="unpinned"):
        ts.gibbs_ratio_report(pinned, zg, n_max=5)
    g2 = ts.random_potential(golden(), (0, 2), np.random.default_rng(0))
    fib2 = ts.conditional_unstable_measure(ts.past_word(golden(), "0"), g2)
    with pytest.raises(ValueError, match="depth"):
        ts.gibbs_ratio_report(fib2, g2, n_max=5, depth=0, method="closed")


def test_gibbs_extremes_constant_across_battery():
    for space in (full2(), golden()):
        for g in battery_potentials(space, count=3):
            fib = ts.conditional_unstable_measure(default_past(space), g)
            rep = ts.gibbs_ratio_report(fib, g, n_max=15, n_min=5)
            assert rep.spread < 1e-10
            assert rep.min_ratio > 0.0 and math.isfinite(rep.max_ratio)


def test_shift_reduce_preserves_pressure_and_measures():
    rng = np.random.default_rng(21)
    for space in (full2(), golden()):
        g = ts.random_potential(space, (1, 1), rng)
        reduced = ts.shift_reduce(g)
        shifted = ts.shift_reduce(g, extra=1)
        p0 = ts.pressure_spectral(reduced)
        p1 = ts.pressure_spectral(shifted)
        assert abs(ts.pressure_spectral(g) - p0) <= 1e-12
        assert abs(p1 - p0) <= 1e-12
        st0 = ts.equilibrium_state(reduced)
        st1 = ts.equilibrium_state(shifted)
        for w in space.admissible_words(4):
            assert st1.cylinder_measure(w) == \
                pytest.approx(st0.cylinder_measure(w), abs=1e-12)
