"""Target sets, boundary behavior, and the backward sweeps."""

import random
from decimal import Decimal
from fractions import Fraction

import pytest

from hittime.numerics import agreed_digits, make_context, rational_to_decimal
from hittime.oracle import exact_dp, exact_dp_tables
from hittime.walkmodel import (
    CutoffExceedsBoundError,
    DieModel,
    TargetSet,
    TargetSetError,
    solve_overshoot,
    solve_pair,
    solve_pair_reference,
    solve_truncated,
    sweep_pair,
)

SQUARES = TargetSet.perfect_squares()
D6 = DieModel(6)


def test_die_model():
    assert DieModel(6).mean == Fraction(7, 2)
    assert DieModel(2).mean == Fraction(3, 2)
    with pytest.raises(ValueError):
        DieModel(1)


def test_squares_membership():
    assert not SQUARES.membership(0)  # zero is excluded
    assert SQUARES.membership(1)
    assert SQUARES.membership(49 * 10**6)
    assert not SQUARES.membership(2)
    assert SQUARES.declared_bound is None


def test_explicit_list_membership():
    t = TargetSet.from_list([3, 7, 20])
    assert t.membership(7)
    assert not t.membership(8)
    assert t.membership(10**6) is False  # complete list: answerable anywhere
    assert t.horizon == 20


def test_explicit_list_validation():
    with pytest.raises(TargetSetError):
        TargetSet.from_list([])
    with pytest.raises(TargetSetError):
        TargetSet.from_list([3, 3])
    with pytest.raises(TargetSetError):
        TargetSet.from_list([5, 2])
    with pytest.raises(TargetSetError):
        TargetSet.from_list([-1, 2])
    with pytest.raises(TargetSetError):
        TargetSet.from_list([3, 7], bound=5)


def test_bounded_list_refuses_beyond_bound():
    t = TargetSet.from_list([3, 7], bound=50)
    assert not t.membership(50)
    with pytest.raises(CutoffExceedsBoundError):
        t.membership(51)
    with pytest.raises(CutoffExceedsBoundError):
        solve_pair(t, D6, 100, 0, make_context(30))


def test_predicate_table():
    t = TargetSet.from_predicate(lambda h: h % 5 == 0 and h > 0, bound=100)
    assert t.membership(10)
    assert not t.membership(11)
    assert t.horizon == 100
    with pytest.raises(CutoffExceedsBoundError):
        t.membership(101)


def test_target_file_round_trip(tmp_path):
    p = tmp_path / "set.txt"
    p.write_text("# bound 100\n3\n7\n20\n")
    t = TargetSet.from_file(p)
    assert t.membership(20)
    assert t.declared_bound == 100
    p2 = tmp_path / "plain.txt"
    p2.write_text("4\n9\n")
    t2 = TargetSet.from_file(p2)
    assert t2.declared_bound is None
    assert t2.membership(9)


def test_target_file_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3\ntwo\n")
    with pytest.raises(TargetSetError):
        TargetSet.from_file(bad)
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(TargetSetError):
        TargetSet.from_file(empty)
    header = tmp_path / "hdr.txt"
    header.write_text("# bounds 10\n3\n")
    with pytest.raises(TargetSetError):
        TargetSet.from_file(header)


def test_absorbing_state():
    ctx = make_context(30)
    sol = solve_pair(SQUARES, D6, 16, 16, ctx)
    assert sol.e_n_value == 0
    assert sol.overshoot_prob == 0
    sol9 = solve_pair(SQUARES, D6, 16, 9, ctx)
    assert sol9.e_n_value == 0
    assert sol9.overshoot_prob == 0


def test_boundary_rows():
    ctx = make_context(30)
    for s in range(17, 23):
        sol = solve_pair(SQUARES, D6, 16, s, ctx)
        assert sol.e_n_value == 0
        assert sol.overshoot_prob == 1
    assert solve_overshoot(SQUARES, D6, 16, 17, ctx) == 1


def test_hand_derived_small_values():
    # With N = 16: E(15) = 1 (one roll always ends the truncated walk),
    # P_15 = 5/6; one step lower E(14) = 7/6, P_14 = 29/36.
    ctx = make_context(40)
    sol15 = solve_pair(SQUARES, D6, 16, 15, ctx)
    assert sol15.e_n_value == 1
    assert agreed_digits(sol15.overshoot_prob,
                         rational_to_decimal(Fraction(5, 6), ctx), 40) >= 38
    sol14 = solve_pair(SQUARES, D6, 16, 14, ctx)
    assert agreed_digits(sol14.e_n_value,
                         rational_to_decimal(Fraction(7, 6), ctx), 40) >= 38
    assert agreed_digits(sol14.overshoot_prob,
                         rational_to_decimal(Fraction(29, 36), ctx), 40) >= 38
    assert exact_dp(SQUARES, 16, 15) == (Fraction(1), Fraction(5, 6))
    assert exact_dp(SQUARES, 16, 14) == (Fraction(7, 6), Fraction(29, 36))


def test_matches_exact_oracle_all_states():
    working = 50
    ctx = make_context(working)
    e_tab, p_tab = exact_dp_tables(SQUARES, 100, 0)
    for s, e, p in sweep_pair(SQUARES, D6, 100, 0, ctx):
        e_ref = rational_to_decimal(e_tab[s], ctx)
        p_ref = rational_to_decimal(p_tab[s], ctx)
        assert agreed_digits(e, e_ref, working) >= working - 5
        assert agreed_digits(p, p_ref, working) >= working - 5


def test_pair_matches_separate_solves_byte_for_byte():
    ctx = make_context(40)
    for target in (SQUARES, TargetSet.from_list([3, 7, 20])):
        pair = solve_pair(target, D6, 400, 0, ctx)
        separate = solve_truncated(target, D6, 400, 0, ctx)
        assert str(pair.e_n_value) == str(separate.e_n_value)
        assert str(pair.overshoot_prob) == str(separate.overshoot_prob)
        assert str(solve_overshoot(target, D6, 400, 0, ctx)) == str(pair.overshoot_prob)


def test_streaming_matches_full_array_reference():
    working = 60
    ctx = make_context(working)
    e_ref, p_ref = solve_pair_reference(SQUARES, D6, 1000, 0, ctx)
    for s, e, p in sweep_pair(SQUARES, D6, 1000, 0, ctx):
        assert str(e) == str(e_ref[s])
        assert str(p) == str(p_ref[s])


def test_monotone_in_cutoff_decimal():
    ctx = make_context(40)
    values = [solve_pair(SQUARES, D6, n, 0, ctx).e_n_value
              for n in (16, 100, 400, 2500)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_monotone_in_cutoff_exact_random_targets():
    rng = random.Random(5)
    for _ in range(5):
        elems = sorted(rng.sample(range(1, 60), 8))
        target = TargetSet.from_list(elems)
        e_small, _ = exact_dp_tables(target, 30, 0)
        e_big, _ = exact_dp_tables(target, 60, 0)
        for s in range(31):
            assert e_small[s] <= e_big[s]


def test_one_step_consistency():
    working = 40
    ctx = make_context(working)
    c = ctx.context()
    n = 300
    e_arr, p_arr = solve_pair_reference(SQUARES, D6, n, 0, ctx)
    e_ext = e_arr + [Decimal(0)] * 6
    p_ext = p_arr + [Decimal(1)] * 6
    for s in range(n + 1):
        if SQUARES.membership(s):
            continue
        acc_e = e_ext[s + 1]
        acc_p = p_ext[s + 1]
        for j in range(2, 7):
            acc_e = c.add(acc_e, e_ext[s + j])
            acc_p = c.add(acc_p, p_ext[s + j])
        again_e = c.add(Decimal(1), c.divide(acc_e, Decimal(6)))
        again_p = c.divide(acc_p, Decimal(6))
        assert agreed_digits(again_e, e_arr[s], working) >= working - 1
        assert agreed_digits(again_p, p_arr[s], working) >= working - 1


def test_degenerate_dense_target_is_exact():
    # every state 1..N absorbing: no path can cross the cutoff
    ctx = make_context(40)
    dense = TargetSet.dense_from(1, 200)
    sol = solve_pair(dense, D6, 200, 0, ctx)
    assert sol.overshoot_prob == 0
    assert sol.e_n_value == 1  # first roll always absorbs
    e, p = exact_dp(dense, 200, 0)
    assert (e, p) == (Fraction(1), Fraction(0))


def test_general_die_sizes():
    ctx = make_context(40)
    for m in (2, 3, 9):
        die = DieModel(m)
        target = TargetSet.from_list([5, 11])
        n = 11
        sol = solve_pair(target, die, n, 0, ctx)
        e_ref, p_ref = exact_dp(target, n, 0, die=die)
        assert agreed_digits(sol.e_n_value, rational_to_decimal(e_ref, ctx), 40) >= 35
        assert agreed_digits(sol.overshoot_prob, rational_to_decimal(p_ref, ctx), 40) >= 35


def test_sweep_argument_validation():
    ctx = make_context(30)
    with pytest.raises(ValueError):
        list(sweep_pair(SQUARES, D6, -1, 0, ctx))
    with pytest.raises(ValueError):
        list(sweep_pair(SQUARES, D6, 10, -2, ctx))
    with pytest.raises(ValueError):
        list(sweep_pair(SQUARES, D6, 10, 11, ctx))


def test_streamed_order_is_descending():
    ctx = make_context(30)
    states = [s for s, _, _ in sweep_pair(SQUARES, D6, 50, 10, ctx)]
    assert states == list(range(50, 9, -1))
