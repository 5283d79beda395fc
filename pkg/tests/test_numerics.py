"""Precision contexts, rational conversion, digit tools, and the audit."""

import random
from decimal import Decimal
from fractions import Fraction

import pytest

from hittime.numerics import (
    PrecisionContext,
    PrecisionTooLowError,
    agreed_digits,
    digit_string,
    make_context,
    precision_audit,
    rational_to_decimal,
    round_to_digits,
    ulp_up,
)


def test_make_context_boundaries():
    ctx = make_context(30)
    assert ctx.working_digits == 30
    assert ctx.internal_digits == 45
    with pytest.raises(PrecisionTooLowError):
        make_context(29)
    with pytest.raises(ValueError):
        make_context(40, guard_digits=5)


def test_make_context_large():
    ctx = make_context(1200)
    assert ctx.internal_digits >= 1210


def test_rational_to_decimal_examples():
    ctx = make_context(30)
    assert digit_string(rational_to_decimal(Fraction(1, 6), ctx), 10) == "0.1666666667"
    assert digit_string(rational_to_decimal(Fraction(2, 7), ctx), 10) == "0.2857142857"
    assert rational_to_decimal(Fraction(0, 1), ctx) == 0


def test_rational_to_decimal_unit_in_last_place():
    ctx = make_context(40)
    rng = random.Random(2024)
    for _ in range(200):
        q = Fraction(rng.randrange(-10**12, 10**12), rng.randrange(1, 10**12))
        got = rational_to_decimal(q, ctx)
        err = abs(Fraction(got) - q)
        if q != 0:
            assert err <= abs(q) * Fraction(1, 10**ctx.working_digits)


def test_determinism_byte_identical():
    ctx = make_context(50)
    a = str(rational_to_decimal(Fraction(355, 113), ctx))
    b = str(rational_to_decimal(Fraction(355, 113), ctx))
    assert a == b


def test_coarse_refines_to_fine():
    # The coarse-precision digits of a finer evaluation match the coarse
    # evaluation to within one unit in the last place.
    coarse = make_context(35)
    fine = make_context(90)
    rng = random.Random(7)
    for _ in range(100):
        q = Fraction(rng.randrange(1, 10**9), rng.randrange(1, 10**9))
        at_coarse = round_to_digits(rational_to_decimal(q, coarse), 35)
        refined = round_to_digits(rational_to_decimal(q, fine), 35)
        ulp = Decimal(1).scaleb(at_coarse.adjusted() - 34)
        assert abs(at_coarse - refined) <= ulp


def test_fraction_field_axioms():
    rng = random.Random(99)
    for _ in range(300):
        a = Fraction(rng.randrange(-999, 1000), rng.randrange(1, 1000))
        b = Fraction(rng.randrange(-999, 1000), rng.randrange(1, 1000))
        c = Fraction(rng.randrange(-999, 1000), rng.randrange(1, 1000))
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert (a + b).denominator > 0
        if b != 0:
            assert (a / b) * b == a


def test_digit_string_significant_digits():
    assert digit_string(Decimal("123.456789"), 5) == "123.46"
    assert digit_string(Decimal("1.508850331472307815412722898448210123557E-1023"), 10) \
        == "1.508850331E-1023"


def test_ulp_up_is_strictly_above():
    ctx = make_context(30)
    x = rational_to_decimal(Fraction(2, 7), ctx)
    up = ulp_up(x, ctx)
    assert up > x
    assert Fraction(up) - Fraction(x) <= Fraction(1, 10**(ctx.internal_digits - 1))


def test_agreed_digits_cases():
    assert agreed_digits(Decimal("0.123456"), Decimal("0.123499"), 6) == 4
    assert agreed_digits(Decimal("1"), Decimal("2"), 10) == 0
    assert agreed_digits(Decimal("5"), Decimal("5"), 12) == 12
    assert agreed_digits(Decimal("0"), Decimal("0"), 9) == 9
    assert agreed_digits(Decimal("1"), Decimal("-1"), 9) == 0
    assert agreed_digits(Decimal("1"), Decimal("10"), 9) == 0


def test_audit_exact_operand():
    ctx = make_context(40)
    agreed = precision_audit(lambda c: rational_to_decimal(Fraction(1, 6), c), ctx)
    assert agreed >= ctx.working_digits - 1


def test_audit_constant_zero():
    ctx = make_context(40)
    assert precision_audit(lambda c: Decimal(0), ctx) == 40


def test_audit_detects_starved_precision():
    # A computation that cancels almost everything keeps only trailing
    # digits; the audit should report far fewer agreed digits than claimed.
    def cancellation(c: PrecisionContext) -> Decimal:
        ctx = c.context()
        big = ctx.divide(Decimal(10**60), Decimal(3))
        return ctx.subtract(ctx.add(big, Decimal("1.25")), big)

    audited = precision_audit(cancellation, make_context(30))
    assert audited < 30
