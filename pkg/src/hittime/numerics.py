"""Arithmetic substrate: fixed-precision decimal floats and exact rationals.

All modules in this package do their real arithmetic through a
:class:`PrecisionContext`, which wraps a :class:`decimal.Context` carrying
``working_digits + guard_digits`` significant digits.  Values are plain
:class:`decimal.Decimal` objects; exact arithmetic uses
:class:`fractions.Fraction`.  Rounding is round-half-even everywhere, and
identical operation sequences at identical precision reproduce identical
digit strings.

The guard digits absorb roundoff drift; :func:`precision_audit` re-runs a
computation at doubled precision and counts the leading digits on which the
two results agree, which turns "enough precision" from an assumption into a
measurement.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable

__all__ = [
    "MIN_WORKING_DIGITS",
    "MIN_GUARD_DIGITS",
    "DEFAULT_GUARD_DIGITS",
    "PrecisionTooLowError",
    "PrecisionContext",
    "make_context",
    "rational_to_decimal",
    "digit_string",
    "round_to_digits",
    "agreed_digits",
    "precision_audit",
    "ulp_up",
]

MIN_WORKING_DIGITS = 30
MIN_GUARD_DIGITS = 10
DEFAULT_GUARD_DIGITS = 15

# Generous exponent range: overshoot probabilities sit around 1e-1000 and
# intermediate squares go lower still; nothing here should ever clamp.
_EMAX = 10**9
_EMIN = -(10**9)


class PrecisionTooLowError(ValueError):
    """Requested working precision is below the supported minimum."""


@dataclass(frozen=True)
class PrecisionContext:
    """Working decimal precision plus internal guard digits.

    ``working_digits`` is the precision results are reported at;
    ``guard_digits`` extra digits are carried internally by every
    operation so that accumulated roundoff stays below the reported
    resolution.
    """

    working_digits: int
    guard_digits: int = DEFAULT_GUARD_DIGITS

    def __post_init__(self) -> None:
        if self.working_digits < MIN_WORKING_DIGITS:
            raise PrecisionTooLowError(
                f"working_digits must be >= {MIN_WORKING_DIGITS}, got {self.working_digits}"
            )
        if self.guard_digits < MIN_GUARD_DIGITS:
            raise ValueError(
                f"guard_digits must be >= {MIN_GUARD_DIGITS}, got {self.guard_digits}"
            )

    @property
    def internal_digits(self) -> int:
        return self.working_digits + self.guard_digits

    def context(self, rounding: str = decimal.ROUND_HALF_EVEN) -> decimal.Context:
        """A fresh decimal context at internal precision.

        Callers typically bind this once per sweep; contexts are cheap to
        create and immutable by convention here.
        """
        return decimal.Context(
            prec=self.internal_digits, rounding=rounding, Emax=_EMAX, Emin=_EMIN
        )

    def doubled(self) -> "PrecisionContext":
        """Context with doubled working precision (same guard), for audits."""
        return PrecisionContext(2 * self.working_digits, self.guard_digits)


def make_context(working_digits: int, guard_digits: int = DEFAULT_GUARD_DIGITS) -> PrecisionContext:
    """Create a :class:`PrecisionContext`; refuses working_digits < 30."""
    return PrecisionContext(working_digits, guard_digits)


def rational_to_decimal(q: Fraction, ctx: PrecisionContext) -> Decimal:
    """Evaluate an exact rational at the context's internal precision.

    The result differs from the true value of ``q`` by strictly less than
    one unit in the last *working* digit (the guard digits give ample
    headroom: the single division is correctly rounded at internal
    precision).
    """
    c = ctx.context()
    return c.divide(Decimal(q.numerator), Decimal(q.denominator))


def round_to_digits(x: Decimal, digits: int) -> Decimal:
    """Round ``x`` to ``digits`` significant digits (half-even)."""
    if digits < 1:
        raise ValueError("digits must be >= 1")
    return decimal.Context(prec=digits, rounding=decimal.ROUND_HALF_EVEN,
                           Emax=_EMAX, Emin=_EMIN).plus(x)


def digit_string(x: Decimal, digits: int) -> str:
    """Canonical decimal digit string of ``x`` at ``digits`` significant digits.

    Plain positional form for moderate exponents, scientific form otherwise,
    exactly as :class:`decimal.Decimal` prints; byte-stable across runs.
    """
    return str(round_to_digits(x, digits))


def ulp_up(x: Decimal, ctx: PrecisionContext) -> Decimal:
    """Smallest representable increment above ``x`` at internal precision.

    Used where a bound must never be understated by roundoff.
    """
    c = ctx.context(decimal.ROUND_CEILING)
    if x == 0:
        return Decimal(0)
    step = Decimal(1).scaleb(x.adjusted() - ctx.internal_digits + 1)
    return c.add(x, step)


def agreed_digits(a: Decimal, b: Decimal, digits: int) -> int:
    """Number of leading significant digits on which ``a`` and ``b`` agree.

    Both values are first rounded to ``digits`` significant digits; the
    count compares sign, decimal exponent and then digit-by-digit, so it is
    conservative near rounding boundaries.  Returns ``digits`` on full
    agreement (including both values being zero).
    """
    ra = round_to_digits(a, digits)
    rb = round_to_digits(b, digits)
    if ra == rb:
        return digits
    if ra.is_zero() or rb.is_zero():
        return 0
    if ra.is_signed() != rb.is_signed():
        return 0
    if ra.adjusted() != rb.adjusted():
        return 0
    da = ra.as_tuple().digits
    db = rb.as_tuple().digits
    n = 0
    for xa, xb in zip(da, db):
        if xa != xb:
            break
        n += 1
    return n


def precision_audit(computation: Callable[[PrecisionContext], Decimal],
                    ctx: PrecisionContext) -> int:
    """Re-run ``computation`` at doubled precision and count agreed digits.

    ``computation`` must be a deterministic function of its context. The
    return value is the number of leading working digits on which the
    baseline and the doubled-precision rerun agree, capped at
    ``ctx.working_digits``.
    """
    base = computation(ctx)
    fine = computation(ctx.doubled())
    return agreed_digits(base, fine, ctx.working_digits)
