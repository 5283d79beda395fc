"""Certified error bounds for the perfect-square target.

With cutoff N = K^2 (K >= 4), the expected residual time beyond the cutoff,
conditional on overshooting, lies strictly between two closed-form series

    L_N = (1/6) * Sigma(5; 5/7 - eps, 2/7 - eps)
    U_N =         Sigma(1; 5/7 + eps, 2/7 + eps)

where eps = (5/7)|w|^(2K-4) is the hit/skip envelope at the minimal gap to
the next square, and

    Sigma(d; r, t) = t * [ (2K+1-d)/(1-r) + 2(K+1) r/(1-r)^2 + r(1+r)/(1-r)^3 ]

sums the band-by-band geometric weights in closed form.  At eps = 0 these
collapse to the exact linear forms L = 7K/6 + 8/3 and U = 7K + 20.

Combining with the truncated solve at start state s,

    0 < E(s) - (E_N(s) + L_N * P_s) < (U_N - L_N) * P_s,

so ``point = E_N(s) + L_N * P_s`` is a strict lower bound on the true
expectation and ``radius = (U_N - L_N) * P_s`` a strict width.  The number
of certified digits is the length of the decimal prefix shared by the two
interval endpoints, which the interval cannot straddle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from . import hitprob, walkmodel
from .numerics import PrecisionContext

__all__ = [
    "DivergentSeriesError",
    "PrecisionInsufficientError",
    "OvershootBounds",
    "CertifiedEstimate",
    "sigma_series",
    "overshoot_bounds",
    "overshoot_bounds_zero_epsilon",
    "compose_estimate",
    "certify_squares",
    "certified_digit_count",
    "recommended_digits",
    "MIN_K",
]

MIN_K = 4


class DivergentSeriesError(ValueError):
    """Series ratio outside (0, 1); the geometric sums do not converge."""


class PrecisionInsufficientError(ValueError):
    """Working precision too low for the requested certification."""

    def __init__(self, message: str, required_digits: int):
        super().__init__(message)
        self.required_digits = required_digits


@dataclass(frozen=True)
class OvershootBounds:
    """Residual-time bounds (L, U) beyond the cutoff N = K^2, with inputs."""

    K: int
    epsilon_n: Decimal
    lower: Decimal
    upper: Decimal
    r_minus: Decimal
    r_plus: Decimal
    t_minus: Decimal
    t_plus: Decimal


@dataclass(frozen=True)
class CertifiedEstimate:
    """Point value, rigorous radius, and certified digit count at one cutoff."""

    point_value: Decimal
    error_radius: Decimal
    certified_digits: int
    e_n_value: Decimal
    overshoot_prob: Decimal
    lower_bound: Decimal
    upper_bound: Decimal
    K: int
    N: int
    start: int
    working_digits: int
    exact: bool = False  # degenerate case: zero overshoot probability


def sigma_series(d, r, t, k: int, ctx: PrecisionContext | None = None):
    """Closed form of sum_j [ (K+1+j)^2 - K^2 - d ] r^j t over j >= 0.

    Accepts :class:`~decimal.Decimal` operands with a context, or exact
    :class:`~fractions.Fraction` operands with ``ctx=None``; the evaluation
    is the same three-term expression either way, with no truncated
    summation involved.
    """
    if d not in (1, 5):
        raise ValueError(f"d must be 1 or 5, got {d}")
    if not 0 < r < 1:
        raise DivergentSeriesError(f"series ratio must lie in (0, 1), got {r}")
    if ctx is None:
        one_minus = 1 - r
        return t * (Fraction(2 * k + 1 - d) / one_minus
                    + 2 * (k + 1) * r / one_minus**2
                    + r * (1 + r) / one_minus**3)
    c = ctx.context()
    one = Decimal(1)
    om = c.subtract(one, r)
    om2 = c.multiply(om, om)
    om3 = c.multiply(om2, om)
    term1 = c.divide(Decimal(2 * k + 1 - d), om)
    term2 = c.divide(c.multiply(Decimal(2 * (k + 1)), r), om2)
    term3 = c.divide(c.multiply(r, c.add(one, r)), om3)
    return c.multiply(t, c.add(c.add(term1, term2), term3))


def overshoot_bounds(k: int, roots: hitprob.CharacteristicRoots,
                     ctx: PrecisionContext) -> OvershootBounds:
    """Bounds L, U for cutoff N = K^2, valid for every start state <= N."""
    if k < MIN_K:
        raise ValueError(f"K must be >= {MIN_K}, got {k}")
    eps = hitprob.epsilon(2 * k - 4, roots).epsilon
    c = ctx.context()
    five_sevenths = c.divide(Decimal(5), Decimal(7))
    two_sevenths = c.divide(Decimal(2), Decimal(7))
    r_minus = c.subtract(five_sevenths, eps)
    r_plus = c.add(five_sevenths, eps)
    t_minus = c.subtract(two_sevenths, eps)
    t_plus = c.add(two_sevenths, eps)
    if not r_plus < 1:
        raise DivergentSeriesError(f"5/7 + epsilon must stay below 1 (K={k})")
    if not t_minus > 0:
        raise DivergentSeriesError(f"2/7 - epsilon must stay positive (K={k})")
    lower = c.divide(sigma_series(5, r_minus, t_minus, k, ctx), Decimal(6))
    upper = sigma_series(1, r_plus, t_plus, k, ctx)
    return OvershootBounds(K=k, epsilon_n=eps, lower=lower, upper=upper,
                           r_minus=r_minus, r_plus=r_plus,
                           t_minus=t_minus, t_plus=t_plus)


def overshoot_bounds_zero_epsilon(k: int) -> tuple[Fraction, Fraction]:
    """Exact rational (L, U) with the envelope forced to zero.

    These are the linear forms 7K/6 + 8/3 and 7K + 20, evaluated through
    the same closed-form series as the decimal path.
    """
    if k < MIN_K:
        raise ValueError(f"K must be >= {MIN_K}, got {k}")
    lower = sigma_series(5, Fraction(5, 7), Fraction(2, 7), k) / 6
    upper = sigma_series(1, Fraction(5, 7), Fraction(2, 7), k)
    return lower, upper


def certified_digit_count(point: Decimal, radius: Decimal) -> int:
    """Largest d such that point and point + radius share d decimal places.

    The integer parts must match as well, else the count is 0.  Comparison
    is exact (both operands are converted to rationals), and conservative:
    a tie at the d-th place does not count as agreement beyond it.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    a = Fraction(point)
    b = a + Fraction(radius)
    if math.floor(a) != math.floor(b):
        return 0
    # radius < 10^(adjusted+1) bounds how deep agreement can possibly reach;
    # walk the digits exactly from there rather than from zero.
    depth_cap = -(radius.adjusted()) + 2
    num_a, num_b = a.numerator, b.numerator
    den_a, den_b = a.denominator, b.denominator
    digits = 0
    for _ in range(depth_cap):
        num_a *= 10
        num_b *= 10
        if num_a // den_a != num_b // den_b:
            break
        digits += 1
    return digits


def recommended_digits(k: int) -> int:
    """Minimum working precision for certifying at cutoff root K.

    The overshoot probability decays roughly like 10^(-0.146 K); the
    slack covers the constants and guard needs.
    """
    return math.ceil(0.15 * k) + 60


def compose_estimate(solution: walkmodel.TruncationSolution,
                     bounds: OvershootBounds, ctx: PrecisionContext) -> CertifiedEstimate:
    """Combine a truncated solve with overshoot bounds into an estimate.

    A zero overshoot probability means the truncation is exact (no path
    crosses the cutoff before absorbing); the estimate then has radius 0
    and is flagged ``exact``.
    """
    c = ctx.context()
    e_n = solution.e_n_value
    p = solution.overshoot_prob
    cap = max(ctx.working_digits - ctx.guard_digits, 0)
    if p == 0:
        return CertifiedEstimate(
            point_value=e_n, error_radius=Decimal(0), certified_digits=cap,
            e_n_value=e_n, overshoot_prob=p,
            lower_bound=bounds.lower, upper_bound=bounds.upper,
            K=bounds.K, N=solution.cutoff, start=solution.start,
            working_digits=ctx.working_digits, exact=True)
    point = c.add(e_n, c.multiply(bounds.lower, p))
    radius = c.multiply(c.subtract(bounds.upper, bounds.lower), p)
    digits = min(certified_digit_count(point, radius), cap)
    return CertifiedEstimate(
        point_value=point, error_radius=radius, certified_digits=digits,
        e_n_value=e_n, overshoot_prob=p,
        lower_bound=bounds.lower, upper_bound=bounds.upper,
        K=bounds.K, N=solution.cutoff, start=solution.start,
        working_digits=ctx.working_digits, exact=False)


def certify_squares(k: int, ctx: PrecisionContext, start: int = 0,
                    progress=None) -> CertifiedEstimate:
    """Certified estimate of the expected hitting time to the squares.

    Runs the fused truncated solve at cutoff N = K^2 on a fair six-sided
    die, evaluates the overshoot constants, and composes the certified
    interval.  The true expectation lies strictly inside
    ``(point_value, point_value + error_radius)``.
    """
    if k < MIN_K:
        raise ValueError(f"K must be >= {MIN_K}, got {k}")
    required = recommended_digits(k)
    if ctx.working_digits < required:
        raise PrecisionInsufficientError(
            f"certifying K={k} needs at least {required} working digits "
            f"(got {ctx.working_digits}); the overshoot probability decays "
            f"like 10^(-0.146 K) and would be lost to roundoff",
            required_digits=required)
    n = k * k
    if not 0 <= start <= n:
        raise ValueError("start state must lie in [0, N]")
    roots = hitprob.compute_roots(ctx)
    bounds = overshoot_bounds(k, roots, ctx)
    target = walkmodel.TargetSet.perfect_squares()
    die = walkmodel.DieModel(6)
    solution = walkmodel.solve_pair(target, die, n, start, ctx, progress)
    return compose_estimate(solution, bounds, ctx)
