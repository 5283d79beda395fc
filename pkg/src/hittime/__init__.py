"""Certified arbitrary-precision expected hitting times for dice-sum walks.

A cumulative sum of fair die rolls is run until it enters a target set of
nonnegative integers.  This package computes the expected number of rolls
by a constant-memory truncated backward recursion and, for the
perfect-square target, wraps the result in a rigorously bounded two-sided
error interval so that a stated number of leading decimal digits is
provably correct.
"""

__version__ = "0.1.0"

from .certify import (
    CertifiedEstimate,
    OvershootBounds,
    certified_digit_count,
    certify_squares,
    overshoot_bounds,
    overshoot_bounds_zero_epsilon,
    sigma_series,
)
from .hitprob import (
    CharacteristicRoots,
    EpsilonBound,
    compute_roots,
    epsilon,
    figure1_table,
    pn_decimal,
    pn_exact,
)
from .numerics import (
    PrecisionContext,
    PrecisionTooLowError,
    digit_string,
    make_context,
    precision_audit,
    rational_to_decimal,
)
from .oracle import (
    McConfig,
    McResult,
    exact_dp,
    exact_dp_tables,
    merge_results,
    simulate_ever_hit,
    simulate_hitting,
)
from .walkmodel import (
    DieModel,
    TargetSet,
    TruncationSolution,
    solve_overshoot,
    solve_pair,
    solve_truncated,
    sweep_pair,
)

__all__ = [
    "__version__",
    "PrecisionContext",
    "PrecisionTooLowError",
    "make_context",
    "rational_to_decimal",
    "digit_string",
    "precision_audit",
    "DieModel",
    "TargetSet",
    "TruncationSolution",
    "solve_truncated",
    "solve_overshoot",
    "solve_pair",
    "sweep_pair",
    "pn_exact",
    "pn_decimal",
    "compute_roots",
    "epsilon",
    "figure1_table",
    "CharacteristicRoots",
    "EpsilonBound",
    "sigma_series",
    "overshoot_bounds",
    "overshoot_bounds_zero_epsilon",
    "certify_squares",
    "certified_digit_count",
    "OvershootBounds",
    "CertifiedEstimate",
    "exact_dp",
    "exact_dp_tables",
    "simulate_hitting",
    "simulate_ever_hit",
    "merge_results",
    "McConfig",
    "McResult",
]
