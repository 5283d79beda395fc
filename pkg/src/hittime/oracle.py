"""Independent verification paths: exact rational DP and Monte Carlo.

``exact_dp`` solves the two truncated recursions by backward substitution
in exact rational arithmetic (denominators divide M^(N-s)), giving ground
truth that the decimal solver must reproduce digit-for-digit after
conversion.  The Monte Carlo routines roll the raw process with a
counter-based Philox generator, so runs are reproducible from the seed and
trial batches can be partitioned across workers and merged exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .walkmodel import DieModel, TargetSet

__all__ = [
    "EXACT_DP_MAX_N",
    "SizeCapError",
    "AllTrialsCappedError",
    "McConfig",
    "McResult",
    "exact_dp",
    "exact_dp_tables",
    "simulate_hitting",
    "simulate_ever_hit",
    "merge_results",
    "derive_seeds",
]

EXACT_DP_MAX_N = 5000

# Trials are simulated in blocks of this many rolls at a time.
_ROLL_BLOCK = 64
_TRIAL_CHUNK = 1 << 16


class SizeCapError(ValueError):
    """Exact solve requested beyond the tractable cutoff cap."""


class AllTrialsCappedError(RuntimeError):
    """Every simulated trial hit the step cap; no estimate is possible."""


def exact_dp_tables(target: TargetSet, n: int, s_min: int = 0,
                    die: DieModel = DieModel(6),
                    ) -> tuple[list[Fraction], list[Fraction]]:
    """Exact (E, P) tables for all states s_min .. n, index ``s - s_min``."""
    if n > EXACT_DP_MAX_N:
        raise SizeCapError(f"exact solve capped at N <= {EXACT_DP_MAX_N}, got {n}")
    if n < 0 or s_min < 0 or s_min > n:
        raise ValueError("need 0 <= s_min <= N")
    target.ensure_bound(n)
    m = die.sides
    size = n - s_min + 1
    e_arr = [Fraction(0)] * (size + m)
    p_arr = [Fraction(0)] * size + [Fraction(1)] * m
    for s in range(n, s_min - 1, -1):
        idx = s - s_min
        if target.membership(s):
            continue
        e_arr[idx] = 1 + Fraction(sum(e_arr[idx + 1: idx + m + 1]), m)
        p_arr[idx] = Fraction(sum(p_arr[idx + 1: idx + m + 1]), m)
    return e_arr[:size], p_arr[:size]


def exact_dp(target: TargetSet, n: int, s: int,
             die: DieModel = DieModel(6)) -> tuple[Fraction, Fraction]:
    """Exact rational (E_N(s), P_s) by backward substitution.

    States above the cutoff report the boundary pair (0, 1).
    """
    if s > n:
        return Fraction(0), Fraction(1)
    e_arr, p_arr = exact_dp_tables(target, n, s_min=s, die=die)
    return e_arr[0], p_arr[0]


@dataclass(frozen=True)
class McConfig:
    """Simulation request: how many trials, from where, against what."""

    trials: int
    seed: int
    die: DieModel = DieModel(6)
    target: TargetSet = TargetSet.perfect_squares()
    start: int = 0
    max_steps: int = 10**6

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.start < 0:
            raise ValueError("start must be nonnegative")


@dataclass(frozen=True)
class McResult:
    """Sample statistics over completed trials.

    ``capped_trials`` counts trials that hit the step cap or ran past the
    target's declared bound without hitting; any nonzero count flags the
    mean as invalid for estimating the true expectation.  ``sum_t`` and
    ``sum_t_sq`` are exact integer accumulators kept so that partitioned
    results merge exactly and order-independently.
    """

    mean: float
    std_error: float
    trials_completed: int
    capped_trials: int
    sum_t: int
    sum_t_sq: int

    @property
    def flagged(self) -> bool:
        return self.capped_trials > 0


def _result_from_sums(completed: int, capped: int, sum_t: int, sum_t_sq: int) -> McResult:
    if completed == 0:
        raise AllTrialsCappedError("every trial hit the step cap")
    mean = Fraction(sum_t, completed)
    if completed > 1:
        var = (Fraction(sum_t_sq) - Fraction(sum_t * sum_t, completed)) / (completed - 1)
        std_error = math.sqrt(float(var) / completed)
    else:
        std_error = float("inf")
    return McResult(mean=float(mean), std_error=std_error,
                    trials_completed=completed, capped_trials=capped,
                    sum_t=sum_t, sum_t_sq=sum_t_sq)


def merge_results(a: McResult, b: McResult) -> McResult:
    """Combine partitioned batches; exact, hence order-independent."""
    return _result_from_sums(a.trials_completed + b.trials_completed,
                             a.capped_trials + b.capped_trials,
                             a.sum_t + b.sum_t,
                             a.sum_t_sq + b.sum_t_sq)


def derive_seeds(seed: int, workers: int) -> list[int]:
    """Deterministic per-worker seeds for partitioned simulation."""
    children = np.random.SeedSequence(seed).spawn(workers)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _membership_mask(target: TargetSet, values: np.ndarray) -> np.ndarray:
    """Vectorized membership for nonnegative int64 ``values``.

    Values beyond the target's horizon are non-members here; the caller
    treats walks past the horizon as dead (capped).
    """
    if target.kind == "perfect_squares":
        r = np.sqrt(values.astype(np.float64)).astype(np.int64)
        return ((r * r == values) | ((r + 1) * (r + 1) == values)) & (values >= 1)
    horizon = target.horizon
    assert horizon is not None
    table = np.zeros(horizon + 2, dtype=bool)
    if target.kind == "explicit_list":
        table[np.fromiter(target.elements, dtype=np.int64)] = True
    else:
        for h in range(horizon + 1):
            if (target.bits >> h) & 1:
                table[h] = True
    clipped = np.minimum(values, horizon + 1)
    return table[clipped]


def simulate_hitting(cfg: McConfig) -> McResult:
    """Estimate the expected hitting time by rolling the raw process.

    Uses the counter-based Philox 4x64 generator keyed by ``cfg.seed``;
    die rolls are ``1 + floor(M * uniform)``.  Trials that reach
    ``max_steps`` rolls, or that pass the target's horizon without hitting
    (after which the monotone walk provably never hits), are counted in
    ``capped_trials`` and excluded from the mean.
    """
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    m = cfg.die.sides
    target = cfg.target
    bound = target.horizon

    start_in_target = (bound is None or cfg.start <= bound) and target.membership(cfg.start)
    if start_in_target:
        return _result_from_sums(cfg.trials, 0, 0, 0)

    completed = 0
    capped = 0
    sum_t = 0
    sum_t_sq = 0
    remaining = cfg.trials
    while remaining > 0:
        chunk = min(remaining, _TRIAL_CHUNK)
        remaining -= chunk
        sums = np.full(chunk, cfg.start, dtype=np.int64)
        alive = np.arange(chunk)
        steps_done = 0
        while alive.size > 0 and steps_done < cfg.max_steps:
            block = min(_ROLL_BLOCK, cfg.max_steps - steps_done)
            rolls = 1 + np.floor(m * rng.random((alive.size, block))).astype(np.int64)
            paths = sums[alive, None] + np.cumsum(rolls, axis=1)
            hits = _membership_mask(target, paths)
            hit_any = hits.any(axis=1)
            first = np.argmax(hits, axis=1)
            if hit_any.any():
                t_vals = steps_done + first[hit_any] + 1
                completed += int(hit_any.sum())
                sum_t += int(t_vals.sum())
                sum_t_sq += int((t_vals * t_vals).sum())
            survivors = ~hit_any
            sums[alive[survivors]] = paths[survivors, -1]
            alive = alive[survivors]
            if bound is not None and alive.size > 0:
                # Past the declared bound the walk can never be seen to hit.
                dead = sums[alive] > bound
                capped += int(dead.sum())
                alive = alive[~dead]
            steps_done += block
        capped += alive.size

    return _result_from_sums(completed, capped, sum_t, sum_t_sq)


def simulate_ever_hit(n: int, trials: int, seed: int,
                      die: DieModel = DieModel(6)) -> float:
    """Fraction of walks from 0 that visit ``n`` before exceeding it.

    Each roll advances by at least 1, so ``n`` rolls always suffice to
    reach or pass ``n``; one block of that many rolls decides every trial.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    m = die.sides
    hits = 0
    remaining = trials
    chunk_size = max(1, min(_TRIAL_CHUNK, (1 << 21) // n))
    while remaining > 0:
        chunk = min(remaining, chunk_size)
        remaining -= chunk
        rolls = 1 + np.floor(m * rng.random((chunk, n))).astype(np.int64)
        paths = np.cumsum(rolls, axis=1)
        reached = paths >= n
        first = np.argmax(reached, axis=1)
        hits += int((paths[np.arange(chunk), first] == n).sum())
    return hits / trials
