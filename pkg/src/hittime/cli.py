"""Command-line front end.

Subcommands::

    certify    certified expected hitting time to the perfect squares
    solve      raw truncated solve (E_N(s), P_s) for any target
    pn         table of ever-hit probabilities p_n (CSV; --exact for fractions)
    roots      characteristic roots and their moduli
    simulate   Monte Carlo estimate of the hitting time

Exit codes: 0 success, 2 usage/config error, 3 insufficient precision,
4 internal numeric failure.  All real numbers in JSON output are decimal
digit strings, never binary floats, so reports are precision-lossless and
diffable.  Progress for long sweeps goes to stderr only.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from . import __version__, certify, hitprob, oracle, walkmodel
from .numerics import digit_string, make_context

__all__ = ["main"]

SCHEMA_VERSION = 1
PRECISION_ENV_VAR = "HITTIME_PRECISION"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_NUMERIC = 4

# Sweeps below this many states never print progress.
_PROGRESS_MIN_STATES = 1 << 21


class ConfigError(ValueError):
    """Invalid command-line configuration."""


def _parse_target(selector: str) -> walkmodel.TargetSet:
    if selector == "squares":
        return walkmodel.TargetSet.perfect_squares()
    path = selector[len("file:"):] if selector.startswith("file:") else selector
    if not os.path.exists(path):
        raise ConfigError(f"unknown target {selector!r} (not a builtin, not a file)")
    return walkmodel.TargetSet.from_file(path)


def _resolve_cutoff(args) -> tuple[int, int | None]:
    """Return (N, K); exactly one of --K/--N must be given."""
    if (args.K is None) == (args.N is None):
        raise ConfigError("give exactly one of --K or --N")
    if args.K is not None:
        if args.K < 0:
            raise ConfigError("--K must be nonnegative")
        return args.K * args.K, args.K
    if args.N < 0:
        raise ConfigError("--N must be nonnegative")
    k = math.isqrt(args.N)
    return args.N, (k if k * k == args.N else None)


def _resolve_precision(args, default: int) -> int:
    if getattr(args, "precision", None) is not None:
        return args.precision
    env = os.environ.get(PRECISION_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{PRECISION_ENV_VAR} must be an integer, got {env!r}")
    return default


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _progress_printer(total_states: int):
    if total_states < _PROGRESS_MIN_STATES:
        return None
    t0 = time.monotonic()
    last = [t0]

    def progress(s: int) -> None:
        now = time.monotonic()
        if now - last[0] < 2.0:
            return
        last[0] = now
        done = total_states - s
        rate = done / max(now - t0, 1e-9)
        print(f"swept {done}/{total_states} states ({rate:,.0f}/s)", file=sys.stderr)

    return progress


def cmd_certify(args) -> int:
    n, k = _resolve_cutoff(args)
    if k is None:
        raise ConfigError(f"--N {args.N} is not a perfect square; certify needs N = K^2")
    if args.target != "squares":
        raise ConfigError("certify supports only --target squares")
    if args.die != 6:
        raise ConfigError("certify supports only --die 6")
    if k < certify.MIN_K:
        raise ConfigError(f"certify needs K >= {certify.MIN_K}, got {k}")
    precision = _resolve_precision(args, default=certify.recommended_digits(k))
    ctx = make_context(precision)
    t0 = time.monotonic()
    est = certify.certify_squares(k, ctx, start=args.s,
                                  progress=_progress_printer(n))
    runtime = time.monotonic() - t0
    report = certification_report(est, runtime)
    if args.format == "json":
        _emit(json.dumps(report, indent=2), args.out)
    else:
        w = est.working_digits
        lines = [
            f"K = {est.K}   N = {est.N}   start = {est.start}   precision = {w} digits",
            f"E_N({est.start})      = {digit_string(est.e_n_value, w)}",
            f"P_s(A_N)    = {digit_string(est.overshoot_prob, w)}",
            f"L_N         = {digit_string(est.lower_bound, 40)}",
            f"U_N         = {digit_string(est.upper_bound, 40)}",
            f"point_value = {digit_string(est.point_value, w)}",
            f"error_radius = {digit_string(est.error_radius, 40)}",
            f"certified_digits = {est.certified_digits}",
            f"runtime_seconds = {runtime:.2f}",
        ]
        _emit("\n".join(lines), args.out)
    return EXIT_OK


def certification_report(est: certify.CertifiedEstimate, runtime: float) -> dict:
    """JSON-ready certification report; all reals as digit strings."""
    w = est.working_digits
    return {
        "schema": SCHEMA_VERSION,
        "K": est.K,
        "N": est.N,
        "start": est.start,
        "precision_digits": w,
        "E_N_0": digit_string(est.e_n_value, w),
        "P0_AN": digit_string(est.overshoot_prob, w),
        "L_N": digit_string(est.lower_bound, w),
        "U_N": digit_string(est.upper_bound, w),
        "point_value": digit_string(est.point_value, w),
        "error_radius": digit_string(est.error_radius, w),
        "certified_digits": est.certified_digits,
        "exact": est.exact,
        "runtime_seconds": f"{runtime:.3f}",
    }


def cmd_solve(args) -> int:
    n, k = _resolve_cutoff(args)
    target = _parse_target(args.target)
    die = walkmodel.DieModel(args.die)
    precision = _resolve_precision(
        args, default=certify.recommended_digits(k) if k is not None else 60)
    ctx = make_context(precision)
    if args.s < 0:
        raise ConfigError("--s must be nonnegative")
    t0 = time.monotonic()
    sol = walkmodel.solve_pair(target, die, n, args.s, ctx,
                               progress=_progress_printer(n - min(args.s, n)))
    runtime = time.monotonic() - t0
    uncertified = not (args.target == "squares" and args.die == 6)
    w = ctx.working_digits
    if args.format == "json":
        payload = {
            "schema": SCHEMA_VERSION,
            "N": n,
            "start": sol.start,
            "die_sides": die.sides,
            "target": args.target,
            "precision_digits": w,
            "E_N": digit_string(sol.e_n_value, w),
            "P_overshoot": digit_string(sol.overshoot_prob, w),
            "uncertified": uncertified,
            "runtime_seconds": f"{runtime:.3f}",
        }
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = []
        if uncertified:
            lines.append("UNCERTIFIED (raw truncated solve; no error bounds attached)")
        lines += [
            f"N = {n}   start = {sol.start}   die = {die.sides}   precision = {w}",
            f"E_N({sol.start}) = {digit_string(sol.e_n_value, w)}",
            f"P_{sol.start}(A_N) = {digit_string(sol.overshoot_prob, w)}",
        ]
        _emit("\n".join(lines), args.out)
    return EXIT_OK


def cmd_pn(args) -> int:
    if args.max < 1:
        raise ConfigError("--max must be >= 1")
    if args.exact:
        if args.max > hitprob.PN_EXACT_MAX:
            raise ConfigError(f"--exact supports --max up to {hitprob.PN_EXACT_MAX}")
        rows = [(n, hitprob.pn_exact(n)) for n in range(1, args.max + 1)]
        if args.format == "json":
            payload = {"schema": SCHEMA_VERSION,
                       "rows": [{"n": n, "p_n": f"{p.numerator}/{p.denominator}"}
                                for n, p in rows]}
            _emit(json.dumps(payload, indent=2), args.out)
        else:
            lines = ["n,p_n"] + [f"{n},{p.numerator}/{p.denominator}" for n, p in rows]
            _emit("\n".join(lines), args.out)
        return EXIT_OK
    precision = _resolve_precision(args, default=30)
    ctx = make_context(precision)
    if args.format == "json":
        rows = hitprob.figure1_table(args.max, ctx)
        payload = {"schema": SCHEMA_VERSION,
                   "rows": [{"n": n, "p_n": digit_string(p, 15)} for n, p in rows]}
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        _emit(hitprob.figure1_csv(args.max, ctx), args.out)
    return EXIT_OK


def cmd_roots(args) -> int:
    precision = _resolve_precision(args, default=50)
    ctx = make_context(precision)
    roots = hitprob.compute_roots(ctx)
    w = ctx.working_digits

    def cpx(z: hitprob.DecimalComplex) -> dict:
        return {"re": digit_string(z.re, w), "im": digit_string(z.im, w)}

    payload = {
        "schema": SCHEMA_VERSION,
        "precision_digits": w,
        "root_unit": digit_string(roots.root_unit, w),
        "u": digit_string(roots.u, w),
        "v_plus": cpx(roots.v_plus),
        "v_minus": cpx(roots.v_minus),
        "w_plus": cpx(roots.w_plus),
        "w_minus": cpx(roots.w_minus),
        "modulus_u": digit_string(roots.modulus_u, w),
        "modulus_v": digit_string(roots.modulus_v, w),
        "modulus_w": digit_string(roots.modulus_w, w),
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = [f"characteristic roots at {w} digits"]
        for key in ("root_unit", "u", "v_plus", "v_minus", "w_plus", "w_minus",
                    "modulus_u", "modulus_v", "modulus_w"):
            val = payload[key]
            if isinstance(val, dict):
                sign, mag = ("-", val["im"][1:]) if val["im"].startswith("-") else ("+", val["im"])
                lines.append(f"{key:10s} = {val['re']} {sign} {mag} i")
            else:
                lines.append(f"{key:10s} = {val}")
        _emit("\n".join(lines), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    target = _parse_target(args.target)
    die = walkmodel.DieModel(args.die)
    cfg = oracle.McConfig(trials=args.trials, seed=args.seed, die=die,
                          target=target, start=args.s, max_steps=args.max_steps)
    t0 = time.monotonic()
    res = oracle.simulate_hitting(cfg)
    runtime = time.monotonic() - t0
    payload = {
        "schema": SCHEMA_VERSION,
        "target": args.target,
        "start": args.s,
        "die_sides": die.sides,
        "trials": args.trials,
        "seed": args.seed,
        "mean": f"{res.mean!r}",
        "std_error": f"{res.std_error!r}",
        "trials_completed": res.trials_completed,
        "capped_trials": res.capped_trials,
        "flagged": res.flagged,
        "runtime_seconds": f"{runtime:.3f}",
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = [
            f"mean = {res.mean!r}  (std_error = {res.std_error:.3g}, "
            f"{res.trials_completed} completed, {res.capped_trials} capped)",
        ]
        if res.flagged:
            lines.append("FLAGGED: capped trials present; mean is not a valid E[T] estimate")
        _emit("\n".join(lines), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hittime",
        description="Certified expected hitting times for dice-sum processes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, formats=("json", "text"), default_format="json"):
        p.add_argument("--precision", type=int, default=None,
                       help=f"working decimal digits (default: heuristic or ${PRECISION_ENV_VAR})")
        p.add_argument("--format", choices=formats, default=default_format)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("certify", help="certified estimate for the perfect squares")
    p.add_argument("--K", type=int, default=None, help="cutoff root; N = K^2")
    p.add_argument("--N", type=int, default=None, help="cutoff (must be a perfect square)")
    p.add_argument("--s", type=int, default=0, help="start state (default 0)")
    p.add_argument("--target", default="squares")
    p.add_argument("--die", type=int, default=6)
    add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("solve", help="raw truncated solve (uncertified)")
    p.add_argument("--target", required=True, help="'squares' or a target file path")
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--die", type=int, default=6)
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("pn", help="ever-hit probability table")
    p.add_argument("--max", type=int, required=True, help="largest n")
    p.add_argument("--exact", action="store_true",
                   help=f"emit exact fractions (n <= {hitprob.PN_EXACT_MAX})")
    add_common(p, formats=("csv", "json"), default_format="csv")
    p.set_defaults(func=cmd_pn)

    p = sub.add_parser("roots", help="characteristic roots and moduli")
    add_common(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("simulate", help="Monte Carlo hitting-time estimate")
    p.add_argument("--target", default="squares")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--die", type=int, default=6)
    p.add_argument("--max-steps", type=int, default=10**6)
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except certify.PrecisionInsufficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (hitprob.RootRefinementError, certify.DivergentSeriesError,
            oracle.AllTrialsCappedError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, walkmodel.TargetSetError, walkmodel.CutoffExceedsBoundError,
            oracle.SizeCapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
