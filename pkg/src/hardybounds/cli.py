"""Command-line front end: ``hardy bound|refine|oracle|example|selftest``.

Exit codes: 0 ok, 2 bad input, 3 non-convergence, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Exponents,
    HardyDomainError,
    TruncationError,
    TruncationPolicy,
    WeightSpec,
    explicit_weights,
    validate_exponents,
)
from .families import family_from_name
from .intervals import resolve_truncation
from .oracle import METHODS, OracleConfig, check_maximizer_monotone, maximize_quotient
from .refine import DEFAULT_M_MAX, DEFAULT_TOL, refinement_table
from .report import ORACLE, build_report, closed_forms

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NONCONVERGED = 3
EXIT_INVARIANT = 4

FAMILY_PARAMS = ("gamma", "b", "c", "d")


class ProblemError(ValueError):
    """Malformed problem description; the message names the offending field."""


@dataclass
class Problem:
    exponents: Exponents
    spec: WeightSpec
    options: dict
    truncation_trace: list


def _num(x):
    # 15 significant digits; JSON has no infinities, so those become strings
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        return float(f"{x:.15g}")
    if isinstance(x, dict):
        return {key: _num(v) for key, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_num(obj), indent=2, sort_keys=False)


# ---------------------------------------------------------------- input


def _field(doc: dict, name: str, kind, default=None, required=False):
    if name not in doc:
        if required:
            raise ProblemError(f"missing field '{name}'")
        return default
    val = doc[name]
    try:
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise TypeError
            return float(val)
        if kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise TypeError
            return val
    except TypeError:
        raise ProblemError(f"field '{name}' must be a {kind.__name__}, got {val!r}") from None
    return val


def _truncation(doc: dict) -> TruncationPolicy:
    if "truncation" in doc:
        t = doc["truncation"]
        if not isinstance(t, dict):
            raise ProblemError("field 'truncation' must be an object")
        mode = t.get("mode", "fixed")
        try:
            if mode == "fixed":
                return TruncationPolicy.fixed(_field(t, "N", int, required=True))
            if mode == "doubling":
                return TruncationPolicy.doubling(
                    tol=_field(t, "tail_tolerance", float, 1e-8),
                    N_max=_field(t, "N_max", int, 2**20),
                    N=_field(t, "N", int, 64),
                )
        except HardyDomainError as exc:
            raise ProblemError(f"field 'truncation': {exc}") from None
        raise ProblemError(f"field 'truncation.mode' must be 'fixed' or 'doubling', got {mode!r}")
    return TruncationPolicy.fixed(_field(doc, "N", int, 64))


def problem_from_dict(doc) -> Problem:
    if not isinstance(doc, dict):
        raise ProblemError("problem must be a JSON object")
    p = _field(doc, "p", float, required=True)
    q = _field(doc, "q", float, required=True)
    try:
        e = validate_exponents(p, q)
    except HardyDomainError as exc:
        raise ProblemError(f"fields 'p'/'q': {exc}") from None
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ProblemError("field 'options' must be an object")

    has_family = "family" in doc
    has_vectors = "u" in doc or "v" in doc
    if has_family == has_vectors:
        raise ProblemError("give exactly one of 'family' or the pair 'u', 'v'")
    policy = _truncation(doc)
    try:
        if has_family:
            fam = doc["family"]
            if isinstance(fam, str):
                fam = {"name": fam}
            if not isinstance(fam, dict) or "name" not in fam:
                raise ProblemError("field 'family' must be a name or an object with 'name'")
            params = {key: _field(fam, key, float) for key in FAMILY_PARAMS if key in fam}
            unknown = set(fam) - set(FAMILY_PARAMS) - {"name"}
            if unknown:
                raise ProblemError(f"field 'family': unknown parameter(s) {sorted(unknown)}")
            base = family_from_name(str(fam["name"]), policy.N, e.p, e.q, **params)
        else:
            u, v = doc.get("u"), doc.get("v")
            if not isinstance(u, list) or not isinstance(v, list):
                raise ProblemError("fields 'u' and 'v' must both be lists of numbers")
            if len(u) != len(v) or not u:
                raise ProblemError(f"fields 'u' and 'v' must be non-empty and of equal length ({len(u)} vs {len(v)})")
            try:
                base = explicit_weights(np.array(u, dtype=np.float64), np.array(v, dtype=np.float64))
            except (TypeError, ValueError) as exc:
                if isinstance(exc, HardyDomainError):
                    raise
                raise ProblemError(f"fields 'u'/'v': non-numeric entry ({exc})") from None
        spec, trace = resolve_truncation(base, e, policy)
    except HardyDomainError as exc:
        raise ProblemError(str(exc)) from None
    return Problem(e, spec, options, trace)


def load_problem(path: str) -> Problem:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return problem_from_dict(doc)
    except ProblemError as exc:
        raise ProblemError(f"{path}: {exc}") from None


def problem_from_args(args) -> Problem:
    if args.problem:
        prob = load_problem(args.problem)
    elif args.family:
        doc = {"p": args.p, "q": args.q, "family": {"name": args.family}, "N": args.N}
        for key in FAMILY_PARAMS:
            val = getattr(args, key)
            if val is not None:
                doc["family"][key] = val
        prob = problem_from_dict(doc)
    else:
        raise ProblemError("give a problem file or --family")
    # explicit flags override the file's options
    for key in ("m", "tol", "seed", "restarts", "method"):
        val = getattr(args, key, None)
        if val is not None:
            prob.options[key] = val
    return prob


def _oracle_cfg(opts: dict) -> OracleConfig:
    try:
        return OracleConfig(
            restarts=int(opts.get("restarts", 4)),
            seed=int(opts.get("seed", 0)),
            method=str(opts.get("method", "fixed_point")),
            max_iters=int(opts.get("max_iters", 200_000)),
        )
    except (HardyDomainError, TypeError, ValueError) as exc:
        raise ProblemError(f"options: {exc}") from None


def _problem_echo(prob: Problem) -> dict:
    return {
        "kind": prob.spec.kind,
        "params": dict(prob.spec.params),
        "p": prob.exponents.p,
        "q": prob.exponents.q,
        "N": prob.spec.N,
    }


# ---------------------------------------------------------------- commands


def cmd_bound(args, out) -> int:
    prob = problem_from_args(args)
    opts = prob.options
    want_oracle = args.oracle or bool(opts.get("oracle", False))
    report = build_report(
        prob.spec,
        prob.exponents,
        m_max=int(opts.get("m", DEFAULT_M_MAX)),
        tol=float(opts.get("tol", DEFAULT_TOL)),
        oracle_cfg=_oracle_cfg(opts) if want_oracle else None,
        weighted_inner_sum=bool(args.weighted_inner_sum or opts.get("weighted_inner_sum", False)),
    )
    body = report.to_dict()
    # inputs live under "problem"; everything else computed carries a method label
    echo = _problem_echo(prob)
    echo["p_star"] = body.pop("p_star")
    echo["truncation_used"] = body.pop("truncation_used")
    del body["p"], body["q"]
    body = {"problem": echo, **body}
    body["closed_form"] = closed_forms(prob.spec, prob.exponents)
    if prob.truncation_trace:
        body["truncation_trace"] = [
            {"N": n, "B": {"value": b, "method": "truncated-sum"}, "delta_1": {"value": d, "method": "refinement"}}
            for n, b, d in prob.truncation_trace
        ]
    out.write(dumps(body) + "\n")
    if not report.residuals["consistent"]:
        print("error: a lower bound exceeds an upper bound", file=sys.stderr)
        return EXIT_INVARIANT
    if report.residuals["delta_status"] == "diverged" or report.residuals.get("oracle_converged") is False:
        print("warning: an iteration did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_refine(args, out) -> int:
    prob = problem_from_args(args)
    opts = prob.options
    m_max = int(opts.get("m", DEFAULT_M_MAX))
    if m_max < 1:
        raise ProblemError("--m must be >= 1")
    rows, status = refinement_table(
        prob.spec,
        prob.exponents,
        m_max=m_max,
        tol=float(opts.get("tol", DEFAULT_TOL)),
        weighted_inner_sum=bool(args.weighted_inner_sum or opts.get("weighted_inner_sum", False)),
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "delta_m", "delta_tilde_m", "delta_bar_m", "delta_index", "k_tilde", "k_bar"])
    for r in rows:
        w.writerow([r.m, _fmt(r.delta), _fmt(r.delta_tilde), _fmt(r.delta_bar), r.delta_index, r.k_tilde, r.k_bar])
    out.write(buf.getvalue())
    deltas = [r.delta for r in rows]
    if any(b > a + 1e-10 for a, b in zip(deltas, deltas[1:])):
        print("error: delta_m increased", file=sys.stderr)
        return EXIT_INVARIANT
    if status == "diverged":
        print("warning: upper iterate diverged", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def cmd_oracle(args, out) -> int:
    prob = problem_from_args(args)
    cfg = _oracle_cfg(prob.options)
    res = maximize_quotient(prob.spec, prob.exponents, cfg)
    mono = check_maximizer_monotone(res.x_star, prob.spec, prob.exponents)
    body = {
        "problem": _problem_echo(prob),
        "A_est": {"value": res.A_est, "method": ORACLE},
        "oracle_method": res.method,
        "seed": cfg.seed,
        "restarts": cfg.restarts,
        "converged": res.converged,
        "best_restart": res.best_restart,
        "restart_values": [{"value": v, "method": ORACLE} for v in res.restart_values],
        "monotone": {
            "passed": mono.passed,
            "first_violation": mono.first_violation,
            "boundary_warnings": list(mono.boundary_warnings),
        },
        # normalised so that H x(N) = 1
        "x_star": {"value": list(res.x_star.normalized().x), "method": ORACLE},
    }
    out.write(dumps(body) + "\n")
    if not mono.passed:
        print(f"error: x_n / v_hat_n increases at n = {mono.first_violation}", file=sys.stderr)
        return EXIT_INVARIANT
    if not res.converged:
        print("warning: oracle hit max_iters; reporting best so far", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_example(args, out) -> int:
    from . import selftest

    body = selftest.example(args.name)
    out.write(dumps(body) + "\n")
    return EXIT_OK if body["all_within_tolerance"] else EXIT_INVARIANT


def cmd_selftest(args, out) -> int:
    from . import selftest

    results = selftest.run(inject=args.inject_fault, quick=args.quick)
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}\n")
    failed = [r.name for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _problem_flags(sp, oracle_flags=False):
    sp.add_argument("problem", nargs="?", help="JSON problem file")
    sp.add_argument("--family", choices=("geometric", "bliss"))
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--d", type=float)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--N", type=int, default=64)
    sp.add_argument("--m", type=int, help="max refinement steps")
    sp.add_argument("--tol", type=float, help="early-stop tolerance on delta_m")
    sp.add_argument("--weighted-inner-sum", action="store_true", help="use u inside the lower iterate")
    sp.add_argument("-o", "--output", help="write to this file instead of stdout")
    if oracle_flags:
        sp.add_argument("--seed", type=int)
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--method", choices=METHODS)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bound", help="two-sided bounds on the optimal constant")
    _problem_flags(sp, oracle_flags=True)
    sp.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("refine", help="refinement trace as CSV")
    _problem_flags(sp)
    sp.set_defaults(func=cmd_refine)

    sp = sub.add_parser("oracle", help="maximise the Hardy quotient directly")
    _problem_flags(sp, oracle_flags=True)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("example", help="reproduce a built-in example")
    sp.add_argument("name", choices=("geometric", "bliss"))
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_example)

    sp = sub.add_parser("selftest", help="run the invariant suite")
    sp.add_argument("--inject-fault", choices=("factor",), help="deliberately break a component")
    sp.add_argument("--quick", action="store_true", help="fewer random instances")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_selftest)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    out = open(args.output, "w", encoding="utf-8") if getattr(args, "output", None) else sys.stdout
    try:
        return args.func(args, out)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
