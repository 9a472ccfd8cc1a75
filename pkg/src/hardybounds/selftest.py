"""Built-in example reproductions and the invariant suite behind ``hardy selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import explicit_weights, validate_exponents
from .factors import beta, incomplete_beta, k, tilde_k
from .families import BlissFamily, GeometricFamily, bliss_weights, geometric_weights
from .intervals import extend_zero, restrict
from .operators import compute_B, quotient
from .oracle import OracleConfig, check_maximizer_monotone, eigen_check_p2q2, maximize_quotient
from .refine import delta_lower, delta_upper


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _row(computed, target, tol, ok, method):
    return {"computed": {"value": computed, "method": method}, "target": {"value": target, "method": "closed-form"},
            "tolerance": tol, "ok": bool(ok)}


def example(name: str, N: Optional[int] = None) -> dict:
    """Compare computed quantities of a built-in family with its closed forms."""
    if name == "geometric":
        e = validate_exponents(2, 2)
        f = GeometricFamily(0.5, 1.0)
        N = N or 400
        spec = geometric_weights(f, N)
        B = compute_B(spec, e)
        d1 = delta_upper(spec, e, m_max=1).values[0]
        low = delta_lower(spec, e)
        A = maximize_quotient(spec, e).A_est
        rows = {
            "B": _row(B, f.B(), 1e-6, f.B() - 1e-6 <= B <= f.B(), "truncated-sum"),
            "delta_1": _row(d1, f.delta1(), 1e-2, abs(d1 - f.delta1()) <= 1e-2, "refinement"),
            "delta_tilde_1": _row(low.delta_tilde, f.delta_lower1(), 1e-2, abs(low.delta_tilde - f.delta_lower1()) <= 1e-2, "refinement"),
            "delta_bar_1": _row(low.delta_bar, f.delta_lower1(), 1e-2, abs(low.delta_bar - f.delta_lower1()) <= 1e-2, "refinement"),
            "A": _row(A, f.A(), 1e-2, abs(A - f.A()) <= 1e-2, "oracle"),
        }
        chain = B < low.delta_tilde < A <= d1 < 2 * B
        params = {"gamma": f.gamma, "b": f.b, "p": 2.0, "q": 2.0, "N": N}
        extra = {"ordering_B<dt<A<=d1<2B": chain}
    elif name == "bliss":
        e = validate_exponents(2, 4)
        f = BlissFamily(e)
        N = N or 4000
        spec = bliss_weights(f, N)
        B = compute_B(spec, e)
        d1 = delta_upper(spec, e, m_max=1).values[0]
        low = delta_lower(spec, e)
        kk = k(e)
        ratios = {}
        for d in (1e2, 1e3, 1e4):
            ratios[f"{d:g}"] = quotient(f.extremal(N, d), spec, e) / kk
        rows = {
            "B": _row(B, 1.0, 1e-3, 1.0 - 1e-3 <= B <= 1.0, "truncated-sum"),
            "delta_1": _row(d1, f.delta1_bound(), 1e-3, d1 <= f.delta1_bound() + 1e-3, "refinement"),
            "delta_tilde_1": _row(low.delta_tilde, 1.0, 0.0, low.delta_tilde >= 1.0, "refinement"),
            "delta_bar_1": _row(low.delta_bar, 1.0, 0.0, low.delta_bar >= 1.0, "refinement"),
            "best_extremal_over_k": _row(max(ratios.values()), 0.97, 0.0, max(ratios.values()) >= 0.97, "truncated-sum"),
        }
        vals = list(ratios.values())
        params = {"p": 2.0, "q": 4.0, "c": 1.0, "N": N}
        extra = {
            "extremal_quotient_over_k": ratios,
            # at this N the d = 1e4 sequence is still far from its limit; see the README
            "increasing_in_d": all(b > a for a, b in zip(vals, vals[1:])),
        }
    else:
        raise ValueError(f"unknown example {name!r}")
    ok = all(r["ok"] for r in rows.values()) and extra.get("ordering_B<dt<A<=d1<2B", True)
    return {"example": name, "params": params, "quantities": rows, **extra, "all_within_tolerance": ok}


def _random_instance(rng, N_max=10):
    N = int(rng.integers(1, N_max + 1))
    p = rng.uniform(1.1, 5.0)
    q = rng.uniform(p, 5.0)
    u = rng.uniform(0.05, 1.0, N) * np.exp(rng.normal(0.0, 1.0, N))
    v = rng.uniform(0.05, 1.0, N) * np.exp(rng.normal(0.0, 1.0, N))
    return explicit_weights(u, v), validate_exponents(p, q)


def sandwich_gaps(spec, e, m_max=20, weighted_inner_sum=False, oracle_cfg=None) -> dict:
    """Slack at every link of ``B <= lower <= A <= delta_m <= delta_1 <= k~ B`` (negative = violated)."""
    B = compute_B(spec, e)
    trace = delta_upper(spec, e, m_max=m_max, tol=0.0)
    low = delta_lower(spec, e, weighted_inner_sum=weighted_inner_sum)
    lower = max(low.delta_tilde, low.delta_bar)
    A = maximize_quotient(spec, e, oracle_cfg).A_est
    d = trace.values
    rel = lambda a, b: (b - a) / max(1.0, abs(b))  # noqa: E731
    return {
        "B<=lower": rel(B, lower),
        "lower<=A": rel(lower, A),
        "A<=delta_m": rel(A, min(d)),
        "delta_m<=delta_1": rel(min(d), d[0]),
        "delta_1<=tk_B": rel(d[0], tilde_k(e) * B),
        "delta_nonincreasing": min([rel(b, a) for a, b in zip(d, d[1:])], default=0.0),
    }


def _check(name, fn) -> CheckResult:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported by name
        return CheckResult(name, False, f"raised {type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def run(inject: Optional[str] = None, quick: bool = False, seed: int = 0) -> list:
    """Every invariant check, in a fixed order. ``inject='factor'`` swaps in a broken k."""
    k_fn: Callable = k
    if inject == "factor":
        k_fn = lambda e: 1.01 * tilde_k(e)  # noqa: E731
    elif inject is not None:
        raise ValueError(f"unknown fault {inject!r}")
    n_rand = 20 if quick else 100
    rng = np.random.default_rng(seed)
    results = []

    def conjugacy():
        worst = 0.0
        for _ in range(200):
            p = rng.uniform(1.01, 20.0)
            e = validate_exponents(p, rng.uniform(p, 40.0))
            worst = max(worst, abs(1.0 / e.p + 1.0 / e.p_star - 1.0))
        return worst <= 1e-14, f"max |1/p + 1/p* - 1| = {worst:.2e}"

    def factor_values():
        a = abs(k_fn(validate_exponents(2, 2)) - 2.0)
        b = abs(k_fn(validate_exponents(2, 4)) - 3.0**0.25)
        return a <= 1e-12 and b <= 1e-10, f"|k(2,2)-2| = {a:.1e}, |k(2,4)-3^(1/4)| = {b:.1e}"

    def factor_grid():
        grid = np.linspace(1.05, 10.0, 50)
        bad = [(p, q) for p in grid for q in grid if q >= p
               if k_fn(validate_exponents(p, q)) > tilde_k(validate_exponents(p, q)) + 1e-12]
        return not bad, f"{len(bad)} grid points with k > k~" + (f", first at p={bad[0][0]:.3g}, q={bad[0][1]:.3g}" if bad else "")

    def beta_symmetry():
        worst = 0.0
        for _ in range(200):
            a, b, x = rng.uniform(0.2, 20.0), rng.uniform(0.2, 20.0), rng.uniform(0.0, 1.0)
            s = incomplete_beta(a, b, x) + incomplete_beta(b, a, 1.0 - x)
            worst = max(worst, abs(s / beta(a, b) - 1.0))
        return worst <= 1e-10, f"max relative symmetry error {worst:.1e}"

    def geometric():
        ex = example("geometric")
        bad = [key for key, r in ex["quantities"].items() if not r["ok"]]
        return ex["all_within_tolerance"], "all within tolerance" if not bad else f"off: {bad}"

    def bliss():
        ex = example("bliss", N=2000)
        bad = [key for key, r in ex["quantities"].items() if not r["ok"]]
        return ex["all_within_tolerance"], "B, delta_1 and lower bounds within tolerance" if not bad else f"off: {bad}"

    def sandwich(weighted):
        def fn():
            worst, where = math.inf, ""
            local = np.random.default_rng(seed + 1)
            cfg = OracleConfig(restarts=4, seed=seed)
            for _ in range(n_rand):
                spec, e = _random_instance(local)
                gaps = sandwich_gaps(spec, e, weighted_inner_sum=weighted, oracle_cfg=cfg)
                link = min(gaps, key=gaps.get)
                if gaps[link] < worst:
                    worst, where = gaps[link], link
            return worst >= -1e-9, f"{n_rand} instances, tightest link {where} slack {worst:.2e}"
        return fn

    def eigen():
        local = np.random.default_rng(seed + 2)
        e = validate_exponents(2, 2)
        worst, mono_fail = 0.0, 0
        for _ in range(max(10, n_rand // 5)):
            spec, _ = _random_instance(local, N_max=50)
            res = maximize_quotient(spec, e)
            lam = eigen_check_p2q2(spec, e=e)
            worst = max(worst, abs(res.A_est / lam - 1.0))
            mono_fail += not check_maximizer_monotone(res.x_star, spec, e).passed
        return worst <= 1e-8 and mono_fail == 0, f"max relative gap {worst:.1e}, {mono_fail} monotonicity failures"

    def intervals():
        local = np.random.default_rng(seed + 3)
        worst_ext, worst_B = 0.0, 0.0
        for _ in range(max(10, n_rand // 5)):
            spec, e = _random_instance(local, N_max=8)
            ext = extend_zero(spec, spec.N + 4)
            a0 = maximize_quotient(spec, e).A_est
            a1 = maximize_quotient(ext, e).A_est
            worst_ext = max(worst_ext, abs(a0 - a1))
            worst_B = max(worst_B, abs(compute_B(spec, e) - compute_B(ext, e)))
            if spec.N > 1:
                worst_ext = max(worst_ext, maximize_quotient(restrict(spec, spec.N - 1), e).A_est - a0)
        return worst_ext <= 1e-8 and worst_B <= 1e-12, f"A drift {worst_ext:.1e}, B drift {worst_B:.1e}"

    checks = [
        ("exponent_conjugacy", conjugacy),
        ("factor_values", factor_values),
        ("factor_grid_k_le_tilde_k", factor_grid),
        ("incomplete_beta_symmetry", beta_symmetry),
        ("example_geometric", geometric),
        ("example_bliss", bliss),
        ("sandwich[unweighted_inner_sum]", sandwich(False)),
        ("sandwich[weighted_inner_sum]", sandwich(True)),
        ("oracle_vs_eigen_p2q2", eigen),
        ("interval_laws", intervals),
    ]
    for name, fn in checks:
        results.append(_check(name, fn))
    return results
