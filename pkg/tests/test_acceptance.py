"""Release criteria, each run at its stated tolerance and time budget.

Every criterion records one PASS/FAIL line; the lines are printed at the end
of the pytest run (see ``conftest.py``) and by ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from hardybounds.core import explicit_weights, validate_exponents
from hardybounds.factors import k, tilde_k
from hardybounds.families import BlissFamily, GeometricFamily, bliss_weights, construct_u_from_v, geometric_weights
from hardybounds.intervals import extend_zero, restrict
from hardybounds.operators import compute_B, quotient
from hardybounds.oracle import check_maximizer_monotone, eigen_check_p2q2, maximize_quotient
from hardybounds.refine import delta_lower, delta_upper

RESULTS = {}


class Criterion:
    def __init__(self, number, budget):
        self.number = number
        self.budget = budget
        self.failures = []
        self.notes = []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)
        return ok

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if exc is not None:
            self.failures.append(f"raised {exc_type.__name__}: {exc}")
        self.check(elapsed < self.budget, f"runtime {elapsed:.2f}s over the {self.budget:g}s budget")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures) if self.failures else "; ".join(self.notes)
        RESULTS[self.number] = f"criterion {self.number}: {status} ({elapsed:.2f}s) {detail}"
        print(RESULTS[self.number])
        if exc is None:
            assert not self.failures, RESULTS[self.number]
        return False


def _sandwich_instance(rng):
    N = int(rng.integers(1, 11))
    p = rng.uniform(1.1, 5.0)
    q = rng.uniform(1.1, 5.0)
    p, q = min(p, q), max(p, q)
    u = rng.uniform(0.1, 1.0, N)
    v = rng.uniform(0.1, 1.0, N)
    return explicit_weights(u, v), validate_exponents(p, q)


def test_criterion_1_factor_values():
    with Criterion(1, 1.0) as c:
        k22 = k(validate_exponents(2, 2))
        k24 = k(validate_exponents(2, 4))
        # B(1, 3) by 8-point Gauss-Legendre quadrature of (1 - x)^2 on [0, 1], exact for this degree
        nodes, weights = np.polynomial.legendre.leggauss(8)
        b13 = float(np.sum(weights * (1 - (nodes + 1) / 2) ** 2) / 2)
        oracle = (1.0 / b13) ** 0.25
        c.check(abs(k22 - 2.0) <= 1e-12, f"|k(2,2) - 2| = {abs(k22 - 2):.2e}")
        c.check(abs(k24 - oracle) <= 1e-10, f"|k(2,4) - (1/B(1,3))^(1/4)| = {abs(k24 - oracle):.2e}")
        grid = np.linspace(1.05, 10.0, 50)
        bad = sum(
            1 for p in grid for q in grid if q >= p and k(validate_exponents(p, q)) > tilde_k(validate_exponents(p, q))
        )
        c.check(bad == 0, f"{bad} grid violations of k <= k~")
        c.notes.append(f"k(2,2)={k22:.15g}, k(2,4)={k24:.15g}, 0 grid violations")


def test_criterion_2_geometric_example():
    with Criterion(2, 5.0) as c:
        e = validate_exponents(2, 2)
        f = GeometricFamily(0.5, 1.0)
        spec = geometric_weights(f, 400)
        B = compute_B(spec, e)
        d1 = delta_upper(spec, e, m_max=1).values[0]
        low = delta_lower(spec, e)
        A = maximize_quotient(spec, e).A_est
        target_A = 2 + math.sqrt(2)
        c.check(2 - 1e-6 <= B <= 2, f"B = {B!r} outside [2 - 1e-6, 2]")
        c.check(abs(d1 - target_A) <= 1e-2, f"delta_1 = {d1}")
        c.check(abs(low.delta_tilde - math.sqrt(6)) <= 1e-2, f"delta~_1 = {low.delta_tilde}")
        c.check(abs(low.delta_bar - math.sqrt(6)) <= 1e-2, f"delta-bar_1 = {low.delta_bar}")
        c.check(abs(A - target_A) <= 1e-2, f"oracle A = {A}")
        c.check(B < low.delta_tilde < A <= d1 < 2 * B, "ordering B < delta~_1 < A <= delta_1 < 2B broken")
        c.notes.append(f"B={B:.15g} d~1={low.delta_tilde:.6f} db1={low.delta_bar:.6f} A={A:.6f} d1={d1:.6f}")


def test_criterion_3_bliss_trend():
    with Criterion(3, 30.0) as c:
        e = validate_exponents(2, 4)
        N = 4000
        f = BlissFamily(e, c=1.0)
        spec = bliss_weights(f, N)
        kk = k(e)
        B = compute_B(spec, e)
        c.check(1 - 1e-3 <= B <= 1, f"B = {B!r} outside [1 - 1e-3, 1]")
        qs = [quotient(f.extremal(N, d), spec, e) for d in (1e2, 1e3, 1e4)]
        ratios = ", ".join(f"{qv / kk:.4f}" for qv in qs)
        c.check(all(b > a for a, b in zip(qs, qs[1:])), f"extremal quotient/k not increasing in d: {ratios}")
        c.check(max(qs) >= 0.97 * kk, f"best extremal quotient/k = {max(qs) / kk:.4f} < 0.97")
        d1 = delta_upper(spec, e, m_max=1).values[0]
        c.check(d1 <= 3**0.75 + 1e-3, f"delta_1 = {d1} > 3^(3/4) + 1e-3")
        c.notes.append(f"B={B:.9f} quotient/k={ratios} delta_1={d1:.6f}")


def test_criterion_4_sandwich_property():
    with Criterion(4, 120.0) as c:
        rng = np.random.default_rng(4)
        worst = {}
        for _ in range(1000):
            spec, e = _sandwich_instance(rng)
            B = compute_B(spec, e)
            low = delta_lower(spec, e)
            A = maximize_quotient(spec, e).A_est
            d = delta_upper(spec, e, m_max=20, tol=0.0).values
            links = {
                "B<=lower": max(low.delta_tilde, low.delta_bar) - B,
                "lower<=A": A - max(low.delta_tilde, low.delta_bar),
                "A<=delta_m": min(d) - A,
                "delta_m<=delta_1": d[0] - min(d),
                "delta_1<=tk*B": tilde_k(e) * B - d[0],
                "delta non-increasing": min([a - b for a, b in zip(d, d[1:])], default=0.0),
            }
            for name, slack in links.items():
                worst[name] = min(worst.get(name, math.inf), slack)
        for name, slack in worst.items():
            c.check(slack >= -1e-9, f"link {name} slack {slack:.3e}")
        tight = min(worst, key=worst.get)
        c.notes.append(f"1000 instances, smallest slack {worst[tight]:.2e} at {tight}")


def test_criterion_5_eigen_certificate():
    with Criterion(5, 60.0) as c:
        rng = np.random.default_rng(5)
        e = validate_exponents(2, 2)
        worst, fails = 0.0, 0
        for _ in range(100):
            N = int(rng.integers(1, 51))
            spec = explicit_weights(rng.uniform(0.1, 1.0, N), rng.uniform(0.1, 1.0, N))
            res = maximize_quotient(spec, e)
            lam = eigen_check_p2q2(spec, e=e)
            worst = max(worst, abs(res.A_est - lam) / lam)
            fails += not check_maximizer_monotone(res.x_star, spec, e).passed
        c.check(worst <= 1e-8, f"max relative gap {worst:.2e}")
        c.check(fails == 0, f"{fails} maximizers fail the monotonicity check")
        c.notes.append(f"max relative gap {worst:.2e}, 0 monotonicity failures")


def test_criterion_6_interval_laws():
    with Criterion(6, 60.0) as c:
        rng = np.random.default_rng(6)
        worst_r, worst_x, worst_B = -math.inf, 0.0, 0.0
        for _ in range(200):
            spec, e = _sandwich_instance(rng)
            longer = explicit_weights(
                np.concatenate([spec.u, rng.uniform(0.1, 1.0, 4)]), np.concatenate([spec.v, rng.uniform(0.1, 1.0, 4)])
            )
            A_N = maximize_quotient(restrict(longer, spec.N), e).A_est
            A_long = maximize_quotient(longer, e).A_est
            worst_r = max(worst_r, A_N - A_long)
            ext = extend_zero(spec, spec.N + int(rng.integers(1, 6)), v_fill=rng.uniform(0.1, 2.0))
            worst_x = max(worst_x, abs(A_N - maximize_quotient(ext, e).A_est))
            worst_B = max(worst_B, abs(compute_B(spec, e) - compute_B(ext, e)))
        c.check(worst_r <= 1e-9, f"A_N - A_(N+4) reaches {worst_r:.2e}")
        c.check(worst_x <= 1e-8, f"|A_N - A_N'| reaches {worst_x:.2e}")
        c.check(worst_B <= 1e-12, f"|B_N - B_N'| reaches {worst_B:.2e}")
        c.notes.append(f"max A_N - A_(N+4) {worst_r:.1e}, extension drift {worst_x:.1e}, B drift {worst_B:.1e}")


def test_criterion_7_construction_bound():
    with Criterion(7, 60.0) as c:
        rng = np.random.default_rng(7)
        worst = -math.inf
        for _ in range(50):
            p = rng.uniform(1.1, 5.0)
            q = rng.uniform(1.1, 5.0)
            e = validate_exponents(min(p, q), max(p, q))
            v = rng.uniform(0.1, 1.0, 256)
            C = rng.uniform(0.1, 10.0)
            spec = construct_u_from_v(v, e, C, N=256)
            A = maximize_quotient(spec, e).A_est
            worst = max(worst, A - (k(e) * C + 1e-6))
        c.check(worst <= 0.0, f"A exceeds k C + 1e-6 by {worst:.2e}")
        c.notes.append(f"largest A - k C = {worst + 1e-6:.2e}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
