import math

import numpy as np
import pytest

from conftest import random_instance
from hardybounds.core import HardyDomainError, explicit_weights, validate_exponents
from hardybounds.factors import tilde_k
from hardybounds.families import BlissFamily, GeometricFamily, bliss_weights, geometric_weights
from hardybounds.operators import OperatorKind, compute_B, sup_operator
from hardybounds.oracle import maximize_quotient
from hardybounds.refine import (
    default_k_grid,
    delta_lower,
    delta_upper,
    iterate_lower,
    iterate_upper,
    refinement_table,
    seed_lower,
    seed_upper,
)


def brute_lower_step(y, u, v, e, weighted):
    N = len(y)
    H = np.cumsum(y)
    vh = v ** (1.0 - e.p_star)
    w = u if weighted else np.ones(N)
    out = np.array([vh[n] * sum(w[i] * H[i] ** (e.q - 1.0) for i in range(n, N)) ** (e.p_star - 1.0) for n in range(N)])
    return out / out.sum()


def brute_upper_step(x, u, v, e):
    N = len(x)
    H = np.cumsum(x)
    vh = v ** (1.0 - e.p_star)
    out = np.array([vh[n] * sum(u[i] * H[i] ** (e.q / e.p_star) for i in range(n, N)) ** (e.p_star / e.q) for n in range(N)])
    return out / out.sum()


def test_seed_upper_unit_weights():
    e = validate_exponents(2, 2)
    n = np.arange(1, 51)
    x = seed_upper(explicit_weights(np.ones(50), np.ones(50)), e).x
    assert np.allclose(x, np.sqrt(n) - np.sqrt(n - 1), rtol=1e-13)


def test_seed_upper_prefix_is_power_of_vhat_prefix():
    e = validate_exponents(2, 2)
    spec = geometric_weights(GeometricFamily(0.5, 1.0), 60)
    x = seed_upper(spec, e)
    ref = np.cumsum(spec.v_hat(e)) ** e.alpha
    assert np.allclose(x.prefix, ref, rtol=1e-12)
    n = np.arange(1, 61)
    assert np.allclose(x.prefix, np.sqrt(2.0 ** (n + 1) - 2.0), rtol=1e-12)


def test_seed_upper_bliss():
    e = validate_exponents(2, 4)
    n = np.arange(1, 3001, dtype=float)
    x = seed_upper(bliss_weights(BlissFamily(e), 3000), e).x
    assert np.allclose(x, n ** (2 / 3) - (n - 1) ** (2 / 3), rtol=1e-10)


def test_iterate_upper_single_point():
    e = validate_exponents(1.7, 2.9)
    spec = explicit_weights([0.3], [2.0])
    assert iterate_upper([5.0], spec, e).x[0] == pytest.approx(1.0)


def test_iterate_upper_matches_brute(rng):
    for _ in range(30):
        spec, e = random_instance(rng, N_max=8)
        x = rng.uniform(0.05, 1.0, spec.N)
        got = iterate_upper(x, spec, e).x
        assert np.allclose(got, brute_upper_step(x, spec.u, spec.v, e), rtol=1e-12)


def test_delta_upper_non_increasing(rng):
    for _ in range(200):
        spec, e = random_instance(rng, N_max=12)
        d = delta_upper(spec, e, m_max=20, tol=0.0).values
        assert all(b <= a + 1e-10 for a, b in zip(d, d[1:]))


def test_delta_upper_geometric_constant():
    e = validate_exponents(2, 2)
    f = GeometricFamily(0.5, 1.0)
    tr = delta_upper(geometric_weights(f, 400), e, m_max=3, tol=-1.0)
    assert len(tr) == 3
    assert abs(tr.values[0] - f.delta1()) <= 1e-2
    assert tr.values[1] == pytest.approx(tr.values[0], abs=1e-8)
    assert tr.values[2] == pytest.approx(tr.values[0], abs=1e-8)


def test_delta_upper_bliss_bound():
    e = validate_exponents(2, 4)
    f = BlissFamily(e)
    d1 = delta_upper(bliss_weights(f, 2000), e, m_max=1).values[0]
    assert d1 <= 3**0.75
    assert f.delta1_bound() == pytest.approx(3**0.75, rel=1e-15)


def test_delta_upper_single_point():
    e = validate_exponents(2, 3)
    tr = delta_upper(explicit_weights([1.0], [1.0]), e, m_max=5, tol=-1.0)
    assert tr.values == pytest.approx([1.0] * 5)
    assert tr.indices == [1] * 5


def test_delta_upper_stops_early():
    e = validate_exponents(2, 2)
    tr = delta_upper(geometric_weights(GeometricFamily(0.5, 1.0), 400), e)
    assert tr.status == "converged" and len(tr) == 2
    # a shorter truncation keeps improving slowly
    tr = delta_upper(geometric_weights(GeometricFamily(0.5, 1.0), 100), e, m_max=8)
    assert tr.status == "improving" and len(tr) == 8
    with pytest.raises(HardyDomainError):
        delta_upper(explicit_weights([1.0], [1.0]), e, m_max=0)


def test_literal_first_term_option(rng):
    # with p = q both first-term operators coincide
    spec, _ = random_instance(rng, N_max=8)
    e = validate_exponents(2.5, 2.5)
    a = delta_upper(spec, e, m_max=1).values[0]
    b = delta_upper(spec, e, m_max=1, delta1_kind=OperatorKind.II).values[0]
    assert a == pytest.approx(b, rel=1e-12)
    # with p < q the literal form can undercut later terms
    e = validate_exponents(2, 4)
    x = seed_upper(spec, e)
    lit = delta_upper(spec, e, m_max=1, delta1_kind=OperatorKind.II).values[0]
    assert lit == pytest.approx(sup_operator(OperatorKind.II, x, spec, e).value ** 0.5, rel=1e-12)


def test_seed_lower_cases():
    e = validate_exponents(2, 2)
    f = GeometricFamily(0.5, 1.0)
    spec = geometric_weights(f, 30)
    assert np.array_equal(seed_lower(spec, e, 30).x, spec.v_hat(e))
    for k in (1, 5, 17):
        y = seed_lower(spec, e, k)
        n = np.arange(1, 31)
        ref = (f.gamma ** -np.minimum(n, k) - 1.0) / (f.b * (1.0 - f.gamma))
        assert np.allclose(y.prefix, ref, rtol=1e-13)
    e = validate_exponents(2, 4)
    y = seed_lower(bliss_weights(BlissFamily(e), 40), e, 9)
    assert np.array_equal(y.prefix, np.minimum(np.arange(1, 41), 9).astype(float))
    with pytest.raises(HardyDomainError):
        seed_lower(spec, e, 0)


@pytest.mark.parametrize("weighted", [False, True])
def test_iterate_lower_matches_brute(rng, weighted):
    for _ in range(20):
        spec, e = random_instance(rng, N_max=6)
        spec = explicit_weights(rng.uniform(0.1, 2, 6), rng.uniform(0.1, 2, 6))
        k = int(rng.integers(1, 7))
        y = seed_lower(spec, e, k)
        got = iterate_lower(y, spec, e, weighted).x
        assert np.allclose(got, brute_lower_step(np.asarray(y.x), spec.u, spec.v, e, weighted), rtol=1e-12)


def test_iterate_lower_single_point():
    e = validate_exponents(1.5, 2.5)
    spec = explicit_weights([0.4], [3.0])
    y = seed_lower(spec, e, 1)
    assert iterate_lower(y, spec, e).x[0] == pytest.approx(1.0)


def test_delta_lower_geometric():
    e = validate_exponents(2, 2)
    f = GeometricFamily(0.5, 1.0)
    spec = geometric_weights(f, 400)
    low = delta_lower(spec, e, k_grid=range(1, 201))
    assert abs(low.delta_tilde - math.sqrt(6)) <= 1e-2
    assert abs(low.delta_bar - math.sqrt(6)) <= 1e-2
    full = delta_lower(spec, e)
    assert full.delta_bar >= low.delta_bar


def test_delta_lower_bliss_at_least_one():
    e = validate_exponents(2, 4)
    low = delta_lower(bliss_weights(BlissFamily(e), 2000), e)
    assert low.delta_tilde >= 1.0 and low.delta_bar >= 1.0


def test_delta_lower_single_point():
    e = validate_exponents(2, 3)
    low = delta_lower(explicit_weights([0.6], [1.7]), e)
    ref = 0.6 ** (1 / 3) * 1.7 ** (-1 / 2)
    assert low.delta_tilde == pytest.approx(ref, rel=1e-13)
    assert low.delta_bar == pytest.approx(ref, rel=1e-13)


def test_default_grid():
    assert default_k_grid(10) == list(range(1, 11))
    g = default_k_grid(1000)
    assert g[0] == 1 and g[-1] == 1000 and g[-2] == 512


def test_grid_refinement_close_to_full_scan():
    e = validate_exponents(2, 3)
    spec = explicit_weights(np.linspace(1.0, 0.1, 700) ** 3, np.linspace(0.5, 2.0, 700))
    coarse = delta_lower(spec, e)
    full = delta_lower(spec, e, k_grid=range(1, 701))
    assert coarse.delta_bar <= full.delta_bar + 1e-15
    assert coarse.delta_bar >= full.delta_bar * (1 - 1e-3)


def test_lower_estimates_are_lower_bounds(rng):
    for weighted in (False, True):
        for _ in range(40):
            spec, e = random_instance(rng, N_max=10)
            A = maximize_quotient(spec, e).A_est
            for m in (1, 2, 4):
                low = delta_lower(spec, e, m=m, weighted_inner_sum=weighted)
                assert max(low.delta_tilde, low.delta_bar) <= A * (1 + 1e-9)


def test_half_line_warning_for_unweighted_iterate():
    e = validate_exponents(2, 2)
    spec = geometric_weights(GeometricFamily(0.5, 1.0), 50)
    assert delta_lower(spec, e, m=2).warnings
    assert not delta_lower(spec, e, m=2, weighted_inner_sum=True).warnings
    assert not delta_lower(spec, e, m=1).warnings


def test_sandwich(rng):
    for _ in range(100):
        spec, e = random_instance(rng)
        B = compute_B(spec, e)
        low = delta_lower(spec, e)
        A = maximize_quotient(spec, e).A_est
        d = delta_upper(spec, e, m_max=20, tol=0.0).values
        chain = [B, max(low.delta_tilde, low.delta_bar), A, min(d), d[0], tilde_k(e) * B]
        assert all(b >= a - 1e-9 * max(1.0, a) for a, b in zip(chain, chain[1:]))


def test_refinement_table_rows():
    e = validate_exponents(2, 2)
    spec = geometric_weights(GeometricFamily(0.5, 1.0), 100)
    rows, status = refinement_table(spec, e, m_max=1)
    assert len(rows) == 1 and rows[0].m == 1 and status == "converged"
    rows, _ = refinement_table(spec, e, m_max=4, tol=-1.0)
    assert [r.m for r in rows] == [1, 2, 3, 4]
