import math

import mpmath
import numpy as np
import pytest

from hardybounds.core import HardyDomainError, validate_exponents
from hardybounds.factors import k
from hardybounds.families import (
    BlissFamily,
    GeometricFamily,
    bliss_weights,
    construct_u_from_v,
    construction_suffix,
    family_from_name,
    geometric_weights,
)
from hardybounds.operators import compute_B, quotient
from hardybounds.oracle import maximize_quotient
from hardybounds.refine import delta_lower, delta_upper


def test_geometric_weights_values():
    spec = geometric_weights(GeometricFamily(0.5, 1.0), 3)
    assert spec.u.tolist() == [0.5, 0.25, 0.125] == spec.v.tolist()
    with pytest.raises(HardyDomainError):
        GeometricFamily(1.0)
    with pytest.raises(HardyDomainError):
        GeometricFamily(0.5, 0.0)


@pytest.mark.parametrize("gamma", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
@pytest.mark.parametrize("b", [0.5, 1.0, 4.0])
def test_geometric_closed_form_chain(gamma, b):
    f = GeometricFamily(gamma, b)
    assert f.B() < f.delta_lower1() < f.A() < 2 * f.B()
    assert f.delta1() == f.A()


def test_geometric_closed_forms_by_substitution():
    f = GeometricFamily(0.5, 1.0)
    assert f.B() == 2.0
    assert f.A() == pytest.approx(2 + math.sqrt(2), rel=1e-15)
    assert f.delta_lower1() == pytest.approx(math.sqrt(6), rel=1e-15)


def test_geometric_maximizer_formula():
    f = GeometricFamily(0.25, 1.0)
    a = f.maximizer(5)
    assert a.tolist() == pytest.approx([1.0, 2 * 1.5, 4 * 2.0, 8 * 2.5, 16 * 3.0])


def test_geometric_closed_sums_match_summation():
    for gamma, b, p in [(0.5, 1.0, 2.0), (0.3, 4.0, 1.7), (0.9, 0.5, 3.0)]:
        e = validate_exponents(p, p)
        spec = geometric_weights(GeometricFamily(gamma, b), 120)
        vh = [mpmath.mpf(b * gamma**n) ** (1 - e.p_star) for n in range(1, 121)]
        ref_head = np.array([float(x) for x in np.cumsum(vh)])
        uu = [mpmath.mpf(gamma) ** n for n in range(1, 121)]
        ref_tail = np.array([float(sum(uu[i:])) for i in range(120)])
        assert np.allclose(spec.prefix_vhat(e), ref_head, rtol=1e-12)
        assert np.allclose(spec.suffix_u(e), ref_tail, rtol=1e-12)


def test_geometric_truncated_quantities():
    e = validate_exponents(2, 2)
    f = GeometricFamily(0.5, 1.0)
    spec = geometric_weights(f, 400)
    B = compute_B(spec, e)
    assert f.B() - 1e-6 <= B <= f.B()
    assert abs(delta_upper(spec, e, m_max=1).values[0] - f.delta1()) <= 1e-2
    low = delta_lower(spec, e)
    assert abs(low.delta_tilde - f.delta_lower1()) <= 1e-2
    assert abs(low.delta_bar - f.delta_lower1()) <= 1e-2


def test_bliss_weights_values():
    e = validate_exponents(2, 4)
    spec = bliss_weights(BlissFamily(e), 5)
    assert spec.u[0] == pytest.approx(0.75, rel=1e-15)
    n = np.arange(1, 6, dtype=float)
    assert np.allclose(spec.u, n**-2 - (n + 1) ** -2, rtol=1e-14)
    assert np.all(spec.v == 1.0)
    with pytest.raises(HardyDomainError):
        BlissFamily(validate_exponents(2, 2))


def test_bliss_u_keeps_digits_far_out():
    e = validate_exponents(2, 4)
    u = bliss_weights(BlissFamily(e), 10**7).u
    for n in (10**6, 5 * 10**6, 10**7):
        ref = mpmath.mpf(n) ** -2 - mpmath.mpf(n + 1) ** -2
        assert u[n - 1] == pytest.approx(float(ref), rel=1e-13)


def test_bliss_closed_forms():
    e = validate_exponents(2, 4)
    f = BlissFamily(e)
    assert f.B() == 1.0 and f.A() == k(e)
    assert abs(compute_B(bliss_weights(f, 2000), e) - 1.0) <= 1e-3


def test_bliss_extremal_formula():
    e = validate_exponents(2, 4)
    f = BlissFamily(e, c=1.5, d=30.0)
    x = f.extremal(200)
    n = np.arange(0, 201, dtype=float)
    H = 1.5 * n / (n + 30.0)  # r = 1
    assert np.allclose(x, np.diff(H), rtol=1e-12)
    e = validate_exponents(1.5, 4.0)
    f = BlissFamily(e, c=1.0, d=7.0)
    r = e.r
    H = n / (n**r + 7.0) ** (1 / r)
    assert np.allclose(f.extremal(200), np.diff(H), rtol=1e-11)


def test_bliss_trend_at_long_truncation():
    # with N far beyond d the truncation no longer masks the rise toward k as d grows
    e = validate_exponents(2, 4)
    kk = k(e)
    N = 400_000
    f = BlissFamily(e)
    spec = bliss_weights(f, N)
    ratios = []
    for d in (1e2, 1e3, 1e4):
        x = f.extremal(N, d)
        ratios.append(quotient(x, spec, e) / kk)
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert ratios[-1] >= 0.97


def test_construction_unit_v():
    e = validate_exponents(2, 2)
    v = np.ones(20)
    spec = construct_u_from_v(v, e, 1.0, v_next=1.0)
    n = np.arange(1, 21, dtype=float)
    assert np.allclose(spec.u, 1 / n - 1 / (n + 1), rtol=1e-14)
    assert spec.kind == "derived-from-v"


def test_construction_telescopes(rng):
    for _ in range(30):
        p = rng.uniform(1.2, 4.0)
        e = validate_exponents(p, rng.uniform(p, 5.0))
        N = int(rng.integers(1, 200))
        v = rng.uniform(0.1, 3.0, N)
        C = rng.uniform(0.2, 3.0)
        v_next = rng.uniform(0.1, 3.0)
        spec = construct_u_from_v(v, e, C, v_next=v_next)
        tail = np.cumsum(spec.u[::-1])[::-1]
        assert np.allclose(tail, construction_suffix(v, e, C, v_next), rtol=1e-12)


def test_construction_bounds(rng):
    for _ in range(20):
        p = rng.uniform(1.2, 4.0)
        e = validate_exponents(p, rng.uniform(p, 5.0))
        v = rng.uniform(0.1, 3.0, 12)
        C = rng.uniform(0.2, 3.0)
        for N in (3, 7, 12):
            spec = construct_u_from_v(v, e, C, N=N)
            assert compute_B(spec, e) <= C * (1 + 1e-12)
            assert maximize_quotient(spec, e).A_est <= k(e) * C + 1e-6


def test_summation_by_parts_comparison(rng):
    # suffix sums of a dominated by those of b, c increasing => sum a c <= sum b c
    e = validate_exponents(2, 3)
    for _ in range(100):
        N = int(rng.integers(1, 30))
        v = rng.uniform(0.1, 3.0, N)
        b = construct_u_from_v(v, e, 1.0).u
        a = b * rng.uniform(0.0, 1.0, N)
        c = np.cumsum(rng.uniform(0.0, 1.0, N))
        assert np.dot(a, c) <= np.dot(b, c) * (1 + 1e-12)


def test_family_from_name():
    s = family_from_name("geometric", 10, gamma=0.3, b=2.0)
    assert s.kind == "geometric" and s.N == 10
    s = family_from_name("bliss", 10, 2.0, 3.0, d=5.0)
    assert s.params["d"] == 5.0
    with pytest.raises(HardyDomainError):
        family_from_name("cauchy", 10)
