"""Universal factors of the basic upper estimate and the Beta functions behind them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Exponents, HardyDomainError

# below this r the equal-exponent limit is used for k
_EQUAL_BRANCH_R = 1e-9

_CF_MAX_ITER = 10000
_CF_EPS = 1e-16
_CF_FPMIN = 1e-300


def tilde_k(e: Exponents) -> float:
    """Classical factor ``(1 + q/p*)^(1/q) (1 + p*/q)^(1/p*)``."""
    ps, q = e.p_star, e.q
    return (1.0 + q / ps) ** (1.0 / q) * (1.0 + ps / q) ** (1.0 / ps)


def _equal_factor(p: float) -> float:
    ps = p / (p - 1.0)
    return p ** (1.0 / p) * ps ** (1.0 / ps)


def log_beta(a: float, b: float) -> float:
    if not (a > 0.0 and b > 0.0):
        raise HardyDomainError(f"Beta needs positive arguments, got a={a}, b={b}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a: float, b: float) -> float:
    """Complete Beta function via log-Gamma."""
    return math.exp(log_beta(a, b))


def k(e: Exponents) -> float:
    """Improved sharp factor ``(r / B(1/r, (q-1)/r))^(1/p - 1/q)``.

    Falls back to the equal-exponent limit ``p^(1/p) p*^(1/p*)`` when
    ``r < 1e-9``.  The power is taken in log space: ``B(1/r, .)`` underflows
    long before ``r`` gets that small.
    """
    r = e.r
    if r < _EQUAL_BRANCH_R:
        return _equal_factor(e.p)
    lb = log_beta(1.0 / r, (e.q - 1.0) / r)
    # 1/p - 1/q written without the cancelling difference
    return math.exp((e.q - e.p) / (e.p * e.q) * (math.log(r) - lb))


def _beta_cf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete Beta continued fraction did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if not (a > 0.0 and b > 0.0):
        raise HardyDomainError(f"incomplete Beta needs a, b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise HardyDomainError(f"incomplete Beta needs 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Unnormalised ``int_0^x s^(a-1) (1-s)^(b-1) ds``."""
    if not (a > 0.0 and b > 0.0):
        raise HardyDomainError(f"incomplete Beta needs a, b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise HardyDomainError(f"incomplete Beta needs 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    full = beta(a, b)
    if x == 1.0:
        return full
    log_front = a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        # stay unnormalised on this side so tiny values keep relative accuracy
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return full - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class FactorPair:
    tilde_k: float
    k: float
    exponents: Exponents


def factor_pair(e: Exponents) -> FactorPair:
    return FactorPair(tilde_k(e), k(e), e)
