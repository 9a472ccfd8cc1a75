"""Built-in weight families with known constants, and the u-from-v construction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import Exponents, HardyDomainError, TruncationPolicy, WeightSpec, validate_exponents


@dataclass(frozen=True)
class GeometricFamily:
    """``u_n = gamma^n``, ``v_n = b gamma^n`` (constant-rate birth-death chain).

    The closed forms below are for ``p = q = 2`` on the half line.
    """

    gamma: float
    b: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise HardyDomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.b > 0.0:
            raise HardyDomainError(f"b must be positive, got {self.b}")

    def B(self) -> float:
        return 1.0 / (math.sqrt(self.b) * (1.0 - self.gamma))

    def A(self) -> float:
        return 1.0 / (math.sqrt(self.b) * (1.0 - math.sqrt(self.gamma)))

    def delta1(self) -> float:
        return self.A()

    def delta_lower1(self) -> float:
        return math.sqrt(1.0 + self.gamma) / (math.sqrt(self.b) * (1.0 - self.gamma))

    def maximizer(self, N: int) -> np.ndarray:
        """``a_n = gamma^((1-n)/2) (n - (n-1) sqrt(gamma))``."""
        n = np.arange(1, N + 1, dtype=np.float64)
        return self.gamma ** ((1.0 - n) / 2.0) * (n - (n - 1.0) * math.sqrt(self.gamma))

    def maximizer_prefix(self, N: int) -> np.ndarray:
        """Closed form ``H a(n) = n gamma^((1-n)/2)``."""
        n = np.arange(1, N + 1, dtype=np.float64)
        return n * self.gamma ** ((1.0 - n) / 2.0)


def _pow_minus_one(base, log_base, n):
    # base**n - 1: expm1 near zero, a plain power elsewhere (exact for dyadic bases)
    with np.errstate(over="ignore"):
        return np.where(np.abs(n * log_base) < 1.0, np.expm1(n * log_base), np.power(base, n) - 1.0)


def _geometric_sums(f: GeometricFamily):
    def sums(spec: WeightSpec, e: Exponents):
        N = spec.N
        n = np.arange(1, N + 1, dtype=np.float64)
        lg = math.log(f.gamma)
        # v_hat_i = b^(1-p*) rho^i with rho = gamma^(1-p*) > 1
        c = 1.0 - e.p_star
        log_rho = c * lg
        rho = f.gamma**c
        prefix = f.b**c * rho * _pow_minus_one(rho, log_rho, n) / math.expm1(log_rho)
        suffix = f.gamma**n * -_pow_minus_one(f.gamma, lg, N - n + 1.0) / -math.expm1(lg)
        return prefix, suffix

    return sums


def geometric_weights(f: GeometricFamily, N: int) -> WeightSpec:
    if N < 1:
        raise HardyDomainError("N must be >= 1")
    n = np.arange(1, N + 1, dtype=np.float64)
    u = f.gamma**n
    return WeightSpec(
        u=u,
        v=f.b * u,
        kind="geometric",
        truncation=TruncationPolicy.fixed(N),
        params={"gamma": f.gamma, "b": f.b},
        source=lambda M: geometric_weights(f, M),
        closed_sums=_geometric_sums(f),
    )


@dataclass(frozen=True)
class BlissFamily:
    """``u_n = n^(-q/p*) - (n+1)^(-q/p*)``, ``v = 1``; its optimal constant is k."""

    exponents: Exponents
    c: float = 1.0
    d: float = 1e4

    def __post_init__(self):
        if not self.exponents.p < self.exponents.q:
            raise HardyDomainError("the Bliss family needs p < q")
        if not (self.c > 0.0 and self.d > 0.0):
            raise HardyDomainError("c and d must be positive")

    def B(self) -> float:
        return 1.0

    def A(self) -> float:
        from .factors import k

        return k(self.exponents)

    def delta1_bound(self) -> float:
        e = self.exponents
        return (1.0 + e.q / e.p_star) ** (1.0 / e.q + 1.0 / e.p_star)

    def extremal(self, N: int, d: float | None = None) -> np.ndarray:
        """``x_n = c n/(n^r + d)^(1/r) - c (n-1)/((n-1)^r + d)^(1/r)``.

        Written as ``g(n-1) expm1(log g(n) - log g(n-1))`` with
        ``g(t) = (1 + d t^-r)^(-1/r)`` so far-out terms keep their digits.
        """
        d = self.d if d is None else float(d)
        r = self.exponents.r
        n = np.arange(1, N + 1, dtype=np.float64)
        log_g = -np.log1p(d * n**-r) / r
        x = np.empty(N)
        x[0] = math.exp(log_g[0])
        if N > 1:
            m = n[:-1]  # n - 1 for n = 2..N
            b_prev = d * m**-r
            diff_ab = b_prev * np.expm1(-r * np.log1p(1.0 / m))
            step = -np.log1p(diff_ab / (1.0 + b_prev)) / r
            x[1:] = np.exp(log_g[:-1]) * np.expm1(step)
        return self.c * x


def _bliss_u(e: Exponents, N: int) -> np.ndarray:
    s = e.q / e.p_star
    n = np.arange(1, N + 1, dtype=np.float64)
    return -(n**-s) * np.expm1(-s * np.log1p(1.0 / n))


def _bliss_sums(f: BlissFamily):
    def sums(spec: WeightSpec, e: Exponents):
        N = spec.N
        n = np.arange(1, N + 1, dtype=np.float64)
        s = f.exponents.q / f.exponents.p_star
        prefix = n.copy()  # v_hat = 1 for any p
        suffix = n**-s - (N + 1.0) ** -s
        if e != f.exponents:
            suffix = K.revcumsum(spec.u)
        return prefix, suffix

    return sums


def bliss_weights(f: BlissFamily, N: int) -> WeightSpec:
    if N < 1:
        raise HardyDomainError("N must be >= 1")
    return WeightSpec(
        u=_bliss_u(f.exponents, N),
        v=np.ones(N),
        kind="bliss",
        truncation=TruncationPolicy.fixed(N),
        params={"p": f.exponents.p, "q": f.exponents.q, "c": f.c, "d": f.d},
        source=lambda M: bliss_weights(f, M),
        closed_sums=_bliss_sums(f),
    )


def construct_u_from_v(v, e: Exponents, C: float, N: int | None = None, v_next: float | None = None) -> WeightSpec:
    """Pair ``(u~, v)`` with ``u~_n = C^q ((H v_hat(n))^(-q/p*) - (H v_hat(n+1))^(-q/p*))``.

    Without ``v_next`` the weight past ``N`` is taken to make ``H v_hat``
    diverge, so the last entry carries the whole tail ``C^q (H v_hat(N))^(-q/p*)``.
    """
    v = np.asarray(v, dtype=np.float64)
    N = v.size if N is None else int(N)
    if N < 1 or N > v.size:
        raise HardyDomainError(f"N must lie in [1, {v.size}]")
    if not C > 0.0:
        raise HardyDomainError("C must be positive")
    if np.any(v[:N] <= 0.0):
        raise HardyDomainError("v must be positive")
    v = v[:N]
    s = e.q / e.p_star
    vhat = v ** (1.0 - e.p_star)
    head = K.cumsum(vhat)
    nxt = np.empty(N)
    nxt[:-1] = vhat[1:]
    if v_next is None and N < v.size:
        v_next = float(v[N])
    nxt[-1] = math.inf if v_next is None else float(v_next) ** (1.0 - e.p_star)
    with np.errstate(over="ignore"):
        frac = -np.expm1(-s * np.log1p(nxt / head))
    u = C**e.q * head**-s * frac
    return WeightSpec(
        u=u,
        v=v,
        kind="derived-from-v",
        truncation=TruncationPolicy.fixed(N),
        params={"C": float(C), "p": e.p, "q": e.q},
    )


def construction_suffix(v, e: Exponents, C: float, v_next: float | None = None) -> np.ndarray:
    """Telescoped suffix sums ``C^q (H v_hat(n))^(-q/p*) - C^q (H v_hat(N+1))^(-q/p*)``."""
    v = np.asarray(v, dtype=np.float64)
    s = e.q / e.p_star
    head = K.cumsum(v ** (1.0 - e.p_star))
    end = 0.0
    if v_next is not None:
        end = (head[-1] + float(v_next) ** (1.0 - e.p_star)) ** -s
    return C**e.q * (head**-s - end)


def family_from_name(name: str, N: int, p: float = 2.0, q: float = 2.0, **params) -> WeightSpec:
    """Resolve a family name and its parameters, as used by the CLI."""
    name = name.lower()
    if name == "geometric":
        return geometric_weights(GeometricFamily(float(params.get("gamma", 0.5)), float(params.get("b", 1.0))), N)
    if name == "bliss":
        e = validate_exponents(p, q)
        return bliss_weights(BlissFamily(e, float(params.get("c", 1.0)), float(params.get("d", 1e4))), N)
    raise HardyDomainError(f"unknown family {name!r}")
