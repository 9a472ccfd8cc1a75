"""Brute-force estimates of A on finite problems.

Two independent maximisers of the Hardy quotient are provided:

* ``fixed_point`` iterates the stationarity map of the quotient,
  ``x_n <- v_hat_n (sum_{i>=n} u_i (H x(i))^(q-1))^(p*-1)``, which is the
  nonlinear power method for this operator;
* ``ascent`` runs projected gradient ascent on the log-quotient with a
  halving line search.

For ``p = q = 2`` the squared constant is the top eigenvalue of a symmetric
positive matrix, which gives a third, certified route.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from ._accel import thread_count
from .core import Exponents, HardyDomainError, TestSequence, WeightSpec, as_sequence
from .operators import quotient
from .refine import seed_upper

METHODS = ("fixed_point", "ascent", "eigen_p2q2")


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 4
    max_iters: int = 200_000
    step_tol: float = 1e-15
    seed: int = 0
    method: str = "fixed_point"

    def __post_init__(self):
        if self.restarts < 1:
            raise HardyDomainError("restarts must be >= 1")
        if self.max_iters < 1:
            raise HardyDomainError("max_iters must be >= 1")
        if self.method not in METHODS:
            raise HardyDomainError(f"unknown oracle method {self.method!r}; choose from {METHODS}")


@dataclass
class OracleResult:
    A_est: float
    x_star: TestSequence
    method: str
    converged: bool
    restart_values: list = field(default_factory=list)
    best_restart: int = 0
    iterations: int = 0

    def __iter__(self):
        # unpacks as (A_est, x_star)
        yield self.A_est
        yield self.x_star


def starting_points(spec: WeightSpec, e: Exponents, cfg: OracleConfig) -> list:
    """x^(1), v_hat, ones, then uniform random positives, in that order."""
    starts = [np.asarray(seed_upper(spec, e).x), spec.v_hat(e).copy(), np.ones(spec.N)]
    starts = starts[: cfg.restarts]
    rng = np.random.default_rng(cfg.seed)
    while len(starts) < cfg.restarts:
        starts.append(rng.uniform(0.05, 1.0, size=spec.N))
    return [s / s.sum() for s in starts]


def _run_one(x0, spec, e, vhat, cfg):
    if cfg.method == "fixed_point":
        x, val, iters, ok = K.fixed_point(x0, spec.u, spec.v, vhat, e.p, e.q, cfg.max_iters, cfg.step_tol)
        # one more stationary step: it never lowers the quotient near the optimum
        # and makes x_n / v_hat_n non-increasing by construction
        polished = K.stationary_map(x, spec.u, vhat, e.p_star, e.q)
        val_p = K.log_quotient(polished, spec.u, spec.v, e.p, e.q)
        if val_p >= val - 1e-15:
            x, val = polished, max(val, val_p)
    else:
        x, val, iters, ok = K.ascent(x0, spec.u, spec.v, e.p, e.q, cfg.max_iters, cfg.step_tol)
    return np.asarray(x), float(val), int(iters), bool(ok)


def maximize_quotient(spec: WeightSpec, e: Exponents, cfg: Optional[OracleConfig] = None) -> OracleResult:
    """Best Hardy quotient over all restarts; deterministic for a given seed."""
    cfg = cfg or OracleConfig()
    if cfg.method == "eigen_p2q2":
        return _eigen_result(spec, e, cfg)
    vhat = spec.v_hat(e)
    starts = starting_points(spec, e, cfg)
    workers = thread_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda s: _run_one(s, spec, e, vhat, cfg), starts))
    else:
        runs = [_run_one(s, spec, e, vhat, cfg) for s in starts]
    values = [r[1] for r in runs]
    top = max(values)
    # lowest restart index among values tied with the best to 1e-12
    best = next(i for i, v in enumerate(values) if v >= top - 1e-12)
    x, val, _, ok = runs[best]
    x = x / x.sum()
    return OracleResult(
        A_est=math.exp(val),
        x_star=TestSequence(x),
        method=cfg.method,
        converged=ok,
        restart_values=[math.exp(v) for v in values],
        best_restart=best,
        iterations=sum(r[2] for r in runs),
    )


def _check_p2q2(e: Optional[Exponents]):
    if e is not None and not (e.p == 2.0 and e.q == 2.0):
        raise HardyDomainError(f"eigenvalue check needs p = q = 2, got p={e.p}, q={e.q}")


def _power(spec, cfg):
    z0 = np.sqrt(spec.v) * np.asarray(seed_upper(spec, Exponents(2.0, 2.0)).x)
    lam, z, iters, ok = K.power_iteration(z0, spec.u, spec.v, cfg.max_iters, cfg.step_tol)
    return lam, np.asarray(z), iters, ok


def eigen_check_p2q2(spec: WeightSpec, cfg: Optional[OracleConfig] = None, e: Optional[Exponents] = None) -> float:
    """``sqrt`` of the top eigenvalue of ``D_v^(-1/2) H^T D_u H D_v^(-1/2)`` by power iteration."""
    _check_p2q2(e)
    lam, _, _, _ = _power(spec, cfg or OracleConfig())
    return math.sqrt(lam)


def _eigen_result(spec, e, cfg):
    _check_p2q2(e)
    lam, z, iters, ok = _power(spec, cfg)
    x = np.abs(z) / np.sqrt(spec.v)
    x = x / x.sum()
    return OracleResult(math.sqrt(lam), TestSequence(x), "eigen_p2q2", ok, [math.sqrt(lam)], 0, iters)


@dataclass(frozen=True)
class MonotoneCheck:
    passed: bool
    first_violation: Optional[int]  # 1-based index n with w_n > w_{n-1}
    boundary_warnings: tuple = ()

    def __bool__(self):
        return self.passed


def check_maximizer_monotone(
    x_star, spec: WeightSpec, e: Exponents, rtol: float = 1e-6, boundary_fraction: float = 0.05
) -> MonotoneCheck:
    """Check that ``w_n = x_n / v_hat_n`` is non-increasing.

    Increases inside the last ``boundary_fraction`` of indices are reported
    as warnings only: truncation distorts the maximiser there.
    """
    x = as_sequence(x_star)
    w = np.asarray(x.x) / spec.v_hat(e)
    cut = spec.N - int(math.floor(boundary_fraction * spec.N))
    first = None
    warnings = []
    for n in range(2, spec.N + 1):
        if w[n - 1] > w[n - 2] * (1.0 + rtol):
            if n > cut:
                warnings.append(n)
            elif first is None:
                first = n
    return MonotoneCheck(first is None, first, tuple(warnings))


def oracle_quotient_check(result: OracleResult, spec: WeightSpec, e: Exponents) -> float:
    """Recompute the quotient of the returned maximiser from scratch."""
    return quotient(result.x_star, spec, e)
