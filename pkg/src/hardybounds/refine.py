"""Step-by-step refinement of the upper and lower estimates of A.

Upper branch: starting from ``x^(1)_n = (H v_hat(n))^alpha - (H v_hat(n-1))^alpha``
the map ``x -> v_hat (sum_{i>=n} u_i (H x(i))^(q/p*))^(p*/q)`` is iterated
and ``delta_m = (sup_n II*_n(x^(m)))^(1/p*)`` is non-increasing in m.

Lower branch: for every cut-off k, ``y^(k,1) = v_hat 1[n <= k]`` is iterated
and both the operator-II functional and the plain quotient of ``y^(k,m)``
bound A from below.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from ._accel import thread_count
from .core import Exponents, HardyDomainError, IterationTrace, TestSequence, WeightSpec, as_sequence
from .operators import OperatorKind, lower_functional, quotient, sup_operator

log = logging.getLogger(__name__)

DEFAULT_M_MAX = 50
DEFAULT_TOL = 1e-8
FULL_SCAN_LIMIT = 512


@dataclass
class RefinementState:
    m: int
    x: TestSequence
    trace: IterationTrace = field(default_factory=IterationTrace)
    status: str = "improving"


def seed_upper(spec: WeightSpec, e: Exponents) -> TestSequence:
    """``x^(1)_n = (H v_hat(n))^alpha - (H v_hat(n-1))^alpha``."""
    head = np.asarray(spec.prefix_vhat(e), dtype=np.float64)
    vh = spec.v_hat(e)
    a = e.alpha
    x = np.empty(spec.N)
    x[0] = head[0] ** a
    if spec.N > 1:
        # difference of close powers, written through expm1/log1p
        x[1:] = head[:-1] ** a * np.expm1(a * np.log1p(vh[1:] / head[:-1]))
    return TestSequence(x)


def iterate_upper(x, spec: WeightSpec, e: Exponents) -> TestSequence:
    """One step of the upper map, rescaled to ``H x(N) = 1``."""
    x = as_sequence(x)
    nxt = K.upper_map(np.asarray(x.x), spec.u, spec.v_hat(e), e.p_star, e.q)
    if not np.all(np.isfinite(nxt)) or nxt[0] <= 0.0:
        raise FloatingPointError("upper iterate left the representable range")
    return TestSequence(nxt)


def delta_upper(
    spec: WeightSpec,
    e: Exponents,
    m_max: int = DEFAULT_M_MAX,
    tol: float = DEFAULT_TOL,
    delta1_kind: OperatorKind = OperatorKind.II_STAR,
) -> IterationTrace:
    """Trace of ``delta_1 >= delta_2 >= ...``, stopping once a step gains less than ``tol``.

    ``delta1_kind=OperatorKind.II`` evaluates the first term with the
    lower-style operator instead (only differs from the default when p < q).
    """
    if m_max < 1:
        raise HardyDomainError("m_max must be >= 1")
    trace = IterationTrace(label="delta")
    x = seed_upper(spec, e)
    first = sup_operator(delta1_kind, x, spec, e)
    d1 = first.value ** (1.0 / e.p_star)
    trace.append(d1, first.index)
    if not math.isfinite(d1):
        trace.status = "diverged"
        return trace
    for _ in range(1, m_max):
        try:
            x = iterate_upper(x, spec, e)
        except FloatingPointError:
            trace.status = "diverged"
            return trace
        ext = sup_operator(OperatorKind.II_STAR, x, spec, e)
        d = ext.value ** (1.0 / e.p_star)
        if not math.isfinite(d):
            trace.status = "diverged"
            return trace
        gain = trace.last - d
        trace.append(d, ext.index)
        if gain < tol:
            trace.status = "converged"
            return trace
    trace.status = "improving" if m_max > 1 else "converged"
    return trace


def seed_lower(spec: WeightSpec, e: Exponents, k: int) -> TestSequence:
    """``y^(k,1)``: ``v_hat`` on ``[1, k]`` and zero beyond."""
    if not 1 <= k <= spec.N:
        raise HardyDomainError(f"k must lie in [1, {spec.N}], got {k}")
    y = spec.v_hat(e).copy()
    y[k:] = 0.0
    return TestSequence(y)


def iterate_lower(y, spec: WeightSpec, e: Exponents, weighted_inner_sum: bool = False) -> TestSequence:
    """``y_n <- v_hat_n (sum_{i>=n} w_i (H y(i))^(q-1))^(p*-1)``, rescaled to ``H y(N) = 1``.

    ``w = 1`` is the default (the form used for the lower procedure);
    ``weighted_inner_sum=True`` uses ``w = u`` as in operator I.
    """
    y = as_sequence(y)
    w = spec.u if weighted_inner_sum else np.ones(spec.N)
    nxt = K.stationary_map(np.asarray(y.x), w, spec.v_hat(e), e.p_star, e.q)
    if not np.all(np.isfinite(nxt)) or nxt[0] <= 0.0:
        raise FloatingPointError("lower iterate left the representable range")
    return TestSequence(nxt)


@dataclass(frozen=True)
class LowerEstimate:
    delta_tilde: float
    delta_bar: float
    k_tilde: int
    k_bar: int
    m: int
    warnings: tuple = ()


def _lower_pair(spec, e, m, k, weighted):
    y = seed_lower(spec, e, k)
    for _ in range(m - 1):
        y = iterate_lower(y, spec, e, weighted)
    return lower_functional(y, spec, e).value, quotient(y, spec, e)


def _evaluate_grid(spec, e, m, ks, weighted, cache):
    todo = [k for k in ks if k not in cache]
    workers = thread_count()
    if workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: _lower_pair(spec, e, m, k, weighted), todo))
    else:
        results = [_lower_pair(spec, e, m, k, weighted) for k in todo]
    cache.update(zip(todo, results))


def _ternary_refine(f, lo, hi):
    # integer ternary search for a maximum on [lo, hi]; f caches its values
    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if f(m1) < f(m2):
            lo = m1 + 1
        elif f(m1) > f(m2):
            hi = m2 - 1
        else:
            lo, hi = m1, m2
    return max(range(lo, hi + 1), key=lambda k: (f(k), -k))


def default_k_grid(N: int) -> list:
    if N <= FULL_SCAN_LIMIT:
        return list(range(1, N + 1))
    grid = []
    k = 1
    while k < N:
        grid.append(k)
        k *= 2
    grid.append(N)
    return grid


def delta_lower(
    spec: WeightSpec,
    e: Exponents,
    m: int = 1,
    k_grid=None,
    weighted_inner_sum: bool = False,
) -> LowerEstimate:
    """Maximise both lower functionals of ``y^(k,m)`` over the cut-off k.

    With no ``k_grid`` every k is scanned up to N = 512; past that a doubling
    grid (always including N) is refined by ternary search around its best
    point, separately for each functional.
    """
    if m < 1:
        raise HardyDomainError("m must be >= 1")
    refine_grid = k_grid is None and spec.N > FULL_SCAN_LIMIT
    ks = default_k_grid(spec.N) if k_grid is None else sorted({int(k) for k in k_grid})
    if not ks or ks[0] < 1 or ks[-1] > spec.N:
        raise HardyDomainError("k_grid must be non-empty and inside [1, N]")
    cache: dict = {}
    _evaluate_grid(spec, e, m, ks, weighted_inner_sum, cache)

    def best(slot, candidates):
        return max(candidates, key=lambda k: (cache[k][slot], -k))

    picks = []
    for slot in (0, 1):
        k_best = best(slot, ks)
        if refine_grid:
            pos = ks.index(k_best)
            lo = ks[max(pos - 1, 0)]
            hi = ks[min(pos + 1, len(ks) - 1)]

            def f(k, slot=slot):
                if k not in cache:
                    cache[k] = _lower_pair(spec, e, m, k, weighted_inner_sum)
                return cache[k][slot]

            k_ref = _ternary_refine(f, lo, hi)
            if cache[k_ref][slot] > cache[k_best][slot]:
                k_best = k_ref
        picks.append(k_best)
    warnings = []
    if spec.half_line and not weighted_inner_sum and m > 1:
        warnings.append("unweighted inner sum grows with the truncation; values are for the truncated problem")
    return LowerEstimate(
        delta_tilde=float(cache[picks[0]][0]),
        delta_bar=float(cache[picks[1]][1]),
        k_tilde=picks[0],
        k_bar=picks[1],
        m=m,
        warnings=tuple(warnings),
    )


@dataclass
class TraceRow:
    m: int
    delta: float
    delta_index: int
    delta_tilde: float
    k_tilde: int
    delta_bar: float
    k_bar: int


def refinement_table(
    spec: WeightSpec,
    e: Exponents,
    m_max: int = DEFAULT_M_MAX,
    tol: float = DEFAULT_TOL,
    k_grid=None,
    weighted_inner_sum: bool = False,
    delta1_kind: OperatorKind = OperatorKind.II_STAR,
) -> tuple:
    """Rows ``(m, delta_m, delta~_m, delta-bar_m, indices)`` and the upper-branch status."""
    upper = delta_upper(spec, e, m_max=m_max, tol=tol, delta1_kind=delta1_kind)
    rows = []
    for i, (d, idx) in enumerate(zip(upper.values, upper.indices), start=1):
        low = delta_lower(spec, e, m=i, k_grid=k_grid, weighted_inner_sum=weighted_inner_sum)
        rows.append(TraceRow(i, d, idx, low.delta_tilde, low.k_tilde, low.delta_bar, low.k_bar))
    return rows, upper.status


def best_upper(trace: IterationTrace) -> float:
    finite = [v for v in trace.values if math.isfinite(v)]
    return min(finite) if finite else math.inf


__all__ = [
    "RefinementState",
    "LowerEstimate",
    "TraceRow",
    "seed_upper",
    "iterate_upper",
    "delta_upper",
    "seed_lower",
    "iterate_lower",
    "delta_lower",
    "default_k_grid",
    "refinement_table",
    "best_upper",
]
