"""Moving weight pairs between intervals, and convergence in the truncation length."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import Exponents, HardyDomainError, TruncationPolicy, WeightSpec


def restrict(spec: WeightSpec, N: int) -> WeightSpec:
    """The pair restricted to ``[1, N]``."""
    N = int(N)
    if N < 1:
        raise HardyDomainError("N must be >= 1")
    if N > spec.N:
        raise HardyDomainError(f"cannot restrict length {spec.N} to the longer interval [1, {N}]")
    zero_from = spec.zero_tail_from
    if zero_from is not None and zero_from > N:
        zero_from = None
    return WeightSpec(
        u=spec.u[:N],
        v=spec.v[:N],
        kind=spec.kind,
        truncation=TruncationPolicy.fixed(N),
        params=dict(spec.params),
        zero_tail_from=zero_from,
        source=spec.source,
        # family closed forms assume the family's own u; restricted copies keep them
        closed_sums=spec.closed_sums if zero_from is None else None,
    )


def extend_zero(spec: WeightSpec, N_prime: int, v_fill: Union[float, np.ndarray] = 1.0) -> WeightSpec:
    """Extend to ``[1, N']`` with ``u = 0`` and ``v = v_fill`` on ``(N, N']``.

    A and B are unchanged by this extension.
    """
    N_prime = int(N_prime)
    if N_prime < spec.N:
        raise HardyDomainError(f"N' = {N_prime} is shorter than the current length {spec.N}")
    if N_prime == spec.N:
        return spec
    extra = N_prime - spec.N
    fill = np.broadcast_to(np.asarray(v_fill, dtype=np.float64), (extra,)).copy()
    if np.any(fill <= 0.0) or not np.all(np.isfinite(fill)):
        raise HardyDomainError("v_fill must be positive and finite")
    zero_from = spec.zero_tail_from if spec.zero_tail_from is not None else spec.N + 1
    return WeightSpec(
        u=np.concatenate([spec.u, np.zeros(extra)]),
        v=np.concatenate([spec.v, fill]),
        kind=spec.kind,
        truncation=TruncationPolicy.fixed(N_prime),
        params=dict(spec.params),
        zero_tail_from=zero_from,
    )


@dataclass
class ConvergenceResult:
    value: float
    converged: bool
    trace: list = field(default_factory=list)  # (N, value) pairs
    N_final: int = 0

    @property
    def values(self) -> list:
        return [v for _, v in self.trace]


def _quantity_fn(quantity, e: Exponents, oracle_cfg) -> Callable[[WeightSpec], float]:
    if callable(quantity):
        return quantity
    if quantity == "B":
        from .operators import compute_B

        return lambda s: compute_B(s, e)
    if quantity == "delta1":
        from .refine import delta_upper

        return lambda s: delta_upper(s, e, m_max=1).values[0]
    if quantity == "oracle":
        from .oracle import maximize_quotient

        return lambda s: maximize_quotient(s, e, oracle_cfg).A_est
    raise HardyDomainError(f"unknown quantity {quantity!r}; use 'B', 'delta1', 'oracle' or a callable")


def converge_in_N(
    family: WeightSpec,
    e: Exponents,
    quantity="B",
    policy: Optional[TruncationPolicy] = None,
    oracle_cfg=None,
) -> ConvergenceResult:
    """Evaluate ``quantity`` at N, 2N, 4N, ... until two successive values
    differ by less than ``policy.tail_tolerance``.

    Hitting ``policy.N_max`` returns the last value with ``converged=False``.
    """
    if not family.half_line:
        raise HardyDomainError("converge_in_N needs a family that can be rebuilt at any N")
    policy = policy or TruncationPolicy.doubling()
    if policy.mode != "doubling":
        raise HardyDomainError("converge_in_N needs a doubling truncation policy")
    fn = _quantity_fn(quantity, e, oracle_cfg)
    N = policy.N
    trace = []
    prev = None
    while N <= policy.N_max:
        val = float(fn(family.at(N)))
        trace.append((N, val))
        if prev is not None and math.isfinite(val) and abs(val - prev) < policy.tail_tolerance:
            return ConvergenceResult(val, True, trace, N)
        prev = val
        N *= 2
    return ConvergenceResult(trace[-1][1], False, trace, trace[-1][0])


def resolve_truncation(family: WeightSpec, e: Exponents, policy: TruncationPolicy) -> tuple:
    """Pick the working length for a family under ``policy``.

    A fixed policy returns ``family.at(policy.N)``.  A doubling policy grows
    N until successive B and delta_1 values both move by less than
    ``policy.tail_tolerance`` and returns ``(spec, trace)`` with trace rows
    ``(N, B, delta_1)``; passing ``N_max`` raises :class:`TruncationError`.
    """
    from .core import TruncationError
    from .operators import compute_B
    from .refine import delta_upper

    if policy.mode == "fixed":
        spec = family.at(policy.N) if family.half_line else restrict(family, min(policy.N, family.N))
        return spec, []
    if not family.half_line:
        raise HardyDomainError("a doubling truncation needs a family that can be rebuilt at any N")
    trace = []
    N = policy.N
    while N <= policy.N_max:
        spec = family.at(N)
        row = (N, compute_B(spec, e), delta_upper(spec, e, m_max=1).values[0])
        if trace:
            _, b0, d0 = trace[-1]
            if abs(row[1] - b0) < policy.tail_tolerance and abs(row[2] - d0) < policy.tail_tolerance:
                trace.append(row)
                return spec, trace
        trace.append(row)
        N *= 2
    err = TruncationError(
        f"B and delta_1 still moving at N_max = {policy.N_max}: last rows {trace[-2:]}"
    )
    err.trace = trace
    raise err
