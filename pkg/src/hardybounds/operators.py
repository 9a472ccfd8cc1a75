"""Partial sums, the variational operators, B and the Hardy quotient."""

from __future__ import annotations

import enum
import logging
import math
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .core import Exponents, HardyDomainError, TestSequence, WeightSpec, as_sequence

log = logging.getLogger(__name__)

# floor applied to a base before raising it to a negative power
POWER_FLOOR = 1e-300


class OperatorKind(enum.Enum):
    I_STAR = "I_star"
    II_STAR = "II_star"
    I = "I"  # noqa: E741
    II = "II"

    @property
    def double(self) -> bool:
        return self in (OperatorKind.II_STAR, OperatorKind.II)

    @property
    def lower(self) -> bool:
        return self in (OperatorKind.I, OperatorKind.II)

    def exponents(self, e: Exponents) -> tuple:
        """(inner, outer) powers applied to ``H x`` and to the tail sum."""
        if self.lower:
            return e.q - 1.0, e.p_star - 1.0
        return e.q / e.p_star, e.p_star / e.q

    @classmethod
    def parse(cls, tag) -> "OperatorKind":
        if isinstance(tag, cls):
            return tag
        return cls(str(tag))


class Extremum(NamedTuple):
    value: float
    index: int  # 1-based
    at_boundary: bool


def partial_sum(x, n: int) -> float:
    """``H x(n)``; ``H x(0) = 0``."""
    return as_sequence(x).partial_sum(n)


def _check_length(x: TestSequence, spec: WeightSpec):
    if x.N != spec.N:
        raise HardyDomainError(f"sequence length {x.N} does not match weights length {spec.N}")


def basic_quantity(spec: WeightSpec, e: Exponents) -> Extremum:
    """B together with the index attaining it."""
    head = np.asarray(spec.prefix_vhat(e), dtype=np.float64)
    tail = np.asarray(spec.suffix_u(e), dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        # one outer power: exact when p* = q, where the inner power is the identity
        direct = (head * tail ** (e.p_star / e.q)) ** (1.0 / e.p_star)
    if np.all(np.isfinite(direct)):
        # the direct product keeps ulp-level accuracy; the log route below
        # loses |log H v_hat| ulps and is only for ranges that overflow
        i = int(np.argmax(direct))
        return Extremum(float(direct[i]), i + 1, i + 1 == spec.N)
    with np.errstate(divide="ignore"):
        logs = np.log(head) / e.p_star + np.log(tail) / e.q
    i = int(np.argmax(logs))
    top = float(logs[i])
    if top > 709.0:
        log.warning("B overflows binary64 (log B = %.6g); reporting +inf", top)
        value = math.inf
    else:
        value = math.exp(top) if np.isfinite(top) else 0.0
    return Extremum(value, i + 1, i + 1 == spec.N)


def compute_B(spec: WeightSpec, e: Exponents) -> float:
    """``max_n (sum_{i<=n} v_hat_i)^(1/p*) (sum_{j=n}^N u_j)^(1/q)``."""
    return basic_quantity(spec, e).value


def operator_profile(kind, x, spec: WeightSpec, e: Exponents) -> np.ndarray:
    """Values of the operator at every n = 1..N (index 0 holds n = 1)."""
    kind = OperatorKind.parse(kind)
    x = as_sequence(x)
    _check_length(x, spec)
    if kind.lower and not x.summable_flag:
        raise HardyDomainError("operators I and II need a summable sequence")
    inner, outer = kind.exponents(e)
    single, double = K.profiles(x.x, x.prefix, spec.u, spec.v_hat(e), inner, outer)
    return double if kind.double else single


def evaluate_operator(kind, x, spec: WeightSpec, e: Exponents, n: int) -> float:
    """One operator value at the 1-based index ``n``; ``inf`` when a denominator vanishes."""
    x = as_sequence(x)
    if not 1 <= n <= x.N:
        raise IndexError(f"index {n} outside [1, {x.N}]")
    return float(operator_profile(kind, x, spec, e)[n - 1])


def sup_operator(kind, x, spec: WeightSpec, e: Exponents) -> Extremum:
    prof = operator_profile(kind, x, spec, e)
    i = int(np.argmax(prof))
    return Extremum(float(prof[i]), i + 1, i + 1 == prof.size)


def inf_operator(kind, x, spec: WeightSpec, e: Exponents) -> Extremum:
    prof = operator_profile(kind, x, spec, e)
    i = int(np.argmin(prof))
    return Extremum(float(prof[i]), i + 1, i + 1 == prof.size)


def weighted_norm(x, weights, power: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    return K.fsum(np.asarray(weights) * x**power) ** (1.0 / power)


def quotient(x, spec: WeightSpec, e: Exponents) -> float:
    """``||H x||_{l^q(u)} / ||x||_{l^p(v)}``."""
    x = as_sequence(x)
    _check_length(x, spec)
    # scale invariant: normalise first so large sequences do not overflow
    xs = x.x / x.prefix[-1]
    lq = K.log_quotient(xs, spec.u, spec.v, e.p, e.q)
    if lq == math.inf:
        return math.inf
    return math.exp(lq)


def upper_functional(x, spec: WeightSpec, e: Exponents, kind=OperatorKind.II_STAR) -> Extremum:
    """``(sup_n op_n(x))^(1/p*)``, an upper bound on A for the starred operators."""
    ext = sup_operator(kind, x, spec, e)
    return Extremum(ext.value ** (1.0 / e.p_star), ext.index, ext.at_boundary)


def lower_functional(x, spec: WeightSpec, e: Exponents, kind=OperatorKind.II) -> Extremum:
    """``||x||^(p/q - 1) (inf_n op_n(x))^((p-1)/q)``, a lower bound on A.

    The expression is scale invariant, so it is evaluated on ``x`` rescaled
    to unit weighted p-norm where the norm factor drops out.
    """
    x = as_sequence(x)
    norm = weighted_norm(x.x, spec.v, e.p)
    xs = TestSequence(x.x / norm, x.summable_flag)
    ext = inf_operator(kind, xs, spec, e)
    return Extremum(ext.value ** ((e.p - 1.0) / e.q), ext.index, ext.at_boundary)
