"""Domain types shared by every module.

Indices in the public API are 1-based, matching the usual way the
inequality is written; arrays are stored 0-based internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as K


class HardyDomainError(ValueError):
    """Input outside the domain of an operation."""


class TruncationError(RuntimeError):
    """A doubling truncation hit its cap before converging."""


@dataclass(frozen=True)
class Exponents:
    p: float
    q: float

    @property
    def p_star(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def r(self) -> float:
        # q - p is exact when q is close to p, q/p - 1 is not
        return (self.q - self.p) / self.p

    @property
    def alpha(self) -> float:
        return self.q / (self.p_star + self.q)

    @property
    def equal(self) -> bool:
        return self.p == self.q


def validate_exponents(p: float, q: float) -> Exponents:
    """Check ``1 < p <= q < inf`` and return the exponent pair."""
    p = float(p)
    q = float(q)
    if not (math.isfinite(p) and math.isfinite(q)):
        raise HardyDomainError(f"exponents must be finite, got p={p}, q={q}")
    if p <= 1.0:
        raise HardyDomainError(f"need p > 1, got p={p}")
    if q < p:
        raise HardyDomainError(f"need q >= p, got p={p}, q={q}")
    return Exponents(p, q)


@dataclass(frozen=True)
class TruncationPolicy:
    """How a half-line problem is cut down to a finite one.

    ``mode="fixed"`` uses ``N`` directly.  ``mode="doubling"`` starts at
    ``N`` and doubles until successive values agree to ``tail_tolerance``
    or ``N_max`` is passed.
    """

    mode: str = "fixed"
    N: int = 64
    N_max: int = 2**20
    tail_tolerance: float = 1e-8

    def __post_init__(self):
        if self.mode not in ("fixed", "doubling"):
            raise HardyDomainError(f"unknown truncation mode {self.mode!r}")
        if self.N < 1:
            raise HardyDomainError("truncation N must be >= 1")
        if self.mode == "doubling" and self.N_max < self.N:
            raise HardyDomainError("N_max must be >= N")
        if not self.tail_tolerance > 0:
            raise HardyDomainError("tail_tolerance must be positive")

    @classmethod
    def fixed(cls, N: int) -> "TruncationPolicy":
        return cls("fixed", int(N))

    @classmethod
    def doubling(cls, tol: float = 1e-8, N_max: int = 2**20, N: int = 64) -> "TruncationPolicy":
        return cls("doubling", int(N), int(N_max), float(tol))


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != 1:
        raise HardyDomainError("weights must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """A weight pair ``(u, v)`` on ``[1, N]``.

    ``source`` rebuilds the same family at another length and marks the
    spec as a truncation of a half-line problem.  ``closed_sums`` lets a
    family supply exact prefix sums of ``v_hat`` and suffix sums of ``u``.
    """

    u: np.ndarray
    v: np.ndarray
    kind: str = "explicit"
    truncation: TruncationPolicy = field(default_factory=lambda: TruncationPolicy.fixed(1))
    params: dict = field(default_factory=dict)
    zero_tail_from: Optional[int] = None
    source: Optional[Callable[[int], "WeightSpec"]] = None
    closed_sums: Optional[Callable[["WeightSpec", Exponents], tuple]] = None

    def __post_init__(self):
        u = _frozen(self.u)
        v = _frozen(self.v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if u.shape != v.shape or u.size == 0:
            raise HardyDomainError(f"u and v must be non-empty and equal length, got {u.size} and {v.size}")
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(v)):
            raise HardyDomainError("weights must be finite")
        if np.any(v <= 0.0):
            raise HardyDomainError("all v_i must be > 0")
        if self.zero_tail_from is None:
            if np.any(u <= 0.0):
                raise HardyDomainError("all u_i must be > 0")
        else:
            cut = self.zero_tail_from - 1
            if np.any(u[:cut] <= 0.0) or np.any(u[cut:] != 0.0):
                raise HardyDomainError("zero tail of u must start exactly at zero_tail_from")
        if self.truncation.mode == "fixed" and self.truncation.N != u.size:
            object.__setattr__(self, "truncation", TruncationPolicy.fixed(u.size))

    @property
    def N(self) -> int:
        return int(self.u.size)

    @property
    def half_line(self) -> bool:
        return self.source is not None

    def v_hat(self, e: Exponents) -> np.ndarray:
        with np.errstate(over="ignore"):  # overflow surfaces as inf downstream
            return self.v ** (1.0 - e.p_star)

    def prefix_vhat(self, e: Exponents) -> np.ndarray:
        """``H v_hat(n)`` for n = 1..N."""
        if self.closed_sums is not None:
            return self.closed_sums(self, e)[0]
        return K.cumsum(self.v_hat(e))

    def suffix_u(self, e: Exponents) -> np.ndarray:
        """``sum_{j=n}^N u_j`` for n = 1..N."""
        if self.closed_sums is not None:
            return self.closed_sums(self, e)[1]
        return K.revcumsum(self.u)

    def at(self, N: int) -> "WeightSpec":
        """Same family at length ``N`` (half-line specs only)."""
        if self.source is None:
            raise HardyDomainError("explicit weights cannot be re-truncated beyond their length")
        return self.source(int(N))


def explicit_weights(u, v) -> WeightSpec:
    return WeightSpec(u=u, v=v)


def v_hat(spec: WeightSpec, i: int, e: Exponents) -> float:
    """``v_i ** (1 - p_star)`` at the 1-based index ``i``."""
    if not 1 <= i <= spec.N:
        raise IndexError(f"index {i} outside [1, {spec.N}]")
    return float(spec.v[i - 1] ** (1.0 - e.p_star))


@dataclass(frozen=True, eq=False)
class TestSequence:
    """A sequence in A[1,N]: ``x_1 > 0`` and ``x_i >= 0``."""

    __test__ = False  # not a pytest class

    x: np.ndarray
    summable_flag: bool = True

    def __post_init__(self):
        x = _frozen(self.x)
        if x.size == 0:
            raise HardyDomainError("empty sequence")
        if not np.all(np.isfinite(x)):
            raise HardyDomainError("sequence entries must be finite")
        if x[0] <= 0.0:
            raise HardyDomainError("x_1 must be > 0")
        if np.any(x < 0.0):
            raise HardyDomainError("entries must be >= 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "_prefix", K.cumsum(x))

    @property
    def N(self) -> int:
        return int(self.x.size)

    @property
    def prefix(self) -> np.ndarray:
        return self._prefix

    def partial_sum(self, n: int) -> float:
        if not 0 <= n <= self.N:
            raise IndexError(f"index {n} outside [0, {self.N}]")
        return 0.0 if n == 0 else float(self._prefix[n - 1])

    def normalized(self) -> "TestSequence":
        """Rescaled so that ``H x(N) = 1``."""
        return TestSequence(self.x / self._prefix[-1], self.summable_flag)

    def __len__(self):
        return self.N


def as_sequence(x) -> TestSequence:
    return x if isinstance(x, TestSequence) else TestSequence(x)


@dataclass(frozen=True)
class Bound:
    label: str
    value: float
    method: str
    index: Optional[int] = None


@dataclass
class BoundReport:
    B: float
    exponents: Exponents
    truncation_used: int
    lower_bounds: list = field(default_factory=list)
    upper_bounds: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    def lower(self, label: str) -> float:
        return next(b.value for b in self.lower_bounds if b.label == label)

    def upper(self, label: str) -> float:
        return next(b.value for b in self.upper_bounds if b.label == label)

    def consistent(self, tol: float = 1e-9) -> bool:
        lo = max(b.value for b in self.lower_bounds)
        hi = min(b.value for b in self.upper_bounds)
        return lo <= hi * (1.0 + tol) + tol

    def to_dict(self) -> dict:
        def bounds(items):
            out = []
            for b in items:
                row = {"label": b.label, "value": b.value, "method": b.method}
                if b.index is not None:
                    row["index"] = b.index
                out.append(row)
            return out

        return {
            "p": self.exponents.p,
            "q": self.exponents.q,
            "p_star": self.exponents.p_star,
            "truncation_used": self.truncation_used,
            "B": {"value": self.B, "method": "truncated-sum"},
            "lower_bounds": bounds(self.lower_bounds),
            "upper_bounds": bounds(self.upper_bounds),
            "residuals": self.residuals,
        }


@dataclass
class IterationTrace:
    """Per-step values of a refinement or convergence loop."""

    values: list = field(default_factory=list)
    indices: list = field(default_factory=list)
    status: str = "improving"
    label: str = ""

    def append(self, value: float, index=None):
        self.values.append(float(value))
        self.indices.append(index)

    @property
    def last(self) -> float:
        return self.values[-1]

    def __len__(self):
        return len(self.values)
