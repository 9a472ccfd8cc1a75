"""Two-sided bounds for the optimal constant of discrete weighted Hardy inequalities."""

from ._accel import BACKEND
from .core import (
    Bound,
    BoundReport,
    Exponents,
    HardyDomainError,
    IterationTrace,
    TestSequence,
    TruncationPolicy,
    WeightSpec,
    explicit_weights,
    v_hat,
    validate_exponents,
)
from .factors import beta, incomplete_beta, k, tilde_k
from .families import BlissFamily, GeometricFamily, bliss_weights, construct_u_from_v, geometric_weights
from .intervals import converge_in_N, extend_zero, restrict
from .operators import OperatorKind, compute_B, quotient
from .oracle import OracleConfig, check_maximizer_monotone, eigen_check_p2q2, maximize_quotient
from .refine import delta_lower, delta_upper
from .report import build_report

__version__ = "0.1.0"
