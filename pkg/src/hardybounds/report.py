"""Assembling every bound for one problem into a :class:`BoundReport`."""

from __future__ import annotations

import math
from typing import Optional

from .core import Bound, BoundReport, Exponents, WeightSpec
from .factors import k, tilde_k
from .operators import basic_quantity
from .oracle import OracleConfig, maximize_quotient
from .refine import DEFAULT_M_MAX, DEFAULT_TOL, delta_lower, delta_upper

BOUNDARY_NOTE = "extremum at boundary - increase truncation"

# method labels carried by every number in a report
CLOSED_FORM = "closed-form"
TRUNCATED_SUM = "truncated-sum"
ORACLE = "oracle"
REFINEMENT = "refinement"


def build_report(
    spec: WeightSpec,
    e: Exponents,
    m_max: int = DEFAULT_M_MAX,
    tol: float = DEFAULT_TOL,
    oracle_cfg: Optional[OracleConfig] = None,
    weighted_inner_sum: bool = False,
) -> BoundReport:
    """B, the factor bounds, delta_1 / delta_m and the first lower pair; the oracle when a config is given."""
    b = basic_quantity(spec, e)
    kk, tk = k(e), tilde_k(e)
    upper = delta_upper(spec, e, m_max=m_max, tol=tol)
    low = delta_lower(spec, e, m=1, weighted_inner_sum=weighted_inner_sum)

    lower_bounds = [
        Bound("B", b.value, TRUNCATED_SUM, b.index),
        Bound("delta_tilde_1", low.delta_tilde, REFINEMENT, low.k_tilde),
        Bound("delta_bar_1", low.delta_bar, REFINEMENT, low.k_bar),
    ]
    upper_bounds = [
        Bound("delta_1", upper.values[0], REFINEMENT, upper.indices[0]),
        Bound("delta_m", min(upper.values), REFINEMENT, upper.indices[upper.values.index(min(upper.values))]),
        Bound("k_qp_times_B", kk * b.value, TRUNCATED_SUM),
        Bound("tilde_k_qp_times_B", tk * b.value, TRUNCATED_SUM),
    ]
    residuals = {
        "k_qp": {"value": kk, "method": CLOSED_FORM},
        "tilde_k_qp": {"value": tk, "method": CLOSED_FORM},
        "delta_steps": {"value": len(upper), "method": REFINEMENT},
        "delta_status": upper.status,
        "warnings": list(low.warnings),
    }
    if spec.half_line and b.at_boundary:
        residuals["warnings"].append(f"B: {BOUNDARY_NOTE}")
    if spec.half_line and upper.indices[-1] == spec.N:
        residuals["warnings"].append(f"delta_m: {BOUNDARY_NOTE}")

    if oracle_cfg is not None:
        res = maximize_quotient(spec, e, oracle_cfg)
        lower_bounds.append(Bound("oracle", res.A_est, ORACLE))
        residuals["oracle_converged"] = res.converged
        residuals["oracle_iterations"] = {"value": res.iterations, "method": ORACLE}

    report = BoundReport(
        B=b.value,
        exponents=e,
        truncation_used=spec.N,
        lower_bounds=lower_bounds,
        upper_bounds=upper_bounds,
        residuals=residuals,
    )
    report.residuals["consistent"] = report.consistent()
    return report


def closed_forms(spec: WeightSpec, e: Exponents) -> dict:
    """Known exact values for the built-in families (empty for explicit weights)."""
    from .families import BlissFamily, GeometricFamily

    if spec.kind == "geometric" and e.p == 2.0 and e.q == 2.0:
        f = GeometricFamily(spec.params["gamma"], spec.params["b"])
        vals = {"B": f.B(), "A": f.A(), "delta_1": f.delta1(), "delta_tilde_1": f.delta_lower1(), "delta_bar_1": f.delta_lower1()}
    elif spec.kind == "bliss":
        f = BlissFamily(e, spec.params["c"], spec.params["d"])
        vals = {"B": f.B(), "A": f.A(), "delta_1_bound": f.delta1_bound()}
    else:
        return {}
    return {name: {"value": v, "method": CLOSED_FORM} for name, v in vals.items() if math.isfinite(v)}
