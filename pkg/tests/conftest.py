import numpy as np
import pytest

from hardybounds.core import explicit_weights, validate_exponents


def random_instance(rng, N_max=10, p_range=(1.1, 5.0), equal=False):
    """Random positive weights of length <= N_max and exponents 1 < p <= q."""
    N = int(rng.integers(1, N_max + 1))
    p = rng.uniform(*p_range)
    q = p if equal else rng.uniform(p, p_range[1])
    u = rng.uniform(0.05, 1.0, N) * np.exp(rng.normal(0.0, 1.0, N))
    v = rng.uniform(0.05, 1.0, N) * np.exp(rng.normal(0.0, 1.0, N))
    return explicit_weights(u, v), validate_exponents(p, q)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or load cached) numba kernels once so timed tests measure the work
    from hardybounds.oracle import eigen_check_p2q2, maximize_quotient, OracleConfig
    from hardybounds.refine import delta_lower, delta_upper

    spec = explicit_weights([0.5, 0.25, 0.125], [0.5, 0.25, 0.125])
    for e in (validate_exponents(2, 2), validate_exponents(1.5, 3)):
        maximize_quotient(spec, e)
        maximize_quotient(spec, e, OracleConfig(method="ascent", restarts=1))
        delta_upper(spec, e, m_max=3)
        delta_lower(spec, e, m=2)
    eigen_check_p2q2(spec)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
