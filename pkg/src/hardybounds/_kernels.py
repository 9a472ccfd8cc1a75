"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba (compensated
Neumaier accumulation throughout) and a vectorised numpy version that
accumulates prefix/suffix sums in extended precision instead.  The public
names at the bottom of the module point at whichever set ``_accel`` selected.
Both sets are importable directly (``NUMBA_KERNELS`` / ``NUMPY_KERNELS``) so
tests and the benchmark can compare them.

Conventions shared by all kernels: arrays are 0-based float64, ``hx`` is the
prefix-sum array ``H x(1..N)``, and sequences fed to the iteration loops are
rescaled so that ``H x(N) = 1``.
"""

import math

import numpy as np

from ._accel import BACKEND, USE_NUMBA, njit

TINY = 1e-300


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _nb_cumsum(a):
    n = a.shape[0]
    out = np.empty(n)
    s = 0.0
    c = 0.0
    for i in range(n):
        t = s + a[i]
        if math.isinf(t):
            c = 0.0  # no compensation past an overflow, or inf - inf poisons it
        elif abs(s) >= abs(a[i]):
            c += (s - t) + a[i]
        else:
            c += (a[i] - t) + s
        s = t
        out[i] = s + c
    return out


@njit(cache=True, nogil=True)
def _nb_revcumsum(a):
    n = a.shape[0]
    out = np.empty(n)
    s = 0.0
    c = 0.0
    for i in range(n - 1, -1, -1):
        t = s + a[i]
        if math.isinf(t):
            c = 0.0  # no compensation past an overflow, or inf - inf poisons it
        elif abs(s) >= abs(a[i]):
            c += (s - t) + a[i]
        else:
            c += (a[i] - t) + s
        s = t
        out[i] = s + c
    return out


@njit(cache=True, nogil=True)
def _nb_sum(a):
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        t = s + a[i]
        if math.isinf(t):
            c = 0.0  # no compensation past an overflow, or inf - inf poisons it
        elif abs(s) >= abs(a[i]):
            c += (s - t) + a[i]
        else:
            c += (a[i] - t) + s
        s = t
    return s + c


@njit(cache=True, nogil=True)
def _nb_tail_transform(hx, u, inner, outer):
    n = hx.shape[0]
    w = np.empty(n)
    for i in range(n):
        w[i] = u[i] * hx[i] ** inner
    tail = _nb_revcumsum(w)
    for i in range(n):
        t = tail[i]
        if t <= 0.0:
            tail[i] = 0.0
        else:
            tail[i] = t ** outer
    return tail


@njit(cache=True, nogil=True)
def _nb_profiles(x, hx, u, vhat, inner, outer):
    n = x.shape[0]
    tail = _nb_tail_transform(hx, u, inner, outer)
    single = np.empty(n)
    weighted = np.empty(n)
    for i in range(n):
        num = vhat[i] * tail[i]
        weighted[i] = num
        if x[i] <= 0.0:
            single[i] = np.inf
        else:
            single[i] = num / x[i]
    double = _nb_cumsum(weighted)
    for i in range(n):
        if hx[i] <= 0.0:
            double[i] = np.inf
        else:
            double[i] = double[i] / hx[i]
    return single, double


@njit(cache=True, nogil=True)
def _nb_quotient_parts(x, hx, u, v, p, q):
    n = x.shape[0]
    a = np.empty(n)
    b = np.empty(n)
    for i in range(n):
        a[i] = u[i] * hx[i] ** q
        b[i] = v[i] * x[i] ** p
    return _nb_sum(a), _nb_sum(b)


@njit(cache=True, nogil=True)
def _nb_log_quotient(x, u, v, p, q):
    hx = _nb_cumsum(x)
    num, den = _nb_quotient_parts(x, hx, u, v, p, q)
    if den <= 0.0:
        return np.inf
    if num <= 0.0:
        return -np.inf
    return math.log(num) / q - math.log(den) / p


@njit(cache=True, nogil=True)
def _nb_normalize(x):
    hx = _nb_cumsum(x)
    total = hx[hx.shape[0] - 1]
    return x / total


@njit(cache=True, nogil=True)
def _nb_scaled_map(x, w, vhat, inner, outer):
    # v_hat (sum_{i>=n} w_i Hx(i)^inner)^outer up to a constant, then normalised;
    # dividing by the largest v_hat and tail first keeps the power from overflowing
    n = x.shape[0]
    hx = _nb_cumsum(x)
    terms = np.empty(n)
    for i in range(n):
        terms[i] = w[i] * hx[i] ** inner
    tail = _nb_revcumsum(terms)
    t0 = tail[0]
    vmax = vhat.max()
    out = np.zeros(n)
    if t0 <= 0.0:
        return out
    for i in range(n):
        if tail[i] > 0.0:
            out[i] = (vhat[i] / vmax) * (tail[i] / t0) ** outer
    return _nb_normalize(out)


@njit(cache=True, nogil=True)
def _nb_stationary_map(x, u, vhat, p_star, q):
    return _nb_scaled_map(x, u, vhat, q - 1.0, p_star - 1.0)


@njit(cache=True, nogil=True)
def _nb_upper_map(x, u, vhat, p_star, q):
    return _nb_scaled_map(x, u, vhat, q / p_star, p_star / q)


@njit(cache=True, nogil=True)
def _nb_fixed_point(x0, u, v, vhat, p, q, max_iters, tol):
    p_star = p / (p - 1.0)
    x = _nb_normalize(x0)
    best_x = x.copy()
    best = _nb_log_quotient(x, u, v, p, q)
    prev = best
    iters = 0
    converged = False
    for it in range(max_iters):
        iters = it + 1
        x_new = _nb_stationary_map(x, u, vhat, p_star, q)
        val = _nb_log_quotient(x_new, u, v, p, q)
        diff = 0.0
        for i in range(x.shape[0]):
            d = abs(x_new[i] - x[i])
            if d > diff:
                diff = d
        x = x_new
        if val > best:
            best = val
            best_x = x.copy()
        if abs(val - prev) <= tol and diff <= math.sqrt(tol):
            converged = True
            break
        prev = val
    return best_x, best, iters, converged


@njit(cache=True, nogil=True)
def _nb_ascent(x0, u, v, p, q, max_iters, tol):
    n = x0.shape[0]
    x = x0.copy()
    # normalise to unit weighted p-norm so the gradient stays O(1)
    hx = _nb_cumsum(x)
    num, den = _nb_quotient_parts(x, hx, u, v, p, q)
    x = x / den ** (1.0 / p)
    f = _nb_log_quotient(x, u, v, p, q)
    iters = 0
    converged = False
    stall = 0
    for it in range(max_iters):
        iters = it + 1
        hx = _nb_cumsum(x)
        num, den = _nb_quotient_parts(x, hx, u, v, p, q)
        w = np.empty(n)
        for i in range(n):
            w[i] = u[i] * hx[i] ** (q - 1.0)
        tail = _nb_revcumsum(w)
        g = np.empty(n)
        for i in range(n):
            # gradient in the metric diag(x): keeps steps proportionate near zero
            g[i] = x[i] * (tail[i] / num - v[i] * x[i] ** (p - 1.0) / den)
        step = 1.0
        accepted = False
        f_new = f
        x_new = x
        while step > 1e-20:
            cand = x + step * g
            for i in range(n):
                if cand[i] < 0.0:
                    cand[i] = 0.0
            if cand[0] < TINY:
                cand[0] = TINY
            val = _nb_log_quotient(cand, u, v, p, q)
            if val > f:
                accepted = True
                f_new = val
                x_new = cand
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        gain = f_new - f
        hx = _nb_cumsum(x_new)
        num, den = _nb_quotient_parts(x_new, hx, u, v, p, q)
        x = x_new / den ** (1.0 / p)
        f = f_new
        if gain <= tol:
            stall += 1
            if stall >= 5:
                converged = True
                break
        else:
            stall = 0
    return x, f, iters, converged


@njit(cache=True, nogil=True)
def _nb_sym_matvec(z, u, v):
    w = z / np.sqrt(v)
    hx = _nb_cumsum(w)
    tail = _nb_revcumsum(u * hx)
    return tail / np.sqrt(v)


@njit(cache=True, nogil=True)
def _nb_power_iteration(z0, u, v, max_iters, tol):
    z = z0 / np.sqrt(np.sum(z0 * z0))
    lam = 0.0
    iters = 0
    converged = False
    for it in range(max_iters):
        iters = it + 1
        y = _nb_sym_matvec(z, u, v)
        lam_new = _nb_sum(z * y)
        norm = math.sqrt(_nb_sum(y * y))
        if norm <= 0.0:
            lam = 0.0
            break
        z_new = y / norm
        diff = 0.0
        for i in range(z.shape[0]):
            d = abs(z_new[i] - z[i])
            if d > diff:
                diff = d
        z = z_new
        if abs(lam_new - lam) <= tol * abs(lam_new) and diff <= math.sqrt(tol):
            lam = lam_new
            converged = True
            break
        lam = lam_new
    return lam, z, iters, converged


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------


def _np_cumsum(a):
    return np.cumsum(np.asarray(a, dtype=np.longdouble)).astype(np.float64)


def _np_revcumsum(a):
    a = np.asarray(a, dtype=np.longdouble)
    return np.cumsum(a[::-1])[::-1].astype(np.float64)


def _np_sum(a):
    return math.fsum(np.asarray(a, dtype=np.float64))


def _np_tail_transform(hx, u, inner, outer):
    tail = _np_revcumsum(u * hx**inner)
    out = np.zeros_like(tail)
    pos = tail > 0.0
    out[pos] = tail[pos] ** outer
    return out


def _np_profiles(x, hx, u, vhat, inner, outer):
    tail = _np_tail_transform(hx, u, inner, outer)
    weighted = vhat * tail
    with np.errstate(divide="ignore", invalid="ignore"):
        single = np.where(x > 0.0, weighted / np.where(x > 0.0, x, 1.0), np.inf)
        double = np.where(hx > 0.0, _np_cumsum(weighted) / np.where(hx > 0.0, hx, 1.0), np.inf)
    return single, double


def _np_quotient_parts(x, hx, u, v, p, q):
    return _np_sum(u * hx**q), _np_sum(v * x**p)


def _np_log_quotient(x, u, v, p, q):
    hx = _np_cumsum(x)
    num, den = _np_quotient_parts(x, hx, u, v, p, q)
    if den <= 0.0:
        return math.inf
    if num <= 0.0:
        return -math.inf
    return math.log(num) / q - math.log(den) / p


def _np_normalize(x):
    return x / _np_cumsum(x)[-1]


def _np_scaled_map(x, w, vhat, inner, outer):
    tail = _np_revcumsum(w * _np_cumsum(x) ** inner)
    if tail[0] <= 0.0:
        return np.zeros_like(tail)
    out = np.zeros_like(tail)
    pos = tail > 0.0
    out[pos] = (vhat[pos] / vhat.max()) * (tail[pos] / tail[0]) ** outer
    return _np_normalize(out)


def _np_stationary_map(x, u, vhat, p_star, q):
    return _np_scaled_map(x, u, vhat, q - 1.0, p_star - 1.0)


def _np_upper_map(x, u, vhat, p_star, q):
    return _np_scaled_map(x, u, vhat, q / p_star, p_star / q)


def _np_fixed_point(x0, u, v, vhat, p, q, max_iters, tol):
    p_star = p / (p - 1.0)
    x = _np_normalize(x0)
    best_x = x.copy()
    best = prev = _np_log_quotient(x, u, v, p, q)
    iters = 0
    converged = False
    for it in range(max_iters):
        iters = it + 1
        x_new = _np_stationary_map(x, u, vhat, p_star, q)
        val = _np_log_quotient(x_new, u, v, p, q)
        diff = float(np.max(np.abs(x_new - x)))
        x = x_new
        if val > best:
            best, best_x = val, x.copy()
        if abs(val - prev) <= tol and diff <= math.sqrt(tol):
            converged = True
            break
        prev = val
    return best_x, best, iters, converged


def _np_ascent(x0, u, v, p, q, max_iters, tol):
    x = np.array(x0, dtype=np.float64)
    x = x / _np_sum(v * x**p) ** (1.0 / p)
    f = _np_log_quotient(x, u, v, p, q)
    iters = 0
    converged = False
    stall = 0
    for it in range(max_iters):
        iters = it + 1
        hx = _np_cumsum(x)
        num, den = _np_quotient_parts(x, hx, u, v, p, q)
        g = x * (_np_revcumsum(u * hx ** (q - 1.0)) / num - v * x ** (p - 1.0) / den)
        step = 1.0
        accepted = False
        while step > 1e-20:
            cand = np.maximum(x + step * g, 0.0)
            cand[0] = max(cand[0], TINY)
            val = _np_log_quotient(cand, u, v, p, q)
            if val > f:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        gain = val - f
        x = cand / _np_sum(v * cand**p) ** (1.0 / p)
        f = val
        if gain <= tol:
            stall += 1
            if stall >= 5:
                converged = True
                break
        else:
            stall = 0
    return x, f, iters, converged


def _np_sym_matvec(z, u, v):
    root = np.sqrt(v)
    return _np_revcumsum(u * _np_cumsum(z / root)) / root


def _np_power_iteration(z0, u, v, max_iters, tol):
    z = z0 / np.linalg.norm(z0)
    lam = 0.0
    iters = 0
    converged = False
    for it in range(max_iters):
        iters = it + 1
        y = _np_sym_matvec(z, u, v)
        lam_new = _np_sum(z * y)
        norm = math.sqrt(_np_sum(y * y))
        if norm <= 0.0:
            lam = 0.0
            break
        z_new = y / norm
        diff = float(np.max(np.abs(z_new - z)))
        z = z_new
        if abs(lam_new - lam) <= tol * abs(lam_new) and diff <= math.sqrt(tol):
            lam = lam_new
            converged = True
            break
        lam = lam_new
    return lam, z, iters, converged


_NAMES = (
    "cumsum",
    "revcumsum",
    "fsum",
    "tail_transform",
    "profiles",
    "quotient_parts",
    "log_quotient",
    "stationary_map",
    "upper_map",
    "fixed_point",
    "ascent",
    "sym_matvec",
    "power_iteration",
)
_SOURCES = ("cumsum", "revcumsum", "sum", "tail_transform", "profiles", "quotient_parts",
            "log_quotient", "stationary_map", "upper_map", "fixed_point", "ascent",
            "sym_matvec", "power_iteration")


class _KernelSet:
    def __init__(self, prefix):
        self.name = prefix.strip("_")
        for public, src in zip(_NAMES, _SOURCES):
            setattr(self, public, globals()[f"{prefix}{src}"])


NUMBA_KERNELS = _KernelSet("_nb_")
NUMPY_KERNELS = _KernelSet("_np_")
ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

cumsum = ACTIVE.cumsum
revcumsum = ACTIVE.revcumsum
fsum = ACTIVE.fsum
tail_transform = ACTIVE.tail_transform
profiles = ACTIVE.profiles
quotient_parts = ACTIVE.quotient_parts
log_quotient = ACTIVE.log_quotient
stationary_map = ACTIVE.stationary_map
upper_map = ACTIVE.upper_map
fixed_point = ACTIVE.fixed_point
ascent = ACTIVE.ascent
sym_matvec = ACTIVE.sym_matvec
power_iteration = ACTIVE.power_iteration

__all__ = list(_NAMES) + ["BACKEND", "NUMBA_KERNELS", "NUMPY_KERNELS", "ACTIVE", "TINY"]
