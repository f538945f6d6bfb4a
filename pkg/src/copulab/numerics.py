"""Shared quadrature and scanning utilities.

Composite Simpson rules on uniform grids are the workhorse everywhere:
copula operations are smooth away from finitely many kink curves, and the
default 256-panel rule keeps end-to-end errors near 1e-4 or better at
desk-scale runtimes.  All reductions are plain row-major numpy sums, so
results are bit-reproducible across runs.
"""

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NonPositive


def unit_nodes(n_panels):
    """Nodes 0, 1/n, ..., 1 of a uniform grid with ``n_panels`` panels."""
    return np.linspace(0.0, 1.0, n_panels + 1)


def simpson_weights(n_panels, a=0.0, b=1.0):
    """Composite Simpson weights on ``n_panels`` (even) uniform panels of [a, b]."""
    if n_panels % 2 != 0:
        raise ValueError("composite Simpson needs an even panel count")
    h = (b - a) / n_panels
    w = np.full(n_panels + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def simpson_nodes_weights(n_panels, a=0.0, b=1.0):
    return np.linspace(a, b, n_panels + 1), simpson_weights(n_panels, a, b)


def integrate_simpson(fn, a, b, n_panels=256):
    """Composite Simpson integral of a vectorized scalar function."""
    x, w = simpson_nodes_weights(n_panels, a, b)
    return float(w @ np.asarray(fn(x), dtype=float))


def integrate_simpson_2d(fn, n_panels=256):
    """Tensor Simpson integral of ``fn(u, v)`` over the unit square.

    ``fn`` must broadcast over meshgrid arrays.
    """
    x, w = simpson_nodes_weights(n_panels)
    U, V = np.meshgrid(x, x, indexing="ij")
    vals = np.asarray(fn(U, V), dtype=float)
    return float(w @ vals @ w)


def bisect_smallest(predicate, lo, hi, tol=1e-10):
    """Smallest x in [lo, hi] with ``predicate(x)`` true, for monotone predicates.

    Assumes ``predicate(hi)`` holds; if ``predicate(lo)`` holds, returns ``lo``.
    Converges to the infimum of the true set, which lands bisection exactly on
    jump points of discontinuous monotone functions (atoms).
    """
    if predicate(lo):
        return lo
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if predicate(mid):
            b = mid
        else:
            a = mid
    return b


def scan_extremum(fn, a=0.0, b=1.0, n_scan=4097, mode="max"):
    """Extremum of a scalar function by dense scan plus golden-section refinement.

    No derivative is assumed: the scan brackets the best node and a bounded
    golden/Brent refinement polishes it inside the two neighboring cells.
    """
    x = np.linspace(a, b, n_scan)
    vals = np.asarray([fn(t) for t in x], dtype=float) if not _vectorized_ok(fn, x) else np.asarray(fn(x), dtype=float)
    sign = -1.0 if mode == "max" else 1.0
    i = int(np.argmin(sign * vals))
    lo = x[max(i - 1, 0)]
    hi = x[min(i + 1, n_scan - 1)]
    best = sign * vals[i]
    if hi > lo:
        res = minimize_scalar(lambda t: sign * fn(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return sign * best


def _vectorized_ok(fn, x):
    try:
        out = fn(x[:2])
        return np.shape(out) == (2,)
    except Exception:
        return False


def cumulative_integral(values, x):
    """Cumulative integral of sampled values along the last axis.

    Uses scipy's cumulative Simpson rule (fourth order on uniform grids),
    anchored at zero.
    """
    from scipy.integrate import cumulative_simpson

    return cumulative_simpson(values, x=x, initial=0.0)


def fit_geometric_rate(seq):
    """Least-squares geometric rate of a positive sequence.

    Fits log(seq_n) = log(c) + n log(r) over n = 1..len(seq) and returns r.
    """
    seq = np.asarray(seq, dtype=float)
    if seq.size < 3:
        raise ValueError("need at least 3 points to fit a rate")
    if np.any(seq <= 0.0):
        raise NonPositive("sequence entries must be positive; truncate at the numerical floor first")
    n = np.arange(1, seq.size + 1, dtype=float)
    slope, _ = np.polyfit(n, np.log(seq), 1)
    return float(np.exp(slope))


def log_linear_r2(seq):
    """Coefficient of determination of the log-linear fit used by the rate fitter."""
    seq = np.asarray(seq, dtype=float)
    n = np.arange(1, seq.size + 1, dtype=float)
    y = np.log(seq)
    coef = np.polyfit(n, y, 1)
    resid = y - np.polyval(coef, n)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot
