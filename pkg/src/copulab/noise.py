"""Copulas of noise-perturbed random vectors.

Three constructions, each with a generic quadrature form and, where the
marginals are uniform, a closed piecewise form:

  one-sided noise    copula of (X+Z, Y)     -- c5_general / C5MUniform
  common noise       copula of (X+Z, Y+Z)   -- c6_general / C6IndepUniform
  independent noise  copula of (X+Z1, Y+Z2) -- c7_general / c7_uniform_regions

The closed common-noise form is assembled from the sum-variable cases of the
conditioning derivation composed with the two-uniform-sum CDF; an
alternative region-indexed table for the same copula is retained only as
``c6_region_table_variant`` because it disagrees numerically with the
quadrature oracle in several regions (see docs/noise-copula-notes.md).

Generalized inverses at q = 0, 1 give infinite arguments; the marginal CDFs
map these to 0/1, which clamps the integrand to the copula's boundary values
exactly as the groundedness of the constructions requires.
"""

import numpy as np

from .core import Copula, M
from .marginals import ConvolvedMarginal, uniform_marginal
from .numerics import simpson_nodes_weights

_EPS = 1e-12


# ---------------------------------------------------------------------------
# sum of two independent standard uniforms


def irwin_hall2_cdf(x):
    """CDF of the sum of two independent uniform(0,1) variables."""
    x = np.asarray(x, dtype=float)
    out = np.select(
        [x < 0.0, x < 1.0, x < 2.0],
        [0.0, 0.5 * x * x, 1.0 - 0.5 * (2.0 - x) ** 2],
        default=1.0,
    )
    return out if out.shape else float(out)


def irwin_hall2_inv(q):
    """Piecewise closed inverse of the two-uniform-sum CDF."""
    q = np.asarray(q, dtype=float)
    out = np.where(q <= 0.5, np.sqrt(2.0 * np.clip(q, 0.0, None)),
                   2.0 - np.sqrt(2.0 * np.clip(1.0 - q, 0.0, None)))
    return out if out.shape else float(out)


def irwin_hall2_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.select([x < 0.0, x < 1.0, x < 2.0], [0.0, x, 2.0 - x], default=0.0)
    return out if out.shape else float(out)


def _a(x):
    """Lower reachability edge 1 - sqrt(2(1-x))."""
    return 1.0 - np.sqrt(2.0 * (1.0 - np.asarray(x, dtype=float)))


def _b(x):
    """Upper reachability edge sqrt(2x)."""
    return np.sqrt(2.0 * np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# closed form: comonotone pair, one side shifted by uniform noise


class C5MUniform(Copula):
    """Copula of (X+Z, Y) for a comonotone uniform pair and uniform noise.

    Four branches: the kernel from state u is uniform on [0, sqrt(2u)] when
    u <= 1/2 and uniform on [1 - sqrt(2(1-u)), 1] otherwise, which makes the
    two corner regions (value u above the upper edge, value v below the lower
    edge) exactly density-free.  Not symmetric.
    """

    def cdf(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        b = _b(np.minimum(u, 0.5))
        a = _a(np.maximum(u, 0.5))
        low = np.where(v >= b, u, v * b - 0.5 * v * v)
        high = np.where(v <= a, v, v - 0.5 * (v - a) ** 2)
        out = np.where(u <= 0.5, low, high)
        return out if out.shape else float(out)

    def ac_density(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        uc = np.clip(u, _EPS, 1.0 - _EPS)
        b = _b(np.minimum(uc, 0.5))
        sq = np.sqrt(2.0 * (1.0 - np.maximum(uc, 0.5)))
        low = np.where(v < b, 1.0 / b, 0.0)
        high = np.where(v > 1.0 - sq, 1.0 / sq, 0.0)
        out = np.where(u <= 0.5, low, high)
        return out if out.shape else float(out)

    def partial_u(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        xc = np.clip(x, _EPS, 1.0 - _EPS)
        b = _b(np.minimum(xc, 0.5))
        a = _a(np.maximum(xc, 0.5))
        sq = np.sqrt(2.0 * (1.0 - np.maximum(xc, 0.5)))
        low = np.where(v >= b, 1.0, v / b)
        high = np.where(v <= a, 0.0, (v - a) / sq)
        out = np.where(x <= 0.5, low, high)
        return out if out.shape else float(out)

    def partial_v(self, u, y):
        u = np.asarray(u, dtype=float)
        y = np.asarray(y, dtype=float)
        b = _b(np.minimum(u, 0.5))
        a = _a(np.maximum(u, 0.5))
        low = np.where(y >= b, 0.0, b - y)
        high = np.where(y <= a, 1.0, 1.0 - (y - a))
        out = np.where(u <= 0.5, low, high)
        return out if out.shape else float(out)

    def cond_quantile(self, x, q):
        if isinstance(x, np.ndarray) or isinstance(q, np.ndarray):
            x = np.asarray(x, dtype=float)
            q = np.asarray(q, dtype=float)
            return np.where(x <= 0.5, q * _b(np.minimum(x, 0.5)),
                            _a(np.maximum(x, 0.5)) + q * (1.0 - _a(np.maximum(x, 0.5))))
        x = float(x)
        q = min(max(float(q), 0.0), 1.0)
        if x <= 0.5:
            return q * (2.0 * x) ** 0.5
        a = 1.0 - (2.0 * (1.0 - x)) ** 0.5
        return a + q * (1.0 - a)

    def model_id(self):
        return "c5-m-uniform"


# ---------------------------------------------------------------------------
# closed form: independent pair, both sides shifted by the same uniform noise


def _g_cases(s, t):
    """Sum-variable CDF cases of the common-noise construction, for s <= t."""
    case1 = 0.5 * s * s * t - s ** 3 / 6.0
    case2 = 0.5 * s * s - np.clip(s - t + 1.0, 0.0, None) ** 3 / 6.0
    case3 = 0.5 * s * s
    case4 = 1.0 - 0.5 * (2.0 - s) ** 2 - (2.0 - t) ** 2 * (2.0 - t + 3.0 * s - 3.0) / 6.0
    return np.select([(t < 1.0), (s < 1.0) & (t <= 1.0 + s), (s < 1.0)],
                     [case1, case2, case3], default=case4)


def _g_ds(s, t):
    """d/ds of the sum-variable cases."""
    case1 = s * t - 0.5 * s * s
    case2 = s - 0.5 * np.clip(s - t + 1.0, 0.0, None) ** 2
    case3 = s * np.ones_like(t)
    case4 = (2.0 - s) - 0.5 * (2.0 - t) ** 2
    return np.select([(t < 1.0), (s < 1.0) & (t <= 1.0 + s), (s < 1.0)],
                     [case1, case2, case3], default=case4)


def _g_dt(s, t):
    """d/dt of the sum-variable cases."""
    case1 = 0.5 * s * s
    case2 = 0.5 * np.clip(s - t + 1.0, 0.0, None) ** 2
    case3 = np.zeros_like(s + t)
    case4 = (2.0 * (2.0 - t) * (2.0 - t + 3.0 * s - 3.0) + (2.0 - t) ** 2) / 6.0
    return np.select([(t < 1.0), (s < 1.0) & (t <= 1.0 + s), (s < 1.0)],
                     [case1, case2, case3], default=case4)


def _g_dsdt(s, t):
    """Mixed second derivative of the sum-variable cases."""
    return np.select([(t < 1.0), (s < 1.0) & (t <= 1.0 + s), (s < 1.0)],
                     [s, np.clip(s - t + 1.0, 0.0, None), np.zeros_like(s + t)],
                     default=2.0 - t)


class C6IndepUniform(Copula):
    """Copula of (X+Z, Y+Z) for independent uniforms with common uniform noise.

    Built by substituting the two-uniform-sum inverse into the sum-variable
    cases; symmetric, so arguments are sorted before dispatch.  The density
    grows without bound toward the (1,1) corner, so evaluations are clamped
    1e-12 inside the square.
    """

    def _xy(self, u, v):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        return irwin_hall2_inv(u), irwin_hall2_inv(v)

    def cdf(self, u, v):
        x, y = self._xy(u, v)
        s, t = np.minimum(x, y), np.maximum(x, y)
        out = _g_cases(s, t)
        return out if np.shape(out) else float(out)

    def ac_density(self, u, v):
        u = np.clip(np.asarray(u, dtype=float), _EPS, 1.0 - _EPS)
        v = np.clip(np.asarray(v, dtype=float), _EPS, 1.0 - _EPS)
        x, y = irwin_hall2_inv(u), irwin_hall2_inv(v)
        s, t = np.minimum(x, y), np.maximum(x, y)
        out = _g_dsdt(s, t) / (irwin_hall2_pdf(x) * irwin_hall2_pdf(y))
        return out if np.shape(out) else float(out)

    def partial_u(self, x, v):
        if not (isinstance(x, np.ndarray) or isinstance(v, np.ndarray)):
            return self._partial_u_scalar(float(x), float(v))
        u = np.clip(np.asarray(x, dtype=float), _EPS, 1.0 - _EPS)
        vv = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        xs, ys = irwin_hall2_inv(u), irwin_hall2_inv(vv)
        small = xs <= ys
        s, t = np.minimum(xs, ys), np.maximum(xs, ys)
        d = np.where(small, _g_ds(s, t), _g_dt(s, t))
        out = d / irwin_hall2_pdf(xs)
        return out if np.shape(out) else float(out)

    def _partial_u_scalar(self, x, v):
        u = min(max(x, _EPS), 1.0 - _EPS)
        vv = min(max(v, 0.0), 1.0)
        xs = (2.0 * u) ** 0.5 if u <= 0.5 else 2.0 - (2.0 * (1.0 - u)) ** 0.5
        ys = (2.0 * vv) ** 0.5 if vv <= 0.5 else 2.0 - (2.0 * max(1.0 - vv, 0.0)) ** 0.5
        s, t = (xs, ys) if xs <= ys else (ys, xs)
        if t < 1.0:
            d = s * t - 0.5 * s * s if xs <= ys else 0.5 * s * s
        elif s < 1.0 and t <= 1.0 + s:
            r = s - t + 1.0
            d = s - 0.5 * r * r if xs <= ys else 0.5 * r * r
        elif s < 1.0:
            d = s if xs <= ys else 0.0
        else:
            if xs <= ys:
                d = (2.0 - s) - 0.5 * (2.0 - t) ** 2
            else:
                d = (2.0 * (2.0 - t) * (2.0 - t + 3.0 * s - 3.0) + (2.0 - t) ** 2) / 6.0
        f4 = xs if xs < 1.0 else 2.0 - xs
        return d / f4

    def partial_v(self, u, y):
        return self.partial_u(y, u)

    def model_id(self):
        return "c6-indep-uniform"


def c6_region_table_variant(u, v):
    """An alternative region-indexed table for the common-noise copula.

    Retained only for the documented comparison: in regions A, D, and E this
    table disagrees with the quadrature oracle (and with the sum-variable
    construction above), so it must not be used for computation.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s2u, s2v = _b(u), _b(v)
    r1u, r1v = np.sqrt(2.0 * (1.0 - u)), np.sqrt(2.0 * (1.0 - v))
    conds = [
        (u <= v) & (v <= 0.5),
        (v > 0.5) & (v <= 1.0 - 0.5 * (s2u - 1.0) ** 2) & (u <= 0.5),
        (v > 1.0 - 0.5 * (s2u - 1.0) ** 2) & (u <= 0.5),
        (0.5 <= u) & (u <= v),
        (0.5 <= v) & (v <= u),
        (u > 0.5) & (u <= 1.0 - 0.5 * (s2v - 1.0) ** 2) & (v <= 0.5),
        (u > 1.0 - 0.5 * (s2v - 1.0) ** 2) & (v <= 0.5),
        (v <= u) & (u <= 0.5),
    ]
    vals = [
        0.5 * u * s2v,
        u - (s2u + r1v - 1.0) ** 3 / 6.0,
        u,
        u - (1.0 - v) * (r1v + 3.0 - 3.0 * r1u) / 3.0,
        v - (1.0 - u) * (r1u + 3.0 - 3.0 * r1u) / 3.0,
        v - (s2v + r1u - 1.0) ** 3 / 6.0,
        v,
        0.5 * v * s2u,
    ]
    out = np.select(conds, vals, default=np.nan)
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# generic quadrature forms


def _noise_rule(f3, n_panels):
    """Simpson nodes/weights for integrating g(z) dF3(z).

    The unit-interval quantile integral is transformed to noise space, where
    the integrand stays smooth for unbounded noises (the quantile derivative
    blows up at the endpoints and would spoil the rule's order).  For uniform
    noise the two parameterizations coincide.  Panels refine on supports that
    are wide relative to the density's scale.
    """
    from .marginals import refine_panels

    n_panels = refine_panels(n_panels, f3)
    z, w = simpson_nodes_weights(n_panels, *f3.support)
    dens = np.asarray(f3.pdf(z), dtype=float)
    w = w * dens
    return z, w / w.sum()


def c5_general(copula, f1, f2, f3, n_panels=512):
    """Copula of (X+Z, Y) by smoothing the base copula over the noise law.

    Returns a vectorized function of (u, v).  The sum marginal is convolved
    numerically and inverted per evaluation point; ``f2`` is carried for
    interface completeness (the construction leaves the second coordinate
    untouched).
    """
    del f2
    z, w = _noise_rule(f3, n_panels)
    f4 = ConvolvedMarginal(f1, f3, rule=(z, w))

    def evaluate(u, v):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        u_b, v_b = np.broadcast_arrays(u_arr, v_arr)
        w4 = np.asarray(f4.inv_cdf(np.clip(u_b, 0.0, 1.0)))
        args = np.asarray(f1.cdf(w4[..., None] - z), dtype=float)
        vals = np.asarray(copula.cdf(args, v_b[..., None]), dtype=float)
        out = vals @ w
        out = np.where(u_b <= 0.0, 0.0, np.where(u_b >= 1.0, v_b, out))
        out = np.where(v_b <= 0.0, 0.0, np.where(v_b >= 1.0, u_b, out))
        return out if np.shape(u) or np.shape(v) else float(out[0])

    return evaluate


def c6_general(copula, f1, f2, f3, n_panels=512):
    """Copula of (X+Z, Y+Z): both coordinates smoothed over the same noise."""
    z, w = _noise_rule(f3, n_panels)
    f4 = ConvolvedMarginal(f1, f3, rule=(z, w))
    f5 = ConvolvedMarginal(f2, f3, rule=(z, w))

    def evaluate(u, v):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        u_b, v_b = np.broadcast_arrays(u_arr, v_arr)
        w4 = np.asarray(f4.inv_cdf(np.clip(u_b, 0.0, 1.0)))
        w5 = np.asarray(f5.inv_cdf(np.clip(v_b, 0.0, 1.0)))
        a1 = np.asarray(f1.cdf(w4[..., None] - z), dtype=float)
        a2 = np.asarray(f2.cdf(w5[..., None] - z), dtype=float)
        vals = np.asarray(copula.cdf(a1, a2), dtype=float)
        out = vals @ w
        out = np.where(u_b <= 0.0, 0.0, np.where(u_b >= 1.0, v_b, out))
        out = np.where(v_b <= 0.0, 0.0, np.where(v_b >= 1.0, u_b, out))
        return out if np.shape(u) or np.shape(v) else float(out[0])

    return evaluate


def c7_general(copula, f1, f2, g1, g2, n_panels=128):
    """Copula of (X+Z1, Y+Z2) for independent noises: tensor quadrature.

    The double integral over the two noise quantile variables uses an
    ``n_panels`` x ``n_panels`` Simpson rule per evaluation point.
    """
    z1, w1 = _noise_rule(g1, n_panels)
    z2, w2 = _noise_rule(g2, n_panels)
    f7 = ConvolvedMarginal(f1, g1, rule=(z1, w1))
    f8 = ConvolvedMarginal(f2, g2, rule=(z2, w2))

    def evaluate(u, v):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        u_b, v_b = np.broadcast_arrays(u_arr, v_arr)
        out = np.empty(u_b.shape)
        flat_u, flat_v, flat_o = u_b.ravel(), v_b.ravel(), out.ravel()
        for idx in range(flat_u.size):
            ui, vi = flat_u[idx], flat_v[idx]
            if ui <= 0.0 or vi <= 0.0:
                flat_o[idx] = 0.0
                continue
            if ui >= 1.0:
                flat_o[idx] = vi
                continue
            if vi >= 1.0:
                flat_o[idx] = ui
                continue
            x7 = float(f7.inv_cdf(ui))
            y8 = float(f8.inv_cdf(vi))
            a = np.asarray(f1.cdf(x7 - z1), dtype=float)
            b = np.asarray(f2.cdf(y8 - z2), dtype=float)
            vals = np.asarray(copula.cdf(a[:, None], b[None, :]), dtype=float)
            flat_o[idx] = float(w1 @ vals @ w2)
        return out if np.shape(u) or np.shape(v) else float(out.ravel()[0])

    return evaluate


def c7_uniform_regions(copula, u, v, n_panels=128):
    """All-uniform independent-noise copula via the four-region reduction.

    The quadrant of (u, v) fixes the integration rectangle over the two
    noise variables plus additive closed terms in the reachability edges
    a(x) and b(x); the integrals themselves are evaluated numerically.
    """
    u = float(u)
    v = float(v)
    if u <= 0.0 or v <= 0.0:
        return 0.0
    if u >= 1.0:
        return v
    if v >= 1.0:
        return u
    au, bu = float(_a(u)), float(_b(u))
    av, bv = float(_a(v)), float(_b(v))

    def block(lo1, hi1, lo2, hi2, arg1, arg2):
        if hi1 <= lo1 or hi2 <= lo2:
            return 0.0
        t1, w1 = simpson_nodes_weights(n_panels, lo1, hi1)
        t2, w2 = simpson_nodes_weights(n_panels, lo2, hi2)
        A1 = arg1(t1)[:, None]
        A2 = arg2(t2)[None, :]
        vals = np.asarray(copula.cdf(np.clip(A1, 0.0, 1.0) + 0.0 * A2,
                                     np.clip(A2, 0.0, 1.0) + 0.0 * A1), dtype=float)
        return float(w1 @ vals @ w2)

    if u <= 0.5 and v <= 0.5:
        return block(0.0, bu, 0.0, bv, lambda t: bu - t, lambda t: bv - t)
    if u <= 0.5:
        return block(0.0, bu, av, 1.0, lambda t: bu - t, lambda t: 1.0 + av - t) + u * av
    if v <= 0.5:
        return block(au, 1.0, 0.0, bv, lambda t: 1.0 + au - t, lambda t: bv - t) + v * au
    return (block(au, 1.0, av, 1.0, lambda t: 1.0 + au - t, lambda t: 1.0 + av - t)
            + u * av + v * au - au * av)


def tail_coeffs_of_noise(copula_id):
    """(lower, upper) tail coefficients of a closed-form noise copula.

    Both vanish for the implemented constructions: one-sided noise destroys
    the comonotone pair's tails, and common noise cannot create tails for an
    independent pair.
    """
    from .dependence import tail_lower_report, tail_upper_report

    models = {"c5-m-uniform": C5MUniform(), "c6-indep-uniform": C6IndepUniform()}
    if isinstance(copula_id, str):
        model = models[copula_id]
    else:
        model = copula_id
    lo = tail_lower_report(model).value
    hi = tail_upper_report(model).value
    if not isinstance(model, type(M)) and (lo > 0.02 or hi > 0.02):
        raise ValueError(f"noise copula tails expected to vanish, got ({lo:.3g}, {hi:.3g})")
    return lo, hi


def noise_copula(copula_id):
    """Closed-form noise copula models by CLI identifier."""
    models = {"c5-m-uniform": C5MUniform, "c6-indep-uniform": C6IndepUniform}
    if copula_id not in models:
        from .errors import SpecError

        raise SpecError("noise", f"unknown noise copula id {copula_id!r}; "
                                 f"known: {sorted(models)}")
    return models[copula_id]()


UNIFORM01 = uniform_marginal(0.0, 1.0)
