"""Formula-level copula perturbations.

The two blend perturbations return explicit mixtures so downstream mixing
code can exploit the linear structure; the multiplicative transforms return
closures with analytic densities and partials expanded from the base model.
Every transform is validated on a 64-grid at tolerance 1e-6 on construction.
"""

from .core import M, PI, Transformed, UpperBound, make_mixture, validate
from .errors import NotACopula


def tilde(copula, theta):
    """Blend toward independence: (1 - theta) C + theta Pi."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    return make_mixture([1.0 - theta, theta], [copula, PI])


def hat(copula, theta):
    """Blend toward the comonotone bound: (1 - theta) C + theta M.

    The min-component is carried as exact singular mass on the diagonal.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    return make_mixture([1.0 - theta, theta], [copula, M])


def mesiar(copula, theta):
    """Quadratic perturbation C + theta (x - C)(y - C).

    Applied to the product copula this reproduces the FGM family exactly.
    The result decomposes as (1 - theta) C + theta mesiar(C, 1), which the
    linearity in theta of the formula makes exact.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if theta == 0.0:
        return copula
    if isinstance(copula, UpperBound):
        return M      # (x - min)(y - min) vanishes identically
    base = copula

    def cdf(u, v):
        c = base.cdf(u, v)
        return c + theta * (u - c) * (v - c)

    def density(u, v):
        c = base.cdf(u, v)
        cu = base.partial_u(u, v)
        cv = base.partial_v(u, v)
        d = base.ac_density(u, v)
        return d + theta * (1.0 - cu - cv - (u + v - 2.0 * c) * d + 2.0 * cu * cv)

    def pu(x, v):
        c = base.cdf(x, v)
        cu = base.partial_u(x, v)
        return cu + theta * ((v - c) - cu * (x + v - 2.0 * c))

    def pv(u, y):
        c = base.cdf(u, y)
        cv = base.partial_v(u, y)
        return cv + theta * ((u - c) - cv * (u + y - 2.0 * c))

    has_density = base.singular_m_mass == 0.0
    model = Transformed(cdf,
                        density_fn=density if has_density else None,
                        pu_fn=pu, pv_fn=pv, base=base,
                        label=f"mesiar({base.model_id()},{theta:g})")
    report = validate(model, 64, 1e-6)
    if not report.passed:
        raise NotACopula(f"quadratic perturbation failed validation: {report.summary()}")
    return model


def dolati(copula):
    """Order-statistics shuffle transform C (u + v - C).

    The CDF of the randomized order-statistics pairing of two independent
    draws from the base pair; boundary values are preserved by construction.
    """
    if isinstance(copula, UpperBound):
        return PI     # min(u,v) (u + v - min(u,v)) = u v
    base = copula

    def cdf(u, v):
        c = base.cdf(u, v)
        return c * (u + v - c)

    def density(u, v):
        c = base.cdf(u, v)
        cu = base.partial_u(u, v)
        cv = base.partial_v(u, v)
        d = base.ac_density(u, v)
        return d * (u + v - 2.0 * c) + cu + cv - 2.0 * cu * cv

    def pu(x, v):
        c = base.cdf(x, v)
        cu = base.partial_u(x, v)
        return cu * (x + v - c) + c * (1.0 - cu)

    def pv(u, y):
        c = base.cdf(u, y)
        cv = base.partial_v(u, y)
        return cv * (u + y - c) + c * (1.0 - cv)

    has_density = base.singular_m_mass == 0.0
    model = Transformed(cdf,
                        density_fn=density if has_density else None,
                        pu_fn=pu, pv_fn=pv, base=base,
                        label=f"dolati({base.model_id()})")
    report = validate(model, 64, 1e-6)
    if not report.passed:
        raise NotACopula(f"order-statistics transform failed validation: {report.summary()}")
    return model


def apply_perturbation(copula, params):
    """Apply a parsed perturbation spec to a model."""
    if params.kind == "none":
        return copula
    if params.kind == "tilde":
        return tilde(copula, params.theta)
    if params.kind == "hat":
        return hat(copula, params.theta)
    if params.kind == "mesiar":
        return mesiar(copula, params.theta)
    return dolati(copula)
