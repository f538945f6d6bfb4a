"""Mixing coefficients of copula-generated stationary chains.

For a transition copula decomposed as (1 - s) times an absolutely continuous
part with density c plus a diagonal atom of mass s, the one-step coefficients
are

    beta = int_x [ s + int_y ((1-s) c(x,y) - 1)^+ dy ] dx
    phi  = max_x [ s + int_y ((1-s) c(x,y) - 1)^+ dy ]
    psi  = inf                         if s > 0
         = ess sup |c(x,y) - 1|        otherwise

The maximizing event in beta/phi is realized analytically as the positive
part set plus the atom; no search over sets happens.  The psi value is the
limit of the ratio-mixing sup over shrinking rectangles for continuous
densities and an upper bound in general; any diagonal atom makes the ratio
blow up, hence the infinity.

Coefficients below 1e-10 are reported as exactly 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_GRID, GridCopula, ac_decompose
from .numerics import fit_geometric_rate, simpson_nodes_weights, unit_nodes
from .products import CHAIN_GRID, binomial_average, fold, joint_hat, joint_tilde, n_fold

FLOOR = 1e-10
PSI_SCAN = 512


def _floor(x):
    return 0.0 if abs(x) < FLOOR else float(x)


def _is_cell_grid(model):
    return isinstance(model, GridCopula) and model.density_nodes is None


def _row_positive_mass(model, n_panels):
    """Per-x integrals of ((1-s)c - 1)^+ plus the outer Simpson weights."""
    s = model.singular_m_mass
    if _is_cell_grid(model):
        cells = (1.0 - s) * model._cells
        rows = np.maximum(cells - 1.0, 0.0).sum(axis=1) / model.n
        weights = np.full(model.n, 1.0 / model.n)
        return s, rows, weights
    x, w = simpson_nodes_weights(n_panels)
    U, V = np.meshgrid(x, x, indexing="ij")
    dens = np.asarray(model.ac_density(U, V), dtype=float)
    rows = np.maximum(dens - 1.0, 0.0) @ w
    return s, rows, w


def beta_coeff(model, grid=DEFAULT_GRID):
    """Absolute-regularity coefficient of the one-step transition copula.

    Equals half the L1 distance between the density and 1 when there is no
    atom; the atom contributes its full mass.  Histogram-backed grids are
    integrated exactly cell by cell; everything else uses the ``grid``-panel
    Simpson rule.
    """
    s, rows, w = _row_positive_mass(model, grid)
    return _floor(s + float(w @ rows))


def phi_coeff(model, grid=DEFAULT_GRID):
    """Uniform-mixing coefficient: worst conditional row instead of the average."""
    s, rows, _ = _row_positive_mass(model, grid)
    return _floor(s + float(rows.max()))


def psi_coeff(model, grid=PSI_SCAN):
    """Ratio-mixing coefficient: infinite with any diagonal atom.

    For absolutely continuous models: sup |c - 1| over a node scan at the
    requested resolution with one local refinement pass around the best cell
    (kinks of piecewise densities lie on measure-zero curves and are skipped
    by the scan without affecting the essential sup).
    """
    s = model.singular_m_mass
    if s > 0.0:
        return math.inf
    if _is_cell_grid(model):
        return _floor(float(np.abs(model._cells - 1.0).max()))
    x = unit_nodes(grid)
    U, V = np.meshgrid(x, x, indexing="ij")
    dev = np.abs(np.asarray(model.ac_density(U, V), dtype=float) - 1.0)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    best = float(dev[i, j])
    h = 1.0 / grid
    lo_u, hi_u = max(x[i] - h, 0.0), min(x[i] + h, 1.0)
    lo_v, hi_v = max(x[j] - h, 0.0), min(x[j] + h, 1.0)
    fu = np.linspace(lo_u, hi_u, 33)
    fv = np.linspace(lo_v, hi_v, 33)
    FU, FV = np.meshgrid(fu, fv, indexing="ij")
    best = max(best, float(np.abs(np.asarray(model.ac_density(FU, FV), dtype=float) - 1.0).max()))
    return _floor(best)


@dataclass(frozen=True)
class MixingReport:
    """One-step mixing coefficients of a model; beta <= phi <= psi."""

    beta: float
    phi: float
    psi: float
    grid: int


def mixing_report(model, grid=DEFAULT_GRID):
    return MixingReport(beta_coeff(model, grid), phi_coeff(model, grid),
                        psi_coeff(model), grid)


@dataclass(frozen=True)
class DecayRow:
    n: int
    beta: float
    phi: float
    psi: float
    predicted_beta: float


@dataclass(frozen=True)
class DecayTable:
    """Coefficient decay along a perturbed chain, with the theory column.

    ``predicted_beta`` is (1-theta)^n beta_n(C) for the pi-blend and the
    binomial reweighting of beta_1..beta_n(C) plus the theta^n atom bound for
    the min-blend; NaN when no closed prediction applies.
    """

    rows: tuple
    perturbation: object
    fitted_rate: float
    base: str
    grid: int

    def column(self, name):
        return np.asarray([getattr(r, name) for r in self.rows], dtype=float)


def decay_table(copula, perturbation, n_max, grid=None, mixing_grid=DEFAULT_GRID):
    """Mixing-coefficient decay for n = 1..n_max steps of a perturbed chain.

    Fold powers of the base copula are computed once and reused both for the
    joint copulas and for the base beta sequence entering the predictions.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if n_max > 8:
        raise ValueError("n_max above 8 is not supported at default grids (cost control)")
    if grid is None:
        grid = DEFAULT_GRID if n_max <= 4 else CHAIN_GRID
    kind = perturbation.kind
    theta = perturbation.theta

    powers = [None]
    current = copula
    powers.append(n_fold(copula, 1, grid).copula)
    for _ in range(2, n_max + 1):
        current = fold(current, copula, grid).copula
        powers.append(current)
    beta_base = [math.nan] + [beta_coeff(powers[i], mixing_grid) for i in range(1, n_max + 1)]

    rows = []
    for n in range(1, n_max + 1):
        if kind == "tilde":
            joint = joint_tilde_from_power(powers[n], theta, n)
            predicted = (1.0 - theta) ** n * beta_base[n]
        elif kind == "hat":
            joint = joint_hat_from_powers(powers, theta, n)
            if theta in (0.0, 1.0):
                predicted = beta_base[n] if theta == 0.0 else 1.0
            else:
                predicted = binomial_average(beta_base[1:], 1.0 - theta, n) + theta ** n
        else:
            joint = powers[n]
            predicted = math.nan
        rows.append(DecayRow(n,
                             beta_coeff(joint, mixing_grid),
                             phi_coeff(joint, mixing_grid),
                             psi_coeff(joint),
                             predicted))

    betas = [r.beta for r in rows if r.beta > 1e-12]
    rate = fit_geometric_rate(betas) if len(betas) >= 3 else math.nan
    return DecayTable(tuple(rows), perturbation, rate, copula.model_id(), grid)


def joint_tilde_from_power(power_n, theta, n):
    """Pi-blend joint built from an already computed fold power."""
    from .core import PI, make_mixture

    w = (1.0 - theta) ** n
    if w == 0.0:
        return PI
    if w == 1.0:
        return power_n
    return make_mixture([w, 1.0 - w], [power_n, PI])


def joint_hat_from_powers(powers, theta, n):
    """Min-blend joint built from already computed fold powers."""
    from .core import M as M_COP
    from .core import make_mixture
    from .products import _binom_log_weights

    if theta == 1.0:
        return M_COP
    if theta == 0.0:
        return powers[n]
    log_w = _binom_log_weights(1.0 - theta, n, np.arange(1, n + 1))
    weights = list(np.exp(log_w)) + [theta ** n]
    return make_mixture(weights, [powers[i] for i in range(1, n + 1)] + [M_COP])


def geometric_rate_fit(seq):
    """Rate r of the best least-squares fit seq_n ~ c r^n for positive sequences."""
    return fit_geometric_rate(seq)


__all__ = [
    "beta_coeff", "phi_coeff", "psi_coeff", "mixing_report", "MixingReport",
    "DecayRow", "DecayTable", "decay_table", "geometric_rate_fit",
]
