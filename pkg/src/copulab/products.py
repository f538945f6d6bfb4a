"""Fold products of copulas and joint distributions along perturbed chains.

The fold product A*B (the copula of a two-step transition) is computed at
grid nodes by composite Simpson quadrature of the kernel form: the integrand
is the product of dA/dt in the second slot and dB/dt in the first slot,
evaluated from closed-form conditional CDFs whenever the operands have them.
Density and both partial-derivative node arrays are produced by the same
weighted matrix products, so iterated folds never differentiate numerically.

Atoms are invisible to quadrature, so min-components are folded
algebraically: M acts as the identity, and W composes by reflection
(W*W = M).  Mixtures distribute over the fold bilinearly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import (
    DEFAULT_GRID,
    GridCopula,
    Independence,
    LowerBound,
    M,
    PI,
    UpperBound,
    flatten,
    make_mixture,
    unit_nodes,
)
from .errors import NonCommuting, ResolutionTooLow
from .numerics import simpson_weights

CHAIN_GRID = 128          # resolution for deep fold chains (memory/time budget)
COMMUTE_TOL = 1e-5


@dataclass(frozen=True)
class FoldResult:
    """Grid product of a fold, with the exact model when algebra collapsed it."""

    grid: GridCopula
    operands: tuple
    n: int
    exact: object = None

    @property
    def copula(self):
        """Preferred downstream model: exact when available, else the grid."""
        return self.grid if self.exact is None else self.exact


def _sample_arrays(model, nodes):
    """(cdf, density, pu, pv) node arrays of an a.c. model."""
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    return (np.asarray(model.cdf(U, V), dtype=float),
            np.asarray(model.ac_density(U, V), dtype=float),
            np.asarray(model.partial_u(U, V), dtype=float),
            np.asarray(model.partial_v(U, V), dtype=float))


def _reflected_arrays(model, nodes, side):
    """Arrays of W*model (side='left') or model*W (side='right')."""
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    if side == "left":       # (W*B)(x, y) = y - B(1-x, y)
        cdf = V - np.asarray(model.cdf(1.0 - U, V), dtype=float)
        dens = np.asarray(model.ac_density(1.0 - U, V), dtype=float)
        pu = np.asarray(model.partial_u(1.0 - U, V), dtype=float)
        pv = 1.0 - np.asarray(model.partial_v(1.0 - U, V), dtype=float)
    else:                    # (A*W)(x, y) = x - A(x, 1-y)
        cdf = U - np.asarray(model.cdf(U, 1.0 - V), dtype=float)
        dens = np.asarray(model.ac_density(U, 1.0 - V), dtype=float)
        pu = 1.0 - np.asarray(model.partial_u(U, 1.0 - V), dtype=float)
        pv = np.asarray(model.partial_v(U, 1.0 - V), dtype=float)
    return cdf, dens, pu, pv


def _numeric_pair(a, b, nodes, w):
    """Node arrays of a*b for absolutely continuous leaves.

    Rows and columns share the node lattice, so the same meshgrid serves as
    (x_i, t_k) for the first operand and (t_k, y_j) for the second.
    """
    U, T = np.meshgrid(nodes, nodes, indexing="ij")
    p2a = np.asarray(a.partial_v(U, T), dtype=float)          # dA/dt at (x_i, t_k)
    da = np.asarray(a.ac_density(U, T), dtype=float)
    k1b = np.asarray(b.partial_u(U, T), dtype=float)          # dB/dt at (t_k, y_j)
    db = np.asarray(b.ac_density(U, T), dtype=float)
    p2a_w = p2a * w
    da_w = da * w
    cdf = p2a_w @ k1b
    dens = da_w @ db
    pu = da_w @ k1b
    pv = p2a_w @ db
    return cdf, dens, pu, pv


def fold(a, b, n_grid=DEFAULT_GRID):
    """Fold product of two copulas on an ``n_grid`` x ``n_grid`` grid.

    Returns a FoldResult whose grid always validates at its own resolution
    (tolerance 1e-5); ``exact`` carries the closed model when the whole
    product reduced algebraically (for instance M*C = C).
    """
    if n_grid < 16:
        raise ResolutionTooLow(f"fold grid {n_grid} is below the minimum 16")
    if n_grid % 2 != 0:
        n_grid += 1
    nodes = unit_nodes(n_grid)
    w = simpson_weights(n_grid)

    exact_parts = []     # (weight, model) resolved without quadrature
    array_parts = []     # (weight, (cdf, dens, pu, pv))
    m_mass = 0.0
    for wa, la in flatten(a):
        for wb, lb in flatten(b):
            wt = wa * wb
            if isinstance(la, UpperBound) and isinstance(lb, UpperBound):
                m_mass += wt
            elif isinstance(la, UpperBound):
                exact_parts.append((wt, lb))
            elif isinstance(lb, UpperBound):
                exact_parts.append((wt, la))
            elif isinstance(la, LowerBound) and isinstance(lb, LowerBound):
                m_mass += wt     # reflection twice is the identity kernel
            elif isinstance(la, LowerBound):
                array_parts.append((wt, _reflected_arrays(lb, nodes, "left")))
            elif isinstance(lb, LowerBound):
                array_parts.append((wt, _reflected_arrays(la, nodes, "right")))
            else:
                array_parts.append((wt, _numeric_pair(la, lb, nodes, w)))

    operands = (a.model_id(), b.model_id())
    if not array_parts and not exact_parts:
        grid = GridCopula.from_model(M, n_grid)
        return FoldResult(grid, operands, 2, exact=M)
    if not array_parts and len(exact_parts) == 1 and m_mass == 0.0:
        model = exact_parts[0][1]
        grid = model if isinstance(model, GridCopula) and model.n == n_grid \
            else GridCopula.from_model(model, n_grid)
        result = FoldResult(grid, operands, 2, exact=model)
        _check_grid(result.grid)
        return result

    ac_weight = 1.0 - m_mass
    shape = (n_grid + 1, n_grid + 1)
    acc = [np.zeros(shape) for _ in range(4)]
    for wt, model in exact_parts:
        arrays = _sample_arrays(model, nodes) if not isinstance(model, GridCopula) or model.n != n_grid \
            else (model.cdf_nodes, model.density_nodes, model.pu_nodes, model.pv_nodes)
        for k in range(4):
            acc[k] += (wt / ac_weight) * arrays[k]
    for wt, arrays in array_parts:
        for k in range(4):
            acc[k] += (wt / ac_weight) * arrays[k]

    label = f"{operands[0]}*{operands[1]}"
    grid = GridCopula(acc[0], acc[1], acc[2], acc[3], singular_m_mass=m_mass, label=label)
    _check_grid(grid)
    return FoldResult(grid, operands, 2)


def _check_grid(grid):
    from .core import validate

    report = validate(grid, n=min(grid.n, 64), tol=1e-5)
    if not report.passed:
        raise ValueError(f"fold grid failed validation: {report.summary()}")


def n_fold(copula, n, n_grid=None):
    """Iterated fold power: the copula of (X_0, X_n) for the chain driven by C."""
    if n < 1:
        raise ValueError("fold power needs n >= 1")
    if n_grid is None:
        n_grid = DEFAULT_GRID if n <= 4 else CHAIN_GRID
    if n == 1:
        grid = copula if isinstance(copula, GridCopula) else GridCopula.from_model(copula, n_grid)
        return FoldResult(grid, (copula.model_id(),), 1, exact=copula)
    current = copula
    result = None
    for _ in range(n - 1):
        result = fold(current, copula, n_grid)
        current = result.copula
    return FoldResult(result.grid, (copula.model_id(),), n, exact=result.exact)


def _binom_log_weights(theta, n, indices):
    """log of C(n, i) theta^i (1-theta)^(n-i) for the given i values."""
    i = np.asarray(indices, dtype=float)
    return (gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
            + i * math.log(theta) + (n - i) * math.log1p(-theta))


def _commutes(a, b, n_grid):
    """Numerical fold-commutation check for two a.c. models."""
    ab = fold(a, b, n_grid).grid.cdf_nodes
    ba = fold(b, a, n_grid).grid.cdf_nodes
    return float(np.abs(ab - ba).max())


def binomial_mixture_power(a, b, theta, n, n_grid=DEFAULT_GRID):
    """n-fold power of theta*A + (1-theta)*B via the binomial expansion.

    Valid only for commuting operands; when both are absolutely continuous
    the commutation is checked numerically (sup difference of A*B and B*A
    at most 1e-5), otherwise the caller asserts it.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    atoms = (UpperBound, LowerBound, Independence)
    if not isinstance(a, atoms) and not isinstance(b, atoms) \
            and a.singular_m_mass == 0.0 and b.singular_m_mass == 0.0:
        gap = _commutes(a, b, min(n_grid, 128))
        if gap > COMMUTE_TOL:
            raise NonCommuting(f"operands do not commute under fold: sup gap {gap:.2e}")

    weights = np.zeros(n + 1)
    for k in range(n + 1):
        if theta == 0.0:
            weights[k] = 1.0 if k == 0 else 0.0
        elif theta == 1.0:
            weights[k] = 1.0 if k == n else 0.0
        else:
            weights[k] = math.exp(_binom_log_weights(theta, n, [k])[0])

    a_pows = _power_table(a, n, n_grid, weights, reverse=False)
    b_pows = _power_table(b, n, n_grid, weights, reverse=True)

    nodes = unit_nodes(n_grid)
    shape = (n_grid + 1, n_grid + 1)
    acc = [np.zeros(shape) for _ in range(4)]
    m_mass = 0.0
    ac_weight = 0.0
    terms = []
    for k in range(n + 1):
        if weights[k] == 0.0:
            continue
        if k == 0:
            term = b_pows[n]
        elif k == n:
            term = a_pows[n]
        else:
            term = fold(a_pows[k], b_pows[n - k], n_grid).copula
        terms.append((weights[k], term))
        m_mass += weights[k] * term.singular_m_mass

    ac_weight = 1.0 - m_mass
    for wt, term in terms:
        parts = flatten(term)
        for wp, leaf in parts:
            if isinstance(leaf, UpperBound):
                continue
            arrays = (leaf.cdf_nodes, leaf.density_nodes, leaf.pu_nodes, leaf.pv_nodes) \
                if isinstance(leaf, GridCopula) and leaf.n == n_grid and leaf.density_nodes is not None \
                else _sample_arrays(leaf, nodes)
            for i in range(4):
                acc[i] += (wt * wp / ac_weight) * arrays[i]

    if ac_weight == 0.0:
        return GridCopula.from_model(M, n_grid)
    label = f"binpow({a.model_id()},{b.model_id()},{theta:g},{n})"
    return GridCopula(acc[0], acc[1], acc[2], acc[3], singular_m_mass=m_mass, label=label)


def _power_table(c, n, n_grid, weights, reverse):
    """Fold powers c^0..c^n, computing only the exponents with nonzero weight."""
    needed = {n - k if reverse else k for k in range(n + 1) if weights[k] != 0.0}
    needed.discard(0)
    table = {0: M}
    if not needed:
        return table
    top = max(needed)
    current = c
    table[1] = c if isinstance(c, GridCopula) else GridCopula.from_model(c, n_grid)
    for p in range(2, top + 1):
        current = fold(current, c, n_grid).copula
        table[p] = current
    return table


def joint_tilde(copula, theta, n, n_grid=None):
    """Copula of (X_0, X_n) for the chain driven by the pi-blend perturbation.

    Equals (1-theta)^n C^n + (1 - (1-theta)^n) Pi.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    w = (1.0 - theta) ** n
    if w == 0.0:
        return PI
    fold_part = n_fold(copula, n, n_grid).copula
    if w == 1.0:
        return fold_part
    return make_mixture([w, 1.0 - w], [fold_part, PI])


def joint_hat(copula, theta, n, n_grid=None):
    """Copula of (X_0, X_n) for the chain driven by the min-blend perturbation.

    A binomial mixture of the fold powers C^1..C^n plus a theta^n
    min-component carried as exact singular mass.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if theta == 1.0:
        return M
    if theta == 0.0:
        return n_fold(copula, n, n_grid).copula
    log_w = _binom_log_weights(1.0 - theta, n, np.arange(1, n + 1))
    weights = list(np.exp(log_w))
    components = []
    if n_grid is None:
        n_grid = DEFAULT_GRID if n <= 4 else CHAIN_GRID
    current = copula
    grid_of = lambda m: m if isinstance(m, GridCopula) else GridCopula.from_model(m, n_grid)
    components.append(grid_of(copula))
    for _ in range(1, n):
        current = fold(current, copula, n_grid).copula
        components.append(grid_of(current))
    weights.append(theta ** n)
    components.append(M)
    return make_mixture(weights, components)


def binomial_average(a, theta, n):
    """Binomial reweighting b_n = sum_i C(n,i) theta^i (1-theta)^(n-i) a_i.

    Weights are computed in log space so the sum stays finite for n up to
    10^4; the i = 0 term is absent, so constant sequences give
    (1 - (1-theta)^n) times the constant.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly inside (0, 1)")
    a = np.asarray(a, dtype=float)
    if a.size < n:
        raise ValueError(f"need at least {n} sequence entries, got {a.size}")
    idx = np.arange(1, n + 1)
    weights = np.exp(_binom_log_weights(theta, n, idx))
    return float(weights @ a[:n])
