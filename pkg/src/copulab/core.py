"""Bivariate copula models: builtins, density-backed families, grids, mixtures.

Every model exposes the same small surface:

  cdf(u, v)            joint CDF on the unit square
  density(u, v)        density of the absolutely continuous part; refuses to
                       answer (raises SingularPart) when the model carries
                       singular mass so callers cannot ignore the atom
  ac_density(u, v)     same density, atom-aware callers only; integrates to
                       1 - singular_m_mass over the square
  partial_u / partial_v  first partial derivatives of the CDF
  cond_cdf(x, v)       transition kernel P(next <= v | current = x), an alias
                       of partial_u
  cond_quantile(x, q)  generalized inverse of the kernel in v

Singular mass on the main diagonal (a min-component) is tracked exactly via
``singular_m_mass``; it is never approximated by spiked densities because
mixing coefficients need exact atom accounting.

All methods accept floats or numpy arrays.  Models are immutable after
construction and safe to share across threads; grid fills and scans are
vectorized row-major numpy reductions, so repeated runs are bit-identical.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NoDensity, NotADensity, ResolutionTooLow, SingularPart
from .numerics import (
    bisect_smallest,
    cumulative_integral,
    scan_extremum,
    simpson_nodes_weights,
    simpson_weights,
    unit_nodes,
)

DEFAULT_GRID = 256
QUANTILE_TOL = 1e-10


def _step(cond):
    """Indicator as float, preserving scalar-ness of the input."""
    if isinstance(cond, np.ndarray):
        return cond.astype(float)
    return 1.0 if cond else 0.0


@dataclass(frozen=True)
class UnitPoint:
    """A point of the closed unit square."""

    u: float
    v: float

    def __post_init__(self):
        if not (0.0 <= self.u <= 1.0 and 0.0 <= self.v <= 1.0):
            raise ValueError(f"point ({self.u}, {self.v}) outside the unit square")


class Copula:
    """Base class for bivariate copula models."""

    singular_m_mass = 0.0

    def cdf(self, u, v):
        raise NotImplementedError

    def ac_density(self, u, v):
        """Density of the absolutely continuous part (integrates to 1 - atom mass)."""
        raise NotImplementedError

    def density(self, u, v):
        """Copula density; raises SingularPart when an atom would be ignored."""
        if self.singular_m_mass > 0.0:
            raise SingularPart(
                f"{self.model_id()} carries diagonal mass {self.singular_m_mass:g}; "
                "use ac_density to work with the absolutely continuous part"
            )
        return self.ac_density(u, v)

    def partial_u(self, x, v):
        """dC/du at (x, v): the forward transition kernel."""
        raise NotImplementedError

    def partial_v(self, u, y):
        """dC/dv at (u, y): the kernel of the time-reversed pair."""
        raise NotImplementedError

    def cond_cdf(self, x, v):
        """Transition probability from state x into [0, v]."""
        return self.partial_u(x, v)

    def cond_quantile(self, x, q):
        """Smallest v with cond_cdf(x, v) >= q.

        Bisection to absolute tolerance 1e-10; monotone jumps (atoms) are
        honored because bisection converges to the jump location.
        """
        q = min(max(float(q), 0.0), 1.0)
        if q <= 0.0:
            return 0.0
        return bisect_smallest(lambda v: self.partial_u(x, v) >= q, 0.0, 1.0, QUANTILE_TOL)

    def model_id(self):
        return type(self).__name__.lower()

    def __repr__(self):
        return f"<{self.model_id()}>"


class Independence(Copula):
    """Product copula: C(u, v) = u v."""

    def cdf(self, u, v):
        return u * v

    def ac_density(self, u, v):
        shape = np.broadcast_shapes(np.shape(u), np.shape(v))
        return np.ones(shape) if shape else 1.0

    def partial_u(self, x, v):
        shape = np.broadcast_shapes(np.shape(x), np.shape(v))
        if shape:
            return np.broadcast_to(np.asarray(v, dtype=float), shape).copy()
        return float(v)

    def partial_v(self, u, y):
        shape = np.broadcast_shapes(np.shape(u), np.shape(y))
        if shape:
            return np.broadcast_to(np.asarray(u, dtype=float), shape).copy()
        return float(u)

    def cond_quantile(self, x, q):
        return min(max(float(q), 0.0), 1.0)

    def model_id(self):
        return "pi"


class UpperBound(Copula):
    """Comonotone copula M(u, v) = min(u, v); all mass on the main diagonal."""

    singular_m_mass = 1.0

    def cdf(self, u, v):
        return np.minimum(u, v)

    def ac_density(self, u, v):
        return np.zeros(np.broadcast_shapes(np.shape(u), np.shape(v)))

    def partial_u(self, x, v):
        return _step(x <= v)

    def partial_v(self, u, y):
        return _step(y <= u)

    def cond_quantile(self, x, q):
        return float(x)

    def model_id(self):
        return "m"


class LowerBound(Copula):
    """Countermonotone copula W(u, v) = max(u + v - 1, 0); mass on the antidiagonal."""

    def cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def ac_density(self, u, v):
        raise NoDensity("w has no absolutely continuous part and no diagonal-atom representation")

    def density(self, u, v):
        raise SingularPart("w is purely singular (antidiagonal atom)")

    def partial_u(self, x, v):
        return _step(v >= 1.0 - x)

    def partial_v(self, u, y):
        return _step(u >= 1.0 - y)

    def cond_quantile(self, x, q):
        return 1.0 - float(x)

    def model_id(self):
        return "w"


class Frank(Copula):
    """Frank copula with parameter lam != 0.

    The CDF uses the standard cross-product form
    ``-(1/lam) log(1 + (e^{-lam u}-1)(e^{-lam v}-1)/(e^{-lam}-1))``;
    a printed variant squaring the u-factor violates C(1, v) = v and is
    deliberately not implemented.
    """

    def __init__(self, lam):
        lam = float(lam)
        if lam == 0.0:
            raise ValueError("frank parameter must be nonzero")
        self.lam = lam
        self._d = float(np.expm1(-lam))

    def cdf(self, u, v):
        eu = np.expm1(-self.lam * np.asarray(u, dtype=float))
        ev = np.expm1(-self.lam * np.asarray(v, dtype=float))
        out = -np.log1p(eu * ev / self._d) / self.lam
        return out if out.shape else float(out)

    def ac_density(self, u, v):
        lam = self.lam
        eu = np.expm1(-lam * np.asarray(u, dtype=float))
        ev = np.expm1(-lam * np.asarray(v, dtype=float))
        den = self._d + eu * ev
        out = -lam * self._d * np.exp(-lam * (np.asarray(u) + np.asarray(v))) / (den * den)
        return out if out.shape else float(out)

    def partial_u(self, x, v):
        lam = self.lam
        ax = np.exp(-lam * np.asarray(x, dtype=float))
        ev = np.expm1(-lam * np.asarray(v, dtype=float))
        out = ax * ev / (self._d + (ax - 1.0) * ev)
        return out if out.shape else float(out)

    def partial_v(self, u, y):
        return self.partial_u(y, u)

    def cond_quantile(self, x, q):
        if isinstance(x, np.ndarray) or isinstance(q, np.ndarray):
            q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
            a = np.exp(-self.lam * np.asarray(x, dtype=float))
            b = q * self._d / (a - q * (a - 1.0))
            return np.clip(-np.log1p(b) / self.lam, 0.0, 1.0)
        q = min(max(float(q), 0.0), 1.0)
        if q == 0.0:
            return 0.0
        if q == 1.0:
            return 1.0
        a = float(np.exp(-self.lam * x))
        b = q * self._d / (a - q * (a - 1.0))
        return float(-np.log1p(b) / self.lam)

    def model_id(self):
        return f"frank({self.lam:g})"


class FGM(Copula):
    """Farlie-Gumbel-Morgenstern copula, theta in [0, 1]."""

    def __init__(self, theta):
        theta = float(theta)
        if not 0.0 <= theta <= 1.0:
            raise ValueError("fgm parameter must lie in [0, 1]")
        self.theta = theta

    def cdf(self, u, v):
        return u * v * (1.0 + self.theta * (1.0 - u) * (1.0 - v))

    def ac_density(self, u, v):
        return 1.0 + self.theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)

    def partial_u(self, x, v):
        return v + self.theta * (1.0 - 2.0 * x) * (v - v * v)

    def partial_v(self, u, y):
        return u + self.theta * (1.0 - 2.0 * y) * (u - u * u)

    def cond_quantile(self, x, q):
        if isinstance(x, np.ndarray) or isinstance(q, np.ndarray):
            x = np.asarray(x, dtype=float)
            q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
            a = self.theta * (1.0 - 2.0 * x)
            b = 1.0 + a
            disc = np.maximum(b * b - 4.0 * a * q, 0.0)
            safe = np.where(np.abs(a) < 1e-12, 1.0, 2.0 * a)
            return np.where(np.abs(a) < 1e-12, q, (b - np.sqrt(disc)) / safe)
        q = min(max(float(q), 0.0), 1.0)
        a = self.theta * (1.0 - 2.0 * x)
        if abs(a) < 1e-12:
            return q
        b = 1.0 + a
        disc = b * b - 4.0 * a * q
        return float((b - disc ** 0.5) / (2.0 * a))

    def model_id(self):
        return f"fgm({self.theta:g})"


PI = Independence()
M = UpperBound()
W = LowerBound()


# ---------------------------------------------------------------------------
# density-backed family built from two bounded functions on [0, 1]


@dataclass
class MDensitySpec:
    """Two bounded functions and a variant index defining a bilinear density.

    The four density variants are all of the form
    ``(alpha + beta g(x) + gamma h(y) + delta g(x) h(y)) / Z``; the derived
    constants (sups, infs, L1 norms) fix alpha..Z per variant.  Extrema come
    from a 4097-point scan with golden-section refinement because h and g are
    arbitrary user closures; norms use a 4096-panel Simpson rule.
    """

    h: callable
    g: callable
    variant: int
    a1: float = field(init=False)
    a2: float = field(init=False)
    b1: float = field(init=False)
    b2: float = field(init=False)
    norm_h: float = field(init=False)
    norm_g: float = field(init=False)

    def __post_init__(self):
        if self.variant not in (1, 2, 3, 4):
            raise ValueError("variant must be one of 1..4")
        self.a1 = scan_extremum(self.h, mode="max")
        self.b1 = scan_extremum(self.h, mode="min")
        self.a2 = scan_extremum(self.g, mode="max")
        self.b2 = scan_extremum(self.g, mode="min")
        x, w = simpson_nodes_weights(4096)
        self.norm_h = float(w @ np.abs(np.asarray(self.h(x), dtype=float)))
        self.norm_g = float(w @ np.abs(np.asarray(self.g(x), dtype=float)))

    def bilinear_coefficients(self):
        """(alpha, beta, gamma, delta, Z) with density = (a + b g + c h + d gh)/Z."""
        a1, a2, nh, ng = self.a1, self.a2, self.norm_h, self.norm_g
        if self.variant == 1:
            return a2, nh, ng, -1.0, a2 + ng * nh
        if self.variant == 2:
            return a1 * a2, nh, ng, -1.0, a1 * a2 + ng * nh
        if self.variant == 3:
            alpha = a2 * (a1 - self.b1) + ng * a1
            return alpha, -nh, -ng, 1.0, a2 * (a1 - self.b1) + ng * (a1 - nh)
        alpha = (a2 - self.b2) * (a1 - self.b1) + a1 * a2 - a1 * ng - a2 * nh
        z = (a2 - self.b2) * (a1 - self.b1) + (a2 - ng) * (a1 - nh)
        return alpha, nh, ng, -1.0, z


class MDensityCopula(Copula):
    """Copula whose density is bilinear in (g(x), h(y)).

    The CDF is exact in the cumulatives G and H of g and h, which are
    tabulated once on a 4096-panel grid; margins are then exact by algebra
    whatever the tabulation error, because the same G(1), H(1) values enter
    the normalizing constant.
    """

    def __init__(self, spec):
        self.spec = spec
        self.alpha, self.beta, self.gamma, self.delta, self.z = spec.bilinear_coefficients()
        self._nodes = unit_nodes(4096)
        hv = np.asarray(spec.h(self._nodes), dtype=float)
        gv = np.asarray(spec.g(self._nodes), dtype=float)
        self._H = cumulative_integral(hv, self._nodes)
        self._G = cumulative_integral(gv, self._nodes)

    def _Gx(self, x):
        return np.interp(x, self._nodes, self._G)

    def _Hy(self, y):
        return np.interp(y, self._nodes, self._H)

    def ac_density(self, u, v):
        g = np.asarray(self.spec.g(np.asarray(u, dtype=float)), dtype=float)
        h = np.asarray(self.spec.h(np.asarray(v, dtype=float)), dtype=float)
        out = (self.alpha + self.beta * g + self.gamma * h + self.delta * g * h) / self.z
        return out if out.shape else float(out)

    def cdf(self, u, v):
        G, H = self._Gx(u), self._Hy(v)
        out = (self.alpha * np.asarray(u) * np.asarray(v)
               + self.beta * G * np.asarray(v)
               + self.gamma * np.asarray(u) * H
               + self.delta * G * H) / self.z
        return out if np.shape(out) else float(out)

    def partial_u(self, x, v):
        g = np.asarray(self.spec.g(np.asarray(x, dtype=float)), dtype=float)
        H = self._Hy(v)
        out = (self.alpha * np.asarray(v) + self.beta * g * np.asarray(v)
               + self.gamma * H + self.delta * g * H) / self.z
        return out if np.shape(out) else float(out)

    def partial_v(self, u, y):
        h = np.asarray(self.spec.h(np.asarray(y, dtype=float)), dtype=float)
        G = self._Gx(u)
        out = (self.alpha * np.asarray(u) + self.gamma * h * np.asarray(u)
               + self.beta * G + self.delta * G * h) / self.z
        return out if np.shape(out) else float(out)

    def model_id(self):
        return f"mdensity(variant={self.spec.variant})"


def make_m_copula(spec):
    """Build the density-backed copula for an MDensitySpec, or refuse.

    Raises NotADensity when the resulting function dips below zero on a
    257 x 257 sample grid or when a row/column margin strays from 1 by more
    than 1e-6 (this happens when h or g takes negative values, or for
    variant 1 when sup h exceeds roughly 1).
    """
    model = MDensityCopula(spec)
    nodes = unit_nodes(256)
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    vals = model.ac_density(U, V)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    if vals[i, j] < -1e-12:
        raise NotADensity(
            f"density variant {spec.variant} is negative: {vals[i, j]:.3e} at "
            f"({nodes[i]:.4f}, {nodes[j]:.4f})",
            worst_point=(float(nodes[i]), float(nodes[j])),
            worst_value=float(vals[i, j]),
        )
    report = density_unit_margins(model.ac_density, tol=1e-6)
    if not report.passed:
        raise NotADensity(
            f"margins of variant {spec.variant} deviate from 1 by {report.max_deviation:.3e}",
            worst_point=report.worst_coordinate,
            worst_value=report.max_deviation,
        )
    return model


@dataclass(frozen=True)
class MarginReport:
    """Outcome of the unit-margin quadrature check for a density."""

    max_deviation: float
    tol: float
    passed: bool
    worst_axis: str
    worst_coordinate: float


def density_unit_margins(density, tol=1e-6, n_panels=256):
    """Check that row and column integrals of a density equal 1.

    Integrates along each axis with a composite Simpson rule and reports the
    worst deviation over all node coordinates of the other axis.
    """
    x, w = simpson_nodes_weights(n_panels)
    U, V = np.meshgrid(x, x, indexing="ij")
    vals = np.asarray(density(U, V), dtype=float)
    rows = w @ vals          # integral over first argument, per y node
    cols = vals @ w          # integral over second argument, per x node
    dev_rows = np.abs(rows - 1.0)
    dev_cols = np.abs(cols - 1.0)
    if dev_rows.max() >= dev_cols.max():
        worst, axis, coord = dev_rows.max(), "second-arg", x[int(np.argmax(dev_rows))]
    else:
        worst, axis, coord = dev_cols.max(), "first-arg", x[int(np.argmax(dev_cols))]
    return MarginReport(float(worst), tol, bool(worst <= tol), axis, float(coord))


# ---------------------------------------------------------------------------
# grids


def _bilinear(nodes_grid, u, v, n):
    """Bilinear interpolation of (n+1) x (n+1) node values at (u, v)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    su = np.clip(u * n, 0.0, n)
    sv = np.clip(v * n, 0.0, n)
    i = np.clip(su.astype(int), 0, n - 1)
    j = np.clip(sv.astype(int), 0, n - 1)
    fu = su - i
    fv = sv - j
    g = nodes_grid
    out = ((1 - fu) * (1 - fv) * g[i, j] + fu * (1 - fv) * g[i + 1, j]
           + (1 - fu) * fv * g[i, j + 1] + fu * fv * g[i + 1, j + 1])
    return out


class GridCopula(Copula):
    """Copula carried on an n x n uniform grid of the unit square.

    Node arrays describe the normalized absolutely continuous part (a copula
    in its own right); ``singular_m_mass`` scales in an exact min-component:

        C(u, v) = (1 - s) * bilinear(cdf_nodes)(u, v) + s * min(u, v)

    ``density_nodes`` and the two partial-derivative node arrays are present
    for grids produced by quadrature (fold products, cached transforms); they
    are None for histogram grids, which fall back to cellwise lookups.
    """

    def __init__(self, cdf_nodes, density_nodes=None, pu_nodes=None, pv_nodes=None,
                 singular_m_mass=0.0, label="grid"):
        cdf_nodes = np.asarray(cdf_nodes, dtype=float)
        if cdf_nodes.ndim != 2 or cdf_nodes.shape[0] != cdf_nodes.shape[1]:
            raise ValueError("cdf_nodes must be square")
        self.n = cdf_nodes.shape[0] - 1
        if self.n < 2:
            raise ResolutionTooLow("grid needs at least 2 cells per axis")
        self.cdf_nodes = cdf_nodes
        self.density_nodes = None if density_nodes is None else np.asarray(density_nodes, dtype=float)
        self.pu_nodes = None if pu_nodes is None else np.asarray(pu_nodes, dtype=float)
        self.pv_nodes = None if pv_nodes is None else np.asarray(pv_nodes, dtype=float)
        self.singular_m_mass = float(singular_m_mass)
        self.label = label

    @cached_property
    def nodes(self):
        return unit_nodes(self.n)

    @cached_property
    def cell_density(self):
        """Average density per cell of the normalized part, from CDF increments."""
        d = np.diff(np.diff(self.cdf_nodes, axis=0), axis=1)
        return d * (self.n * self.n)

    @classmethod
    def from_model(cls, model, n=DEFAULT_GRID):
        """Sample a model onto a grid; atoms transfer to singular_m_mass exactly."""
        s = model.singular_m_mass
        ac = _normalized_ac_part(model)
        x = unit_nodes(n)
        U, V = np.meshgrid(x, x, indexing="ij")
        if ac is None:     # purely singular: degenerate uniform placeholder
            return cls(np.outer(x, x), np.ones((n + 1, n + 1)),
                       np.tile(x, (n + 1, 1)), np.tile(x, (n + 1, 1)),
                       singular_m_mass=s, label=model.model_id())
        return cls(ac.cdf(U, V), ac.ac_density(U, V), ac.partial_u(U, V), ac.partial_v(U, V),
                   singular_m_mass=s, label=model.model_id())

    @classmethod
    def from_cell_counts(cls, counts, label="empirical"):
        """Histogram grid: counts per cell, normalized to a copula density."""
        counts = np.asarray(counts, dtype=float)
        n = counts.shape[0]
        total = counts.sum()
        if total <= 0:
            raise ValueError("empty histogram")
        mass = counts / total
        cdf = np.zeros((n + 1, n + 1))
        cdf[1:, 1:] = np.cumsum(np.cumsum(mass, axis=0), axis=1)
        grid = cls(cdf, label=label)
        grid._cell_density_override = mass * (n * n)
        return grid

    @property
    def _cells(self):
        override = getattr(self, "_cell_density_override", None)
        return self.cell_density if override is None else override

    def ac_view(self):
        """The normalized absolutely continuous part as a standalone grid."""
        if self.singular_m_mass == 0.0:
            return self
        return GridCopula(self.cdf_nodes, self.density_nodes, self.pu_nodes, self.pv_nodes,
                          0.0, label=self.label + "|ac")

    def cdf(self, u, v):
        s = self.singular_m_mass
        out = (1.0 - s) * _bilinear(self.cdf_nodes, u, v, self.n)
        if s > 0.0:
            out = out + s * np.minimum(u, v)
        return out if np.shape(out) else float(out)

    def ac_density(self, u, v):
        s = self.singular_m_mass
        if self.density_nodes is not None:
            out = (1.0 - s) * _bilinear(self.density_nodes, u, v, self.n)
        else:
            n = self.n
            i = np.clip((np.asarray(u, dtype=float) * n).astype(int), 0, n - 1)
            j = np.clip((np.asarray(v, dtype=float) * n).astype(int), 0, n - 1)
            out = (1.0 - s) * self._cells[i, j]
        return out if np.shape(out) else float(out)

    def partial_u(self, x, v):
        s = self.singular_m_mass
        if self.pu_nodes is not None:
            out = (1.0 - s) * _bilinear(self.pu_nodes, x, v, self.n)
        else:
            out = (1.0 - s) * self._cell_kernel(x, v, transpose=False)
        if s > 0.0:
            out = out + s * _step(np.asarray(x) <= np.asarray(v))
        return out if np.shape(out) else float(out)

    def partial_v(self, u, y):
        s = self.singular_m_mass
        if self.pv_nodes is not None:
            out = (1.0 - s) * _bilinear(self.pv_nodes, u, y, self.n)
        else:
            out = (1.0 - s) * self._cell_kernel(y, u, transpose=True)
        if s > 0.0:
            out = out + s * _step(np.asarray(y) <= np.asarray(u))
        return out if np.shape(out) else float(out)

    def _cell_kernel(self, x, v, transpose):
        """Kernel of a cellwise-constant density: cumulative within the x-row."""
        n = self.n
        cells = self._cells.T if transpose else self._cells
        cum = np.concatenate([np.zeros((n, 1)), np.cumsum(cells, axis=1) / n], axis=1)
        i = np.clip((np.asarray(x, dtype=float) * n).astype(int), 0, n - 1)
        sv = np.clip(np.asarray(v, dtype=float) * n, 0.0, n)
        j = np.clip(sv.astype(int), 0, n - 1)
        return cum[i, j] + cells[i, j] * (sv - j) / n

    def to_csv(self, path):
        """Node dump for oracle cross-checks: x,y,cdf,density,singular_m_mass.

        Fixed 12-significant-digit formatting and LF endings keep repeated
        dumps byte-identical.
        """
        x = self.nodes
        dens = self.density_nodes
        lines = ["x,y,cdf,density,singular_m_mass"]
        s = self.singular_m_mass
        for i in range(self.n + 1):
            for j in range(self.n + 1):
                d = float(dens[i, j]) if dens is not None else float("nan")
                lines.append(f"{x[i]:.12g},{x[j]:.12g},{self.cdf_nodes[i, j]:.12g},"
                             f"{d:.12g},{s:.12g}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        return path

    def check_invariants(self, tol=1e-9):
        """Groundedness, margins, and mass accounting of the stored arrays."""
        x = self.nodes
        errs = [np.abs(self.cdf_nodes[0, :]).max(), np.abs(self.cdf_nodes[:, 0]).max(),
                np.abs(self.cdf_nodes[-1, :] - x).max(), np.abs(self.cdf_nodes[:, -1] - x).max()]
        mass = (1.0 - self.singular_m_mass) * self._cells.sum() / (self.n * self.n) + self.singular_m_mass
        errs.append(abs(mass - 1.0))
        worst = float(max(errs))
        if worst > tol:
            raise ValueError(f"grid invariants violated by {worst:.3e}")
        if self._cells.min() < -tol:
            raise ValueError(f"negative cell density {self._cells.min():.3e}")
        return worst

    def model_id(self):
        return f"{self.label}[n={self.n}]"


# ---------------------------------------------------------------------------
# mixtures and transforms


class Mixture(Copula):
    """Convex combination of copulas; weights must sum to 1 within 1e-12.

    Nested mixtures are flattened at construction.  Every operation combines
    the components linearly, so downstream code (fold products, mixing
    coefficients) can exploit the structure exactly.
    """

    def __init__(self, weights, components):
        flat_w, flat_c = [], []
        for w, c in zip(weights, components):
            w = float(w)
            if w < 0.0:
                raise ValueError("mixture weights must be nonnegative")
            if w == 0.0:
                continue
            if isinstance(c, Mixture):
                for wi, ci in zip(c.weights, c.components):
                    flat_w.append(w * wi)
                    flat_c.append(ci)
            else:
                flat_w.append(w)
                flat_c.append(c)
        if not flat_c:
            raise ValueError("mixture needs at least one component with positive weight")
        if abs(sum(flat_w) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {sum(flat_w)!r}, not 1")
        self.weights = tuple(flat_w)
        self.components = tuple(flat_c)
        self.singular_m_mass = float(sum(w * c.singular_m_mass for w, c in zip(flat_w, flat_c)))
        # blends of product/FGM components keep the quadratic kernel form
        # v + a (v - v^2), so their conditional quantile stays closed form
        if all(isinstance(c, (Independence, FGM)) for c in flat_c):
            theta_eff = sum(w * c.theta for w, c in zip(flat_w, flat_c)
                            if isinstance(c, FGM))
            self._quadratic_kernel = FGM(theta_eff)
        else:
            self._quadratic_kernel = None

    def cdf(self, u, v):
        return sum(w * c.cdf(u, v) for w, c in zip(self.weights, self.components))

    def ac_density(self, u, v):
        total = 0.0
        for w, c in zip(self.weights, self.components):
            total = total + w * c.ac_density(u, v)
        return total

    def partial_u(self, x, v):
        return sum(w * c.partial_u(x, v) for w, c in zip(self.weights, self.components))

    def partial_v(self, u, y):
        return sum(w * c.partial_v(u, y) for w, c in zip(self.weights, self.components))

    def cond_quantile(self, x, q):
        if self._quadratic_kernel is not None:
            return self._quadratic_kernel.cond_quantile(x, q)
        return super().cond_quantile(x, q)

    def model_id(self):
        parts = "+".join(f"{w:g}*{c.model_id()}" for w, c in zip(self.weights, self.components))
        return f"mix[{parts}]"


def make_mixture(weights, components):
    """Convex combination that collapses to the sole component when trivial."""
    mix = Mixture(weights, components)
    if len(mix.components) == 1:
        return mix.components[0]
    return mix


class Transformed(Copula):
    """Copula defined by closures over base models (perturbation transforms).

    Analytic density/partial closures are used when supplied; otherwise
    central finite differences of the CDF stand in (step 1e-5 for the mixed
    second difference, 1e-6 for first partials, shrunk near the boundary).
    """

    def __init__(self, cdf_fn, density_fn=None, pu_fn=None, pv_fn=None,
                 base=None, label="transformed"):
        self._cdf_fn = cdf_fn
        self._density_fn = density_fn
        self._pu_fn = pu_fn
        self._pv_fn = pv_fn
        self.base = base
        self.label = label

    def cdf(self, u, v):
        return self._cdf_fn(u, v)

    def ac_density(self, u, v):
        if self._density_fn is not None:
            return self._density_fn(u, v)
        return fd_mixed_density(self._cdf_fn, u, v)

    def partial_u(self, x, v):
        if self._pu_fn is not None:
            return self._pu_fn(x, v)
        return fd_partial(self._cdf_fn, x, v, axis=0)

    def partial_v(self, u, y):
        if self._pv_fn is not None:
            return self._pv_fn(u, y)
        return fd_partial(self._cdf_fn, u, y, axis=1)

    @cached_property
    def cached_grid(self):
        """Grid snapshot at the default resolution, for grid-hungry consumers."""
        return GridCopula.from_model(self, DEFAULT_GRID)

    def model_id(self):
        return self.label


def fd_partial(cdf_fn, x, v, axis, h=1e-6):
    """Central difference of a CDF closure along one argument, boundary-shrunk."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    t = x if axis == 0 else v
    step = np.minimum(h, np.minimum(t, 1.0 - t))
    step = np.maximum(step, 1e-12)
    if axis == 0:
        out = (cdf_fn(x + step, v) - cdf_fn(x - step, v)) / (2.0 * step)
    else:
        out = (cdf_fn(x, v + step) - cdf_fn(x, v - step)) / (2.0 * step)
    return out if np.shape(out) else float(out)

def fd_mixed_density(cdf_fn, u, v, h=5e-5):
    """Mixed second central difference of a CDF closure."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    hu = np.maximum(np.minimum(h, np.minimum(u, 1.0 - u)), 1e-9)
    hv = np.maximum(np.minimum(h, np.minimum(v, 1.0 - v)), 1e-9)
    out = (cdf_fn(u + hu, v + hv) - cdf_fn(u + hu, v - hv)
           - cdf_fn(u - hu, v + hv) + cdf_fn(u - hu, v - hv)) / (4.0 * hu * hv)
    return out if np.shape(out) else float(out)


# ---------------------------------------------------------------------------
# decomposition helpers


def flatten(model):
    """Flatten a model into [(weight, leaf)] with non-mixture leaves.

    Grid atoms are split off as explicit min-component entries so that fold
    algebra can treat them exactly.
    """
    if isinstance(model, Mixture):
        out = []
        for w, c in zip(model.weights, model.components):
            out.extend((w * wi, leaf) for wi, leaf in flatten(c))
        return out
    if isinstance(model, GridCopula) and model.singular_m_mass > 0.0:
        s = model.singular_m_mass
        return [(1.0 - s, model.ac_view()), (s, M)]
    return [(1.0, model)]


def ac_decompose(model):
    """(atom_mass, [(weight, ac_leaf)]) with weights summing to 1 - atom_mass."""
    parts = flatten(model)
    s = 0.0
    leaves = []
    for w, leaf in parts:
        if isinstance(leaf, UpperBound):
            s += w
        elif isinstance(leaf, LowerBound):
            raise NoDensity("w-component has no diagonal-atom decomposition")
        else:
            leaves.append((w, leaf))
    return s, leaves


def _normalized_ac_part(model):
    """The a.c. part of a model as a normalized copula, or None if purely singular."""
    s, leaves = ac_decompose(model)
    if not leaves:
        return None
    if s == 0.0 and len(leaves) == 1:
        return leaves[0][1]
    total = sum(w for w, _ in leaves)
    return make_mixture([w / total for w, _ in leaves], [c for _, c in leaves])


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    """Worst deviations of a model from the copula axioms on an n x n scan."""

    model: str
    n: int
    tol: float
    worst_grounded: float
    worst_margin: float
    worst_rectangle: float
    passed: bool

    def summary(self):
        state = "pass" if self.passed else "FAIL"
        return (f"{state} {self.model}: grounded {self.worst_grounded:.2e}, "
                f"margin {self.worst_margin:.2e}, rectangle {self.worst_rectangle:.2e} "
                f"(n={self.n}, tol={self.tol:g})")


def validate(model, n=64, tol=1e-6):
    """Check groundedness, uniform margins, and 2-increasingness on a grid.

    The rectangle inequality is checked on every grid cell; since increments
    are additive over subdivisions, nonnegative cells imply nonnegative
    increments for all grid rectangles.
    """
    x = unit_nodes(n)
    U, V = np.meshgrid(x, x, indexing="ij")
    C = np.asarray(model.cdf(U, V), dtype=float)
    grounded = max(np.abs(C[0, :]).max(), np.abs(C[:, 0]).max())
    margin = max(np.abs(C[-1, :] - x).max(), np.abs(C[:, -1] - x).max())
    rect = np.diff(np.diff(C, axis=0), axis=1).min()
    passed = grounded <= tol and margin <= tol and rect >= -tol
    return ValidationReport(model.model_id(), n, tol, float(grounded), float(margin),
                            float(rect), bool(passed))
