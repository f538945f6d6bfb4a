"""Monte Carlo chains with uniform marginals and empirical counterparts.

A chain is generated by inverse-transform sampling of the transition kernel:
X_{k+1} = cond_quantile(X_k, U_k) with U_k from a named, seeded 64-bit
generator (numpy PCG64), so every sample is reproducible from (seed,
model_id).  Independent chains may run in parallel, one generator stream
each; a single chain is inherently sequential.

Histogram estimates of the lagged-pair copula are biased upward in the
mixing coefficients (order bins/sqrt(len) plus discretization), so the
estimator of the absolute-regularity coefficient is paired with an
i.i.d. control run of the same length: the control's value is the noise
floor to subtract.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import GridCopula
from .mixing import beta_coeff
from .numerics import simpson_nodes_weights

GENERATOR_NAME = "numpy-pcg64"


@dataclass(frozen=True)
class ChainSample:
    """A simulated stationary chain with its reproducibility metadata."""

    values: np.ndarray
    seed: int
    model_id: str
    generator: str = GENERATOR_NAME
    start: float = None

    def lagged_pairs(self, lag):
        v = self.values
        return np.column_stack([v[:-lag], v[lag:]])


def sample_chain(copula, length, seed, start=None):
    """Simulate a copula-driven chain of the given length.

    The initial state is uniform (stationary start) unless ``start`` pins it,
    which supports reachability experiments from a chosen state.
    """
    if length < 2:
        raise ValueError("chain length must be at least 2")
    rng = np.random.default_rng(seed)
    x = float(rng.random()) if start is None else float(start)
    values = np.empty(length)
    values[0] = x
    quantile = copula.cond_quantile
    uniforms = rng.random(length - 1)
    for k in range(1, length):
        x = quantile(x, uniforms[k - 1])
        values[k] = x
    return ChainSample(values, seed, copula.model_id(), start=start)


def empirical_grid(pairs, bins):
    """Histogram copula estimate from pairs in the unit square.

    Warns when fewer than 10 bins^2 pairs are supplied (cells too noisy).
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("pairs must be an (n, 2) array")
    if pairs.shape[0] < 10 * bins * bins:
        warnings.warn(f"only {pairs.shape[0]} pairs for {bins}x{bins} cells; "
                      "estimates will be noisy", RuntimeWarning)
    counts, _, _ = np.histogram2d(pairs[:, 0], pairs[:, 1], bins=bins,
                                  range=[[0.0, 1.0], [0.0, 1.0]])
    return GridCopula.from_cell_counts(counts, label=f"empirical[{pairs.shape[0]}]")


def empirical_beta(chain, lag, bins=16):
    """Histogram estimate of the lag-step absolute-regularity coefficient.

    Upward-biased by histogram noise (about bins/sqrt(len)) plus
    discretization; calibrate against ``beta_noise_floor`` with the same
    length and bins.
    """
    n = len(chain.values)
    if n < 10 * bins * bins + lag:
        raise ValueError(f"chain of length {n} too short for bins={bins}, lag={lag}")
    grid = empirical_grid(chain.lagged_pairs(lag), bins)
    return beta_coeff(grid)


def beta_noise_floor(length, lag, bins=16, seed=0):
    """Noise floor of the histogram estimator: same pipeline on i.i.d. data."""
    rng = np.random.default_rng(seed)
    values = rng.random(length)
    pairs = np.column_stack([values[:-lag], values[lag:]])
    return beta_coeff(empirical_grid(pairs, bins))


@dataclass(frozen=True)
class ReachabilityMap:
    """Cells a one-step (and two-step) transition cannot reach.

    ``one_step_zero[i, j]`` is True when the transition density vanishes at
    the center of cell (i, j) (finite differences of the CDF, threshold
    1e-6); ``two_step_zero`` applies the same test to the two-step density
    obtained by composing the kernel with itself.
    """

    resolution: int
    one_step_zero: np.ndarray
    two_step_zero: np.ndarray

    @property
    def centers(self):
        n = self.resolution
        return (np.arange(n) + 0.5) / n

    def two_step_fully_reachable(self):
        return not bool(self.two_step_zero.any())


def reachability_map(model, resolution=128, threshold=1e-6):
    """Zero-density region maps of a transition copula.

    One-step densities come from mixed central differences of the CDF at the
    cell centers (step a quarter cell); the two-step map composes the
    density with itself by Simpson quadrature at the centers.
    """
    n = resolution
    c = (np.arange(n) + 0.5) / n
    U, V = np.meshgrid(c, c, indexing="ij")
    h = 1.0 / (4.0 * n)
    cdf = model.cdf
    dens = (np.asarray(cdf(U + h, V + h)) - np.asarray(cdf(U + h, V - h))
            - np.asarray(cdf(U - h, V + h)) + np.asarray(cdf(U - h, V - h))) / (4.0 * h * h)
    one_step = np.abs(dens) < threshold

    t, w = simpson_nodes_weights(512)
    t = np.clip(t, 1e-9, 1.0 - 1e-9)
    left = np.asarray(model.ac_density(c[:, None], t[None, :]), dtype=float)
    right = np.asarray(model.ac_density(t[:, None], c[None, :]), dtype=float)
    two = (left * w) @ right
    two_step = two < threshold
    return ReachabilityMap(n, one_step, two_step)
