"""Noise-perturbed copulas: closed forms against quadrature oracles."""

import numpy as np
import pytest

from copulab.core import M, PI, validate
from copulab.dependence import tail_lower, tail_upper
from copulab.marginals import exponential_marginal, normal_marginal, uniform_marginal
from copulab.noise import (
    C5MUniform,
    C6IndepUniform,
    UNIFORM01,
    c5_general,
    c6_general,
    c6_region_table_variant,
    c7_general,
    c7_uniform_regions,
    irwin_hall2_cdf,
    irwin_hall2_inv,
    noise_copula,
    tail_coeffs_of_noise,
)

U01 = UNIFORM01
GRID33 = np.linspace(0.0, 1.0, 35)[1:-1]
U33, V33 = np.meshgrid(GRID33, GRID33, indexing="ij")


def test_two_uniform_sum_cdf_values():
    assert irwin_hall2_cdf(1.0) == 0.5
    assert irwin_hall2_cdf(0.5) == pytest.approx(0.125)
    assert irwin_hall2_inv(0.875) == pytest.approx(1.5)
    x = np.linspace(0.01, 1.99, 99)
    assert np.abs(irwin_hall2_inv(irwin_hall2_cdf(x)) - x).max() < 1e-12


def test_one_sided_closed_branches():
    c5 = C5MUniform()
    # sqrt(2u) = 0.6 >= v: second branch v sqrt(2u) - v^2/2
    assert c5.cdf(0.18, 0.5) == pytest.approx(0.175, abs=1e-15)
    # boundary of the first two branches: both give u
    assert c5.cdf(0.125, 0.5) == pytest.approx(0.125, abs=1e-12)
    # below the lower reachability edge: value v
    assert c5.cdf(0.98, 0.1) == pytest.approx(0.1, abs=1e-15)
    assert validate(c5, 64, 1e-6).passed


def test_one_sided_closed_vs_quadrature():
    oracle = c5_general(M, U01, U01, U01)
    closed = C5MUniform()
    diff = np.abs(oracle(U33, V33) - np.asarray(closed.cdf(U33, V33))).max()
    assert diff <= 1e-5


def test_one_sided_with_product_base_is_product():
    for marginals in ((U01, U01, U01),
                      (exponential_marginal(1.0), U01, normal_marginal(0, 1))):
        fn = c5_general(PI, *marginals)
        assert np.abs(fn(U33, V33) - U33 * V33).max() <= 1e-5


def test_one_sided_boundary_scan():
    fn = c5_general(M, U01, U01, U01)
    edge = np.linspace(0.0, 1.0, 65)
    assert np.abs(fn(edge, np.ones_like(edge)) - edge).max() <= 1e-6
    assert np.abs(fn(np.ones_like(edge), edge) - edge).max() <= 1e-6
    assert np.abs(fn(edge, np.zeros_like(edge))).max() <= 1e-6
    assert np.abs(fn(np.zeros_like(edge), edge)).max() <= 1e-6


def test_one_sided_asymmetry_witness():
    c5 = C5MUniform()
    gap = np.abs(np.asarray(c5.cdf(U33, V33)) - np.asarray(c5.cdf(V33, U33))).max()
    assert gap > 0.01


def test_common_noise_closed_values():
    c6 = C6IndepUniform()
    # x = 0.5, y = 1: sum-variable case value 0.125 - 0.125/6
    assert c6.cdf(0.125, 0.5) == pytest.approx(0.5 * 0.25 - 0.125 / 6.0, abs=1e-12)
    assert c6.cdf(1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    # y beyond 1 + x: flat case, value u
    assert c6.cdf(0.125, 0.995) == pytest.approx(0.125, abs=1e-12)
    assert validate(c6, 64, 1e-6).passed


def test_common_noise_closed_vs_quadrature():
    oracle = c6_general(PI, U01, U01, U01)
    closed = C6IndepUniform()
    assert np.abs(oracle(U33, V33) - np.asarray(closed.cdf(U33, V33))).max() <= 1e-4


def test_common_noise_fixes_comonotone():
    for noise in (U01, normal_marginal(0, 0.3), exponential_marginal(2.0)):
        fn = c6_general(M, U01, U01, noise)
        assert np.abs(fn(U33, V33) - np.minimum(U33, V33)).max() <= 1e-5


def test_common_noise_symmetry():
    c6 = C6IndepUniform()
    assert np.abs(np.asarray(c6.cdf(U33, V33)) - np.asarray(c6.cdf(V33, U33))).max() <= 1e-9
    fn = c6_general(PI, U01, U01, U01)
    assert np.abs(fn(U33, V33) - fn(V33, U33)).max() <= 1e-9


def test_common_noise_kernel_matches_finite_differences():
    c6 = C6IndepUniform()
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.05, 0.95, size=(60, 2))
    u, v = pts[:, 0], pts[:, 1]
    h = 1e-6
    fd = (np.asarray(c6.cdf(u + h, v)) - np.asarray(c6.cdf(u - h, v))) / (2 * h)
    assert np.abs(fd - np.asarray(c6.partial_u(u, v))).max() < 1e-4
    fdm = 1e-4
    mixed = (np.asarray(c6.cdf(u + fdm, v + fdm)) - np.asarray(c6.cdf(u + fdm, v - fdm))
             - np.asarray(c6.cdf(u - fdm, v + fdm)) + np.asarray(c6.cdf(u - fdm, v - fdm))) / (4 * fdm * fdm)
    assert np.abs(mixed - np.asarray(c6.ac_density(u, v))).max() < 1e-2


def test_independent_noise_product_base():
    fn = c7_general(PI, normal_marginal(1, 2), U01,
                    normal_marginal(0, 0.5), exponential_marginal(1.0))
    pts = np.linspace(0.05, 0.95, 7)
    Up, Vp = np.meshgrid(pts, pts, indexing="ij")
    assert np.abs(fn(Up, Vp) - Up * Vp).max() <= 1e-4
    assert fn(0.0, 0.5) == 0.0


def test_independent_noise_comonotone_matches_common_noise():
    fn = c7_general(M, U01, U01, U01, U01)
    closed = C6IndepUniform()
    assert np.abs(fn(U33, V33) - np.asarray(closed.cdf(U33, V33))).max() <= 1e-4


def test_uniform_region_reduction_matches_general():
    fn = c7_general(M, U01, U01, U01, U01)
    worst = 0.0
    for u in (0.125, 0.3, 0.5, 0.7, 0.9):
        for v in (0.2, 0.45, 0.5, 0.8):
            worst = max(worst, abs(c7_uniform_regions(M, u, v) - float(fn(u, v))))
    assert worst <= 1e-5
    assert c7_uniform_regions(M, 0.125, 0.5) == pytest.approx(0.1041667, abs=1e-6)


def test_uniform_region_reduction_quadrant_continuity():
    for other in (0.2, 0.3, 0.45):
        left = c7_uniform_regions(PI, 0.5 - 1e-9, other)
        right = c7_uniform_regions(PI, 0.5 + 1e-9, other)
        assert abs(left - right) <= 1e-6
        up = c7_uniform_regions(PI, other, 0.5 + 1e-9)
        down = c7_uniform_regions(PI, other, 0.5 - 1e-9)
        assert abs(up - down) <= 1e-6


def test_region_table_variant_documented_discrepancy():
    """The region-indexed table is wrong in three regions; quadrature arbitrates."""
    oracle = c6_general(PI, U01, U01, U01)
    closed = C6IndepUniform()
    # region with u <= v <= 1/2: table disagrees, sum-variable form agrees
    for (u, v) in ((0.4, 0.4), (0.2, 0.45)):
        table = c6_region_table_variant(u, v)
        quad = float(oracle(u, v))
        assert abs(table - quad) > 0.01
        assert abs(float(closed.cdf(u, v)) - quad) <= 1e-4
    # mirrored region v <= u <= 1/2 inherits the same defect
    assert abs(c6_region_table_variant(0.45, 0.2) - float(oracle(0.45, 0.2))) > 0.01
    # region 1/2 <= v <= u: the printed expression drops its v-dependence
    u, v = 0.9, 0.6
    assert abs(c6_region_table_variant(u, v) - float(oracle(u, v))) > 0.01
    # regions B, C, D, F, G agree with the oracle
    for (u, v) in ((0.3, 0.8), (0.2, 0.99), (0.6, 0.9), (0.8, 0.3), (0.99, 0.2)):
        assert abs(c6_region_table_variant(u, v) - float(oracle(u, v))) <= 1e-4


def test_zero_density_regions_by_finite_differences():
    c5 = C5MUniform()
    h = 1e-3
    # value-u region: above the upper edge sqrt(2u)
    for (u, v) in ((0.1, 0.7), (0.3, 0.9)):
        fd = (c5.cdf(u + h, v + h) - c5.cdf(u + h, v - h)
              - c5.cdf(u - h, v + h) + c5.cdf(u - h, v - h)) / (4 * h * h)
        assert abs(fd) < 1e-6
    # value-v region: below the lower edge
    for (u, v) in ((0.9, 0.2), (0.99, 0.4)):
        fd = (c5.cdf(u + h, v + h) - c5.cdf(u + h, v - h)
              - c5.cdf(u - h, v + h) + c5.cdf(u - h, v - h)) / (4 * h * h)
        assert abs(fd) < 1e-6


def test_noise_tail_coefficients_vanish():
    lo, hi = tail_coeffs_of_noise("c5-m-uniform")
    assert lo <= 0.02 and hi <= 0.02
    lo, hi = tail_coeffs_of_noise("c6-indep-uniform")
    assert lo <= 0.02 and hi <= 0.02
    # control: the unperturbed comonotone copula is fully tail dependent
    assert tail_lower(M) >= 0.98 and tail_upper(M) >= 0.98


def test_noise_copula_ids():
    assert noise_copula("c5-m-uniform").model_id() == "c5-m-uniform"
    from copulab.errors import SpecError

    with pytest.raises(SpecError):
        noise_copula("c9")
