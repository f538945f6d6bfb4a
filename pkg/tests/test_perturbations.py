"""Blend perturbations, the quadratic transform, and the shuffle transform."""

import numpy as np
import pytest

from copulab.core import FGM, Frank, M, PI, validate
from copulab.perturbations import dolati, hat, mesiar, tilde

PTS = np.linspace(0.0, 1.0, 33)
UG, VG = np.meshgrid(PTS, PTS, indexing="ij")


def sup_diff(a, b):
    return float(np.abs(np.asarray(a.cdf(UG, VG)) - np.asarray(b.cdf(UG, VG))).max())


def test_tilde_endpoints_and_value():
    c = FGM(0.9)
    assert tilde(c, 0.0) is c
    assert tilde(M, 1.0) is PI
    # convex combination evaluated by hand: fgm(0.9)(.5,.5) = 0.30625
    assert tilde(c, 0.5).cdf(0.5, 0.5) == pytest.approx(0.278125, abs=1e-15)


def test_hat_endpoints_and_value():
    c = Frank(3.0)
    assert hat(c, 0.0) is c
    assert hat(PI, 1.0) is M
    assert hat(PI, 0.4).cdf(0.3, 0.5) == pytest.approx(0.21, abs=1e-15)
    assert hat(c, 0.4).singular_m_mass == pytest.approx(0.4)


def test_mesiar_of_product_family():
    for th in (0.25, 0.6, 1.0):
        assert sup_diff(mesiar(PI, th), FGM(th)) <= 1e-12


def test_mesiar_identity_and_fixed_points():
    c = Frank(3.0)
    assert mesiar(c, 0.0) is c
    assert mesiar(M, 0.7) is M


def test_mesiar_decomposes_linearly():
    c = Frank(3.0)
    full = np.asarray(mesiar(c, 1.0).cdf(UG, VG))
    for th in (0.25, 0.5, 0.75):
        combo = (1 - th) * np.asarray(c.cdf(UG, VG)) + th * full
        assert np.abs(np.asarray(mesiar(c, th).cdf(UG, VG)) - combo).max() <= 1e-12


def test_mesiar_density_and_kernel_match_finite_differences():
    model = mesiar(Frank(3.0), 0.7)
    rng = np.random.default_rng(5)
    pts = rng.uniform(0.05, 0.95, size=(50, 2))
    u, v = pts[:, 0], pts[:, 1]
    h = 1e-4
    fd = (np.asarray(model.cdf(u + h, v + h)) - np.asarray(model.cdf(u + h, v - h))
          - np.asarray(model.cdf(u - h, v + h)) + np.asarray(model.cdf(u - h, v - h))) / (4 * h * h)
    assert np.abs(fd - np.asarray(model.ac_density(u, v))).max() < 1e-3
    fd_u = (np.asarray(model.cdf(u + 1e-6, v)) - np.asarray(model.cdf(u - 1e-6, v))) / 2e-6
    assert np.abs(fd_u - np.asarray(model.partial_u(u, v))).max() < 1e-6


def test_dolati_values():
    assert dolati(M) is PI
    assert dolati(PI).cdf(0.5, 0.5) == pytest.approx(0.1875, abs=1e-15)
    model = dolati(Frank(3.0))
    # boundaries preserved: C(u,1)(u + 1 - C(u,1)) = u
    edge = np.linspace(0, 1, 65)
    assert np.abs(np.asarray(model.cdf(edge, np.ones_like(edge))) - edge).max() <= 1e-12
    assert np.abs(np.asarray(model.cdf(np.ones_like(edge), edge)) - edge).max() <= 1e-12


def test_dolati_density_matches_finite_differences():
    model = dolati(FGM(0.8))
    rng = np.random.default_rng(9)
    pts = rng.uniform(0.05, 0.95, size=(50, 2))
    u, v = pts[:, 0], pts[:, 1]
    h = 1e-4
    fd = (np.asarray(model.cdf(u + h, v + h)) - np.asarray(model.cdf(u + h, v - h))
          - np.asarray(model.cdf(u - h, v + h)) + np.asarray(model.cdf(u - h, v - h))) / (4 * h * h)
    assert np.abs(fd - np.asarray(model.ac_density(u, v))).max() < 1e-3


@pytest.mark.parametrize("theta", [0.0, 0.25, 0.5, 1.0])
def test_all_perturbations_validate(theta, m1_model):
    bases = [PI, M, Frank(3.0), Frank(-3.0), FGM(0.7), m1_model]
    for base in bases:
        assert validate(tilde(base, theta), 64, 1e-6).passed
        assert validate(hat(base, theta), 64, 1e-6).passed
        assert validate(mesiar(base, theta), 64, 1e-6).passed
    if theta == 0.0:
        for base in bases:
            assert validate(dolati(base), 64, 1e-6).passed
