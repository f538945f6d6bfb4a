"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report lines.  Tolerances are pinned here and nowhere else.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from copulab.core import (
    FGM,
    Frank,
    GridCopula,
    M,
    MDensitySpec,
    PI,
    W,
    density_unit_margins,
    make_m_copula,
    make_mixture,
    validate,
)
from copulab.dependence import perturbation_identities, tail_lower, tail_upper
from copulab.marginals import uniform_marginal
from copulab.mixing import beta_coeff, decay_table, phi_coeff, psi_coeff
from copulab.noise import (
    C5MUniform,
    C6IndepUniform,
    c5_general,
    c6_general,
    c6_region_table_variant,
    c7_general,
)
from copulab.numerics import log_linear_r2
from copulab.perturbations import dolati, hat, mesiar, tilde
from copulab.products import binomial_average, binomial_mixture_power, joint_hat, joint_tilde, n_fold
from copulab.simulate import beta_noise_floor, empirical_beta, reachability_map, sample_chain
from copulab.specio import PerturbationParams

U01 = uniform_marginal(0.0, 1.0)
NODES = np.linspace(0.0, 1.0, 257)
UG, VG = np.meshgrid(NODES, NODES, indexing="ij")
GRID33 = np.linspace(0.0, 1.0, 35)[1:-1]
U33, V33 = np.meshgrid(GRID33, GRID33, indexing="ij")


def report(num, description, ok, detail=""):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def sup_cdf_diff(a, b):
    return float(np.abs(np.asarray(a.cdf(UG, VG)) - np.asarray(b.cdf(UG, VG))).max())


@pytest.fixture(scope="module")
def hg_pairs():
    from conftest import random_unit_function

    rng = np.random.default_rng(99)
    return [(random_unit_function(rng), random_unit_function(rng)) for _ in range(3)]


@pytest.fixture(scope="module")
def m_models(hg_pairs):
    return [make_m_copula(MDensitySpec(h=h, g=g, variant=v))
            for h, g in hg_pairs for v in (1, 2, 3, 4)]


def test_criterion_01_validity_suite(m_models):
    start = time.perf_counter()
    failures = []
    models = [PI, M, W, Frank(3.0), Frank(-3.0), Frank(5.0), FGM(0.5), FGM(1.0)]
    models += m_models
    bases = [PI, M, Frank(3.0), Frank(-3.0), FGM(0.7), m_models[0]]
    for base in bases:
        for theta in (0.25, 0.5, 1.0):
            models += [tilde(base, theta), hat(base, theta), mesiar(base, theta)]
        models.append(dolati(base))
    models += [C5MUniform(), C6IndepUniform()]
    for model in models:
        rep = validate(model, 64, 1e-6)
        if not rep.passed:
            failures.append(rep.summary())
    elapsed = time.perf_counter() - start
    report(1, "all models pass axiom validation at (64, 1e-6)",
           not failures and elapsed < 30.0,
           f"{len(models)} models in {elapsed:.1f}s" + ("; " + "; ".join(failures) if failures else ""))


def test_criterion_02_bilinear_density_margins(hg_pairs):
    start = time.perf_counter()
    worst = 0.0
    for h, g in hg_pairs:
        for variant in (1, 2, 3, 4):
            model = make_m_copula(MDensitySpec(h=h, g=g, variant=variant))
            worst = max(worst, density_unit_margins(model.ac_density, tol=1e-6).max_deviation)
    elapsed = time.perf_counter() - start
    report(2, "bilinear-family margins equal 1 within 1e-6",
           worst <= 1e-6 and elapsed < 5.0, f"worst {worst:.2e} in {elapsed:.1f}s")


def test_criterion_03_fold_algebra():
    from copulab.products import fold

    d1 = sup_cdf_diff(fold(M, Frank(3.0)).grid, Frank(3.0))
    d2 = sup_cdf_diff(fold(PI, Frank(3.0)).grid, PI)
    d3 = sup_cdf_diff(fold(Frank(3.0), PI).grid, PI)
    res = fold(FGM(0.9), FGM(0.9), 256)
    d4 = sup_cdf_diff(res.grid, FGM(0.27))
    ok = d1 <= 1e-6 and d2 <= 1e-6 and d3 <= 1e-6 and d4 <= 1e-5
    report(3, "fold identity/annihilator and the product-family fold rule",
           ok, f"M*C {d1:.1e}, Pi*C {d2:.1e}, C*Pi {d3:.1e}, weave rule {d4:.1e}")


def test_criterion_04_binomial_power_and_joints():
    worst = 0.0
    for a, b, theta in ((PI, Frank(3.0), 0.4), (M, FGM(0.5), 0.5)):
        for n in (2, 3):
            power = binomial_mixture_power(a, b, theta, n, 256)
            direct = n_fold(make_mixture([theta, 1 - theta], [a, b]), n, 256).copula
            worst = max(worst, sup_cdf_diff(power, direct))
    for c in (FGM(0.9), Frank(3.0)):
        for n in (2, 3):
            worst = max(worst, sup_cdf_diff(joint_tilde(c, 0.5, n, 256),
                                            n_fold(tilde(c, 0.5), n, 256).copula))
            worst = max(worst, sup_cdf_diff(joint_hat(c, 0.5, n, 256),
                                            n_fold(hat(c, 0.5), n, 256).copula))
    report(4, "binomial power and perturbed joints match direct folds within 1e-4",
           worst <= 1e-4, f"worst {worst:.2e}")


def test_criterion_05_binomial_average_limit():
    a = 0.7 + 2.0 ** (-np.arange(1, 61, dtype=float))
    dev60 = abs(binomial_average(a, 0.3, 60) - 0.7)
    devs = [abs(binomial_average(a, 0.3, n) - 0.7) for n in (20, 40, 60)]
    ok = dev60 <= 1e-3 and devs[0] > devs[1] > devs[2]
    report(5, "binomial reweighting converges to the sequence limit",
           ok, f"|b_60 - a| = {dev60:.2e}, tail {devs[0]:.3g} > {devs[1]:.3g} > {devs[2]:.3g}")


def test_criterion_06_blend_identity_suite(m_models):
    worst = 0.0
    for base in (Frank(3.0), FGM(0.7), m_models[0]):
        for theta in (0.25, 0.5, 0.75):
            worst = max(worst, perturbation_identities(base, theta).max_error)
    report(6, "ten blend identities within 2e-3 for three bases and three thetas",
           worst <= 2e-3, f"worst {worst:.2e}")


def test_criterion_07_bilinear_family_tails(m_models):
    worst = 0.0
    for model in m_models:
        worst = max(worst, tail_lower(model), tail_upper(model))
    control = tail_lower(M)
    report(7, "bilinear-family tail coefficients vanish; comonotone control is 1",
           worst <= 0.02 and control >= 0.98,
           f"worst tail {worst:.3g}, control {control:.3g}")


def test_criterion_08_noise_copula_oracles():
    closed5 = C5MUniform()
    oracle5 = c5_general(M, U01, U01, U01)
    d5 = float(np.abs(oracle5(U33, V33) - np.asarray(closed5.cdf(U33, V33))).max())

    closed6 = C6IndepUniform()
    oracle6 = c6_general(PI, U01, U01, U01)
    d6 = float(np.abs(oracle6(U33, V33) - np.asarray(closed6.cdf(U33, V33))).max())

    c7m = c7_general(M, U01, U01, U01, U01)
    d7m = float(np.abs(c7m(U33, V33) - np.asarray(closed6.cdf(U33, V33))).max())
    c7pi = c7_general(PI, U01, U01, U01, U01)
    d7pi = float(np.abs(c7pi(U33, V33) - U33 * V33).max())

    # documented discrepancy of the region-indexed table, with the numbers
    table_gap = abs(c6_region_table_variant(0.4, 0.4) - float(oracle6(0.4, 0.4)))
    closed_gap = abs(float(closed6.cdf(0.4, 0.4)) - float(oracle6(0.4, 0.4)))
    doc = Path(__file__).resolve().parents[1] / "docs" / "noise-copula-notes.md"

    ok = d5 <= 1e-5 and d6 <= 1e-4 and d7m <= 1e-4 and d7pi <= 1e-4 \
        and table_gap > 0.01 and closed_gap <= 1e-4 and doc.is_file()
    report(8, "noise copula closed forms agree with quadrature; table variant documented",
           ok, f"c5 {d5:.1e}, c6 {d6:.1e}, c7|M {d7m:.1e}, c7|Pi {d7pi:.1e}, "
               f"table gap {table_gap:.3f} vs closed gap {closed_gap:.1e}")


def test_criterion_09_mixing_targets():
    b = beta_coeff(FGM(0.8))
    p = phi_coeff(FGM(0.8))
    s = psi_coeff(FGM(0.8))
    bm = beta_coeff(M)
    inf1 = psi_coeff(hat(Frank(3.0), 0.25))
    inf2 = psi_coeff(make_mixture([0.9, 0.1], [FGM(0.5), M]))
    ok = abs(b - 0.1) <= 1e-3 and abs(p - 0.2) <= 2e-3 and abs(s - 0.8) <= 2e-3 \
        and bm == 1.0 and math.isinf(inf1) and math.isinf(inf2)
    report(9, "one-step mixing coefficients hit their derived targets",
           ok, f"beta {b:.4f}, phi {p:.4f}, psi {s:.4f}, beta(M) {bm}, atom psi inf")


def test_criterion_10_pi_blend_rescaling():
    worst = 0.0
    for c in (Frank(3.0), FGM(0.7)):
        ref = beta_coeff(c)
        for a in (0.25, 0.5, 0.75):
            worst = max(worst, abs(beta_coeff(make_mixture([a, 1 - a], [c, PI])) - a * ref))
    report(10, "blending with the product copula rescales beta exactly",
           worst <= 1e-5, f"worst {worst:.2e}")


def test_criterion_11_geometric_decay():
    start = time.perf_counter()
    ok = True
    details = []
    for c in (FGM(0.8), Frank(3.0)):
        table = decay_table(c, PerturbationParams("tilde", 0.5), 4, grid=128)
        for row in table.rows:
            base = beta_coeff(n_fold(c, row.n, 128).copula)
            if abs(row.beta - 0.5 ** row.n * base) > 1e-3:
                ok = False
        rate = table.fitted_rate
        r2 = log_linear_r2([r.phi for r in table.rows])
        details.append(f"{c.model_id()}: rate {rate:.3f}, phi R2 {r2:.5f}")
        ok = ok and rate <= 0.52 and r2 > 0.999
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 120.0
    report(11, "pi-blend decay is geometric with the predicted per-row values",
           ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_12_min_blend_plateau():
    table = decay_table(PI, PerturbationParams("hat", 0.5), 4, grid=128)
    gaps = [row.beta - 0.5 ** row.n for row in table.rows]
    ok = all(g <= 0.01 for g in gaps) and table.rows[3].beta <= table.rows[0].beta
    report(12, "min-blend of the product base plateaus at the atom mass",
           ok, "gaps " + ", ".join(f"{g:.1e}" for g in gaps))


def test_criterion_13_simulation_cross_checks(fgm1_chain, tilde_fgm_chain):
    rho = stats.spearmanr(fgm1_chain.values[:-1], fgm1_chain.values[1:]).statistic
    ok_rho = abs(rho - 1.0 / 3.0) <= 0.015

    n = tilde_fgm_chain.values.size
    bhat = empirical_beta(tilde_fgm_chain, lag=1, bins=16)
    floor = beta_noise_floor(n, lag=1, bins=16, seed=77)
    ok_beta = abs((bhat - floor) - 0.05) <= 0.03

    chm = sample_chain(M, 10_000, seed=5)
    bm = empirical_beta(chm, lag=3, bins=16)
    ok_m = bm >= 0.9
    report(13, "chain statistics match the analytic coefficients",
           ok_rho and ok_beta and ok_m,
           f"spearman {rho:.4f}, calibrated beta {bhat - floor:.4f}, comonotone beta {bm:.3f}")


def test_criterion_14_reachability_maps():
    n = 128
    rmap = reachability_map(C5MUniform(), n)
    centers = rmap.centers
    bad = 0
    for i, x in enumerate(centers):
        lo_u, hi_u = i / n, (i + 1) / n
        if x <= 0.5:
            edge = math.sqrt(2 * x)
            lo_b, hi_b = math.sqrt(2 * lo_u), math.sqrt(2 * hi_u)
            predicted = centers >= edge
        else:
            edge = 1 - math.sqrt(2 * (1 - x))
            lo_b, hi_b = 1 - math.sqrt(2 * (1 - lo_u)), 1 - math.sqrt(2 * (1 - hi_u))
            predicted = centers <= edge
        disagree = np.nonzero(rmap.one_step_zero[i] != predicted)[0]
        # the edge curve sweeps [lo_b, hi_b] across this row; one extra cell
        if disagree.size and ((centers[disagree] < lo_b - 1.0 / n).any()
                              or (centers[disagree] > hi_b + 1.0 / n).any()):
            bad += 1
    two_ok = reachability_map(C6IndepUniform(), n).two_step_fully_reachable()
    report(14, "zero-density regions match the closed predicates; two-step map full",
           bad == 0 and two_ok, f"{bad} rows off, two-step reachable {two_ok}")


def test_criterion_15_deterministic_outputs(tmp_path):
    from copulab.cli import main

    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        main(["mixing", "--copula", '{"type":"frank","lambda":3}', "--perturb", "tilde:0.5",
              "--n-max", "3", "--no-plot", "--out", str(path)])
        main(["simulate", "--copula", '{"type":"fgm","theta":0.8}', "--length", "4000",
              "--seed", "12", "--no-plot", "--out", str(tmp_path / ("chain-" + name))])
        outputs.append((path.read_bytes(), (tmp_path / ("chain-" + name)).read_bytes()))
    ok = outputs[0] == outputs[1]
    report(15, "identical configurations and seeds give byte-identical CSVs", ok)
