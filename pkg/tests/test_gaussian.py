"""Gaussian functional estimates against exact moments, quadrature oracles
and common-random-number identities."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from regpos import bodies as bd
from regpos import subspaces as sp
from regpos.gaussian import (
    FixedSample,
    GaussianSample,
    crn_diff,
    crn_pair,
    ell,
    ell_star,
    gauss_norm_mean,
    mstar,
)


def test_sample_reproducible_and_prefix_stable():
    a = GaussianSample(42, 40000, 8).vectors()
    b = GaussianSample(42, 40000, 8).vectors()
    assert np.array_equal(a, b)
    short = GaussianSample(42, 20000, 8).vectors()
    assert np.array_equal(a[:20000], short)
    other = GaussianSample(43, 20000, 8).vectors()
    assert not np.array_equal(short, other)


def test_sample_block_mean_band():
    s = GaussianSample(7, 30000, 4)
    G = s.vectors()
    assert np.abs(G.mean(axis=0)).max() <= 5.0 / np.sqrt(s.count)


def test_threaded_reduction_identical():
    K = bd.cross_polytope(16)
    s = GaussianSample(3, 50000, 16)
    assert ell(K, 2, s, threads=1).value == ell(K, 2, s, threads=2).value


def test_ell2_ball_exact_second_moment():
    s = GaussianSample(1, 10000, 16)
    e = ell(bd.ball(16), 2, s)
    assert abs(e.value - 4.0) <= 3 * e.se


def test_ell_homogeneity_exact_under_crn():
    sA = GaussianSample(5, 5000, 4)
    a = ell(bd.ball(4).scale(2.0), 2, sA)
    b = ell(bd.ball(4), 2, sA)
    assert a.value == pytest.approx(b.value / 2.0, abs=1e-12)


def test_ell_cube2_quadrature_oracle():
    # E max(|g1|, |g2|) via the 1-d integral with the half-normal cdf
    target = quad(
        lambda t: t * 2 * np.sqrt(2 / np.pi) * np.exp(-t * t / 2) * (2 * ndtr(t) - 1), 0, 12
    )[0]
    assert target == pytest.approx(2 / np.sqrt(np.pi), rel=1e-9)
    s = GaussianSample(2, 100000, 2)
    e = ell(bd.cube(2), 1, s)
    assert abs(e.value - target) <= 3 * e.se


def test_mstar_ball_and_cross_polytope():
    s = GaussianSample(3, 50000, 2)
    m = mstar(bd.ball(2), s)
    assert abs(m.value - 1.0) <= 1e-12
    target = quad(lambda t: np.maximum(np.abs(np.cos(t)), np.abs(np.sin(t))), 0, 2 * np.pi)[0]
    target /= 2 * np.pi
    assert target == pytest.approx(2 * np.sqrt(2) / np.pi, rel=1e-9)
    m1 = mstar(bd.cross_polytope(2), s)
    assert abs(m1.value - target) <= 3 * m1.se


def test_ell_star_vs_gauss_mean_times_mstar():
    n = 16
    s = GaussianSample(4, 20000, n)
    K = bd.cross_polytope(n)
    ls = ell_star(K, 1, s)
    ms = mstar(K, s)
    c = gauss_norm_mean(n)
    from scipy.special import gamma

    assert c == pytest.approx(np.sqrt(2) * gamma(8.5) / gamma(8), rel=1e-12)
    assert abs(ls.value - c * ms.value) <= 3 * (ls.se + c * ms.se)


def test_crn_pair_identical_bodies():
    s = GaussianSample(6, 5000, 4)
    a, b = crn_pair(bd.ball(4), bd.ball(4), "ell", s)
    assert a.value == b.value
    d = crn_diff(bd.ball(4), bd.ball(4), "ell", s)
    assert d.value == 0.0 and d.se == 0.0


def test_crn_scaling_ratio_exact():
    s = GaussianSample(6, 5000, 4)
    a, b = crn_pair(bd.ball(4), bd.ball(4).scale(2.0), "ell2", s)
    assert a.value == pytest.approx(2.0 * b.value, abs=1e-12)


def test_crn_variance_reduction_measured():
    bodyA = bd.cross_polytope(8)
    bodyB = bd.WeightedLp.from_weights(1.1, np.ones(8))
    s = GaussianSample(8, 10000, 8)
    d = crn_diff(bodyA, bodyB, "ell2", s)
    ea = ell(bodyA, 2, s)
    eb = ell(bodyB, 2, GaussianSample(9, 10000, 8))
    indep_se = np.hypot(2 * ea.value * ea.se, 2 * eb.value * eb.se)
    assert d.se < indep_se


def test_monotone_under_inclusion():
    s = GaussianSample(10, 20000, 8)
    l1 = ell(bd.cross_polytope(8), 1, s)
    l2 = ell(bd.WeightedLp(2.0, np.ones(8)), 1, s)
    l3 = ell(bd.cube(8), 1, s)
    assert l1.value >= l2.value >= l3.value  # CRN makes this essentially sure


def test_contraction_sections_and_projections():
    n, m = 8, 4
    rng = np.random.default_rng(13)
    E = sp.haar_grassmannian(rng, n, m)
    K = bd.cross_polytope(n)
    lK = ell(K, 1, GaussianSample(11, 20000, n))
    lS = ell(sp.section(K, E), 1, GaussianSample(12, 20000, m))
    assert lS.value <= lK.value + 3 * (lS.se + lK.se)
    lsK = ell_star(K, 1, GaussianSample(11, 20000, n))
    lsP = ell_star(sp.project(K, E), 1, GaussianSample(12, 20000, m))
    assert lsP.value <= lsK.value + 3 * (lsP.se + lsK.se)


def test_al_star_one_dimensional_bound():
    # 1/r(K) <= sqrt(pi/2) ell(K) and R(K) <= sqrt(pi/2) ell*(K)
    s = GaussianSample(14, 20000, 6)
    factor = np.sqrt(np.pi / 2)
    for K in (bd.cross_polytope(6), bd.cube(6), bd.Ellipsoid(np.diag(np.linspace(0.5, 2, 6)))):
        l = ell(K, 1, s)
        ls = ell_star(K, 1, s)
        r, R, _ = K.radii
        assert 1.0 / r <= factor * (l.value + 3 * l.se)
        assert R <= factor * (ls.value + 3 * ls.se)


def test_fixed_sample_and_sign_symmetrization():
    base = GaussianSample(15, 100, 3)
    sym = FixedSample(base.sign_symmetrized())
    assert sym.count == 100 * 8
    G = sym.vectors()
    # closed under sign flips: the multiset of |rows| has multiplicity 8
    flipped = G * np.array([-1.0, 1.0, 1.0])
    key = np.sort(np.round(G, 9).view([("a", float), ("b", float), ("c", float)]), axis=0)
    key2 = np.sort(np.round(flipped, 9).view([("a", float), ("b", float), ("c", float)]), axis=0)
    assert np.array_equal(key, key2)
    with pytest.raises(ValueError):
        GaussianSample(0, 100, 16).sign_symmetrized()


def test_estimate_validation():
    s = GaussianSample(16, 1000, 4)
    with pytest.raises(ValueError):
        ell(bd.ball(4), 3, s)
    with pytest.raises(ValueError):
        ell(bd.ball(5), 2, s)
