"""Body oracle tests: gauges, supports, polarity, linear images,
complexification and relative out-radii against stated oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regpos import bodies as bd

RNG = np.random.default_rng(1234)


def sphere_points(m, n, rng=RNG):
    X = rng.standard_normal((m, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


# ----------------------------------------------------------------------
# gauge values
# ----------------------------------------------------------------------


def test_gauge_l1_corner():
    assert bd.cross_polytope(2).gauge([1.0, 1.0]) == pytest.approx(2.0, abs=1e-12)


def test_gauge_ellipsoid_boundary():
    E = bd.Ellipsoid(np.diag([0.25, 1.0]))
    assert E.gauge([2.0, 0.0]) == pytest.approx(1.0, abs=1e-12)


def test_gauge_weighted_l3():
    K = bd.WeightedLp.from_weights(3.0, [1.0, 1.0])
    assert K.gauge([1.0, 1.0]) == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-12)


def test_gauge_zero_iff_origin():
    K = bd.WeightedLp.from_weights(1.5, [1.0, 2.0, 3.0])
    assert K.gauge(np.zeros(3)) == 0.0
    assert K.gauge([1e-9, 0, 0]) > 0.0


def test_gauge_errors():
    K = bd.ball(3)
    with pytest.raises(ValueError, match="dimension"):
        K.gauge([1.0, 2.0])
    with pytest.raises(ValueError, match="finite"):
        K.gauge([np.nan, 0.0, 0.0])


def test_degenerate_rejections():
    with pytest.raises(bd.DegenerateBodyError):
        bd.Ellipsoid(np.diag([1.0, 0.0]))
    with pytest.raises(bd.DegenerateBodyError):
        bd.PolytopeH([[1.0, 0.0]])  # normals do not span: unbounded
    with pytest.raises(bd.DegenerateBodyError):
        bd.PolytopeV([[1.0, 0.0], [2.0, 0.0]])  # vertices do not span
    with pytest.raises(bd.DegenerateBodyError):
        bd.WeightedLp(2.0, [1.0, -1.0])


# ----------------------------------------------------------------------
# support values
# ----------------------------------------------------------------------


def test_support_l1():
    assert bd.cross_polytope(2).support([1.0, 1.0]) == pytest.approx(1.0, abs=1e-12)


def test_support_ellipsoid_inverse_form():
    A = np.diag([0.25, 1.0])
    E = bd.Ellipsoid(A)
    y = np.array([1.0, 0.0])
    oracle = np.sqrt(y @ np.linalg.inv(A) @ y)
    assert E.support(y) == pytest.approx(oracle, rel=1e-12)
    assert E.support(y) == pytest.approx(2.0, rel=1e-12)


def test_support_ball_unit_directions():
    U = sphere_points(50, 5)
    assert np.allclose(bd.ball(5).support(U), 1.0, atol=1e-12)


# ----------------------------------------------------------------------
# polarity
# ----------------------------------------------------------------------


def test_polar_cross_polytope_is_cube():
    U = sphere_points(1000, 4)
    P = bd.cross_polytope(4).polar()
    assert np.abs(P.gauge(U) - bd.cube(4).gauge(U)).max() <= 1e-9


def test_polar_ellipsoid_inverts_matrix():
    E = bd.Ellipsoid(np.diag([0.25, 1.0]))
    P = E.polar()
    assert np.allclose(P.A, np.diag([4.0, 1.0]))


def test_polar_involution_h_polytope():
    rows = RNG.standard_normal((10, 3))
    K = bd.PolytopeH(rows)
    KK = K.polar().polar()
    U = sphere_points(1000, 3)
    assert np.abs(KK.gauge(U) - K.gauge(U)).max() <= 1e-9


def test_support_equals_polar_gauge_across_families():
    bodies = [
        bd.cross_polytope(5),
        bd.cube(5),
        bd.WeightedLp.from_weights(1.5, np.linspace(1, 2, 5)),
        bd.Ellipsoid(np.diag(np.linspace(0.5, 2, 5))),
    ]
    U = sphere_points(1000, 5)
    for K in bodies:
        assert np.abs(K.support(U) - K.polar().gauge(U)).max() <= 1e-9


# ----------------------------------------------------------------------
# linear images
# ----------------------------------------------------------------------


def test_linear_image_identity():
    K = bd.cross_polytope(3)
    X = sphere_points(200, 3)
    assert np.allclose(bd.linear_image(np.eye(3), K).gauge(X), K.gauge(X), atol=1e-12)


def test_linear_image_diag_on_ball():
    T = np.diag([2.0, 0.5])
    K = bd.linear_image(T, bd.ball(2))
    assert K.gauge([2.0, 0.0]) == pytest.approx(1.0, rel=1e-12)


def test_linear_image_polar_duality_random_gl3():
    K = bd.cross_polytope(3)
    U = sphere_points(1000, 3)
    for _ in range(5):
        T = RNG.standard_normal((3, 3)) + 3.0 * np.eye(3)
        lhs = bd.linear_image(T, K).polar().gauge(U)
        rhs = bd.linear_image(np.linalg.inv(T).T, K.polar()).gauge(U)
        assert np.abs(lhs - rhs).max() <= 1e-9 * np.abs(rhs).max()


def test_linear_image_singular_rejected():
    with pytest.raises(ValueError, match="singular"):
        bd.LinearImage(np.zeros((2, 2)), bd.ball(2))


# ----------------------------------------------------------------------
# complexification
# ----------------------------------------------------------------------


def test_complexify_ball_singular_value_oracle():
    C = bd.complexify(bd.ball(2))
    x = np.array([1.0, 0.2])
    y = np.array([-0.4, 0.9])
    # max_theta |cos t x + sin t y| is the top singular value of [x y]
    oracle = np.linalg.svd(np.column_stack([x, y]), compute_uv=False)[0]
    assert C.gauge(np.concatenate([x, y])) == pytest.approx(oracle, rel=1e-9)
    assert C.gauge([1.0, 0.0, 0.0, 1.0]) == pytest.approx(1.0, rel=1e-9)


def test_complexify_segment_is_modulus():
    seg = bd.complexify(bd.cube(1))
    assert seg.gauge([3.0, 4.0]) == pytest.approx(5.0, rel=1e-7)


def test_complexify_cross_polytope_diagonal_max():
    C = bd.complexify(bd.cross_polytope(2))
    # fine-grid oracle for max_theta (|cos| + |sin|)
    ts = np.linspace(0, np.pi, 20001)
    oracle = np.max(np.abs(np.cos(ts)) + np.abs(np.sin(ts)))
    assert C.gauge([1.0, 0.0, 0.0, 1.0]) == pytest.approx(oracle, rel=1e-7)
    assert oracle == pytest.approx(np.sqrt(2), rel=1e-8)


def test_complexify_real_section_and_circledness():
    K = bd.WeightedLp.from_weights(1.5, [1.0, 2.0])
    C = bd.complexify(K)
    X = sphere_points(50, 2)
    emb = np.hstack([X, np.zeros_like(X)])
    assert np.abs(C.gauge(emb) - K.gauge(X)).max() <= 1e-7
    W = RNG.standard_normal((30, 4))
    g0 = C.gauge(W)
    phi = 0.77
    c, s = np.cos(phi), np.sin(phi)
    Wr = np.hstack([c * W[:, :2] - s * W[:, 2:], s * W[:, :2] + c * W[:, 2:]])
    assert np.abs(C.gauge(Wr) - g0).max() <= 1e-7 * np.abs(g0).max()


# ----------------------------------------------------------------------
# relative out-radius
# ----------------------------------------------------------------------


def test_relative_out_radius_self():
    K = bd.WeightedLp.from_weights(1.5, [1.0, 2.0, 0.5])
    assert bd.relative_out_radius(K, K) == pytest.approx(1.0, rel=1e-9)


def test_relative_out_radius_l1_in_l2():
    assert bd.relative_out_radius(bd.cross_polytope(2), bd.ball(2)) == pytest.approx(1.0, rel=1e-9)
    # maximize ||x||_1 over the circle: sqrt(2) at the diagonal
    assert bd.relative_out_radius(bd.ball(2), bd.cross_polytope(2)) == pytest.approx(
        np.sqrt(2), rel=1e-9
    )


def test_relative_out_radius_ellipsoid_pair_generalized_eig():
    A = np.diag([1.0, 4.0, 0.25])
    Bm = np.diag([2.0, 1.0, 1.0])
    K, L = bd.Ellipsoid(A), bd.Ellipsoid(Bm)
    from scipy.linalg import eigh

    oracle = np.sqrt(eigh(Bm, A, eigvals_only=True)[-1])
    assert bd.relative_out_radius(K, L) == pytest.approx(oracle, rel=1e-12)


def test_relative_out_radius_dimension_mismatch():
    with pytest.raises(ValueError):
        bd.relative_out_radius(bd.ball(2), bd.ball(3))


# ----------------------------------------------------------------------
# radii caches
# ----------------------------------------------------------------------


def test_radii_closed_forms():
    r, R, exact = bd.cross_polytope(2).radii
    assert exact and r == pytest.approx(1 / np.sqrt(2)) and R == pytest.approx(1.0)
    r, R, exact = bd.cube(3).radii
    assert exact and r == pytest.approx(1.0) and R == pytest.approx(np.sqrt(3))
    E = bd.Ellipsoid(np.diag([0.25, 1.0]))
    assert E.radii.r == pytest.approx(1.0) and E.radii.R == pytest.approx(2.0)
    # p > 2: B_2 inside, radius ratio n^(1/2 - 1/p)
    K = bd.WeightedLp.from_weights(3.0, np.ones(4))
    assert K.radii.r == pytest.approx(1.0, rel=1e-12)
    assert K.radii.R == pytest.approx(4.0 ** (1 / 2 - 1 / 3), rel=1e-12)


def test_radii_envelope_sampled():
    for K in (bd.cross_polytope(6), bd.WeightedLp.from_weights(3.0, np.linspace(1, 2, 6))):
        X = sphere_points(500, 6)
        g = K.gauge(X)
        r, R, _ = K.radii
        assert np.all(g <= 1 / r + 1e-12)
        assert np.all(g >= 1 / R - 1e-12)


# ----------------------------------------------------------------------
# DSL round trips
# ----------------------------------------------------------------------


def test_spec_round_trip_families():
    rows = RNG.standard_normal((8, 4))
    bodies = [
        bd.WeightedLp.from_weights(1.5, [1.0, 2.0]),
        bd.cube(3),
        bd.Ellipsoid(np.diag([1.0, 2.0])),
        bd.PolytopeH(rows),
        bd.PolytopeV(rows),
        bd.complexify(bd.cross_polytope(2)),
    ]
    for K in bodies:
        K2 = bd.from_spec(K.spec())
        X = sphere_points(100 if K.exact else 20, K.dim)
        assert np.abs(K2.gauge(X) - K.gauge(X)).max() <= 1e-9 * np.abs(K.gauge(X)).max()


def test_from_spec_wrappers_and_errors():
    spec = {"family": "polar", "base": {"family": "weighted_lp", "p": 1, "weights": [1, 1]}}
    K = bd.from_spec(spec)
    assert K.gauge([1.0, 1.0]) == pytest.approx(1.0)
    spec = {
        "family": "linear_image",
        "matrix": [[2.0, 0.0], [0.0, 0.5]],
        "base": {"family": "ellipsoid", "matrix": [[1.0, 0.0], [0.0, 1.0]]},
    }
    assert bd.from_spec(spec).gauge([2.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="unknown"):
        bd.from_spec({"family": "moebius"})
    with pytest.raises(ValueError):
        bd.from_spec({"p": 2})


def test_inf_p_serialization():
    K = bd.cube(3)
    spec = K.spec()
    assert spec["p"] == "inf"
    K2 = bd.from_spec(spec)
    assert np.isinf(K2.p)


# ----------------------------------------------------------------------
# property tests
# ----------------------------------------------------------------------


@st.composite
def weighted_lp_bodies(draw):
    n = draw(st.integers(1, 6))
    p = draw(st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]))
    scales = draw(
        st.lists(st.floats(0.2, 5.0, allow_nan=False), min_size=n, max_size=n)
    )
    return bd.WeightedLp(p, np.array(scales))


@given(weighted_lp_bodies(), st.integers(0, 10**6), st.floats(0.01, 100.0))
@settings(max_examples=60, deadline=None)
def test_gauge_homogeneous_even_triangle(K, seed, lam):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(K.dim)
    y = rng.standard_normal(K.dim)
    gx, gy = K.gauge(x), K.gauge(y)
    assert K.gauge(lam * x) == pytest.approx(lam * gx, rel=1e-9)
    assert K.gauge(-x) == gx
    assert K.gauge(x + y) <= gx + gy + 1e-9 * (gx + gy)


@given(weighted_lp_bodies(), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_gauge_support_pairing(K, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(K.dim)
    y = rng.standard_normal(K.dim)
    # |<x, y>| <= gauge(x) * support(y)
    assert abs(x @ y) <= K.gauge(x) * K.support(y) * (1 + 1e-9) + 1e-12


def test_oracles_do_not_mutate_input():
    K = bd.cross_polytope(3)
    x = np.array([1.0, -2.0, 3.0])
    saved = x.copy()
    K.gauge(x)
    K.support(x)
    K.gauge_subgrad(x)
    assert np.array_equal(x, saved)


def test_subgradient_supports_gauge():
    bodies = [
        bd.cross_polytope(4),
        bd.cube(4),
        bd.WeightedLp.from_weights(1.5, np.linspace(1, 2, 4)),
        bd.Ellipsoid(np.diag(np.linspace(0.5, 2, 4))),
        bd.PolytopeH(RNG.standard_normal((9, 4))),
    ]
    X = RNG.standard_normal((50, 4))
    for K in bodies:
        g = K.gauge(X)
        Y = K.gauge_subgrad(X)
        # a gauge subgradient y satisfies <y, x> = gauge(x) and polar-gauge(y) <= 1
        assert np.abs(np.einsum("mi,mi->m", Y, X) - g).max() <= 1e-9 * g.max()
        assert K.polar().gauge(Y).max() <= 1 + 1e-9
