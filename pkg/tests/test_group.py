import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from heisgmt import group as G
from heisgmt.exceptions import InvalidArgument

from conftest import random_points

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def pts(n=1):
    return arrays(float, 2 * n + 1, elements=coord)


def test_product_hand_value():
    out = G.group_mul(G.point([1.0], [0.0], 0.0), G.point([0.0], [1.0], 0.0))
    np.testing.assert_array_equal(out, [1.0, 1.0, -2.0])


def test_inverse_hand_value():
    np.testing.assert_array_equal(G.group_inv(np.array([1.0, 1.0, -2.0])), [-1.0, -1.0, 2.0])
    np.testing.assert_array_equal(G.group_inv(G.identity(2)), np.zeros(5))


def test_dilation_hand_value():
    np.testing.assert_array_equal(G.dilate(2.0, np.array([1.0, 1.0, 1.0])), [2.0, 2.0, 4.0])
    p = np.array([0.3, -0.7, 1.1])
    np.testing.assert_array_equal(G.dilate(1.0, p), p)


@pytest.mark.parametrize("lam", [0.0, -1.0, np.nan])
def test_dilation_rejects_nonpositive(lam):
    with pytest.raises(InvalidArgument):
        G.dilate(lam, np.zeros(3))


def test_norm_hand_values():
    p = np.array([0.0, 0.0, 4.0])
    # (|z|^4 + t^2)^(1/4) = 16^(1/4)
    assert G.koranyi_norm(p) == pytest.approx(2.0, abs=1e-15)
    assert G.box_norm(p) == pytest.approx(2.0, abs=1e-15)
    q = np.array([0.6, 0.8, 0.0])
    assert G.koranyi_norm(q) == pytest.approx(1.0)
    assert G.box_norm(q) == pytest.approx(1.0)


def test_nonfinite_rejected():
    with pytest.raises(InvalidArgument):
        G.group_mul(np.array([np.nan, 0.0, 0.0]), np.zeros(3))


def test_projection_hand_value():
    p = np.array([1.0, 1.0, 2.0])
    np.testing.assert_array_equal(G.project_W(p), [0.0, 1.0, 0.0])
    assert G.height(p) == 1.0
    w = np.array([0.0, 0.4, -0.3])
    np.testing.assert_array_equal(G.project_W(w), w)
    assert G.height(w) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_group_axioms(rng, n):
    p, q, r = (random_points(rng, n, 1000) for _ in range(3))
    lhs = G.group_mul(G.group_mul(p, q), r)
    rhs = G.group_mul(p, G.group_mul(q, r))
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    e = G.identity(n)
    np.testing.assert_allclose(G.group_mul(p, e), p, atol=0)
    assert np.max(np.abs(G.group_mul(p, G.group_inv(p)))) < 1e-12
    np.testing.assert_array_equal(G.group_inv(G.group_inv(p)), p)


@pytest.mark.parametrize("n", [1, 2])
def test_projection_reconstruction(rng, n):
    p = random_points(rng, n, 1000)
    w = G.project_W(p)
    h = G.height(p)
    back = G.group_mul(w, h[:, None] * G.e1(n)[None, :])
    assert np.max(np.abs(back - p)) < 1e-12
    np.testing.assert_allclose(G.project_W(w), w, atol=1e-15)
    assert np.all(w[:, 0] == 0)


@given(pts(), st.floats(0.01, 50))
def test_norm_homogeneity(p, lam):
    for norm in (G.koranyi_norm, G.box_norm):
        assert norm(G.dilate(lam, p)) == pytest.approx(lam * norm(p), rel=1e-12, abs=1e-12)


@given(pts(2))
def test_norm_equivalence_ratio(p):
    b = G.box_norm(p)
    if b > 1e-6:
        ratio = G.koranyi_norm(p) / b
        assert 1.0 - 1e-12 <= ratio <= 2.0**0.25 + 1e-12


def test_norm_ratio_extremum():
    # |z| = 1, t = 1 gives the maximal ratio 2^(1/4)
    p = np.array([1.0, 0.0, 1.0])
    assert G.koranyi_norm(p) / G.box_norm(p) == pytest.approx(2.0**0.25)


@given(pts(), pts())
def test_dilation_is_automorphism(p, q):
    lhs = G.dilate(1.7, G.group_mul(p, q))
    rhs = G.group_mul(G.dilate(1.7, p), G.dilate(1.7, q))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


def test_left_translation_unit_jacobian(rng):
    p = random_points(rng, 2, 50)
    J = G.left_translation_jacobian(p)
    np.testing.assert_allclose(np.linalg.det(J), 1.0, atol=1e-12)
    # the map is affine, so the Jacobian matches a difference quotient exactly
    q = random_points(rng, 2, 50)
    dq = np.eye(5)[3] * 0.5
    diff = (G.group_mul(p, q + dq) - G.group_mul(p, q)) / 0.5
    np.testing.assert_allclose(diff, J[:, :, 3], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_frame_bracket(n):
    p = np.linspace(-0.8, 0.9, 2 * n + 1)
    T = np.zeros(2 * n + 1)
    T[-1] = 1.0
    for j in range(n):
        br = G.flow_commutator(p, j, n + j, 1e-3)
        np.testing.assert_allclose(br, -4.0 * T, atol=1e-6)
    if n == 2:
        # [X_1, Y_2] = 0
        np.testing.assert_allclose(G.flow_commutator(p, 0, 3, 1e-3), 0.0, atol=1e-6)


def test_frame_coordinates_roundtrip(rng):
    p = random_points(rng, 2, 20)
    v = rng.normal(size=(20, 5))
    np.testing.assert_allclose(G.frame_to_coords(p, G.coords_to_frame(p, v)), v, atol=1e-12)


def test_cylinder_membership():
    c1 = G.CylinderSpec(1.0)
    assert G.cylinder_contains(c1, np.array([0.0, 0.99, 0.0]))
    assert not G.cylinder_contains(c1, np.array([0.0, 1.01, 0.0]))
    for r in (1e-3, 1.0, 10.0):
        assert G.cylinder_contains(G.CylinderSpec(r), np.zeros(3))
    with pytest.raises(InvalidArgument):
        G.CylinderSpec(0.0)


def test_cylinder_translation(rng):
    q = np.array([0.3, -0.2, 0.5])
    p = random_points(rng, 1, 500, 1.5)
    inside = G.cylinder_contains(G.CylinderSpec(0.8, q), G.group_mul(q, p))
    np.testing.assert_array_equal(inside, G.cylinder_contains(G.CylinderSpec(0.8), p))


def test_ball_kinds():
    p = np.array([0.0, 0.0, 0.81])
    assert G.ball_contains(1.0, p, "koranyi")
    assert G.ball_contains(1.0, p, "box")
    with pytest.raises(InvalidArgument):
        G.ball_contains(1.0, p, "round")


def test_cylinder_ball_constant_bounds():
    out = G.cylinder_ball_constant(1, samples=200_000, seed=1)
    assert out["sup_norm_in_C1"] >= 1.0
    assert out["k_lower_bound"] >= 1.0
    assert 0 < out["inf_norm_outside_C1"] <= 1.0
