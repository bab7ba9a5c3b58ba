import numpy as np
import pytest

from heisgmt import fields as F
from heisgmt import group as G
from heisgmt.exceptions import DegenerateGradient, InvalidArgument

from conftest import random_points

QUARTIC = [[1.0, [0, 0, 1, 0, 0]], [0.5, [0, 1, 0, 0, 0]], [0.3, [2, 0, 0, 1, 0]],
           [0.05, [0, 0, 4, 0, 0]], [0.1, [0, 2, 2, 0, 0]], [0.2, [1, 0, 0, 0, 1]]]


def _fd(u):
    return F.ScalarField(u.name + "-fd", u.func, None, u.n)


def test_t_gradient_hand_value():
    u = F.make_field("t", 1)
    x, y = 0.5, 0.7
    np.testing.assert_allclose(F.grad_full(u, np.array([x, y, 0.0])), [2 * y, -2 * x, 1.0], atol=1e-15)


def test_remark27_gradient():
    u = F.make_field("remark27", 1)
    for x, y, t in [(0.5, 0.7, 0.3), (-1.2, 0.1, 2.0)]:
        np.testing.assert_allclose(F.grad_full(u, np.array([x, y, t])), [0.0, -4 * x, 1.0], atol=1e-14)
    a = F.grad_full(u, np.array([0.0, 0.4, -0.2]))
    assert np.all(F.grad_h(u, np.array([0.0, 0.4, -0.2])) == 0)
    assert G.g_norm(a) == 1.0
    assert F.is_characteristic(a)
    with pytest.raises(InvalidArgument):
        F.make_field("remark27", 2)


def test_height_gradient_is_X1(rng):
    u = F.make_field("height", 2)
    p = random_points(rng, 2, 100)
    gh = F.grad_h(u, p)
    np.testing.assert_array_equal(gh, np.broadcast_to([1.0, 0, 0, 0], gh.shape))


def test_horizontal_norm_below_full(rng):
    u = F.polynomial_field(QUARTIC, 2)
    p = random_points(rng, 2, 1000)
    assert np.all(G.g_norm(F.grad_h(u, p)) <= G.g_norm(F.grad_full(u, p)))


@pytest.mark.parametrize("name", ["height", "y1", "t", "radial-koranyi"])
def test_closed_form_matches_difference(rng, name):
    u = F.make_field(name, 2)
    p = random_points(rng, 2, 200, 1.0)
    np.testing.assert_allclose(F.grad_full(_fd(u), p), F.grad_full(u, p), atol=1e-7)


def test_richardson_order(rng):
    u = F.polynomial_field(QUARTIC, 2)
    p = random_points(rng, 2, 50, 1.0)
    exact = F.grad_full(u, p)
    errs = []
    for h in (4e-2, 2e-2, 1e-2):
        errs.append(np.max(np.abs(F.grad_full(_fd(u).with_step(h), p) - exact)))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(slopes >= 1.9)


def test_step_underflow():
    u = _fd(F.make_field("t", 1))
    with pytest.raises(InvalidArgument):
        F.grad_full(u.with_step(1e-300), np.array([0.5, 0.5, 0.5]))


def test_unknown_field():
    with pytest.raises(InvalidArgument):
        F.make_field("nope", 1)


def test_w_of_y_is_minus_T():
    u = F.make_field("y1", 1)
    np.testing.assert_allclose(F.w_field(u, np.array([0.3, -0.2, 0.9])), [0.0, 0.0, -1.0], atol=1e-15)


def test_w_unit_and_annihilates(rng):
    u = F.polynomial_field(QUARTIC, 2)
    p = random_points(rng, 2, 1000, 1.0)
    a = F.grad_full(u, p)
    keep = ~F.is_characteristic(a, 1e-3)
    W = F.w_from_gradient(a[keep])
    assert np.max(np.abs(G.g_norm(W) - 1.0)) <= 1e-10
    assert np.max(np.abs(np.sum(W * a[keep], axis=-1))) <= 1e-10
    # orthogonal to horizontal vectors orthogonal to grad_H u
    gh = a[keep][:, :-1]
    v = rng.normal(size=gh.shape)
    v -= (np.sum(v * gh, axis=-1) / np.sum(gh * gh, axis=-1))[:, None] * gh
    V = np.concatenate([v, np.zeros((len(v), 1))], axis=-1)
    assert np.max(np.abs(np.sum(W * V, axis=-1))) <= 1e-10


def test_w_annihilates_remark27_by_differences():
    u = F.make_field("remark27", 1)
    p = np.array([0.4, -0.3, 0.2])
    W = F.w_field(u, p)
    v = G.frame_to_coords(p, W)
    h = 1e-5
    d = (u(p + h * v) - u(p - h * v)) / (2 * h)
    assert abs(d) < 1e-9


def test_w_degenerate():
    with pytest.raises(DegenerateGradient):
        F.w_from_gradient(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(DegenerateGradient):
        F.w_field(F.make_field("remark27", 1), np.array([0.0, 0.5, 0.0]))


def test_casino_hand_value():
    N = np.array([1.0, 0.0, 0.0])
    a = F.grad_full(F.make_field("y1", 1), np.array([0.2, 0.1, 0.3]))
    M, closed = F.casino_sides(N, a[:-1], a)
    assert M == pytest.approx(1.0, abs=1e-14)
    assert closed == pytest.approx(1.0, abs=1e-14)


def test_casino_vertical_normal():
    a = np.array([0.6, -0.3, 0.4, 0.1, 1.5])
    M, closed = F.casino_sides(np.array([0, 0, 0, 0, 1.0]), a[:-1], a)
    assert M == pytest.approx(closed, abs=1e-14)


def test_casino_random_trials(rng):
    for n in (1, 2):
        d = 2 * n + 1
        N = rng.normal(size=(10_000, d))
        N /= np.linalg.norm(N, axis=-1)[:, None]
        a = rng.normal(size=(10_000, d)) * rng.uniform(0.1, 3.0, size=(10_000, 1))
        res = F.casino_identity_residual(N, a[:, :-1], a)
        assert np.max(np.abs(res)) <= 1e-10


def test_casino_inconsistent_inputs():
    a = np.array([1.0, 0.5, 0.2])
    with pytest.raises(InvalidArgument):
        F.casino_identity_residual(np.array([1.0, 0.0, 0.0]), a[:-1] + 0.1, a)
    with pytest.raises(InvalidArgument):
        F.casino_identity_residual(np.array([2.0, 0.0, 0.0]), a[:-1], a)


def test_translated_and_dilated(rng):
    u = F.polynomial_field(QUARTIC, 2)
    q = np.array([0.2, -0.1, 0.3, 0.05, 0.4])
    p = random_points(rng, 2, 100, 1.0)
    ut = u.translated(q)
    qp = G.group_mul(q, p)
    np.testing.assert_allclose(ut(qp), u(p), atol=1e-12)
    # left-invariant frame: derivatives transport unchanged
    np.testing.assert_allclose(F.grad_full(ut, qp), F.grad_full(u, p), atol=1e-10)
    ud = u.dilated(2.0)
    np.testing.assert_allclose(ud(G.dilate(2.0, p)), u(p), atol=1e-12)


def test_polynomial_config_field():
    u = F.make_field({"polynomial": [[2.0, [1, 0, 0]], [1.0, [0, 0, 2]]], "name": "q"}, 1)
    p = np.array([0.5, 0.0, 3.0])
    assert u(p) == pytest.approx(10.0)
    assert u.gradient_mode == "closed-form"
