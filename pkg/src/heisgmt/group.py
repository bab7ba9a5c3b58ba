"""Heisenberg group H^n in the global chart (x, y, t).

A point is a float array whose last axis holds ``x_1..x_n, y_1..y_n, t``
(length ``2n+1``); every function broadcasts over leading axes.  Tangent
vectors are handled in two encodings:

* coordinate components ``(dx, dy, dt)`` on ``d/dx_j, d/dy_j, d/dt``;
* frame components ``(a_1..a_2n, c)`` on the left-invariant orthonormal
  frame ``X_j = d/dx_j + 2 y_j d/dt``, ``Y_j = d/dy_j - 2 x_j d/dt``,
  ``T = d/dt``.

Frame components are what the metric ``g`` sees: the g-norm of a vector is
the Euclidean norm of its frame components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgument
from .validation import check_n, check_points, check_positive, check_same_n, n_from_dim


def split(p):
    """Return views ``(x, y, t)`` of a point array."""
    n = n_from_dim(p.shape[-1])
    return p[..., :n], p[..., n : 2 * n], p[..., 2 * n]


def point(x, y, t) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise InvalidArgument("x and y must have the same shape")
    t = np.asarray(t, dtype=float)[..., None]
    return check_points(np.concatenate([x, y, np.broadcast_to(t, x.shape[:-1] + (1,))], axis=-1))


def identity(n: int) -> np.ndarray:
    return np.zeros(2 * check_n(n) + 1)


def e1(n: int, s: float = 1.0) -> np.ndarray:
    """The point ``s e_1 = (s, 0, ..., 0)``."""
    p = identity(n)
    p[0] = s
    return p


def _symplectic(x, y, xi, eta):
    # Im <z, conj(zeta)> summed over j
    return np.sum(y * xi - x * eta, axis=-1)


def group_mul(p, q) -> np.ndarray:
    """Group law ``(z, t) * (zeta, tau) = (z + zeta, t + tau + 2 Im<z, conj zeta>)``."""
    p = check_points(p, name="p")
    q = check_points(q, name="q")
    check_same_n(p, q)
    x, y, t = split(p)
    xi, eta, tau = split(q)
    out = np.broadcast_arrays(p, q)[0].copy()
    out[..., :-1] = p[..., :-1] + q[..., :-1]
    out[..., -1] = t + tau + 2.0 * _symplectic(x, y, xi, eta)
    return out


def group_inv(p) -> np.ndarray:
    return -check_points(p)


def dilate(lam, p) -> np.ndarray:
    """Intrinsic dilation ``(z, t) -> (lam z, lam^2 t)``."""
    lam = check_positive(lam, "lambda")
    p = check_points(p)
    out = lam * p
    out[..., -1] = lam * lam * p[..., -1]
    return out


def koranyi_norm(p) -> np.ndarray:
    p = check_points(p)
    z2 = np.sum(p[..., :-1] ** 2, axis=-1)
    return (z2 * z2 + p[..., -1] ** 2) ** 0.25


def box_norm(p) -> np.ndarray:
    p = check_points(p)
    return np.maximum(np.sqrt(np.sum(p[..., :-1] ** 2, axis=-1)), np.sqrt(np.abs(p[..., -1])))


def height(p) -> np.ndarray:
    return check_points(p)[..., 0]


def project_W(p) -> np.ndarray:
    """Group projection onto the vertical hyperplane ``W = {x_1 = 0}``.

    Returns the unique ``w`` in W with ``w * (h(p) e_1) = p``; in coordinates
    this zeroes ``x_1`` and replaces ``t`` by ``t - 2 x_1 y_1``.
    """
    p = check_points(p)
    n = n_from_dim(p.shape[-1])
    w = p.copy()
    w[..., 0] = 0.0
    w[..., -1] = p[..., -1] - 2.0 * p[..., 0] * p[..., n]
    return w


def distance_box(p, q) -> np.ndarray:
    """Left-invariant box quasi-distance ``||p^{-1} * q||_inf``."""
    return box_norm(group_mul(group_inv(p), q))


def distance_koranyi(p, q) -> np.ndarray:
    return koranyi_norm(group_mul(group_inv(p), q))


@dataclass(frozen=True)
class CylinderSpec:
    """Intrinsic cylinder ``center * C_r`` with ``C_r = D_r * (-r, r)``."""

    radius: float
    center: np.ndarray | None = field(default=None)

    def __post_init__(self):
        check_positive(self.radius, "radius")
        if self.center is not None:
            object.__setattr__(self, "center", check_points(self.center, name="center"))

    def contains(self, p) -> np.ndarray:
        return cylinder_contains(self, p)


def cylinder_contains(spec: CylinderSpec, p) -> np.ndarray:
    p = check_points(p)
    if spec.center is not None:
        p = group_mul(group_inv(spec.center), p)
    r = spec.radius
    return (koranyi_norm(project_W(p)) < r) & (np.abs(p[..., 0]) < r)


def ball_contains(r, p, kind: str = "koranyi") -> np.ndarray:
    r = check_positive(r, "r")
    if kind == "koranyi":
        return koranyi_norm(p) < r
    if kind == "box":
        return box_norm(p) < r
    raise InvalidArgument(f"unknown ball kind {kind!r} (expected 'koranyi' or 'box')")


def cylinder_ball_constant(n: int, samples: int = 1_000_000, seed: int = 0) -> dict:
    """Monte Carlo lower bounds for the inclusion constant ``k(n)``.

    ``C_1 subset B_k`` needs ``k >= sup_{C_1} ||p||_K``; ``B_{1/k} subset C_1``
    needs ``1/k <= inf_{p not in C_1} ||p||_K``.  Points of ``C_1`` are drawn as
    ``w * (s e_1)`` with ``w`` uniform in ``D_1``; the outer bound uses the
    boundary of ``C_1``.
    """
    n = check_n(n)
    rng = np.random.default_rng(seed)
    d = 2 * n + 1
    # w uniform in the box [-1,1]^{2n}, rejected to D_1
    w = rng.uniform(-1.0, 1.0, size=(samples, d))
    w[:, 0] = 0.0
    w = w[koranyi_norm(w) < 1.0]
    s = rng.uniform(-1.0, 1.0, size=len(w))
    pts = group_mul(w, s[:, None] * e1(n)[None, :])
    sup_inside = float(koranyi_norm(pts).max())

    # boundary of C_1: either |s| = 1 with w in D_1, or ||w||_K = 1
    m = len(w)
    side = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    top = group_mul(w, side[:, None] * e1(n)[None, :])
    wb = w / koranyi_norm(w)[:, None] ** np.append(np.ones(d - 1), 2.0)[None, :]
    wall = group_mul(wb, s[:, None] * e1(n)[None, :])
    inf_outside = float(min(koranyi_norm(top).min(), koranyi_norm(wall).min()))
    return {
        "sup_norm_in_C1": sup_inside,
        "inf_norm_outside_C1": inf_outside,
        "k_lower_bound": max(sup_inside, 1.0 / inf_outside),
        "samples": int(m),
        "seed": seed,
    }


# --- tangent vectors --------------------------------------------------------


def coords_to_frame(p, v) -> np.ndarray:
    """Frame components of the coordinate vector ``v`` based at ``p``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    x, y, _ = split(p)
    n = x.shape[-1]
    out = np.array(np.broadcast_arrays(v, p)[0], dtype=float, copy=True)
    vx, vy = v[..., :n], v[..., n : 2 * n]
    out[..., -1] = v[..., -1] - 2.0 * np.sum(y * vx - x * vy, axis=-1)
    return out


def frame_to_coords(p, a) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    x, y, _ = split(p)
    n = x.shape[-1]
    out = np.array(np.broadcast_arrays(a, p)[0], dtype=float, copy=True)
    ax, ay = a[..., :n], a[..., n : 2 * n]
    out[..., -1] = a[..., -1] + 2.0 * np.sum(y * ax - x * ay, axis=-1)
    return out


def columns_to_frame(p, J) -> np.ndarray:
    """Apply :func:`coords_to_frame` to every column of ``J`` (shape ``(..., d, m)``)."""
    return np.moveaxis(coords_to_frame(p[..., None, :], np.moveaxis(J, -1, -2)), -2, -1)


def coordinate_gradient_to_frame(p, grad) -> np.ndarray:
    """Frame derivatives ``(X_j f, Y_j f, T f)`` from the coordinate gradient of ``f``."""
    p = np.asarray(p, dtype=float)
    grad = np.asarray(grad, dtype=float)
    x, y, _ = split(p)
    n = x.shape[-1]
    ft = grad[..., -1:]
    out = np.array(np.broadcast_arrays(grad, p)[0], dtype=float, copy=True)
    out[..., :n] = grad[..., :n] + 2.0 * y * ft
    out[..., n : 2 * n] = grad[..., n : 2 * n] - 2.0 * x * ft
    return out


def g_norm(a) -> np.ndarray:
    return np.linalg.norm(np.asarray(a, dtype=float), axis=-1)


def horizontal_part(a) -> np.ndarray:
    return np.asarray(a, dtype=float)[..., :-1]


def left_translation_jacobian(p) -> np.ndarray:
    """Coordinate Jacobian of ``q -> p * q`` (independent of ``q``)."""
    p = check_points(p)
    d = p.shape[-1]
    n = n_from_dim(d)
    x, y, _ = split(p)
    J = np.broadcast_to(np.eye(d), p.shape[:-1] + (d, d)).copy()
    # d t_out / d xi_j = 2 y_j ; d t_out / d eta_j = -2 x_j
    J[..., -1, :n] = 2.0 * y
    J[..., -1, n : 2 * n] = -2.0 * x
    return J


def frame_vector_coords(n: int, index: int) -> np.ndarray:
    """Frame component vector of the basis field number ``index``
    (``0..n-1`` -> X_j, ``n..2n-1`` -> Y_j, ``2n`` -> T)."""
    v = np.zeros(2 * check_n(n) + 1)
    v[index] = 1.0
    return v


def right_flow(p, index: int, s: float) -> np.ndarray:
    """Flow of the left-invariant field number ``index`` for time ``s``.

    Left-invariant fields integrate to right multiplication by ``exp``; in
    these coordinates ``exp(s X_j) = s e_j``.
    """
    p = check_points(p)
    step = frame_vector_coords(n_from_dim(p.shape[-1]), index) * s
    return group_mul(p, step)


def flow_commutator(p, i: int, j: int, s: float) -> np.ndarray:
    """``(phi_j^{-s} o phi_i^{-s} o phi_j^{s} o phi_i^{s})(p) - p`` divided by ``s^2``.

    Tends to the coordinate components of ``[V_i, V_j]`` at ``p``.
    """
    q = right_flow(p, i, s)
    q = right_flow(q, j, s)
    q = right_flow(q, i, -s)
    q = right_flow(q, j, -s)
    return (q - p) / (s * s)
