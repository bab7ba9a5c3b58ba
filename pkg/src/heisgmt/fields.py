"""Smooth scalar fields on H^n and their frame gradients.

A :class:`ScalarField` evaluates ``u(p)`` and its coordinate gradient, either
in closed form or by central differences.  Frame derivatives
``(X_j u, Y_j u, T u)`` are assembled from the coordinate gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import DegenerateGradient, InvalidArgument
from .group import coordinate_gradient_to_frame
from .validation import check_n, check_points, n_from_dim

#: default central-difference step
H_FD = 1e-5
#: relative threshold below which the horizontal gradient counts as zero
CHAR_TOL = 1e-8


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on H^n.

    Parameters
    ----------
    name : str
        Registry or user label.
    func : callable
        Vectorized map from points ``(..., 2n+1)`` to values ``(...)``.
    grad : callable, optional
        Vectorized coordinate gradient ``(..., 2n+1) -> (..., 2n+1)``.  When
        omitted, central differences with step ``h_fd`` are used.
    n : int, optional
        Restrict the field to ``H^n``; ``None`` accepts any dimension.
    h_fd : float
        Central-difference step.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    n: int | None = None
    h_fd: float = H_FD

    @property
    def gradient_mode(self) -> str:
        return "closed-form" if self.grad is not None else "central-difference"

    def _check(self, p) -> np.ndarray:
        p = check_points(p)
        if self.n is not None and n_from_dim(p.shape[-1]) != self.n:
            raise InvalidArgument(f"field {self.name!r} is defined on H^{self.n} only")
        return p

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.func(self._check(p)), dtype=float)

    def coord_gradient(self, p, mode: str | None = None) -> np.ndarray:
        """Euclidean coordinate gradient ``(d/dx, d/dy, d/dt) u``."""
        p = self._check(p)
        mode = mode or self.gradient_mode
        if mode == "closed-form":
            if self.grad is None:
                raise InvalidArgument(f"field {self.name!r} has no closed-form gradient")
            return np.asarray(self.grad(p), dtype=float)
        if mode == "central-difference":
            return central_difference(self.func, p, self.h_fd)
        raise InvalidArgument(f"unknown gradient mode {mode!r}")

    def with_step(self, h_fd: float) -> "ScalarField":
        return ScalarField(self.name, self.func, None, self.n, h_fd)

    def translated(self, q) -> "ScalarField":
        """The field ``u o L_{q^{-1}}``, i.e. ``u`` moved along with ``p -> q * p``."""
        from .group import group_inv, group_mul, left_translation_jacobian

        qi = group_inv(np.asarray(q, dtype=float))
        Ji = left_translation_jacobian(qi)
        func = self.func
        grad = self.grad

        def f(p):
            return func(group_mul(qi, p))

        g = None
        if grad is not None:

            def g(p):
                return grad(group_mul(qi, p)) @ Ji

        return ScalarField(f"{self.name}@translated", f, g, self.n, self.h_fd)

    def dilated(self, lam: float) -> "ScalarField":
        """The field ``u o delta_{1/lam}``."""
        from .group import dilate

        func = self.func
        grad = self.grad

        def scale(d):
            s = np.full(d, 1.0 / lam)
            s[-1] = 1.0 / (lam * lam)
            return s

        def f(p):
            return func(dilate(1.0 / lam, p))

        g = None
        if grad is not None:

            def g(p):
                return grad(dilate(1.0 / lam, p)) * scale(p.shape[-1])

        return ScalarField(f"{self.name}@dilated", f, g, self.n, self.h_fd)


def central_difference(func, p: np.ndarray, h: float) -> np.ndarray:
    """Second-order central differences along the coordinate axes."""
    h = float(h)
    scale = max(1.0, float(np.max(np.abs(p)))) if p.size else 1.0
    if not np.isfinite(h) or h <= 0 or h < 64 * np.finfo(float).eps * scale:
        raise InvalidArgument(f"finite-difference step {h!r} underflows at this scale")
    d = p.shape[-1]
    out = np.empty(p.shape, dtype=float)
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        out[..., k] = (np.asarray(func(p + e)) - np.asarray(func(p - e))) / (2.0 * h)
    return out


def grad_full(u: ScalarField, p, mode: str | None = None) -> np.ndarray:
    """Frame coefficients ``(X_1 u, ..., Y_n u, T u)`` at ``p``."""
    p = check_points(p)
    return coordinate_gradient_to_frame(p, u.coord_gradient(p, mode))


def grad_h(u: ScalarField, p, mode: str | None = None) -> np.ndarray:
    return grad_full(u, p, mode)[..., :-1]


def is_characteristic(grad_frame, tol: float = CHAR_TOL) -> np.ndarray:
    """Scale-aware zero test for the horizontal part of a frame vector."""
    a = np.asarray(grad_frame, dtype=float)
    gh = np.linalg.norm(a[..., :-1], axis=-1)
    return gh < tol * np.maximum(1.0, np.linalg.norm(a, axis=-1))


def w_from_gradient(a) -> np.ndarray:
    """The unit field ``W`` tangent to level sets and orthogonal to ``H Sigma^s``."""
    a = np.asarray(a, dtype=float)
    if np.any(is_characteristic(a)):
        raise DegenerateGradient("W is undefined where the horizontal gradient vanishes")
    gh = a[..., :-1]
    tu = a[..., -1]
    nh = np.linalg.norm(gh, axis=-1)
    nf = np.linalg.norm(a, axis=-1)
    w = np.empty_like(a)
    w[..., :-1] = (tu / (nf * nh))[..., None] * gh
    w[..., -1] = -nh / nf
    return w


def w_field(u: ScalarField, p, mode: str | None = None) -> np.ndarray:
    return w_from_gradient(grad_full(u, p, mode))


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def casino_sides(N, gradH, gradFull, tol: float = 1e-10):
    """Both sides of the slice-density identity.

    Returns ``(M, closed)`` where ``M`` is evaluated from the level-set
    normal and ``W`` while ``closed = |N^H|^2 - <N^H, grad_H u/|grad_H u|>^2``.
    """
    N = np.asarray(N, dtype=float)
    gradH = np.asarray(gradH, dtype=float)
    gradFull = np.asarray(gradFull, dtype=float)
    if gradFull.shape[-1] != gradH.shape[-1] + 1 or N.shape[-1] != gradFull.shape[-1]:
        raise InvalidArgument("N, gradH and gradFull have incompatible sizes")
    scale = np.maximum(1.0, np.linalg.norm(gradFull, axis=-1))
    if np.any(np.linalg.norm(gradFull[..., :-1] - gradH, axis=-1) > 1e-12 * scale):
        raise InvalidArgument("gradFull is not gradH + (Tu) T")
    if np.any(np.abs(np.linalg.norm(N, axis=-1) - 1.0) > tol):
        raise InvalidArgument("N must be a unit frame vector")
    nhat = gradFull / np.linalg.norm(gradFull, axis=-1)[..., None]
    W = w_from_gradient(gradFull)
    c = _dot(N, nhat)
    tang = N - c[..., None] * nhat
    M = 1.0 - c**2 - _dot(tang, W) ** 2
    NH = N[..., :-1]
    ghat = gradH / np.linalg.norm(gradH, axis=-1)[..., None]
    closed = _dot(NH, NH) - _dot(NH, ghat) ** 2
    return M, closed


def casino_identity_residual(N, gradH, gradFull) -> np.ndarray:
    M, closed = casino_sides(N, gradH, gradFull)
    return M - closed


# --- polynomial and parameter functions ------------------------------------


@dataclass(frozen=True)
class ParamFunction:
    """A smooth function on ``R^dim`` with its gradient (used for graph profiles)."""

    name: str
    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]

    def __call__(self, w) -> np.ndarray:
        return np.asarray(self.func(np.asarray(w, dtype=float)), dtype=float)

    def gradient(self, w) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(w, dtype=float)), dtype=float)


def polynomial(terms: Sequence, dim: int, name: str = "polynomial") -> ParamFunction:
    """Polynomial on ``R^dim`` from ``(coef, powers)`` pairs."""
    coefs = []
    pows = []
    for term in terms:
        c, pw = term
        pw = [int(k) for k in pw]
        if len(pw) != dim or min(pw) < 0:
            raise InvalidArgument(f"monomial exponents must be {dim} nonnegative integers, got {pw}")
        coefs.append(float(c))
        pows.append(pw)
    coefs = np.asarray(coefs, dtype=float)
    pows = np.asarray(pows, dtype=int).reshape(-1, dim)

    def f(p):
        out = np.zeros(p.shape[:-1])
        for c, pw in zip(coefs, pows):
            out = out + c * np.prod(p**pw, axis=-1)
        return out

    def g(p):
        out = np.zeros(p.shape)
        for c, pw in zip(coefs, pows):
            for k in np.nonzero(pw)[0]:
                dp = pw.copy()
                dp[k] -= 1
                out[..., k] += c * pw[k] * np.prod(p**dp, axis=-1)
        return out

    return ParamFunction(name, dim, f, g)


def sine(amplitude: float, frequency, phase: float = 0.0, name: str = "sine") -> ParamFunction:
    """``amplitude * sin(<frequency, w> + phase)``."""
    k = np.asarray(frequency, dtype=float)
    a = float(amplitude)
    ph = float(phase)
    return ParamFunction(
        name,
        k.size,
        lambda w: a * np.sin(w @ k + ph),
        lambda w: (a * np.cos(w @ k + ph))[..., None] * k,
    )


def make_param_function(spec, dim: int) -> ParamFunction:
    """Profile from a config mapping: ``{"polynomial": ...}``, ``{"linear": [...]}``
    or ``{"sine": {"amplitude", "frequency", "phase"}}``."""
    if isinstance(spec, ParamFunction):
        return spec
    if not isinstance(spec, dict):
        raise InvalidArgument(f"cannot build a profile from {spec!r}")
    if "polynomial" in spec:
        return polynomial(spec["polynomial"], dim, spec.get("name", "polynomial"))
    if "linear" in spec:
        c = [float(v) for v in spec["linear"]]
        if len(c) != dim:
            raise InvalidArgument(f"linear profile needs {dim} coefficients")
        terms = [(ci, [int(j == i) for j in range(dim)]) for i, ci in enumerate(c) if ci != 0.0]
        return polynomial(terms, dim, spec.get("name", "linear"))
    if "sine" in spec:
        sp = spec["sine"]
        return sine(sp["amplitude"], sp["frequency"], sp.get("phase", 0.0))
    raise InvalidArgument(f"unknown profile kind in {spec!r}")


def polynomial_field(terms: Sequence, n: int, name: str = "polynomial") -> ScalarField:
    """Polynomial in ``(x_1..x_n, y_1..y_n, t)`` with a closed-form gradient.

    ``terms`` is a sequence of ``(coef, powers)`` with ``powers`` a length
    ``2n+1`` list of nonnegative integers.
    """
    n = check_n(n)
    pf = polynomial(terms, 2 * n + 1, name)
    return ScalarField(name, pf.func, pf.grad, n)


def linear_field(coeffs, name: str = "linear") -> ScalarField:
    c = np.asarray(coeffs, dtype=float)
    n = n_from_dim(c.shape[-1])
    return ScalarField(name, lambda p: p @ c, lambda p: np.broadcast_to(c, p.shape).copy(), n)


# --- registry ---------------------------------------------------------------


def _coordinate(k: int | str, name: str) -> Callable[[int], ScalarField]:
    def make(n: int) -> ScalarField:
        d = 2 * check_n(n) + 1
        idx = d - 1 if k == "t" else int(k) if k != "y1" else n
        c = np.zeros(d)
        c[idx] = 1.0
        return linear_field(c, name)

    return make


def _remark27(n: int) -> ScalarField:
    if check_n(n) != 1:
        raise InvalidArgument("the remark27 field u = t - 2xy is defined on H^1 only")

    def f(p):
        return p[..., 2] - 2.0 * p[..., 0] * p[..., 1]

    def g(p):
        out = np.empty(p.shape)
        out[..., 0] = -2.0 * p[..., 1]
        out[..., 1] = -2.0 * p[..., 0]
        out[..., 2] = 1.0
        return out

    return ScalarField("remark27", f, g, 1)


def _radial_koranyi(n: int) -> ScalarField:
    check_n(n)

    def f(p):
        z2 = np.sum(p[..., :-1] ** 2, axis=-1)
        return z2 * z2 + p[..., -1] ** 2

    def g(p):
        z2 = np.sum(p[..., :-1] ** 2, axis=-1)
        out = np.empty(p.shape)
        out[..., :-1] = 4.0 * z2[..., None] * p[..., :-1]
        out[..., -1] = 2.0 * p[..., -1]
        return out

    return ScalarField("radial-koranyi", f, g, n)


FIELD_REGISTRY: dict[str, Callable[[int], ScalarField]] = {
    "height": _coordinate(0, "height"),
    "y1": _coordinate("y1", "y1"),
    "t": _coordinate("t", "t"),
    "remark27": _remark27,
    "radial-koranyi": _radial_koranyi,
}


def make_field(spec, n: int) -> ScalarField:
    """Build a field from a registry name or a config mapping.

    Config mappings take the form ``{"polynomial": [[coef, [powers...]], ...]}``
    with an optional ``"name"``.
    """
    if isinstance(spec, ScalarField):
        return spec
    if isinstance(spec, str):
        try:
            return FIELD_REGISTRY[spec](n)
        except KeyError:
            raise InvalidArgument(
                f"unknown field {spec!r}; known: {', '.join(sorted(FIELD_REGISTRY))}"
            ) from None
    if isinstance(spec, dict) and "polynomial" in spec:
        return polynomial_field(spec["polynomial"], n, spec.get("name", "polynomial"))
    raise InvalidArgument(f"cannot build a field from {spec!r}")
