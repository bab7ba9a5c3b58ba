"""Parametrized hypersurface patches and their surface measures.

A patch maps a parameter box ``U subset R^{2n}`` into H^n.  All geometry is
done in frame components: the columns of the differential are converted to
the orthonormal frame, and the generalized cross product of those columns
yields a normal whose length is the Riemannian area element and whose
horizontal part has length equal to the H-perimeter density.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import CharacteristicPoint, CoverageError, DegeneratePatch, InvalidArgument
from .fields import CHAR_TOL, ParamFunction, ScalarField, grad_full, make_param_function
from .group import (
    CylinderSpec,
    columns_to_frame,
    cylinder_contains,
    dilate,
    group_mul,
    left_translation_jacobian,
)
from .quadrature import DEFAULT_NODES, box_rule, koranyi_disk_rule, windowed_box_rule
from .validation import check_n, check_positive

RANK_TOL = 1e-12


def generalized_cross(G: np.ndarray) -> np.ndarray:
    """Normal to the columns of ``G`` (shape ``(..., d, d-1)``).

    ``N_i = (-1)^(i+d-1) det(G without row i)`` (0-based ``i``), so that
    ``det[G | N] = |N|^2 > 0`` and ``|N|`` is the volume spanned by the columns.
    """
    d = G.shape[-2]
    if G.shape[-1] != d - 1:
        raise InvalidArgument("generalized cross product needs d-1 columns in R^d")
    N = np.empty(G.shape[:-1])
    for i in range(d):
        minor = np.delete(G, i, axis=-2)
        N[..., i] = (-1.0) ** (i + d - 1) * np.linalg.det(minor)
    return N


@dataclass
class WeightedSampleSet:
    """A discrete measure: points with nonnegative weights and provenance."""

    points: np.ndarray
    weights: np.ndarray
    label: str
    params: np.ndarray | None = None
    tangent_frames: np.ndarray | None = None
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise InvalidArgument("weights must be finite and nonnegative")

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.asarray(values, dtype=float)))

    def __len__(self) -> int:
        return len(self.weights)


class SurfacePatch:
    """Smooth parametrization ``Phi: [lo, hi] -> H^n``.

    Parameters
    ----------
    n : int
    lo, hi : array_like
        Parameter box, length ``2n`` each.
    func : callable
        ``(..., 2n) -> (..., 2n+1)``.
    jac : callable, optional
        Coordinate differential ``(..., 2n) -> (..., 2n+1, 2n)``; central
        differences are used when omitted.
    defining : ScalarField, optional
        The patch bounds the set ``{defining > 0}``; normals point into it.
    orientation_sign : {1, -1}
        Used when no defining function is available.
    """

    def __init__(self, n, lo, hi, func, jac=None, *, defining: ScalarField | None = None,
                 orientation_sign: int = 1, name: str = "patch", spec: dict | None = None,
                 h_fd: float = 1e-5):
        self.n = check_n(n)
        self.lo = np.asarray(lo, dtype=float).reshape(-1)
        self.hi = np.asarray(hi, dtype=float).reshape(-1)
        if self.lo.size != 2 * self.n or self.hi.size != 2 * self.n or np.any(self.hi <= self.lo):
            raise InvalidArgument(f"parameter box must be 2n = {2 * self.n} nondegenerate intervals")
        if orientation_sign not in (1, -1):
            raise InvalidArgument("orientation_sign must be +1 or -1")
        self._func = func
        self._jac = jac
        self.defining = defining
        self.orientation_sign = orientation_sign
        self.name = name
        self.spec = spec
        self.h_fd = h_fd

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def to_config(self) -> dict:
        if self.spec is None:
            raise InvalidArgument(f"patch {self.name!r} was not built from the registry")
        return dict(self.spec)

    def __call__(self, params) -> np.ndarray:
        return np.asarray(self._func(np.asarray(params, dtype=float)), dtype=float)

    def jacobian(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if self._jac is not None:
            return np.asarray(self._jac(params), dtype=float)
        m = params.shape[-1]
        cols = []
        for k in range(m):
            e = np.zeros(m)
            e[k] = self.h_fd
            cols.append((self(params + e) - self(params - e)) / (2.0 * self.h_fd))
        return np.stack(cols, axis=-1)

    def frame_jacobian(self, params, points=None) -> np.ndarray:
        p = self(params) if points is None else points
        return columns_to_frame(p, self.jacobian(params))

    def orientation(self, params, points, N) -> np.ndarray:
        """Sign making ``N`` point into ``{defining > 0}``."""
        if self.defining is None:
            return np.full(N.shape[:-1], float(self.orientation_sign))
        df = grad_full(self.defining, points)
        s = np.sign(np.sum(N * df, axis=-1))
        return np.where(s == 0, float(self.orientation_sign), s)

    def geometry(self, params) -> dict:
        """Points, oriented raw normal (frame), area element and H-density."""
        params = np.asarray(params, dtype=float)
        pts = self(params)
        G = self.frame_jacobian(params, pts)
        N = generalized_cross(G)
        area = np.linalg.norm(N, axis=-1)
        scale = np.max(np.linalg.norm(G, axis=-2), axis=-1) ** (G.shape[-1])
        if np.any(area <= RANK_TOL * np.maximum(1.0, scale)):
            raise DegeneratePatch(f"differential of {self.name!r} loses rank at a node")
        N = N * self.orientation(params, pts, N)[..., None]
        return {
            "points": pts,
            "frame_jacobian": G,
            "normal_raw": N,
            "area": area,
            "h_density": np.linalg.norm(N[..., :-1], axis=-1),
        }

    # --- transformed copies ---

    def translated(self, q) -> "SurfacePatch":
        """The patch ``q * Phi``."""
        q = np.asarray(q, dtype=float)
        Jq = left_translation_jacobian(q)
        func = lambda w: group_mul(q, self(w))  # noqa: E731
        jac = lambda w: Jq @ self.jacobian(w)  # noqa: E731
        return SurfacePatch(self.n, self.lo, self.hi, func, jac,
                            defining=None if self.defining is None else self.defining.translated(q),
                            orientation_sign=self.orientation_sign, name=f"{self.name}@translated")

    def dilated(self, lam: float) -> "SurfacePatch":
        """The patch ``delta_lam o Phi`` over the same parameter box."""
        lam = check_positive(lam, "lambda")
        s = np.full(self.dim, lam)
        s[-1] = lam * lam
        func = lambda w: dilate(lam, self(w))  # noqa: E731
        jac = lambda w: s[:, None] * self.jacobian(w)  # noqa: E731
        return SurfacePatch(self.n, self.lo, self.hi, func, jac,
                            defining=None if self.defining is None else self.defining.dilated(lam),
                            orientation_sign=self.orientation_sign, name=f"{self.name}@dilated")

    def flipped(self) -> "SurfacePatch":
        d = self.defining
        neg = None
        if d is not None:
            g = d.grad
            neg = ScalarField(f"-{d.name}", lambda p: -d.func(p),
                              None if g is None else (lambda p: -g(p)), d.n, d.h_fd)
        return SurfacePatch(self.n, self.lo, self.hi, self._func, self._jac, defining=neg,
                            orientation_sign=-self.orientation_sign, name=f"{self.name}@flipped")


class IntrinsicGraph(SurfacePatch):
    """Intrinsic X_1-graph ``Phi(w) = w * (phi(w) e_1)`` over a box in W.

    Parameters ``w = (x_2..x_n, y_1..y_n, t)``; in coordinates
    ``Phi(w) = (phi, x_2..x_n, y_1..y_n, t + 2 y_1 phi)``.  The graph bounds
    ``E = {p : h(p) < phi(pi(p))}``.
    """

    def __init__(self, n, phi: ParamFunction, lo=None, hi=None, *, name="x1-graph",
                 spec: dict | None = None):
        n = check_n(n)
        if phi.dim != 2 * n:
            raise InvalidArgument(f"graph profile must be a function on R^{2 * n}")
        self.phi = phi
        lo = -np.ones(2 * n) if lo is None else lo
        hi = np.ones(2 * n) if hi is None else hi
        super().__init__(n, lo, hi, self._map, self._jac_graph,
                         defining=self._defining_field(n, phi), name=name, spec=spec)

    def _map(self, w):
        n = self.n
        ph = self.phi(w)
        out = np.empty(w.shape[:-1] + (2 * n + 1,))
        out[..., 0] = ph
        out[..., 1:2 * n] = w[..., : 2 * n - 1]
        out[..., -1] = w[..., -1] + 2.0 * w[..., n - 1] * ph
        return out

    def _jac_graph(self, w):
        n = self.n
        m = 2 * n
        ph = self.phi(w)
        dph = self.phi.gradient(w)
        J = np.zeros(w.shape[:-1] + (m + 1, m))
        J[..., 0, :] = dph
        J[..., 1:m, : m - 1] = np.eye(m - 1)
        J[..., -1, :] = 2.0 * w[..., n - 1, None] * dph
        J[..., -1, n - 1] += 2.0 * ph
        J[..., -1, -1] += 1.0
        return J

    @staticmethod
    def _defining_field(n, phi):
        # f(p) = phi(pi(p)) - h(p), positive on E
        def params_of(p):
            w = p[..., 1:].copy()
            w[..., -1] = p[..., -1] - 2.0 * p[..., 0] * p[..., n]
            return w

        def f(p):
            return phi(params_of(p)) - p[..., 0]

        def g(p):
            dw = phi.gradient(params_of(p))
            out = np.zeros(p.shape)
            out[..., 1:] = dw
            out[..., 0] = -2.0 * p[..., n] * dw[..., -1] - 1.0
            out[..., n] += -2.0 * p[..., 0] * dw[..., -1]
            return out

        return ScalarField(f"graph-side[{phi.name}]", f, g, n)

    def orientation(self, params, points, N):
        # inner normal of E has negative X_1 component
        s = -np.sign(N[..., 0])
        return np.where(s == 0, 1.0, s)

    def dilated(self, lam: float) -> "IntrinsicGraph":
        """Graph of ``lam * phi(delta_{1/lam} w)``, so that it bounds ``delta_lam E``."""
        lam = check_positive(lam, "lambda")
        m = 2 * self.n
        s = np.full(m, lam)
        s[-1] = lam * lam
        phi = self.phi
        ph = ParamFunction(
            f"{phi.name}@dilated",
            m,
            lambda w: lam * phi(w / s),
            lambda w: lam * phi.gradient(w / s) / s,
        )
        return IntrinsicGraph(self.n, ph, self.lo * s, self.hi * s, name=f"{self.name}@dilated")

    def flipped(self) -> SurfacePatch:
        return SurfacePatch.flipped(self)


def sphere_patch(beta_max: float = 1.2, name: str = "koranyi-sphere") -> SurfacePatch:
    """Koranyi unit sphere in H^1 away from its poles.

    ``Phi(alpha, beta) = (sqrt(cos b) cos a, sqrt(cos b) sin a, sin b)`` with
    ``alpha in [0, 2 pi]``, ``|beta| <= beta_max < pi/2``.  Bounds the ball
    ``{1 - |z|^4 - t^2 > 0}``.
    """
    if not 0 < beta_max < 0.5 * np.pi:
        raise InvalidArgument("beta_max must lie in (0, pi/2)")

    def func(w):
        a, b = w[..., 0], w[..., 1]
        rc = np.sqrt(np.cos(b))
        return np.stack([rc * np.cos(a), rc * np.sin(a), np.sin(b)], axis=-1)

    def jac(w):
        a, b = w[..., 0], w[..., 1]
        rc = np.sqrt(np.cos(b))
        drc = -np.sin(b) / (2.0 * rc)
        J = np.zeros(w.shape[:-1] + (3, 2))
        J[..., 0, 0] = -rc * np.sin(a)
        J[..., 1, 0] = rc * np.cos(a)
        J[..., 0, 1] = drc * np.cos(a)
        J[..., 1, 1] = drc * np.sin(a)
        J[..., 2, 1] = np.cos(b)
        return J

    def f(p):
        z2 = p[..., 0] ** 2 + p[..., 1] ** 2
        return 1.0 - z2 * z2 - p[..., 2] ** 2

    def g(p):
        z2 = p[..., 0] ** 2 + p[..., 1] ** 2
        return np.stack([-4.0 * z2 * p[..., 0], -4.0 * z2 * p[..., 1], -2.0 * p[..., 2]], axis=-1)

    return SurfacePatch(1, [0.0, -beta_max], [2.0 * np.pi, beta_max], func, jac,
                        defining=ScalarField("koranyi-ball-side", f, g, 1), name=name,
                        spec={"kind": "koranyi-sphere", "beta_max": beta_max})


def vertical_plane(n: int, half_width: float = 1.0, t_half_width: float | None = None,
                   name: str = "vertical-plane") -> IntrinsicGraph:
    """The plane ``W = {x_1 = 0}`` bounding ``{x_1 < 0}``."""
    n = check_n(n)
    tw = half_width if t_half_width is None else t_half_width
    hi = np.full(2 * n, float(half_width))
    hi[-1] = tw
    phi = make_param_function({"linear": [0.0] * (2 * n), "name": "zero"}, 2 * n)
    return IntrinsicGraph(n, phi, -hi, hi, name=name,
                          spec={"kind": "vertical-plane", "n": n, "half_width": half_width,
                                "t_half_width": tw})


def x1_graph(n: int, phi_spec, half_width: float = 1.0, t_half_width: float | None = None,
             name: str = "x1-graph") -> IntrinsicGraph:
    n = check_n(n)
    tw = half_width if t_half_width is None else t_half_width
    hi = np.full(2 * n, float(half_width))
    hi[-1] = tw
    phi = make_param_function(phi_spec, 2 * n)
    spec = {"kind": "x1-graph", "n": n, "phi": phi_spec, "half_width": half_width,
            "t_half_width": tw} if isinstance(phi_spec, dict) else None
    return IntrinsicGraph(n, phi, -hi, hi, name=name, spec=spec)


PATCH_KINDS = ("vertical-plane", "x1-graph", "koranyi-sphere", "remark27-plane")


def make_patch(spec, n: int | None = None) -> SurfacePatch:
    """Build a patch from a registry name or a config mapping with ``kind``."""
    if isinstance(spec, SurfacePatch):
        return spec
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidArgument(f"cannot build a patch from {spec!r}")
    kind = spec["kind"]
    nn = int(spec.get("n", n if n is not None else 1))
    if kind == "vertical-plane":
        return vertical_plane(nn, spec.get("half_width", 1.0), spec.get("t_half_width"))
    if kind == "x1-graph":
        if "phi" not in spec:
            raise InvalidArgument("x1-graph needs a 'phi' profile")
        return x1_graph(nn, spec["phi"], spec.get("half_width", 1.0), spec.get("t_half_width"))
    if kind == "koranyi-sphere":
        if nn != 1:
            raise InvalidArgument("the koranyi-sphere patch is implemented for n = 1")
        return sphere_patch(spec.get("beta_max", 1.2))
    if kind == "remark27-plane":
        p = vertical_plane(1, spec.get("half_width", 1.0), spec.get("t_half_width"),
                           name="remark27-plane")
        p.spec = {"kind": "remark27-plane", "half_width": p.spec["half_width"],
                  "t_half_width": p.spec["t_half_width"]}
        return p
    raise InvalidArgument(f"unknown patch kind {kind!r}; known: {', '.join(PATCH_KINDS)}")


# --- pointwise measures -----------------------------------------------------


def riemannian_area_element(patch: SurfacePatch, param) -> np.ndarray:
    return patch.geometry(param)["area"]


def riemannian_normal(patch: SurfacePatch, param) -> np.ndarray:
    g = patch.geometry(param)
    return g["normal_raw"] / g["area"][..., None]


def horizontal_normal(patch: SurfacePatch, param, tol: float = CHAR_TOL) -> np.ndarray:
    """Unit horizontal normal ``nu = N^H / |N^H|``; raises at characteristic points."""
    g = patch.geometry(param)
    N = g["normal_raw"] / g["area"][..., None]
    NH = N[..., :-1]
    mag = np.linalg.norm(NH, axis=-1)
    if np.any(mag < tol):
        raise CharacteristicPoint("horizontal normal undefined at a characteristic point",
                                  float(np.min(mag)))
    return NH / mag[..., None]


# --- integration ------------------------------------------------------------


def _is_identity(center) -> bool:
    return center is None or not np.any(np.asarray(center))


def parameter_rule(patch: SurfacePatch, window=None, resolution: int = 16,
                   nodes: int = DEFAULT_NODES, levels: int = 2, half: bool = False):
    """Parameter nodes and weights covering ``patch ∩ window``.

    ``window`` is ``None`` (whole box), a :class:`CylinderSpec`, or a
    predicate on points.  Intrinsic graphs with a cylinder centered at the
    identity use the smooth Koranyi-disk rule, since ``Phi(w)`` lies in
    ``C_r`` iff ``||w||_K < r`` and ``|phi(w)| < r``.
    """
    if window is None:
        return box_rule(patch.lo, patch.hi, resolution, nodes)
    if isinstance(window, CylinderSpec) and isinstance(patch, IntrinsicGraph) and _is_identity(
        window.center
    ):
        r = window.radius
        ext = np.full(2 * patch.n, r)
        ext[-1] = r * r
        if np.any(patch.lo > -ext) or np.any(patch.hi < ext):
            raise CoverageError(f"graph box does not cover the disk D_{r:g}")
        pts, wts = koranyi_disk_rule(patch.n, r, resolution, nodes, half=half)
        inside = np.abs(patch.phi(pts)) < r
        return pts, wts * inside
    if half:
        raise InvalidArgument("half windows are only available for centered cylinders on graphs")
    if isinstance(window, CylinderSpec):
        pred = lambda w: cylinder_contains(window, patch(w))  # noqa: E731
    elif callable(window):
        pred = lambda w: window(patch(w))  # noqa: E731
    else:
        raise InvalidArgument(f"unsupported window {window!r}")
    return windowed_box_rule(patch.lo, patch.hi, resolution, pred, nodes, levels)


def surface_samples(patch: SurfacePatch, window=None, resolution: int = 16,
                    nodes: int = DEFAULT_NODES, measure: str = "h-perimeter",
                    half: bool = False) -> WeightedSampleSet:
    """Discretize ``mu_E`` (``measure='h-perimeter'``) or ``sigma`` (``'riemannian'``)."""
    params, qw = parameter_rule(patch, window, resolution, nodes, half=half)
    keep = qw > 0
    params, qw = params[keep], qw[keep]
    g = patch.geometry(params)
    if measure == "h-perimeter":
        dens = g["h_density"]
    elif measure == "riemannian":
        dens = g["area"]
    else:
        raise InvalidArgument(f"unknown measure {measure!r}")
    return WeightedSampleSet(
        g["points"], qw * dens, f"{patch.name}:{measure}:res{resolution}", params=params,
        tangent_frames=g["frame_jacobian"],
        data={"normal_raw": g["normal_raw"], "area": g["area"], "h_density": g["h_density"],
              "qweights": qw},
    )


def h_perimeter(patch: SurfacePatch, window=None, resolution: int = 16,
                nodes: int = DEFAULT_NODES) -> float:
    """``mu_E(window)`` by quadrature of ``|N^H|`` times the area element."""
    return surface_samples(patch, window, resolution, nodes).total_mass


def h_perimeter_with_error(patch, window=None, resolution: int = 16,
                           nodes: int = DEFAULT_NODES) -> tuple[float, float]:
    """Value and the change from the half-resolution value as an error estimate."""
    v = h_perimeter(patch, window, resolution, nodes)
    coarse = h_perimeter(patch, window, max(1, resolution // 2), nodes)
    return v, abs(v - coarse)


def riemannian_area(patch, window=None, resolution: int = 16, nodes: int = DEFAULT_NODES) -> float:
    return surface_samples(patch, window, resolution, nodes, "riemannian").total_mass


PatchFactory = Callable[..., SurfacePatch]
