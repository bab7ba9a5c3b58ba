"""Cylindrical excess, height profiles and projection identities.

All integrals are taken against the discretized H-perimeter measure of a
patch inside the intrinsic cylinder ``C_r``; for intrinsic graphs the
cylinder is integrated over the Koranyi disk ``D_r`` of the parameter
hyperplane, see :func:`heisgmt.surface.parameter_rule`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import CoverageError, InvalidArgument, PreconditionViolated
from .group import CylinderSpec, cylinder_contains
from .quadrature import koranyi_disk_rule, koranyi_disk_volume
from .surface import IntrinsicGraph, SurfacePatch, surface_samples
from .validation import check_positive

SECONDARY_TOL = 1e-10


@dataclass
class ExcessReport:
    r: float
    excess: float
    perimeter_in_Cr: float
    n: int
    resolution: int
    excess_secondary: float = 0.0
    identity_residual: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _check_cover(patch: SurfacePatch, spec: CylinderSpec, samples: int = 64):
    """Fail when the parameter box boundary reaches into the cylinder."""
    if isinstance(patch, IntrinsicGraph) and spec.center is None:
        return  # checked against the disk inside parameter_rule
    m = 2 * patch.n
    t = np.linspace(0.0, 1.0, samples)
    faces = []
    for k in range(m):
        for side in (patch.lo[k], patch.hi[k]):
            pts = np.array(np.meshgrid(*([t] * (m - 1)), indexing="ij")).reshape(m - 1, -1).T
            pts = patch.lo[np.arange(m) != k] + pts * (patch.hi - patch.lo)[np.arange(m) != k]
            faces.append(np.insert(pts, k, side, axis=1))
    faces = np.concatenate(faces)
    if np.any(cylinder_contains(spec, patch(faces))):
        raise CoverageError(f"patch {patch.name!r} does not cover the boundary inside C_{spec.radius:g}")


def _excess_terms(patch, r, resolution, half=False):
    spec = CylinderSpec(check_positive(r, "r"))
    _check_cover(patch, spec)
    S = surface_samples(patch, spec, resolution, half=half)
    N = S.data["normal_raw"]
    nh = S.data["h_density"]
    nu = np.zeros(N.shape[:-1] + (N.shape[-1] - 1,))
    ok = nh > 0
    nu[ok] = N[ok, :-1] / nh[ok, None]
    return S, nu


def excess(patch: SurfacePatch, r: float = 1.0, resolution: int = 16) -> ExcessReport:
    """``Exc(E, r, nu) = (2 r^{2n+1})^{-1} int_{C_r} |nu_E + X_1|^2 d mu_E`` with ``nu = -X_1``.

    The primary path integrates the squared distance directly; the
    identity ``|nu_E - nu|^2 / 2 = 1 + <nu_E, X_1>`` gives a second value
    whose difference is reported.
    """
    S, nu = _excess_terms(patch, r, resolution)
    n = patch.n
    norm = 2.0 * r ** (2 * n + 1)
    d = nu.copy()
    d[:, 0] += 1.0
    prim = S.integrate(np.sum(d * d, axis=-1)) / norm
    sec = S.integrate(2.0 * (1.0 + nu[:, 0])) / norm
    return ExcessReport(r, prim, S.total_mass, n, resolution, sec, abs(prim - sec))


def excess_monotonicity_check(patch: SurfacePatch, r: float, s: float,
                              resolution: int = 16) -> tuple[float, float]:
    """``(Exc(r), (s/r)^{2n+1} Exc(s))``; the first must not exceed the second."""
    if not 0 < r < s:
        raise InvalidArgument("monotonicity needs 0 < r < s")
    a = excess(patch, r, resolution).excess
    b = excess(patch, s, resolution).excess
    return a, (s / r) ** (2 * patch.n + 1) * b


@dataclass
class HeightProfile:
    s_values: np.ndarray
    f_values: np.ndarray
    median: float
    total: float
    sup_height: float
    heights: np.ndarray = field(repr=False, default=None)
    weights: np.ndarray = field(repr=False, default=None)

    def f(self, s) -> np.ndarray:
        """``S(M ∩ {h > s})`` on the discrete measure."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.array([self.weights[self.heights > v].sum() for v in s])

    def to_dict(self) -> dict:
        return {"s": [float(v) for v in self.s_values], "f": [float(v) for v in self.f_values],
                "median": self.median, "total": self.total, "sup_height": self.sup_height}


def weighted_median(heights, weights) -> float:
    """Smallest ``s`` with ``sum(w[h > s]) <= total / 2``."""
    order = np.argsort(heights, kind="stable")
    h = np.asarray(heights)[order]
    w = np.asarray(weights)[order]
    total = w.sum()
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, 0.5 * total * (1 - 1e-15), side="left"))
    return float(h[min(k, len(h) - 1)])


def height_profile(patch: SurfacePatch, r: float = 1.0, s_grid=None,
                   resolution: int = 16) -> HeightProfile:
    """``f(s) = S(M_s)`` with ``M_s = dE ∩ C_r ∩ {h > s}``, its median and sup-height."""
    S, _ = _excess_terms(patch, r, resolution)
    h = S.points[:, 0]
    w = S.weights
    s = np.linspace(-r, r, 65) if s_grid is None else np.asarray(s_grid, dtype=float)
    prof = HeightProfile(s, np.zeros(len(s)), weighted_median(h, w), S.total_mass,
                         float(np.max(np.abs(h[w > 0]))) if np.any(w > 0) else 0.0, h, w)
    prof.f_values = prof.f(s)
    return prof


# --- projection identities ---------------------------------------------------


def _require_graph(patch):
    if not isinstance(patch, IntrinsicGraph):
        raise InvalidArgument("projection identities need an intrinsic X_1-graph patch")


def window_volume(n: int, G) -> float:
    """Lebesgue measure of a window ``G subset D_1`` in closed form."""
    kind, rho = _parse_window(G)
    v = koranyi_disk_volume(n, rho)
    return 0.5 * v if kind == "half-disk" else v


def _parse_window(G):
    if G in ("disk", "D1", None):
        return "disk", 1.0
    if G == "half-disk":
        return "half-disk", 1.0
    if isinstance(G, (tuple, list)) and len(G) == 2 and G[0] == "disk":
        rho = float(G[1])
        if not 0 < rho <= 1:
            raise InvalidArgument("disk window radius must lie in (0, 1]")
        return "disk", rho
    raise InvalidArgument(f"unknown window {G!r}; use 'disk', ('disk', rho) or 'half-disk'")


def check_hypotheses(patch: IntrinsicGraph, resolution: int = 16) -> float:
    """Check ``sup_{D_1} |phi| < 1`` and return an admissible ``s_0``."""
    w, _ = koranyi_disk_rule(patch.n, 1.0, resolution)
    sup = float(np.max(np.abs(patch.phi(w))))
    if not sup < 1.0:
        raise PreconditionViolated("boundary leaves the cylinder through its top or bottom", sup)
    return 0.5 * (sup + 1.0)


def _graph_window_samples(patch, G, resolution):
    kind, rho = _parse_window(G)
    w, qw = koranyi_disk_rule(patch.n, rho, resolution, half=(kind == "half-disk"))
    g = patch.geometry(w)
    return w, qw, g


def projection_identities(patch: SurfacePatch, r: float = 1.0, G="disk", s: float | None = None,
                          resolution: int = 16) -> dict:
    """Volume of ``G`` against ``-int_{M ∩ pi^{-1} G} <nu_E, X_1> dS``.

    The left side is closed form; the right side is surface quadrature over
    the nodes of ``G`` pulled back by ``pi``.  With ``s`` given, the
    test-function version at level ``s`` with ``phi = 1`` is also evaluated.
    """
    _require_graph(patch)
    if r != 1.0:
        raise InvalidArgument("the identities are stated on the unit cylinder")
    s0 = check_hypotheses(patch, resolution)
    vol = window_volume(patch.n, G)
    _, qw, g = _graph_window_samples(patch, G, resolution)
    N = g["normal_raw"]
    rhs = float(np.sum(qw * -N[:, 0]))
    mass = float(np.sum(qw * g["h_density"]))
    out = {
        "window": G if isinstance(G, str) else list(G),
        "s0": s0,
        "volume_G": vol,
        "rhs_222": rhs,
        "residual_222": abs(rhs - vol) / vol,
        "S_M_G": mass,
        "slack_111": mass - vol,
    }
    if s is not None:
        w1, q1, g1 = _graph_window_samples(patch, "disk", resolution)
        above = patch.phi(w1) > s
        lhs = float(np.sum(q1 * above))
        r444 = float(np.sum(q1 * above * -g1["normal_raw"][:, 0]))
        out.update({"s": float(s), "lhs_444": lhs, "rhs_444": r444,
                    "residual_444": abs(lhs - r444) / max(abs(lhs), 1e-12)})
    return out


def excess_identity(patch: SurfacePatch, r: float = 1.0, resolution: int = 16,
                    s_grid=None) -> dict:
    """``S(M) - L(D_1) = Exc(E, 1, nu)`` and the sandwich ``0 <= S(M_s) - L(E_s ∩ D_1) <= Exc``.

    ``S(M)`` comes from the H-perimeter density, ``L(D_1)`` in closed form and
    ``Exc`` from the squared-distance integrand.  The sandwich uses, per
    level, the volume of ``E_s ∩ D_1 = {phi > s} ∩ D_1`` and the perimeter of
    ``M_s`` on one common disk rule.
    """
    _require_graph(patch)
    if r != 1.0:
        raise InvalidArgument("the identity is stated on the unit cylinder")
    check_hypotheses(patch, resolution)
    exc = excess(patch, 1.0, resolution)
    S_M = exc.perimeter_in_Cr
    L_D = koranyi_disk_volume(patch.n)
    lhs = S_M - L_D
    w, qw, g = _graph_window_samples(patch, "disk", resolution)
    heights = patch.phi(w)
    s = np.linspace(-1.0, 1.0, 34)[1:-1] if s_grid is None else np.asarray(s_grid, dtype=float)
    gaps = []
    for v in s:
        above = heights > v
        gaps.append(float(np.sum(qw * above * g["h_density"]) - np.sum(qw * above)))
    gaps = np.asarray(gaps)
    viol = np.maximum(0.0, np.maximum(-gaps, gaps - exc.excess))
    return {
        "S_M": S_M,
        "L_D1": L_D,
        "excess": exc.excess,
        "difference": lhs,
        "residual": abs(lhs - exc.excess) / max(abs(exc.excess), 1e-12),
        "s": [float(v) for v in s],
        "sandwich_gap": [float(v) for v in gaps],
        "sandwich_violation": float(viol.max()) + 0.0 if len(viol) else 0.0,
    }


def height_harness(patches, r: float = 1.0, resolution: int = 16) -> list[dict]:
    """Measured ``sup|h| / (r Exc^{1/(2(2n+1))})`` for a family of graphs.

    Only a measurement: the family is not known to be minimizing, so no
    bound is asserted.
    """
    rows = []
    for label, patch in patches:
        prof = height_profile(patch, r, resolution=resolution)
        exc = excess(patch, r, resolution).excess
        expo = 1.0 / (2 * (2 * patch.n + 1))
        denom = r * exc**expo
        rows.append({
            "label": label,
            "r": r,
            "sup_height": prof.sup_height,
            "excess": exc,
            "median": prof.median,
            "ratio": prof.sup_height / denom if denom > 0 else float("inf"),
        })
    return rows
