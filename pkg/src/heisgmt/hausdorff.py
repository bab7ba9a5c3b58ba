"""Coverings by box balls and box-counting dimensions in H^n.

``U_delta(p) = p * U_delta`` with ``U_delta = {||q||_inf < delta}`` is the
open box ball.  Greedy coverings pick pivots in index order, so counts are
deterministic and exactly covariant under dilations by powers of two.
The normalization constant of the spherical measure is taken to be 1:
only counts, ratios and exponents are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from .exceptions import CoverageError, InsufficientRange, InvalidArgument
from .group import box_norm, dilate, group_inv, group_mul
from .validation import check_n, check_points, check_positive, n_from_dim

DEDUP_TOL = 1e-12


@dataclass
class PointCloud:
    """Finite sample of a subset of H^n, deduplicated, order preserved."""

    points: np.ndarray
    generator: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = check_points(np.atleast_2d(self.points), name="cloud")
        if p.ndim != 2:
            raise InvalidArgument("a cloud is a 2-D array of points")
        key = np.round(p / DEDUP_TOL)
        _, first = np.unique(key, axis=0, return_index=True)
        self.points = p[np.sort(first)]
        if len(self.points) < 2 and self.generator != "point":
            raise InvalidArgument("a cloud needs at least 2 distinct points")

    @property
    def n(self) -> int:
        return n_from_dim(self.points.shape[-1])

    @property
    def count(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return self.count

    def translated(self, q) -> "PointCloud":
        return PointCloud(group_mul(np.asarray(q, dtype=float), self.points), f"{self.generator}@L")

    def dilated(self, lam: float) -> "PointCloud":
        return PointCloud(dilate(lam, self.points), f"{self.generator}@dil", dict(self.params))


def cover_count(cloud, delta: float, return_centers: bool = False):
    """Greedy covering number of ``cloud`` by open box balls of radius ``delta``.

    Pivots are taken in index order among the points not yet covered; the
    result lies within a factor depending only on n of the optimal count.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else check_points(np.atleast_2d(cloud))
    delta = check_positive(delta, "delta")
    z = pts[:, :-1]
    t = pts[:, -1]
    zmax = float(np.max(np.linalg.norm(z, axis=1)))
    # |t_q - t_p| < delta^2 + 2 |z_p| delta on any box ball around p
    rt = delta * delta + 2.0 * zmax * delta
    scaled = np.concatenate([z, (t * (delta / rt))[:, None]], axis=1)
    tree = cKDTree(scaled)
    n = (pts.shape[1] - 1) // 2
    x, y = z[:, :n], z[:, n:]
    d2 = delta * delta
    covered = np.zeros(len(pts), dtype=bool)
    centers = []
    for i in range(len(pts)):
        if covered[i]:
            continue
        centers.append(i)
        cand = np.array(tree.query_ball_point(scaled[i], delta * (1 + 1e-12), p=np.inf), dtype=np.intp)
        cand = cand[~covered[cand]]
        if cand.size:
            # box distance of p_i^{-1} * q, written out for speed
            dz = z[cand] - z[i]
            om = y[i] @ x[cand].T - x[i] @ y[cand].T
            dt = t[cand] - t[i] - 2.0 * om
            inside = (np.einsum("ij,ij->i", dz, dz) < d2) & (np.abs(dt) < d2)
            covered[cand[inside]] = True
        covered[i] = True
    if return_centers:
        return len(centers), np.asarray(centers)
    return len(centers)


def default_deltas(delta_max: float, levels: int, ratio: float = 2.0) -> np.ndarray:
    return delta_max / ratio ** np.arange(levels)


def _slope(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    return float(np.linalg.lstsq(A, y, rcond=None)[0][0])


def boxcount_dimension(cloud, deltas, max_fill: float | None = 0.1) -> tuple[float, tuple[float, float], np.ndarray]:
    """Slope of ``log N(delta)`` against ``log(1/delta)``.

    Levels with a single ball, or with more than ``max_fill`` of the cloud
    as pivots (too little sample density), are discarded.  ``max_fill=None``
    keeps every level, which is what a genuinely finite set needs.  The band is the
    range of slopes over windows of three consecutive usable levels.
    """
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    npts = len(cloud.points if isinstance(cloud, PointCloud) else cloud)
    counts = np.array([cover_count(cloud, d) for d in deltas])
    usable = counts > 1 if max_fill is None else (counts > 1) & (counts <= max_fill * npts)
    if usable.sum() < 4:
        raise InsufficientRange(f"only {int(usable.sum())} usable delta levels (need 4)")
    x = np.log(1.0 / deltas[usable])
    y = np.log(counts[usable])
    dim = _slope(x, y)
    sub = [_slope(x[i : i + 3], y[i : i + 3]) for i in range(len(x) - 2)]
    return dim, (min(sub), max(sub)), counts


class BoxCountingDimension(BaseEstimator):
    """Estimator of the box-counting dimension in the box quasi-metric.

    Parameters
    ----------
    delta_max : float
        Largest ball radius.
    n_levels : int
        Number of dyadic levels ``delta_max / 2^k``.
    max_fill : float
        Levels where pivots exceed this fraction of the sample are dropped.

    Attributes
    ----------
    dimension_ : float
    band_ : tuple of float
    deltas_ : ndarray
    counts_ : ndarray
    """

    def __init__(self, delta_max: float = 0.25, n_levels: int = 5, max_fill: float = 0.1):
        self.delta_max = delta_max
        self.n_levels = n_levels
        self.max_fill = max_fill

    def fit(self, X, y=None):
        X = check_points(np.atleast_2d(X), name="X")
        self.deltas_ = default_deltas(self.delta_max, self.n_levels)
        self.dimension_, self.band_, self.counts_ = boxcount_dimension(
            PointCloud(X), self.deltas_, self.max_fill
        )
        self.n_features_in_ = X.shape[1]
        return self


# --- cloud generators -------------------------------------------------------


def _density(delta_min: float, per_ball: int = 10):
    return delta_min / per_ball


def taxis_cloud(n: int = 1, delta_min: float = 1 / 64, per_ball: int = 10) -> PointCloud:
    """``{(0, t) : t in [0, 1)}`` sampled at spacing ``delta_min^2 / per_ball``."""
    d = 2 * check_n(n) + 1
    k = int(math.ceil(per_ball / delta_min**2))
    p = np.zeros((k, d))
    p[:, -1] = np.arange(k) / k
    return PointCloud(p, "taxis", {"n": n, "delta_min": delta_min})


def xaxis_cloud(n: int = 1, delta_min: float = 1 / 64, per_ball: int = 10) -> PointCloud:
    """``{(x_1, 0, .., 0) : x_1 in [0, 1)}``."""
    d = 2 * check_n(n) + 1
    k = int(math.ceil(per_ball / delta_min))
    p = np.zeros((k, d))
    p[:, 0] = np.arange(k) / k
    return PointCloud(p, "xaxis", {"n": n, "delta_min": delta_min})


def vertical_plane_cloud(delta_min: float = 1 / 16, per_ball: int = 10) -> PointCloud:
    """``{(0, y, t) : y, t in [0, 1)}`` in H^1 on a lattice fine enough for ``delta_min``."""
    ky = int(math.ceil(per_ball / delta_min))
    kt = int(math.ceil(per_ball / delta_min**2))
    y, t = np.meshgrid(np.arange(ky) / ky, np.arange(kt) / kt, indexing="ij")
    p = np.stack([np.zeros(y.size), y.ravel(), t.ravel()], axis=-1)
    return PointCloud(p, "vertical-plane", {"delta_min": delta_min})


def point_cloud(n: int = 1, separation: float = 1.0) -> PointCloud:
    """Two points at box distance ``separation``: a finite set, dimension 0."""
    d = 2 * check_n(n) + 1
    p = np.zeros((2, d))
    p[1, 0] = separation
    return PointCloud(p, "point", {"n": n})


def open_box_cloud(n: int = 1, delta_min: float = 1 / 8, per_ball: int = 2) -> PointCloud:
    """Lattice sample of the open set ``[-1/2, 1/2)^{2n} x [0, 1)``."""
    n = check_n(n)
    kz = int(math.ceil(per_ball / delta_min))
    kt = int(math.ceil(per_ball / delta_min**2))
    ax = [np.arange(kz) / kz - 0.5] * (2 * n) + [np.arange(kt) / kt]
    p = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 2 * n + 1)
    return PointCloud(p, "open-box", {"n": n, "delta_min": delta_min})


def koranyi_sphere_cloud(delta_min: float = 1 / 16, per_ball: int = 4) -> PointCloud:
    """Lattice sample of the Koranyi unit sphere of H^1 in the ``(alpha, beta)`` chart."""
    ka = int(math.ceil(2 * math.pi * per_ball / delta_min)) + 1
    kb = int(math.ceil(math.pi * per_ball / delta_min**2)) + 1
    a, b = np.meshgrid(np.linspace(0, 2 * math.pi, ka, endpoint=False),
                       np.linspace(-0.5 * math.pi, 0.5 * math.pi, kb), indexing="ij")
    rc = np.sqrt(np.maximum(np.cos(b), 0.0))
    p = np.stack([(rc * np.cos(a)).ravel(), (rc * np.sin(a)).ravel(), np.sin(b).ravel()], axis=-1)
    return PointCloud(p, "koranyi-sphere", {"delta_min": delta_min})


def slab_cloud(n: int, k: int, eps: float, per_ball: int = 2,
               max_points: int = 2_000_000) -> PointCloud:
    """Lattice sample of ``((Pi)_eps x R) ∩ U_2`` with ``Pi = span(e_1..e_k)``."""
    n = check_n(n)
    m = 2 * n
    h = eps / per_ball
    axes = []
    for j in range(m):
        ext = 2.0 if j < k else eps
        axes.append(np.arange(-ext + 0.5 * h, ext, h))
    tt = np.arange(-4.0 + 0.5 * h * eps, 4.0, h * eps)
    size = math.prod(len(ax) for ax in axes) * len(tt)
    if size > max_points:
        raise InvalidArgument(f"slab sample would have {size} lattice points (max_points={max_points})")
    grid = np.stack(np.meshgrid(*axes, tt, indexing="ij"), axis=-1).reshape(-1, m + 1)
    return PointCloud(grid[_in_slab(grid, k, eps)], f"slab({k},{eps:g})", {"k": k, "eps": eps})


def _in_slab(p, k, eps):
    z = p[:, :-1]
    return (np.linalg.norm(z[:, k:], axis=1) < eps) & (box_norm(p) < 2.0)


CLOUD_GENERATORS = {
    "taxis": taxis_cloud,
    "xaxis": xaxis_cloud,
    "vertical-plane": vertical_plane_cloud,
    "koranyi-sphere": koranyi_sphere_cloud,
    "slab": slab_cloud,
    "point": point_cloud,
    "open-box": open_box_cloud,
}


def make_cloud(name: str, **kw) -> PointCloud:
    try:
        return CLOUD_GENERATORS[name](**kw)
    except KeyError:
        raise InvalidArgument(
            f"unknown cloud {name!r}; known: {', '.join(sorted(CLOUD_GENERATORS))}"
        ) from None


# --- slab covering ------------------------------------------------------------


def lattice_slab_cover(n: int, k: int, eps: float, safety: float = 0.98) -> dict:
    """Explicit covering of ``S = ((Pi)_eps x R) ∩ U_2`` by balls ``U_eps(c)``.

    Horizontal centers form a cubic lattice of spacing ``a < 2 eps / sqrt(2n)``
    (every ``z`` within ``eps`` of its lattice point); above each lattice
    point ``c`` the sheared height ``t - 2 Im<c, z>`` is cut into steps of
    ``b < 2 eps^2``.  Only cells that can meet ``S`` are kept.
    """
    n = check_n(n)
    m = 2 * n
    a = safety * 2.0 * eps / math.sqrt(m)
    b = safety * 2.0 * eps * eps
    half_diag = 0.5 * a * math.sqrt(m)
    axes = []
    for j in range(m):
        ext = 2.0 if j < k else eps
        kmax = int(math.ceil((ext + half_diag) / a))
        axes.append(a * np.arange(-kmax, kmax + 1))
    count = 0
    kept = 0
    # chunked over the first axis to bound memory
    for c0 in axes[0]:
        rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, m - 1)
        cz = np.concatenate([np.full((len(rest), 1), c0), rest], axis=1)
        keep = (np.linalg.norm(cz, axis=1) < 2.0 + half_diag) & (
            np.linalg.norm(cz[:, k:], axis=1) < eps + half_diag
        )
        cn = np.linalg.norm(cz[keep], axis=1)
        # points of S in the cell of c have |t| < 4 and |Im<c, z>| <= |c| (|c| + half_diag)
        count += int(np.ceil(2.0 * _t_extent(cn, half_diag) / b).sum())
        kept += int(keep.sum())
    return {"n": n, "k": k, "eps": eps, "a": a, "b": b, "cells": kept, "count": count}


def _t_extent(cn, half_diag):
    return 4.0 + 2.0 * cn * (cn + half_diag)


def _cover_center(cover, p):
    """Center of the lattice covering assigned to each point ``p`` (or NaN)."""
    n = cover["n"]
    a, b = cover["a"], cover["b"]
    z = p[:, :-1]
    cz = np.round(z / a) * a
    x, y = cz[:, :n], cz[:, n:]
    om = np.sum(y * z[:, :n] - x * z[:, n:], axis=1)
    ts = p[:, -1] - 2.0 * om
    tmax = _t_extent(np.linalg.norm(cz, axis=1), 0.5 * a * math.sqrt(2 * n))
    j = np.floor((ts + tmax) / b)
    tc = -tmax + (j + 0.5) * b
    return np.concatenate([cz, tc[:, None]], axis=1)


def verify_slab_cover(cover: dict, samples: int = 200_000, seed: int = 0) -> int:
    """Number of sampled points of the slab left uncovered (0 expected)."""
    n, k, eps = cover["n"], cover["k"], cover["eps"]
    m = 2 * n
    rng = np.random.default_rng(seed)
    lo = np.array([-2.0 if j < k else -eps for j in range(m)] + [-4.0])
    hi = -lo
    p = rng.uniform(lo, hi, size=(samples, m + 1))
    p = p[_in_slab(p, k, eps)]
    c = _cover_center(cover, p)
    d = box_norm(group_mul(group_inv(c), p))
    return int(np.count_nonzero(~(d < eps)))


def blowup_covering_check(k: int, epsilon: float, n: int = 1, method: str = "lattice",
                          samples: int = 200_000, seed: int = 0,
                          max_points: int = 2_000_000) -> dict:
    """Covering count of the blown-up slab and the product ``count * eps^(k+2)``.

    ``method='lattice'`` builds the explicit covering and verifies it on
    random samples; ``'greedy'`` runs :func:`cover_count` on a lattice
    sample of the slab (only practical for small counts).
    """
    n = check_n(n)
    if not 0 < epsilon < 0.5:
        raise InvalidArgument("epsilon must lie in (0, 1/2)")
    if not 0 <= k <= 2 * n:
        raise InvalidArgument(f"k must lie in [0, {2 * n}]")
    if method == "lattice":
        cover = lattice_slab_cover(n, k, epsilon)
        missed = verify_slab_cover(cover, samples, seed)
        if missed:
            raise CoverageError(f"lattice covering missed {missed} sampled points")
        count = cover["count"]
    elif method == "greedy":
        count = cover_count(slab_cloud(n, k, epsilon, max_points=max_points), epsilon)
        missed = 0
    else:
        raise InvalidArgument("method must be 'lattice' or 'greedy'")
    return {"k": k, "n": n, "eps": epsilon, "count": count, "product": count * epsilon ** (k + 2),
            "method": method, "verified_samples": samples if method == "lattice" else 0,
            "uncovered": missed}


def slab_sweep(k: int, n: int = 1, eps_max: float = 0.25, levels: int = 5, **kw) -> list[dict]:
    return [blowup_covering_check(k, eps_max / 2**j, n, **kw) for j in range(levels)]


__all__ = [
    "BoxCountingDimension",
    "PointCloud",
    "blowup_covering_check",
    "boxcount_dimension",
    "cover_count",
    "make_cloud",
    "slab_sweep",
]


