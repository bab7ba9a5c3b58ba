"""Level-set slicing of patches by marching simplices.

The parameter box is split into cubes and every cube into ``m!`` Freudenthal
simplices.  On each simplex ``u o Phi`` is replaced by its linear
interpolant; the part of ``{u o Phi = s}`` inside the simplex is the section
of a simplex by a hyperplane, combinatorially a product of two simplices,
which is triangulated by staircase paths.  Each output ``(m-1)``-simplex is
sampled at its barycenter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CriticalLevel, DegenerateSlice, InvalidArgument
from .fields import ScalarField, grad_full, is_characteristic
from .surface import SurfacePatch, WeightedSampleSet, generalized_cross

CRIT_TOL = 1e-10


def freudenthal_simplices(cells) -> tuple[np.ndarray, np.ndarray]:
    """Vertex indices of the Freudenthal triangulation of a grid of cubes.

    Returns ``(simplices, perms)``: ``simplices`` has shape ``(S, m+1)`` with
    flat vertex indices into the ``(cells+1)``-point lattice (C order);
    ``perms`` gives, per simplex, the axis added at each step of its path.
    """
    cells = np.asarray(cells, dtype=int)
    m = cells.size
    shape = cells + 1
    strides = np.array([int(np.prod(shape[k + 1 :])) for k in range(m)])
    origins = np.array(list(itertools.product(*[range(c) for c in cells])), dtype=np.int64)
    base = origins @ strides
    perms = np.array(list(itertools.permutations(range(m))), dtype=int)
    steps = np.concatenate([np.zeros((len(perms), 1), dtype=np.int64),
                            np.cumsum(strides[perms], axis=1)], axis=1)
    simplices = (base[:, None, None] + steps[None, :, :]).reshape(-1, m + 1)
    return simplices, np.tile(perms, (len(base), 1))


def _staircases(a: int, b: int) -> list[list[tuple[int, int]]]:
    """Monotone lattice paths from (0,0) to (a-1,b-1)."""
    out = []
    for ups in itertools.combinations(range(a + b - 2), a - 1):
        i = j = 0
        path = [(0, 0)]
        ups = set(ups)
        for k in range(a + b - 2):
            if k in ups:
                i += 1
            else:
                j += 1
            path.append((i, j))
        out.append(path)
    return out


@dataclass
class SliceMesh:
    """Triangulated level set ``{u o Phi = s}`` in parameter space."""

    s: float
    vertices: np.ndarray  # (K, m, m): K simplices, m vertices, m params
    barycenters: np.ndarray
    interp_error: np.ndarray
    patch: SurfacePatch
    field: ScalarField
    skipped_critical: int = 0

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def empty(self) -> bool:
        return len(self.vertices) == 0


@dataclass
class SlicingGrid:
    """Precomputed lattice values of ``u o Phi`` for repeated slicing."""

    patch: SurfacePatch
    field: ScalarField
    cells: np.ndarray
    axes: list
    values: np.ndarray
    simplices: np.ndarray
    vmin: np.ndarray
    vmax: np.ndarray
    grad_norm: np.ndarray
    crit_tol: float = CRIT_TOL
    _paths: dict = field(default_factory=dict)

    @classmethod
    def build(cls, patch: SurfacePatch, u: ScalarField, resolution=32, crit_tol: float = CRIT_TOL):
        m = 2 * patch.n
        cells = np.broadcast_to(np.atleast_1d(np.asarray(resolution, dtype=int)), (m,)).copy()
        if np.any(cells < 1):
            raise InvalidArgument("slicing resolution must be >= 1")
        axes = [np.linspace(a, b, c + 1) for a, b, c in zip(patch.lo, patch.hi, cells)]
        lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
        values = u(patch(lattice))
        simplices, perms = freudenthal_simplices(cells)
        sv = values[simplices]
        h = np.array([(b - a) / c for a, b, c in zip(patch.lo, patch.hi, cells)])
        dq = np.diff(sv, axis=1) / h[perms]
        gnorm = np.linalg.norm(dq, axis=1)
        return cls(patch, u, cells, axes, values, simplices, sv.min(axis=1), sv.max(axis=1), gnorm,
                   crit_tol)

    @property
    def lattice_shape(self):
        return tuple(self.cells + 1)

    def lattice_point(self, flat: np.ndarray) -> np.ndarray:
        idx = np.unravel_index(flat, self.lattice_shape)
        return np.stack([ax[i] for ax, i in zip(self.axes, idx)], axis=-1)

    @property
    def value_range(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def corner_values(self) -> np.ndarray:
        m = len(self.cells)
        corners = np.array(list(itertools.product(*[(0, c) for c in self.cells])))
        flat = np.ravel_multi_index(corners.T, self.lattice_shape) if m else np.zeros(0, int)
        return self.values[flat]

    def _critical_scale(self) -> float:
        return max(1.0, float(self.grad_norm.max()))

    def slice(self, s: float, on_critical: str = "fail") -> SliceMesh:
        s = float(s)
        m = len(self.cells)
        touch = (self.vmin <= s) & (s <= self.vmax)
        flat = touch & (self.grad_norm < self.crit_tol * self._critical_scale())
        skipped = int(np.count_nonzero(flat))
        if skipped:
            if on_critical == "fail":
                raise CriticalLevel(
                    f"level {s:g} meets {skipped} simplices where u o Phi is numerically flat"
                )
            if on_critical != "skip":
                raise InvalidArgument("on_critical must be 'fail' or 'skip'")
        straddle = (self.vmin < s) & (s <= self.vmax) & ~flat
        sel = np.nonzero(straddle)[0]
        out_vertices = []
        if sel.size:
            simp = self.simplices[sel]
            vals = self.values[simp]
            above = vals >= s
            na = above.sum(axis=1)
            # stable order: above vertices first
            order = np.argsort(~above, axis=1, kind="stable")
            simp = np.take_along_axis(simp, order, axis=1)
            vals = np.take_along_axis(vals, order, axis=1)
            coords = self.lattice_point(simp)
            for a in range(1, m + 1):
                g = np.nonzero(na == a)[0]
                if g.size == 0:
                    continue
                ca, va = coords[g], vals[g]
                b = m + 1 - a
                # intersection points on edges (i above, j below)
                pij = {}
                for i in range(a):
                    for j in range(b):
                        ui, uj = va[:, i], va[:, a + j]
                        lam = (s - uj) / (ui - uj)
                        pij[(i, j)] = ca[:, a + j] + lam[:, None] * (ca[:, i] - ca[:, a + j])
                for path in self._paths.setdefault((a, b), _staircases(a, b)):
                    out_vertices.append(np.stack([pij[ij] for ij in path], axis=1))
        if out_vertices:
            V = np.concatenate(out_vertices, axis=0)
            # vertices lying on the level produce zero-volume pieces
            h = np.array([(ax[-1] - ax[0]) / (len(ax) - 1) for ax in self.axes])
            pvol = _simplex_volume(np.swapaxes(V[:, 1:, :] - V[:, :1, :], -1, -2))
            V = V[pvol > 1e-12 * float(np.prod(h[: m - 1])) / math.factorial(m - 1)]
        else:
            V = np.zeros((0, m, m))
        bary = V.mean(axis=1)
        err = np.abs(self.field(self.patch(bary)) - s) if len(V) else np.zeros(0)
        return SliceMesh(s, V, bary, err, self.patch, self.field, skipped)


def slice_levelset(patch: SurfacePatch, field: ScalarField, s: float, grid=32,
                   on_critical: str = "fail") -> SliceMesh:
    """Extract ``{u o Phi = s}`` on a ``grid``-cells-per-axis lattice."""
    return SlicingGrid.build(patch, field, grid).slice(s, on_critical)


def _simplex_volume(T: np.ndarray) -> np.ndarray:
    k = T.shape[-1]
    gram = np.swapaxes(T, -1, -2) @ T
    return np.sqrt(np.maximum(np.linalg.det(gram), 0.0)) / math.factorial(k)


def slice_geometry(mesh: SliceMesh, tangents: str = "mesh") -> dict:
    """Per-simplex geometry of a slice at its barycenters.

    ``tangents='mesh'`` takes the slice tangent space from the simplex edges;
    ``'smooth'`` uses ``dPhi(ker d(u o Phi))`` at the barycenter.  Volumes
    always come from the simplex itself.
    """
    patch, u = mesh.patch, mesh.field
    m = 2 * patch.n
    if mesh.empty:
        z = np.zeros(0)
        return {"points": np.zeros((0, m + 1)), "volume": z, "hs_density": z,
                "normal": np.zeros((0, m + 1)), "grad": np.zeros((0, m + 1))}
    b = mesh.barycenters
    pts = patch(b)
    G = patch.frame_jacobian(b, pts)
    edges = np.swapaxes(mesh.vertices[:, 1:, :] - mesh.vertices[:, :1, :], -1, -2)
    T = G @ edges
    vol = _simplex_volume(T)
    a = grad_full(u, pts)
    if np.any(np.linalg.norm(a, axis=-1) == 0.0):
        raise DegenerateSlice("gradient of u vanishes at a slice sample")
    if tangents == "smooth":
        Jc = patch.jacobian(b)
        dv = np.einsum("kdm,kd->km", Jc, u.coord_gradient(pts))
        # orthonormal basis of ker(dv) via QR of the complement
        q, _ = np.linalg.qr(np.concatenate([dv[:, :, None], np.eye(m)[None].repeat(len(b), 0)],
                                           axis=2))
        K = q[:, :, 1:m]
        Tn = G @ K
    elif tangents == "mesh":
        Tn = T
    else:
        raise InvalidArgument("tangents must be 'mesh' or 'smooth'")
    N = generalized_cross(np.concatenate([Tn, a[..., None]], axis=-1))
    nrm = np.linalg.norm(N, axis=-1)
    if np.any(nrm == 0.0):
        raise DegenerateSlice("slice normal is undefined at a sample")
    N = N / nrm[:, None]
    NH = N[:, :-1]
    gh = a[:, :-1]
    char = is_characteristic(a)
    ghat = np.where(char[:, None], 0.0, gh / np.where(char, 1.0, np.linalg.norm(gh, axis=-1))[:, None])
    proj = NH - np.sum(NH * ghat, axis=-1)[:, None] * ghat
    return {"points": pts, "volume": vol, "hs_density": np.linalg.norm(proj, axis=-1),
            "normal": N, "grad": a, "tangents": T}


def slice_measure(mesh: SliceMesh, tangents: str = "mesh") -> WeightedSampleSet:
    """Discretize ``mu_E^s = |N^{H Sigma^s}| lambda`` on the slice."""
    g = slice_geometry(mesh, tangents)
    return WeightedSampleSet(g["points"], g["hs_density"] * g["volume"],
                             f"slice:{mesh.patch.name}:{mesh.field.name}:s={mesh.s:.17g}",
                             params=mesh.barycenters, tangent_frames=g.get("tangents"),
                             data={"volume": g["volume"], "grad": g["grad"]})


def slice_length(mesh: SliceMesh) -> WeightedSampleSet:
    """Riemannian ``(2n-1)``-volume measure of the slice."""
    g = slice_geometry(mesh, "mesh")
    return WeightedSampleSet(g["points"], g["volume"], f"slice-volume:s={mesh.s:.17g}",
                             params=mesh.barycenters, data={"grad": g["grad"]})
