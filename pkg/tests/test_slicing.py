import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from heisgmt import slicing as SL
from heisgmt.exceptions import CriticalLevel, InvalidArgument
from heisgmt.fields import make_field, polynomial_field
from heisgmt.surface import SurfacePatch, make_patch, sphere_patch, vertical_plane


@pytest.mark.parametrize("cells", [(2, 3), (2, 1, 2), (1, 1, 1, 1)])
def test_freudenthal_tiles_the_grid(cells):
    simp, perms = SL.freudenthal_simplices(cells)
    m = len(cells)
    assert simp.shape == (math.factorial(m) * int(np.prod(cells)), m + 1)
    lattice = np.stack(np.meshgrid(*[np.arange(c + 1) for c in cells], indexing="ij"),
                       axis=-1).reshape(-1, m)
    V = lattice[simp].astype(float)
    vols = np.abs(np.linalg.det(V[:, 1:] - V[:, :1])) / math.factorial(m)
    np.testing.assert_allclose(vols, 1.0 / math.factorial(m))
    assert vols.sum() == pytest.approx(np.prod(cells))
    if m == 3:
        for v in V[:6]:
            assert ConvexHull(v).volume == pytest.approx(1.0 / 6.0)


def test_plane_slice_length():
    mesh = SL.slice_levelset(vertical_plane(1), make_field("y1", 1), 0.5, 32)
    assert not mesh.empty
    assert SL.slice_length(mesh).total_mass == pytest.approx(2.0, abs=1e-12)
    # density 1 along the line {(0, s, t)}
    assert SL.slice_measure(mesh).total_mass == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(mesh.interp_error, 0.0, atol=1e-12)


def test_empty_slice_outside_range():
    mesh = SL.slice_levelset(vertical_plane(1), make_field("y1", 1), 3.0, 8)
    assert mesh.empty
    assert SL.slice_measure(mesh).total_mass == 0.0


def test_critical_level_raises():
    # u = height on the graph with eps = 0 is identically 0
    patch = make_patch({"kind": "x1-graph", "n": 1, "phi": {"linear": [0.0, 0.0]}})
    with pytest.raises(CriticalLevel):
        SL.slice_levelset(patch, make_field("height", 1), 0.0, 8)
    skipped = SL.slice_levelset(patch, make_field("height", 1), 0.0, 8, on_critical="skip")
    assert skipped.empty and skipped.skipped_critical > 0
    with pytest.raises(InvalidArgument):
        SL.slice_levelset(patch, make_field("height", 1), 0.0, 8, on_critical="ignore")


@pytest.mark.parametrize("s", [-0.6, 0.1, 0.5])
def test_sphere_slice_length_against_circle(s):
    # the slice {t = s} is a circle of radius r with g-length 2 pi r sqrt(1 + 4 r^2)
    mesh = SL.slice_levelset(sphere_patch(), make_field("t", 1), s, 128)
    r = (1 - s * s) ** 0.25
    oracle = 2 * math.pi * r * math.sqrt(1 + 4 * r * r)
    assert SL.slice_length(mesh).total_mass == pytest.approx(oracle, rel=1e-4)


def test_weights_are_contractions():
    u = polynomial_field([[1.0, [0, 0, 1]], [0.5, [0, 1, 0]], [0.3, [1, 1, 0]]], 1)
    patch = make_patch({"kind": "x1-graph", "n": 1, "phi": {"linear": [0.2, 0.1]}})
    for s in (-0.4, 0.0, 0.3):
        mesh = SL.slice_levelset(patch, u, s, 16)
        g = SL.slice_geometry(mesh)
        assert np.all(g["hs_density"] >= 0)
        assert np.all(g["hs_density"] <= 1 + 1e-12)


def test_n2_slice_is_tetrahedral():
    u = make_field("y1", 2)
    mesh = SL.slice_levelset(vertical_plane(2), u, 0.25, 4)
    assert mesh.vertices.shape[1:] == (4, 4)
    # slice {y1 = 0.25} of the plane is a unit-density 3-cube of side 2
    assert SL.slice_length(mesh).total_mass == pytest.approx(8.0, rel=1e-12)


def test_remark27_slice_weights_positive():
    patch = make_patch("remark27-plane")
    u = make_field("remark27", 1)
    mesh = SL.slice_levelset(patch, u, 0.3, 16)
    g = SL.slice_geometry(mesh)
    assert np.all(np.linalg.norm(g["grad"][:, :-1], axis=-1) == 0)
    assert np.all(g["volume"] > 0)
    assert SL.slice_length(mesh).total_mass == pytest.approx(2.0, abs=1e-12)


def test_invalid_resolution():
    with pytest.raises(InvalidArgument):
        SL.SlicingGrid.build(vertical_plane(1), make_field("y1", 1), 0)


def test_smooth_tangents_agree_on_flat_slices():
    mesh = SL.slice_levelset(vertical_plane(1), make_field("y1", 1), -0.2, 8)
    a = SL.slice_measure(mesh, "mesh").total_mass
    b = SL.slice_measure(mesh, "smooth").total_mass
    assert a == pytest.approx(b, abs=1e-12)
    with pytest.raises(InvalidArgument):
        SL.slice_measure(mesh, "curved")


def test_custom_patch_slices():
    def func(w):
        return np.stack([np.zeros(w.shape[:-1]), w[..., 0], w[..., 1]], axis=-1)

    p = SurfacePatch(1, [-1.0, -1.0], [1.0, 1.0], func)
    mesh = SL.slice_levelset(p, make_field("y1", 1), 1e-3, 10)
    # differential by central differences
    assert SL.slice_length(mesh).total_mass == pytest.approx(2.0, abs=1e-9)
