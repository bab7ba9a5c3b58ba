import numpy as np
import pytest

from heisgmt import coarea as C
from heisgmt.exceptions import InvalidArgument
from heisgmt.fields import make_field, polynomial_field
from heisgmt.slicing import SlicingGrid
from heisgmt.surface import make_patch, sphere_patch, vertical_plane

TILT_U = [[1.0, [0, 1, 0]], [0.5, [0, 0, 1]]]


def _tilted():
    return make_patch({"kind": "x1-graph", "n": 1, "phi": {"linear": [0.2, 0.0]}})


def test_rel_error_floor():
    assert C.rel_error(0.0, 0.0) == 0.0
    assert C.rel_error(1.0, 1.001) == pytest.approx(0.001 / 1.001)


def test_zero_weight_gives_zero():
    r = C.coarea_check(_tilted(), polynomial_field(TILT_U, 1), h=0.0, resolution=16)
    assert r.lhs == 0.0 and r.rhs == 0.0 and r.rel_error == 0.0


def test_height_field_on_plane_is_degenerate_range():
    # u = x_1 vanishes on {x_1 = 0}: one critical level, surface integrand 0
    rhs = C.coarea_rhs_thm14(vertical_plane(1), make_field("height", 1))
    assert rhs == 0.0


def test_plane_identity_exact():
    r = C.coarea_check(vertical_plane(1), make_field("y1", 1), resolution=32)
    assert r.lhs == pytest.approx(4.0, abs=1e-12)
    assert r.rel_error <= 1e-12


def test_tilted_graph_converges():
    u = polynomial_field(TILT_U, 1)
    e32 = C.coarea_check(_tilted(), u, resolution=32).rel_error
    e64 = C.coarea_check(_tilted(), u, resolution=64).rel_error
    assert e64 <= 1e-3
    assert e64 < e32


def test_weight_monotonicity():
    u = polynomial_field(TILT_U, 1)
    h1 = lambda p: 1.0 + 0.0 * p[..., 0]  # noqa: E731
    h2 = lambda p: 1.0 + p[..., 1] ** 2  # noqa: E731
    a = C.slice_side(_tilted(), u, h1, 32)["thm14"]
    b = C.slice_side(_tilted(), u, h2, 32)["thm14"]
    assert b > a
    assert C.surface_side(_tilted(), u, h2, 8)["thm14"] > C.surface_side(_tilted(), u, h1, 8)["thm14"]


def test_weight_linearity():
    u = make_field("t", 1)
    s = sphere_patch()
    a = C.coarea_rhs_thm14(s, u, 1.0, 8)
    b = C.coarea_rhs_thm14(s, u, 2.5, 8)
    assert b == pytest.approx(2.5 * a, rel=1e-14)


def test_sphere_riemannian_baseline():
    r = C.riemannian_coarea_check(sphere_patch(), make_field("t", 1), resolution=64)
    assert r.rel_error <= 1e-3


def test_trapezoid_grid_option():
    u = make_field("y1", 1)
    # interior levels only: the edge levels s = -1, 1 sit on the patch boundary
    lhs = C.coarea_lhs(vertical_plane(1), u, s_grid=np.linspace(-0.9, 0.9, 33), resolution=16)
    assert lhs == pytest.approx(3.6, abs=1e-12)
    with pytest.raises(InvalidArgument):
        C.coarea_lhs(vertical_plane(1), u, s_grid=[0.0, -0.5], resolution=16)


def test_s_rule_breaks_at_corners():
    grid = SlicingGrid.build(sphere_patch(), make_field("t", 1), 16)
    s, w = C.s_rule(grid, 32)
    lo, hi = grid.value_range
    assert np.all((s > lo) & (s < hi))
    assert w.sum() == pytest.approx(hi - lo, rel=1e-12)


def test_unknown_variant():
    with pytest.raises(InvalidArgument):
        C.coarea_check(vertical_plane(1), make_field("y1", 1), variant="thm99")
    with pytest.raises(InvalidArgument):
        C.coarea_rhs_thm15(vertical_plane(1), make_field("y1", 1), degenerate="half")


def test_counterexample_report():
    rep = C.counterexample_remark27()
    x = rep.extra
    assert abs(x["thm14_lhs"]) <= 1e-6 and abs(x["thm14_rhs"]) <= 1e-6
    assert x["thm15_lhs"] == pytest.approx(4.0, abs=1e-12)
    assert x["thm15_lhs"] >= 0.5 * x["hand_slice_mass"]
    assert x["thm15_rhs_convention"] == 0.0
    assert x["thm15_rhs_unit"] == pytest.approx(4.0, abs=1e-12)
    assert x["thm15_fails"]
    d = rep.to_dict()
    assert len(d["per_slice"]) == len(rep.s_grid)


def test_near_characteristic_inequality():
    u = polynomial_field([[1.0, [0, 0, 1]], [-2.0, [1, 1, 0]], [0.05, [0, 1, 0]]], 1)
    r = C.coarea_check(make_patch("remark27-plane"), u, resolution=32)
    assert r.lhs <= r.rhs * (1 + 1e-3)
