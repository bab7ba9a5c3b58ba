import math

import numpy as np
import pytest

from heisgmt import excess as E
from heisgmt.exceptions import CoverageError, InvalidArgument, PreconditionViolated
from heisgmt.quadrature import koranyi_disk_volume
from heisgmt.surface import make_patch, sphere_patch

L_D1 = 3.496076739056159


def graph(phi, hw=2.0, thw=4.0):
    spec = {"linear": phi} if isinstance(phi, list) else phi
    return make_patch({"kind": "x1-graph", "n": 1, "phi": spec, "half_width": hw, "t_half_width": thw})


def plane():
    return make_patch({"kind": "vertical-plane", "n": 1, "half_width": 2.0, "t_half_width": 4.0})


CURVED = {"polynomial": [[0.2, [1, 0]], [0.1, [1, 1]], [0.05, [0, 2]]]}


def closed_form(eps):
    return (math.sqrt(1 + eps * eps) - 1) * L_D1


def test_closed_form_value():
    # frozen: (sqrt(1.01) - 1) * L(D_1)
    assert closed_form(0.1) == pytest.approx(0.017436899884671984, rel=1e-14)


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_linear_graph_excess(eps):
    rep = E.excess(graph([eps, 0.0]), 1.0, 16)
    assert rep.excess == pytest.approx(closed_form(eps), rel=1e-12)
    assert rep.identity_residual <= 1e-10


def test_excess_quadratic_in_eps():
    eps = np.array([0.1, 0.05, 0.025])
    exc = [E.excess(graph([e, 0.0])).excess for e in eps]
    slope = np.polyfit(np.log(eps), np.log(exc), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)


def test_halfspace_zero():
    assert E.excess(plane()).excess <= 1e-10
    assert E.excess(plane(), 0.5).excess <= 1e-10


def test_nonnegative_and_bounded():
    for p in (graph(CURVED), graph([0.3, 0.0]), graph([0.0, 0.3])):
        for r in (0.5, 1.0):
            e = E.excess(p, r).excess
            assert 0.0 <= e <= E.excess(p, r).perimeter_in_Cr / r**3 + 1e-12


@pytest.mark.parametrize("phi", [[0.1, 0.0], [0.0, 0.3], CURVED])
def test_dilation_invariance(phi):
    p = graph(phi)
    a = E.excess(p, 1.0).excess
    b = E.excess(p.dilated(2.0), 2.0).excess
    assert abs(a - b) <= 1e-8 * max(1.0, a)


@pytest.mark.parametrize("r, s", [(0.5, 1.0), (1.0, 1.5), (1.0, 2.0)])
def test_monotonicity(r, s):
    a, b = E.excess_monotonicity_check(graph(CURVED), r, s)
    assert a <= b * (1 + 1e-9)


def test_monotonicity_argument_order():
    with pytest.raises(InvalidArgument):
        E.excess_monotonicity_check(graph(CURVED), 1.0, 0.5)


def test_resolution_stability():
    p = graph(CURVED)
    assert E.excess(p, 1.0, 32).excess >= E.excess(p, 1.0, 16).excess - 1e-9


def test_patch_must_cover_cylinder():
    with pytest.raises(CoverageError):
        E.excess(graph([0.1, 0.0], hw=0.5, thw=0.5))
    with pytest.raises(CoverageError):
        E.excess(sphere_patch(), 1.0)


def test_height_profile():
    prof = E.height_profile(graph([0.1, 0.0]))
    assert np.all(np.diff(prof.f_values) <= 0)
    assert prof.f_values[0] == pytest.approx(prof.total, rel=1e-12)
    # D_1 is symmetric in y: the median is the node height next to 0
    assert abs(prof.median) <= 1e-3
    assert prof.f(prof.median - 1e-9)[0] > 0.5 * prof.total
    assert prof.sup_height == pytest.approx(0.1, rel=0.05)
    assert prof.f(prof.median)[0] <= 0.5 * prof.total * (1 + 1e-12)
    assert set(prof.to_dict()) == {"s", "f", "median", "total", "sup_height"}


def test_weighted_median_rule():
    h = np.array([0.0, 1.0, 2.0, 3.0])
    assert E.weighted_median(h, np.ones(4)) == 1.0
    assert E.weighted_median(h, np.array([1.0, 0.0, 0.0, 5.0])) == 3.0


def test_projection_identities():
    for G in ("disk", ("disk", 0.5), "half-disk"):
        r = E.projection_identities(graph(CURVED), G=G, s=0.0)
        assert r["residual_222"] <= 1e-3
        assert r["slack_111"] >= -1e-6
        assert r["residual_444"] <= 1e-3
    assert E.window_volume(1, "half-disk") == pytest.approx(0.5 * L_D1)
    assert E.window_volume(2, "disk") == pytest.approx(koranyi_disk_volume(2))


def test_projection_needs_graph_inside_cylinder():
    with pytest.raises(PreconditionViolated):
        E.projection_identities(graph([2.0, 0.0]))
    with pytest.raises(InvalidArgument):
        E.projection_identities(sphere_patch())
    with pytest.raises(InvalidArgument):
        E.projection_identities(graph(CURVED), G=("disk", 1.5))
    with pytest.raises(InvalidArgument):
        E.projection_identities(graph(CURVED), r=0.5)


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_excess_identity_and_sandwich(eps):
    r = E.excess_identity(graph([eps, 0.0]))
    assert r["residual"] <= 1e-3
    assert r["sandwich_violation"] <= 1e-6
    assert len(r["s"]) == 32


def test_excess_identity_halfspace():
    r = E.excess_identity(plane())
    assert abs(r["S_M"] - r["L_D1"]) <= 1e-10
    assert r["sandwich_violation"] == 0.0


def test_height_harness_fields():
    rows = E.height_harness([(f"eps={e}", graph([e, 0.0])) for e in (0.2, 0.1)])
    for row in rows:
        assert set(row) == {"label", "r", "sup_height", "excess", "median", "ratio"}
        assert np.isfinite(row["ratio"]) and row["ratio"] > 0
