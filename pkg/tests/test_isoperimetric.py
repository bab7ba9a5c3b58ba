import math

import numpy as np
import pytest
from scipy import integrate

from heisgmt import isoperimetric as I
from heisgmt.exceptions import InsufficientSampling, InvalidArgument, PreconditionViolated
from heisgmt.quadrature import koranyi_disk_volume

# {y_1 = 0} inside D_1 of H^2 is {(x_2, y_2, t) : |.|^4 + t^2 < 1}
PERIM_ORACLE = math.pi**2 / 2


def test_perimeter_oracle_by_quadrature():
    v, _ = integrate.quad(lambda r: 2 * math.pi * r * 2 * math.sqrt(1 - r**4), 0, 1, epsabs=1e-14)
    assert v == pytest.approx(PERIM_ORACLE, rel=1e-12)


def test_slice_domain_membership():
    d = I.SliceDomain(2, 0.5)
    # w = (x_2, y_1, y_2, t); t is sheared by 4 s y_1
    assert d.contains(np.array([0.0, 0.5, 0.0, 1.0]))
    assert not d.contains(np.array([0.0, 0.5, 0.0, 0.0 - 0.1]))
    assert d.contains(np.zeros(4))
    with pytest.raises(InvalidArgument):
        I.SliceDomain(2, 1.0)


@pytest.mark.parametrize("s", [0.0, 0.7])
def test_halfspace_oracle(s):
    rows = I.isoperimetric_sweep(I.halfspace_y1(2), [s], samples=2_000_000, seed=7)
    r = rows[0]
    assert r["omega_volume"] == pytest.approx(koranyi_disk_volume(2), rel=5e-3)
    assert r["volume"] == pytest.approx(0.5 * koranyi_disk_volume(2), rel=5e-3)
    assert r["perimeter"] == pytest.approx(PERIM_ORACLE, rel=2e-2)
    assert r["fraction"] == pytest.approx(0.5, abs=5e-3)
    assert r["ratio"] == pytest.approx(r["perimeter"] / r["volume"] ** 0.8)


def test_sweep_is_reproducible():
    a = I.isoperimetric_sweep(I.koranyi_ball(2), [-0.5, 0.5], samples=600_000, seed=3)
    b = I.isoperimetric_sweep(I.koranyi_ball(2), [-0.5, 0.5], samples=600_000, seed=3)
    assert a == b
    assert [r["stream"] for r in a] == [0, 1]


def test_ratio_spread():
    rows = [{"ratio": 2.0, "skipped": ""}, {"ratio": 4.0, "skipped": ""},
            {"ratio": 100.0, "skipped": "fraction"}]
    assert I.ratio_spread(rows) == (2.0, 0.5)
    lo, sp = I.ratio_spread([{"ratio": float("nan"), "skipped": "x"}])
    assert math.isnan(lo) and math.isnan(sp)


def test_large_fraction_is_skipped():
    rows = I.isoperimetric_sweep(I.halfspace_y1(2), [0.0], tau=0.4, samples=200_000)
    assert rows[0]["skipped"]
    assert math.isnan(rows[0]["ratio"])


def test_too_few_boundary_samples():
    with pytest.raises(InsufficientSampling):
        I.isoperimetric_sweep(I.halfspace_y1(2), [0.0], samples=10_000, delta=1e-4)


def test_requires_n_at_least_two():
    with pytest.raises(PreconditionViolated):
        I.isoperimetric_sweep(I.halfspace_y1(1), [0.0], n=1, samples=1000)
    with pytest.raises(InvalidArgument):
        I.isoperimetric_sweep(I.halfspace_y1(2), [0.0], tau=1.5, samples=1000)


def test_ball_gradient_matches_differences(rng):
    F = I.koranyi_ball(2, 0.5)
    w = rng.uniform(-0.6, 0.6, size=(50, 4))
    h = 1e-6
    fd = np.stack([(F.f(w + h * e) - F.f(w - h * e)) / (2 * h) for e in np.eye(4)], axis=-1)
    np.testing.assert_allclose(F.grad(w), fd, atol=1e-8)
