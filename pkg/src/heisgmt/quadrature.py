"""Quadrature rules in parameter space.

* composite tensor Gauss-Legendre rules on boxes, optionally windowed by an
  indicator with recursive subdivision of the cells it cuts;
* a smooth rule for the Koranyi disk ``D_r = {w in W : ||w||_K < r}``
  written in the parameters ``(x_2..x_n, y_1..y_n, t)`` of W;
* closed-form volume of ``D_r``.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.special import beta, gamma, roots_jacobi

from .exceptions import InvalidArgument
from .validation import check_n, check_positive

DEFAULT_NODES = 4


@lru_cache(maxsize=64)
def _gl(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def gauss_legendre_1d(a: float, b: float, cells: int, nodes: int = DEFAULT_NODES):
    """Composite Gauss-Legendre rule on ``[a, b]``."""
    if cells < 1 or nodes < 1:
        raise InvalidArgument("cells and nodes must be positive")
    x, w = _gl(nodes)
    edges = np.linspace(a, b, cells + 1)
    h = np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + 0.5 * h[:, None] * x[None, :]).ravel()
    wts = (0.5 * h[:, None] * w[None, :]).ravel()
    return pts, wts


def piecewise_gauss_legendre(breaks, total_nodes: int, nodes: int = DEFAULT_NODES):
    """Gauss-Legendre on the intervals of ``breaks``, panels shared by length.

    ``total_nodes // nodes`` panels are distributed among the intervals in
    proportion to their length; every interval gets at least one panel.
    """
    breaks = np.unique(np.asarray(breaks, dtype=float))
    if breaks.size < 2:
        return np.zeros(0), np.zeros(0)
    lengths = np.diff(breaks)
    keep = lengths > 1e-14 * max(1.0, float(np.max(np.abs(breaks))))
    a, b, lengths = breaks[:-1][keep], breaks[1:][keep], lengths[keep]
    panels = max(total_nodes // nodes, len(lengths))
    share = np.maximum(1, np.floor(panels * lengths / lengths.sum()).astype(int))
    # hand the leftover panels to the longest intervals per panel
    while share.sum() < panels:
        share[np.argmax(lengths / share)] += 1
    pts, wts = [], []
    for lo, hi, c in zip(a, b, share):
        p, w = gauss_legendre_1d(lo, hi, int(c), nodes)
        pts.append(p)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


def tensor_rule(rules):
    """Tensor product of 1-D rules ``[(pts, wts), ...]``."""
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return pts, wts


def box_rule(lo, hi, cells, nodes: int = DEFAULT_NODES):
    """Composite tensor Gauss-Legendre rule on the box ``[lo, hi]``."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    cells = np.broadcast_to(np.atleast_1d(cells), lo.shape)
    return tensor_rule([gauss_legendre_1d(a, b, int(c), nodes) for a, b, c in zip(lo, hi, cells)])


def _cell_rule(lo, hi, nodes):
    return tensor_rule([gauss_legendre_1d(a, b, 1, nodes) for a, b in zip(lo, hi)])


def windowed_box_rule(lo, hi, cells, indicator, nodes: int = DEFAULT_NODES, levels: int = 2):
    """Box rule multiplied by a sharp window, refining the cut cells.

    ``indicator`` maps parameter points ``(k, m)`` to booleans.  A cell whose
    nodes and corners disagree is split in ``2^m`` halves, up to ``levels``
    times; on the final level weights are multiplied by the indicator.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m = lo.size
    cells = np.broadcast_to(np.atleast_1d(cells), lo.shape).astype(int)
    x, _ = _gl(nodes)
    ref_nodes = np.array(list(itertools.product(*([0.5 * (x + 1.0)] * m))))
    corners = np.array(list(itertools.product([0.0, 1.0], repeat=m)))
    probe = np.concatenate([ref_nodes, corners])

    axes = [np.linspace(a, b, c + 1) for a, b, c in zip(lo, hi, cells)]
    idx = np.array(list(itertools.product(*[range(c) for c in cells])))
    clo = np.stack([axes[k][idx[:, k]] for k in range(m)], axis=-1)
    chi = np.stack([axes[k][idx[:, k] + 1] for k in range(m)], axis=-1)

    out_p, out_w = [], []
    for level in range(levels + 1):
        if len(clo) == 0:
            break
        size = chi - clo
        sample = clo[:, None, :] + size[:, None, :] * probe[None, :, :]
        ind = np.asarray(indicator(sample.reshape(-1, m))).reshape(len(clo), -1)
        inside = ind.all(axis=1)
        outside = ~ind.any(axis=1)
        mixed = ~(inside | outside)
        last = level == levels
        take = inside | (mixed & last)
        if np.any(take):
            tl, th = clo[take], chi[take]
            _, w = _gl(nodes)
            wref = np.prod(np.array(list(itertools.product(*([w] * m)))), axis=1) / 2.0**m
            pts = tl[:, None, :] + (th - tl)[:, None, :] * ref_nodes[None, :, :]
            wts = np.prod(th - tl, axis=1)[:, None] * wref[None, :]
            pts = pts.reshape(-1, m)
            wts = wts.ravel()
            if last:
                wts = wts * np.asarray(indicator(pts), dtype=float)
            out_p.append(pts)
            out_w.append(wts)
        if last:
            break
        ml, mh = clo[mixed], chi[mixed]
        half = 0.5 * (mh - ml)
        clo = (ml[:, None, :] + half[:, None, :] * corners[None, :, :]).reshape(-1, m)
        chi = clo + np.repeat(half, len(corners), axis=0)
    if not out_p:
        return np.zeros((0, m)), np.zeros(0)
    return np.concatenate(out_p), np.concatenate(out_w)


# --- spheres and the Koranyi disk ------------------------------------------


def sphere_area(k: int) -> float:
    """Surface measure of the unit sphere ``S^{k-1}`` in ``R^k``."""
    return 2.0 * math.pi ** (k / 2.0) / gamma(k / 2.0)


def sphere_rule(k: int, resolution: int):
    """Product rule on ``S^{k-1} subset R^k`` exact for smooth integrands in the limit."""
    if k < 1:
        raise InvalidArgument("ambient dimension must be >= 1")
    if k == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if k == 2:
        K = max(4, 4 * resolution)
        a = 2.0 * math.pi * (np.arange(K) + 0.5) / K
        return np.stack([np.cos(a), np.sin(a)], axis=-1), np.full(K, 2.0 * math.pi / K)
    # omega = (u, sqrt(1-u^2) omega'), measure (1-u^2)^((k-3)/2) du d omega'
    al = (k - 3) / 2.0
    u, wu = roots_jacobi(max(2, 2 * resolution), al, al)
    sub, wsub = sphere_rule(k - 1, resolution)
    r = np.sqrt(1.0 - u**2)
    pts = np.concatenate(
        [np.broadcast_to(u[:, None, None], (len(u), len(sub), 1)), r[:, None, None] * sub[None]],
        axis=-1,
    ).reshape(-1, k)
    wts = (wu[:, None] * wsub[None, :]).ravel()
    return pts, wts


def koranyi_disk_volume(n: int, r: float = 1.0) -> float:
    """``L^{2n}(D_r)`` in closed form: ``r^{2n+1} |S^{2n-2}| B((2n-1)/4, 3/2) / 2``."""
    n = check_n(n)
    r = check_positive(r, "r")
    m = 2 * n - 1
    return r ** (2 * n + 1) * 0.5 * sphere_area(m) * beta(m / 4.0, 1.5)


def koranyi_disk_rule(n: int, r: float = 1.0, resolution: int = 8, nodes: int = DEFAULT_NODES,
                      half: bool = False):
    """Smooth quadrature on ``D_r`` in W-parameters ``(x_2..x_n, y_1..y_n, t)``.

    The substitution ``rho = r sin(theta) omega``, ``t = sqrt(r^4 - |rho|^4) v``
    maps a box onto the disk with a smooth Jacobian, so Gauss-Legendre in
    ``theta`` and ``v`` converges spectrally for smooth integrands.  With
    ``half=True`` only ``t > 0`` is covered.  Nodes of ``D_{lam r}`` are exactly
    the dilations of the nodes of ``D_r``.
    """
    n = check_n(n)
    r = check_positive(r, "r")
    m = 2 * n - 1
    th, wth = gauss_legendre_1d(0.0, 0.5 * math.pi, resolution, nodes)
    v, wv = gauss_legendre_1d(0.0 if half else -1.0, 1.0, resolution, nodes)
    om, wom = sphere_rule(m, resolution)
    sin_t = np.sin(th)
    q = r * sin_t
    L = r * r * np.cos(th) * np.sqrt(1.0 + sin_t**2)
    jac = q ** (m - 1) * r * np.cos(th) * L * wth
    rho = q[:, None, None, None] * om[None, :, None, :]
    t = (L[:, None, None] * v[None, None, :])[..., None]
    shape = (len(th), len(om), len(v))
    pts = np.concatenate([np.broadcast_to(rho, shape + (m,)), np.broadcast_to(t, shape + (1,))],
                         axis=-1).reshape(-1, m + 1)
    wts = (jac[:, None, None] * wom[None, :, None] * wv[None, None, :]).ravel()
    return pts, wts
