"""Relative isoperimetric ratios on the translated sections ``Omega_s``.

``Omega_s = (-s e_1) * D_1 * (s e_1)`` is the set of ``w in W`` with
``(y_1^2 + |z_hat|^2)^2 + (t - 4 s y_1)^2 < 1``.  Volumes and perimeters
are estimated by Monte Carlo in the sheared coordinates
``(y_1, z_hat, t - 4 s y_1)``, in which ``Omega_s`` becomes ``D_1`` and the
change of variables has unit Jacobian.

The perimeter is taken with respect to the horizontal distribution of W,
spanned by ``X_2..X_n``, ``d/dy_1`` and ``Y_2..Y_n`` (the restriction of the
frame to the central section).  For ``F = {f > 0}`` with smooth ``f`` it is
``int_{dF ∩ Omega_s} |grad_0 f| / |grad f|``, estimated by the shell average
``(2 delta)^{-1} int_{|f| < delta} |grad_0 f|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import InsufficientSampling, InvalidArgument, PreconditionViolated
from .validation import check_n

MIN_HITS = 1000


def _split_w(w, n):
    # W parameters (x_2..x_n, y_1..y_n, t)
    xh = w[..., : n - 1]
    y = w[..., n - 1 : 2 * n - 1]
    t = w[..., -1]
    return xh, y, t


@dataclass(frozen=True)
class SliceDomain:
    n: int
    s: float

    def __post_init__(self):
        check_n(self.n)
        if not -1.0 < self.s < 1.0:
            raise InvalidArgument("s must lie in (-1, 1)")

    def contains(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        xh, y, t = _split_w(w, self.n)
        r2 = np.sum(xh**2, axis=-1) + np.sum(y**2, axis=-1)
        return r2 * r2 + (t - 4.0 * self.s * y[..., 0]) ** 2 < 1.0


def horizontal_gradient_W(n: int, w, grad) -> np.ndarray:
    """Components of ``grad f`` along ``X_2..X_n, d/dy_1, Y_2..Y_n`` on W."""
    xh, y, _ = _split_w(w, n)
    ft = grad[..., -1:]
    gx = grad[..., : n - 1] + 2.0 * y[..., 1:] * ft
    gy1 = grad[..., n - 1 : n]
    gy = grad[..., n : 2 * n - 1] - 2.0 * xh * ft
    return np.concatenate([gx, gy1, gy], axis=-1)


@dataclass(frozen=True)
class SetInW:
    """``F = {f > 0}`` in W with a closed-form gradient of ``f``."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


def halfspace_y1(n: int) -> SetInW:
    """``F = {y_1 < 0}``."""
    def grad(w):
        g = np.zeros(w.shape)
        g[..., n - 1] = -1.0
        return g

    return SetInW("y1<0", lambda w: -w[..., n - 1], grad)


def koranyi_ball(n: int, radius: float = 0.5, center=None) -> SetInW:
    """``F = {||w - c||_K < radius}`` (Euclidean offset of the parameters)."""
    c = np.zeros(2 * n) if center is None else np.asarray(center, dtype=float)
    rho = float(radius)

    def f(w):
        d = w - c
        z2 = np.sum(d[..., :-1] ** 2, axis=-1)
        return (rho**4 - z2 * z2 - d[..., -1] ** 2) / (4.0 * rho**3)

    def grad(w):
        d = w - c
        z2 = np.sum(d[..., :-1] ** 2, axis=-1)
        g = np.empty(w.shape)
        g[..., :-1] = -4.0 * z2[..., None] * d[..., :-1]
        g[..., -1] = -2.0 * d[..., -1]
        return g / (4.0 * rho**3)

    return SetInW(f"koranyi-ball({rho:g})", f, grad)


def _estimate(n, s, F: SetInW, samples, seq, delta, strata, chunk):
    """MC volumes of ``Omega_s``, ``F ∩ Omega_s`` and the shell perimeter."""
    m = 2 * n
    box = 2.0**m
    per_stratum = samples // strata
    rng_streams = [np.random.default_rng(c) for c in seq.spawn(strata)]
    hits_omega = 0
    hits_F = 0
    shell_hits = 0
    shell_sum = 0.0
    total = 0
    edges = np.linspace(-1.0, 1.0, strata + 1)
    for k, rng in enumerate(rng_streams):
        left = per_stratum
        while left > 0:
            c = min(chunk, left)
            left -= c
            v = rng.uniform(-1.0, 1.0, size=(c, m))
            # y_1 stratified; remaining coordinates uniform
            v[:, n - 1] = rng.uniform(edges[k], edges[k + 1], size=c)
            r2 = np.sum(v[:, :-1] ** 2, axis=-1)
            inside = r2 * r2 + v[:, -1] ** 2 < 1.0
            w = v[inside]
            w[:, -1] = w[:, -1] + 4.0 * s * w[:, n - 1]
            fv = F.f(w)
            hits_omega += int(inside.sum())
            hits_F += int(np.count_nonzero(fv > 0))
            sh = np.abs(fv) < delta
            if np.any(sh):
                gw = horizontal_gradient_W(n, w[sh], F.grad(w[sh]))
                shell_sum += float(np.sum(np.linalg.norm(gw, axis=-1)))
                shell_hits += int(sh.sum())
            total += c
    vol_omega = box * hits_omega / total
    vol_F = box * hits_F / total
    perim = box * shell_sum / (2.0 * delta * total)
    return vol_omega, vol_F, perim, shell_hits


def isoperimetric_sweep(F: SetInW, s_values, n: int = 2, tau: float = 0.75,
                        samples: int = 10_000_000, seed: int = 20240601, delta: float = 0.01,
                        strata: int = 16, chunk: int = 1_000_000) -> list[dict]:
    """Ratios ``mu_F^0(Omega_s) / L(F ∩ Omega_s)^{2n/(2n+1)}`` over ``s_values``.

    Levels where the volume fraction exceeds ``tau`` are reported as skipped.
    Each level draws from its own stream spawned from ``seed``.
    """
    n = check_n(n)
    if n < 2:
        raise PreconditionViolated("the relative isoperimetric inequality needs n >= 2", n)
    if not 0 < tau < 1:
        raise InvalidArgument("tau must lie in (0, 1)")
    s_values = [float(s) for s in s_values]
    children = np.random.SeedSequence(seed).spawn(len(s_values))
    rows = []
    expo = 2 * n / (2 * n + 1)
    for s, seq in zip(s_values, children):
        SliceDomain(n, s)
        vo, vf, per, hits = _estimate(n, s, F, samples, seq, delta, strata, chunk)
        if hits < MIN_HITS:
            raise InsufficientSampling(
                f"only {hits} boundary samples at s={s:g} (need {MIN_HITS}); raise samples or delta"
            )
        frac = vf / vo if vo > 0 else 0.0
        row = {"s": s, "volume": vf, "perimeter": per, "ratio": float("nan"), "seed": seed,
               "stream": int(seq.spawn_key[-1]), "omega_volume": vo, "fraction": frac,
               "shell_hits": hits, "skipped": ""}
        if frac > tau:
            row["skipped"] = f"volume fraction {frac:.3f} > tau = {tau:g}"
        elif vf > 0:
            row["ratio"] = per / vf**expo
        rows.append(row)
    return rows


def ratio_spread(rows) -> tuple[float, float]:
    """``(min ratio, (max - min) / max)`` over the non-skipped rows."""
    r = np.array([row["ratio"] for row in rows if not row["skipped"]], dtype=float)
    r = r[np.isfinite(r)]
    if r.size == 0:
        return float("nan"), float("nan")
    return float(r.min()), float((r.max() - r.min()) / r.max())
