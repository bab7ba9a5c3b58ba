"""Verification suites: each returns a list of check records and auxiliary tables.

A check record is a dict with ``check_id``, ``lhs``, ``rhs``, ``residual``,
``tolerance`` and ``pass``; a suite passes iff all its checks pass.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coarea import counterexample_remark27, rel_error, slice_side, surface_resolution, surface_side
from .exceptions import HeisError, InvalidArgument
from .excess import excess, excess_identity, excess_monotonicity_check, height_harness, height_profile
from .excess import projection_identities
from .fields import make_field
from .hausdorff import BoxCountingDimension, blowup_covering_check, make_cloud, slab_sweep
from .isoperimetric import halfspace_y1, isoperimetric_sweep, koranyi_ball, ratio_spread
from .scenarios import Scenario, get_scenario, scenarios_for
from .surface import make_patch, x1_graph

SUITES = ("coarea", "excess", "project", "isoperimetric", "hausdorff", "counterexample")
WINDOWS = ("disk", ("disk", 0.5), "half-disk")
MONOTONICITY_PAIRS = ((0.5, 1.0), (1.0, 1.5), (1.0, 2.0))


def thread_cap(default: int = 4) -> int:
    """Worker count, capped by ``HEIS_GMT_THREADS`` when set."""
    env = os.environ.get("HEIS_GMT_THREADS")
    if env is None:
        return max(1, min(default, os.cpu_count() or 1))
    try:
        v = int(env)
    except ValueError:
        raise InvalidArgument(f"HEIS_GMT_THREADS must be an integer, got {env!r}") from None
    return max(1, v)


def pmap(fn, items, threads: int = 1) -> list:
    """Ordered map, concurrent when ``threads > 1``."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _f(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def check(check_id: str, lhs, rhs, residual, tolerance, ok: bool, **detail) -> dict:
    rec = {"check_id": check_id, "lhs": _f(lhs), "rhs": _f(rhs), "residual": _f(residual),
           "tolerance": _f(tolerance), "pass": bool(ok)}
    if detail:
        rec["detail"] = detail
    return rec


def rel_check(check_id, lhs, rhs, tol, **detail) -> dict:
    r = rel_error(lhs, rhs)
    return check(check_id, lhs, rhs, r, tol, r <= tol, **detail)


def upper_check(check_id, value, bound, tol, **detail) -> dict:
    """``value <= bound + tol``; the residual is the violation (0 when satisfied)."""
    viol = max(0.0, float(value) - float(bound))
    return check(check_id, value, bound, viol, tol, viol <= tol, **detail)


@dataclass
class RunOptions:
    n: int | None = None
    resolution: int | None = None
    s_levels: int | None = None
    seed: int | None = None
    quick: bool = False
    threads: int = 1

    @property
    def tol_scale(self) -> float:
        return 2.0 if self.quick else 1.0

    def res(self, sc: Scenario, n: int) -> int:
        r = self.resolution if self.resolution is not None else sc.res(n)
        return max(2, r // 2) if self.quick else r

    def levels(self, sc: Scenario) -> int:
        v = self.s_levels if self.s_levels is not None else sc.s_levels
        return max(4, v // 2) if self.quick else v

    def tol(self, sc: Scenario, key: str) -> float:
        return sc.tolerances[key] * self.tol_scale


@dataclass
class SuiteResult:
    suite: str
    scenario: str
    n: int
    resolution: int
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "scenario": self.scenario, "n": self.n,
                "resolution": self.resolution, "pass": self.passed, "checks": self.checks,
                "results": self.results, "tables": self.tables}


def _resolve_n(sc: Scenario, opt: RunOptions) -> int:
    n = sc.n if opt.n is None else int(opt.n)
    if n not in sc.ns:
        raise InvalidArgument(f"scenario {sc.name!r} supports n in {list(sc.ns)}, got {n}")
    return n


# --- coarea ---------------------------------------------------------------


def run_coarea(sc: Scenario, opt: RunOptions) -> SuiteResult:
    n = _resolve_n(sc, opt)
    res = opt.res(sc, n)
    levels = opt.levels(sc)
    patch = make_patch(sc.patch, n)
    u = make_field(sc.field, n)
    out = SuiteResult("coarea", sc.name, n, res)
    kinds = ("thm14", "riemannian") + (("thm15",) if n >= 2 else ())
    left = slice_side(patch, u, None, res, levels, kinds=kinds)
    sres = surface_resolution(res, n)
    right = surface_side(patch, u, None, sres)
    tol = opt.tol(sc, "default")
    for v in kinds:
        rhs = right["thm15_unit"] if v == "thm15" else right[v]
        out.checks.append(rel_check(f"{v}@{res}", left[v], rhs, tol, surface_resolution=sres))
        out.results.append({"variant": v, "lhs": left[v], "rhs": rhs,
                            "rel_error": rel_error(left[v], rhs), "n": n, "resolution": res,
                            "scenario": sc.name,
                            "per_slice": [[float(s), float(m)] for s, m in
                                          zip(left["s"], left["per_slice"]["mass"])]})
    itol = opt.tol(sc, "inequality")
    out.checks.append(upper_check("inequality", left["thm14"], right["thm14"] * (1 + itol), 0.0))
    if "doubled" in sc.tolerances and n == 1:
        r2 = 2 * res
        l2 = slice_side(patch, u, None, r2, levels, kinds=("thm14",))
        s2 = surface_side(patch, u, None, surface_resolution(r2, n))
        out.checks.append(rel_check(f"thm14@{r2}", l2["thm14"], s2["thm14"], opt.tol(sc, "doubled")))
    return out


def run_counterexample(sc: Scenario, opt: RunOptions) -> SuiteResult:
    _resolve_n(sc, opt)
    res = opt.res(sc, 1)
    rep = counterexample_remark27(res, opt.levels(sc))
    x = rep.extra
    out = SuiteResult("counterexample", sc.name, 1, res)
    tz = opt.tol(sc, "thm14_zero")
    out.checks += [
        check("thm14-lhs-zero", x["thm14_lhs"], 0.0, abs(x["thm14_lhs"]), tz, abs(x["thm14_lhs"]) <= tz),
        check("thm14-rhs-zero", x["thm14_rhs"], 0.0, abs(x["thm14_rhs"]), tz, abs(x["thm14_rhs"]) <= tz),
        check("thm15-slice-mass", x["thm15_lhs"], x["hand_slice_mass"],
              x["thm15_lhs"] / x["hand_slice_mass"], sc.tolerances["slice_mass_fraction"],
              x["thm15_lhs"] >= sc.tolerances["slice_mass_fraction"] * x["hand_slice_mass"]),
        check("thm15-rhs-convention-zero", x["thm15_rhs_convention"], 0.0,
              abs(x["thm15_rhs_convention"]), 0.0, x["thm15_rhs_convention"] == 0.0),
    ]
    d = rep.to_dict()
    d["thm15_fails_at_n1"] = x["thm15_fails"]
    out.results.append(d)
    return out


# --- excess and projections -------------------------------------------------


def run_excess(sc: Scenario, opt: RunOptions) -> SuiteResult:
    n = _resolve_n(sc, opt)
    res = opt.res(sc, n)
    patch = make_patch(sc.patch, n)
    out = SuiteResult("excess", sc.name, n, res)
    e1 = excess(patch, 1.0, res)
    bound = 2.0 * e1.perimeter_in_Cr / (2.0 * e1.r ** (2 * n + 1))
    out.checks.append(check("nonnegative", e1.excess, 0.0, max(0.0, -e1.excess), 0.0, e1.excess >= 0))
    out.checks.append(upper_check("upper-bound", e1.excess, bound, 0.0))
    out.checks.append(check("secondary-identity", e1.excess, e1.excess_secondary, e1.identity_residual,
                            opt.tol(sc, "secondary"), e1.identity_residual <= opt.tol(sc, "secondary")))
    if "halfspace" in sc.tolerances:
        t = opt.tol(sc, "halfspace")
        out.checks.append(check("halfspace-zero", e1.excess, 0.0, e1.excess, t, e1.excess <= t))
    ed = excess(patch.dilated(2.0), 2.0, res)
    dres = abs(ed.excess - e1.excess)
    out.checks.append(check("dilation", ed.excess, e1.excess, dres, opt.tol(sc, "dilation"),
                            dres <= opt.tol(sc, "dilation"), lam=2.0))
    mt = opt.tol(sc, "monotonicity")
    for r, s in MONOTONICITY_PAIRS:
        a, b = excess_monotonicity_check(patch, r, s, res)
        out.checks.append(upper_check(f"monotonicity({r:g},{s:g})", a, b * (1 + mt), mt,
                                      slack_ratio=(a / b) if b > 0 else None))
    e2 = excess(patch, 1.0, 2 * res)
    lt = opt.tol(sc, "lsc")
    out.checks.append(check("lsc-proxy", e2.excess, e1.excess, max(0.0, e1.excess - e2.excess), lt,
                            e2.excess >= e1.excess - lt, resolution_pair=[res, 2 * res]))
    prof = height_profile(patch, 1.0, resolution=res)
    inc = float(np.max(np.diff(prof.f_values))) if len(prof.f_values) > 1 else 0.0
    out.checks.append(check("profile-nonincreasing", inc, 0.0, max(0.0, inc), 0.0, inc <= 0.0))
    half = 0.5 * prof.total
    upper = float(prof.weights[prof.heights >= prof.median].sum())
    lower = float(prof.f(prof.median)[0])
    out.checks.append(check("median", upper, lower, 0.0, 0.0,
                            upper >= half * (1 - 1e-12) and lower <= half * (1 + 1e-12),
                            median=prof.median))
    if "eps" in sc.params:
        eps = sc.params["eps"]
        out.checks.append(rel_check("sup-height", prof.sup_height, eps, 0.05))
        row = height_harness([(sc.name, patch)], 1.0, res)[0]
        ok = all(row[k] is not None for k in row) and math.isfinite(row["ratio"])
        out.checks.append(check("height-harness", row["sup_height"], row["excess"], row["ratio"],
                                None, ok))
        out.results.append({"height_harness": row})
        if eps == 0.1:
            fam = [0.1, 0.05, 0.025]
            ex = [excess(x1_graph(1, {"linear": [v, 0.0]}, 2.0, 4.0), 1.0, res).excess for v in fam]
            slope = float(np.polyfit(np.log(fam), np.log(ex), 1)[0])
            out.checks.append(check("eps-squared", slope, 2.0, abs(slope - 2.0), 0.05 * opt.tol_scale,
                                    abs(slope - 2.0) <= 0.05 * opt.tol_scale, eps=fam, excess=ex))
    out.results.append({"excess": e1.to_dict(), "profile": prof.to_dict()})
    return out


def run_project(sc: Scenario, opt: RunOptions) -> SuiteResult:
    n = _resolve_n(sc, opt)
    res = opt.res(sc, n)
    patch = make_patch(sc.patch, n)
    out = SuiteResult("project", sc.name, n, res)
    for G in WINDOWS:
        label = G if isinstance(G, str) else f"disk({G[1]:g})"
        r = projection_identities(patch, 1.0, G, s=0.0, resolution=res)
        out.checks.append(check(f"identity-222[{label}]", r["volume_G"], r["rhs_222"], r["residual_222"],
                                opt.tol(sc, "identity_222"), r["residual_222"] <= opt.tol(sc, "identity_222")))
        out.checks.append(check(f"inequality-111[{label}]", r["S_M_G"], r["volume_G"], r["slack_111"],
                                -opt.tol(sc, "slack_111"), r["slack_111"] >= -opt.tol(sc, "slack_111")))
        if G == "disk":
            out.checks.append(check("identity-444", r["lhs_444"], r["rhs_444"], r["residual_444"],
                                    opt.tol(sc, "identity_222"),
                                    r["residual_444"] <= opt.tol(sc, "identity_222"), s=0.0))
        out.results.append(r)
    ei = excess_identity(patch, 1.0, res)
    et = opt.tol(sc, "excess_identity")
    if ei["excess"] > 1e-10:
        out.checks.append(check("excess-identity", ei["difference"], ei["excess"], ei["residual"], et,
                                ei["residual"] <= et))
    else:
        # zero excess: equality of perimeter and disk volume, absolute
        d = abs(ei["difference"])
        out.checks.append(check("excess-identity", ei["S_M"], ei["L_D1"], d, 1e-10, d <= 1e-10,
                                excess=ei["excess"]))
    st = opt.tol(sc, "sandwich")
    out.checks.append(check("sandwich", ei["sandwich_violation"], 0.0, ei["sandwich_violation"], st,
                            ei["sandwich_violation"] <= st, levels=len(ei["s"])))
    out.results.append(ei)
    return out


# --- isoperimetric ------------------------------------------------------------


def _make_set(spec, n):
    kind = spec[0]
    if kind == "halfspace-y1":
        return halfspace_y1(n)
    if kind == "koranyi-ball":
        return koranyi_ball(n, float(spec[1]) if len(spec) > 1 else 0.5)
    raise InvalidArgument(f"unknown set {kind!r}")


def run_isoperimetric(sc: Scenario, opt: RunOptions) -> SuiteResult:
    n = _resolve_n(sc, opt)
    p = sc.params
    samples = p["samples"] // 2 if opt.quick else p["samples"]
    seed = sc.seed if opt.seed is None else int(opt.seed)
    out = SuiteResult("isoperimetric", sc.name, n, samples)
    spread_tol = opt.tol(sc, "spread")
    rows_all = []
    for spec in p["sets"]:
        F = _make_set(spec, n)
        rows = isoperimetric_sweep(F, p["s_values"], n, p["tau"], samples, seed, p["delta"])
        lo, spread = ratio_spread(rows)
        out.checks.append(check(f"min-ratio[{F.name}]", lo, 0.0, lo, 0.0, lo > 0))
        out.checks.append(check(f"spread[{F.name}]", spread, spread_tol, spread, spread_tol,
                                spread < spread_tol))
        if spec[0] == "halfspace-y1" and 0.0 in p["s_values"]:
            r0 = rows[p["s_values"].index(0.0)]
            out.checks.append(check("halfspace-fraction(s=0)", r0["fraction"], 0.5,
                                    abs(r0["fraction"] - 0.5), 0.005, abs(r0["fraction"] - 0.5) <= 0.005))
        for r in rows:
            rows_all.append({"set": F.name, **r})
    out.tables["isoperimetric"] = rows_all
    return out


# --- hausdorff --------------------------------------------------------------


def run_hausdorff(sc: Scenario, opt: RunOptions) -> SuiteResult:
    n = _resolve_n(sc, opt)
    p = sc.params
    out = SuiteResult("hausdorff", sc.name, n, 0)
    dt = opt.tol(sc, "dimension")

    def dim_job(item):
        name, kw, dmax, levels, expected = item
        est = BoxCountingDimension(dmax, levels).fit(make_cloud(name, **kw).points)
        return name, expected, est

    for name, expected, est in pmap(dim_job, p["dimensions"], opt.threads):
        err = abs(est.dimension_ - expected)
        out.checks.append(check(f"dimension[{name}]", est.dimension_, expected, err, dt, err <= dt,
                                band=list(est.band_), counts=[int(c) for c in est.counts_],
                                deltas=[float(d) for d in est.deltas_]))
    sn = p.get("slab_n", 1)
    rt = opt.tol(sc, "slab_ratio")
    slab_rows = []
    for k in range(2 * sn + 1):
        rows = slab_sweep(k, sn, p["slab_eps_max"], p["slab_levels"])
        prod = np.array([r["product"] for r in rows])
        ratio = float(prod.max() / prod.min())
        steps = prod[1:] / prod[:-1]
        out.checks.append(check(f"slab-bounded[k={k}]", prod.max(), prod.min(), ratio, rt, ratio <= rt,
                                products=[float(v) for v in prod]))
        out.checks.append(check(f"slab-trend[k={k}]", float(steps.max()), 1.0, float(steps.max()), 2.0,
                                bool(np.all(steps <= 2.0))))
        slab_rows += rows
    for k in (0, 1):
        g = blowup_covering_check(k, p["slab_eps_max"], sn, method="greedy")
        slab_rows.append(g)
    out.tables["slab"] = slab_rows
    return out


RUNNERS = {
    "coarea": run_coarea,
    "excess": run_excess,
    "project": run_project,
    "isoperimetric": run_isoperimetric,
    "hausdorff": run_hausdorff,
    "counterexample": run_counterexample,
}


def _error_result(suite, sc, exc) -> SuiteResult:
    r = SuiteResult(suite, sc.name, sc.n, 0)
    r.checks.append(check("error", None, None, None, None, False, error=f"{type(exc).__name__}: {exc}"))
    return r


def run_suite(suite: str, scenario: str | None = None, opt: RunOptions | None = None) -> list[SuiteResult]:
    """Run ``suite`` on one scenario, or on every scenario registered for it.

    Numerical failures become failing check records; usage errors raise.
    """
    opt = opt or RunOptions()
    if suite not in RUNNERS:
        raise InvalidArgument(f"unknown suite {suite!r}; known: {', '.join(SUITES)}")
    if scenario is not None:
        sc = get_scenario(scenario)
        want = "excess" if suite == "project" else suite
        if sc.suite != want:
            raise InvalidArgument(f"scenario {scenario!r} belongs to suite {sc.suite!r}")
        todo = [sc]
    else:
        todo = scenarios_for(suite)
        if opt.n is not None:
            todo = [s for s in todo if int(opt.n) in s.ns]
            if not todo:
                raise InvalidArgument(f"suite {suite!r} has no scenario for n = {opt.n}")
    for sc in todo:
        _resolve_n(sc, opt)

    def job(sc):
        try:
            return RUNNERS[suite](sc, opt)
        except InvalidArgument:
            raise
        except HeisError as exc:
            return _error_result(suite, sc, exc)

    return pmap(job, todo, opt.threads)
