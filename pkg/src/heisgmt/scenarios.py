"""Named scenarios shared by the command line, the tests and the acceptance run."""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field as dc_field

from .exceptions import InvalidArgument


@dataclass(frozen=True)
class Scenario:
    """A registered configuration.

    ``resolution`` maps ``n`` to the default resolution of the suite;
    ``tolerances`` maps check names to thresholds.
    """

    name: str
    suite: str
    anchor: str
    n: int = 1
    ns: tuple = (1,)
    patch: object = None
    field: object = None
    resolution: dict = dc_field(default_factory=dict)
    tolerances: dict = dc_field(default_factory=dict)
    s_levels: int = 64
    seed: int = 20240601
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.tolerances.items():
            if not v > 0:
                raise InvalidArgument(f"tolerance {k!r} of scenario {self.name!r} must be > 0")
        if self.n not in self.ns:
            raise InvalidArgument(f"scenario {self.name!r}: default n not among supported ns")

    def res(self, n: int | None = None) -> int:
        return self.resolution.get(n or self.n, next(iter(self.resolution.values()), 16))


def _graph(eps, coord="y1", half_width=2.0, t_half_width=4.0):
    # n = 1 W-parameters are (y_1, t)
    lin = [eps, 0.0] if coord == "y1" else [0.0, eps]
    return {"kind": "x1-graph", "n": 1, "phi": {"linear": lin, "name": f"{eps:g}*{coord}"},
            "half_width": half_width, "t_half_width": t_half_width}


_HALFSPACE = {"kind": "vertical-plane", "n": 1, "half_width": 2.0, "t_half_width": 4.0}

COAREA_TOL = {"default": 1e-3, "doubled": 2.5e-4, "inequality": 1e-3}

SCENARIOS: dict[str, Scenario] = {}


def _register(s: Scenario) -> Scenario:
    if s.name in SCENARIOS:
        raise InvalidArgument(f"duplicate scenario {s.name!r}")
    SCENARIOS[s.name] = s
    return s


_register(Scenario(
    "plane-u-y", "coarea", "horizontal coarea identity: vertical plane x=0, u = y, flat slices",
    1, (1,), "vertical-plane", "y1", {1: 64}, COAREA_TOL))
_register(Scenario(
    "tilted-graph", "coarea", "horizontal coarea identity: tilted X1-graph x = 0.2 y, u = y + t/2",
    1, (1,), {"kind": "x1-graph", "n": 1, "phi": {"linear": [0.2, 0.0]}},
    {"polynomial": [[1.0, [0, 1, 0]], [0.5, [0, 0, 1]]], "name": "y+t/2"}, {1: 64}, COAREA_TOL))
_register(Scenario(
    "koranyi-sphere-u-t", "coarea", "horizontal coarea identity on the Koranyi unit sphere, u = t",
    1, (1,), "koranyi-sphere", "t", {1: 64}, COAREA_TOL))
_register(Scenario(
    "graph-n2-u-quartic", "coarea",
    "coarea identities in H^2 (horizontal and full-gradient forms) on a curved graph, quartic u",
    2, (2,),
    {"kind": "x1-graph", "n": 2, "phi": {"polynomial": [[0.15, [0, 1, 0, 0]], [0.1, [1, 0, 1, 0]]]}},
    {"polynomial": [[1.0, [0, 0, 1, 0, 0]], [0.5, [0, 1, 0, 0, 0]], [0.25, [0, 0, 0, 0, 1]],
                    [0.05, [0, 0, 4, 0, 0]], [0.1, [0, 2, 2, 0, 0]], [0.05, [0, 4, 0, 0, 0]]],
     "name": "quartic"},
    {2: 8}, {"default": 1e-2, "inequality": 1e-2}, s_levels=32))
_register(Scenario(
    "near-characteristic", "coarea",
    "coarea inequality with a small horizontal gradient: plane x=0, u = t - 2xy + y/20",
    1, (1,), "remark27-plane",
    {"polynomial": [[1.0, [0, 0, 1]], [-2.0, [1, 1, 0]], [0.05, [0, 1, 0]]], "name": "t-2xy+y/20"},
    {1: 64}, {"default": 1e-3, "inequality": 1e-3}))
_register(Scenario(
    "remark27", "counterexample",
    "n=1 counterexample to the full-gradient coarea form: plane x=0, u = t - 2xy",
    1, (1,), "remark27-plane", "remark27", {1: 32},
    {"thm14_zero": 1e-6, "slice_mass_fraction": 0.5}, s_levels=16))

for _eps in (0.2, 0.1, 0.05):
    _register(Scenario(
        f"graph-eps-{_eps:g}", "excess", f"excess and projection identities on the graph x = {_eps:g} y",
        1, (1,), _graph(_eps), None, {1: 16},
        {"dilation": 1e-8, "secondary": 1e-10, "monotonicity": 1e-9, "lsc": 1e-9,
         "identity_222": 1e-3, "slack_111": 1e-6, "excess_identity": 1e-3, "sandwich": 1e-6},
        params={"eps": _eps}))
_register(Scenario(
    "graph-t", "excess", "excess on the graph x = 0.3 t (a non-horizontal tilt)",
    1, (1,), _graph(0.3, "t"), None, {1: 16},
    {"dilation": 1e-8, "secondary": 1e-10, "monotonicity": 1e-9, "lsc": 1e-9,
     "identity_222": 1e-3, "slack_111": 1e-6, "excess_identity": 1e-3, "sandwich": 1e-6}))
_register(Scenario(
    "halfspace", "excess", "flat boundary {x_1 < 0}: zero excess, equality in the projection bounds",
    1, (1,), _HALFSPACE, None, {1: 16},
    {"halfspace": 1e-10, "dilation": 1e-8, "secondary": 1e-10, "monotonicity": 1e-9, "lsc": 1e-9,
     "identity_222": 1e-3, "slack_111": 1e-6, "excess_identity": 1e-3, "sandwich": 1e-6}))
_register(Scenario(
    "omega-sweep", "isoperimetric",
    "relative isoperimetric ratios on translated sections Omega_s of W (n=2 only)",
    2, (2,), None, None, {2: 0}, {"spread": 0.5},
    params={"s_values": [-0.9, -0.5, 0.0, 0.5, 0.9], "samples": 10_000_000, "tau": 0.75,
            "sets": [["halfspace-y1"], ["koranyi-ball", 0.5]], "delta": 0.01}))
_register(Scenario(
    "clouds", "hausdorff", "box-counting dimensions of model sets and slab covering counts",
    1, (1,), None, None, {1: 0}, {"dimension": 0.1, "slab_ratio": 2.0},
    params={
        "dimensions": [
            ["taxis", {"n": 1, "delta_min": 1 / 64}, 0.25, 5, 2.0],
            ["xaxis", {"n": 1, "delta_min": 1 / 128}, 0.25, 6, 1.0],
            ["vertical-plane", {"delta_min": 1 / 16}, 0.5, 4, 3.0],
        ],
        "slab_eps_max": 0.25, "slab_levels": 5, "slab_n": 1,
    }))


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise InvalidArgument(
            f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}"
        ) from None


def scenarios_for(suite: str) -> list[Scenario]:
    if suite == "project":
        suite = "excess"
    return [s for s in SCENARIOS.values() if s.suite == suite]


def list_scenarios() -> str:
    """Plain-text table of the registry."""
    rows = [("name", "suite", "n", "anchor")]
    for s in SCENARIOS.values():
        ns = ",".join(str(v) for v in s.ns)
        rows.append((s.name, s.suite, ns + (" only" if s.ns == (2,) else ""), s.anchor))
    w = [max(len(r[i]) for r in rows) for i in range(3)]
    return "\n".join(f"{a:<{w[0]}}  {b:<{w[1]}}  {c:<{w[2]}}  {d}" for a, b, c, d in rows)
