import csv
import json

import pytest

from heisgmt import __version__
from heisgmt.cli import main
from heisgmt.scenarios import SCENARIOS


def run(args, tmp_path, capsys):
    code = main(args + ["--out", str(tmp_path)])
    return code, capsys.readouterr()


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("remark27", "omega-sweep", "plane-u-y", "clouds"):
        assert name in out
    assert "2 only" in out
    assert all(s.anchor for s in SCENARIOS.values())


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_run_single_scenario(tmp_path, capsys):
    code, out = run(["run", "coarea", "--scenario", "plane-u-y", "--n", "1"], tmp_path, capsys)
    assert code == 0
    assert "overall: PASS" in out.out
    rep = json.loads((tmp_path / "coarea-plane-u-y.json").read_text())
    assert rep["schema"] == 1 and rep["pass"] is True
    assert rep["results"][0]["scenario"] == "plane-u-y"
    for c in rep["results"][0]["checks"]:
        assert {"check_id", "lhs", "rhs", "residual", "tolerance", "pass"} <= set(c)


def test_run_counterexample(tmp_path, capsys):
    code, out = run(["run", "counterexample", "--json"], tmp_path, capsys)
    assert code == 0
    rep = json.loads(out.out)
    ids = [c["check_id"] for c in rep["results"][0]["checks"]]
    assert "thm15-rhs-convention-zero" in ids


@pytest.mark.parametrize("args", [
    ["run", "coarea", "--scenario", "no-such"],
    ["run", "coarea", "--bogus"],
    ["run", "nonsuite"],
    ["run", "isoperimetric", "--n", "1"],
    ["run", "coarea", "--resolution", "0"],
    ["run", "all", "--scenario", "plane-u-y"],
    [],
])
def test_usage_errors(args, tmp_path, capsys):
    code = main(args + (["--out", str(tmp_path)] if args[:1] == ["run"] else []))
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("scenario: plane-u-y\nresolution: 16\nseed: 5\n")
    code, _ = run(["run", "coarea", "--config", str(cfg), "--resolution", "32"], tmp_path, capsys)
    assert code == 0
    rep = json.loads((tmp_path / "coarea-plane-u-y.json").read_text())
    assert rep["environment"]["resolution"] == 32
    assert rep["environment"]["seed"] == 5
    assert rep["results"][0]["resolution"] == 32


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("scenario: plane-u-y\ncolour: blue\n")
    code, out = run(["run", "coarea", "--config", str(cfg)], tmp_path, capsys)
    assert code == 2
    assert "colour" in out.err


def test_config_malformed(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("- a\n- b\n")
    assert run(["run", "coarea", "--config", str(cfg)], tmp_path, capsys)[0] == 2
    assert run(["run", "coarea", "--config", str(tmp_path / "missing.yaml")], tmp_path, capsys)[0] == 2


def _strip(text):
    rep = json.loads(text)
    rep.pop("wall_time")
    return json.dumps(rep, sort_keys=True)


def test_deterministic_reports(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "excess", "--scenario", "graph-eps-0.1", "--out", str(d)]) == 0
    capsys.readouterr()
    ta = (a / "excess-graph-eps-0.1.json").read_text()
    tb = (b / "excess-graph-eps-0.1.json").read_text()
    assert _strip(ta) == _strip(tb)


def test_atomic_write_leaves_no_temporaries(tmp_path, capsys):
    assert run(["run", "project", "--scenario", "halfspace"], tmp_path, capsys)[0] == 0
    assert [p.name for p in tmp_path.iterdir()] == ["project-halfspace.json"]


def test_isoperimetric_csv(tmp_path, capsys):
    code, _ = run(["run", "isoperimetric", "--quick", "--csv"], tmp_path, capsys)
    assert code == 0
    path = tmp_path / "isoperimetric-all-omega-sweep.csv"
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["set", "s", "volume", "perimeter", "ratio", "seed"]
    assert len(rows) == 10


@pytest.mark.slow
def test_run_all_quick(tmp_path, capsys):
    code, out = run(["run", "all", "--quick"], tmp_path, capsys)
    assert code == 0, out.out
    rep = json.loads((tmp_path / "all-all.json").read_text())
    assert {r["suite"] for r in rep["results"]} == {
        "coarea", "excess", "project", "isoperimetric", "hausdorff", "counterexample"}
