import json
from importlib import resources

import jsonschema
import pytest

from gpm.cli import main
from gpm.props import DEMOS

SCHEMA = json.loads(resources.files("gpm").joinpath("schema/output.schema.json").read_text())
DEMO_DIR = resources.files("gpm").joinpath("demos")


def demo_path(name):
    return str(DEMO_DIR.joinpath(f"{name}.gpm"))


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMA)
    return code, payload, out


@pytest.mark.parametrize("name", DEMOS)
def test_check_accepts_demos(capsys, name):
    code, payload, _ = run_json(capsys, "check", demo_path(name))
    assert code == 0 and payload["ok"]


@pytest.mark.parametrize(
    "name, code",
    [("bad_unguarded", "UnguardedMu"), ("bad_depth", "DepthMismatch"), ("bad_overlap", "OverlappingPatterns")],
)
def test_check_reports_errors(capsys, name, code):
    rc, payload, _ = run_json(capsys, "check", demo_path(name))
    assert rc == 1
    assert payload["diagnostics"][0]["code"] == code


def test_check_reports_parse_errors(capsys, tmp_path):
    f = tmp_path / "broken.gpm"
    f.write_text("iso f : 1 <-> 1 = { x <-> ")
    rc, payload, _ = run_json(capsys, "check", str(f))
    assert rc == 1 and payload["diagnostics"][0]["code"] == "ParseError"


def test_run(capsys):
    rc, payload, _ = run_json(capsys, "run", demo_path("flip"), "--term", "flipped", "--budget", "3")
    assert rc == 0 and payload["value"] == "'1 :: next []"


def test_denote_type(capsys):
    rc, payload, _ = run_json(capsys, "denote", "--type", "mu X . 1 + @X", "--stage", "4")
    assert rc == 0
    assert [s["dim"] for s in payload["stages"]] == [1, 2, 3, 4, 5]
    assert all(s["restriction_dagger_epi"] for s in payload["stages"][:-1])
    assert payload["stages"][1]["normal_form"] == "I + I"


def test_denote_iso_flags(capsys):
    rc, payload, _ = run_json(capsys, "denote", demo_path("qft"), "--iso", "qft", "--stage", "2", "--backend", "hilb")
    assert rc == 0
    flags = payload["flags"]
    assert flags["unitary"] and flags["daggerable"]
    rc, payload, _ = run_json(capsys, "denote", demo_path("flip"), "--iso", "flip", "--stage", "2")
    assert payload["flags"] == {"bijective": True, "daggerable": True, "exhaustive": True, "checked_up_to": 8}


def test_dagger(capsys):
    rc, payload, _ = run_json(capsys, "dagger", demo_path("nats"), "--iso", "tag", "--stage", "2")
    assert rc == 0 and payload["daggerable"] and payload["first_failure"] is None


@pytest.mark.parametrize("demo, iso, stage", [("flip", "flip", 3), ("map", "mapnot", 4), ("nats", "tag", 3)])
def test_agree_iso(capsys, demo, iso, stage):
    rc, payload, _ = run_json(capsys, "agree", demo_path(demo), "--iso", iso, "--stage", str(stage))
    assert rc == 0 and payload["pass"] and payload["checked"] > 1


def test_agree_term(capsys):
    rc, payload, _ = run_json(capsys, "agree", demo_path("map"), "--term", "ys", "--stage", "3")
    assert rc == 0 and payload["pass"]


def test_agree_detects_a_corrupted_denotation(capsys):
    rc, payload, _ = run_json(capsys, "agree", demo_path("flip"), "--iso", "flip", "--stage", "2", "--corrupt")
    assert rc == 1 and not payload["pass"] and payload["witness"]
    rc, payload, _ = run_json(capsys, "agree", demo_path("flip"), "--term", "one", "--stage", "2", "--corrupt")
    assert rc == 1 and not payload["pass"]


def test_props(capsys):
    rc, payload, _ = run_json(capsys, "props", "--suite", "naturality,niso", "--stage", "3", "--random", "4")
    assert rc == 0 and set(payload["summary"]) == {"naturality", "niso"} and not payload["failures"]


def test_output_is_deterministic(capsys):
    argv = ["denote", demo_path("qft"), "--iso", "qft", "--stage", "2", "--backend", "hilb"]
    first = run_json(capsys, *argv)[2]
    assert run_json(capsys, *argv)[2] == first


def test_text_output(capsys):
    assert main(["agree", demo_path("flip"), "--iso", "flip", "--stage", "2"]) == 0
    assert capsys.readouterr().out.startswith("PASS flip")
    assert main(["denote", "--type", "mu X . 1 + 2*@X", "--stage", "2", "--backend", "hilb"]) == 0
    assert "dim    7" in capsys.readouterr().out


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["denote", "--type", "1", "--stage", "-1"])
    assert e.value.code == 2
    assert main(["run", demo_path("flip"), "--term", "nope"]) == 2
    assert "no term named nope" in capsys.readouterr().err
    assert main(["denote", demo_path("qctrl"), "--iso", "chad", "--stage", "0"]) == 1
    assert "BackendUnsupported" in capsys.readouterr().err


def test_spec_style_denote_examples(capsys):
    import numpy as np

    _, payload, _ = run_json(capsys, "denote", demo_path("flip"), "--iso", "flip", "--stage", "2")
    assert len(payload["morphism"]["pairs"]) == 7
    _, payload, _ = run_json(capsys, "denote", demo_path("qft"), "--iso", "qft", "--stage", "1", "--backend", "hilb")
    m = payload["morphism"]
    rows = {r: i for i, r in enumerate(m["rows"])}
    ones = [rows["inr((inl(*),inl(*)))"], rows["inr((inr(*),inl(*)))"]]
    block = np.array([[complex(*m["matrix"][i][j]) for j in ones] for i in ones])
    assert np.allclose(block, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-9)
