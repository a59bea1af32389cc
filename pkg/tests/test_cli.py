import json

import pytest

from eqmirror.cli import (
    ConfigError,
    geometry_from_config,
    load_config,
    main,
    parse_config_value,
    parse_degree,
    render_text,
    _parse_rat,
)
from eqmirror.exact_core import rat


def test_parse_config_value():
    assert parse_config_value(" 3 ") == 3
    assert parse_config_value("(1, 2)") == (1, 2)
    assert parse_config_value("antidiagonal") == "antidiagonal"
    assert parse_config_value("None") is None


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment\n"
        "geometry = x_k\n"
        "k = 2  # trailing comment\n"
        "degree = 3\n"
        "mori = ((1, 1, 1, -3),)\n"
    )
    cfg = load_config(str(path))
    assert cfg == {
        "geometry": "x_k",
        "k": 2,
        "degree": 3,
        "mori": ((1, 1, 1, -3),),
    }
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"))


def test_parse_degree():
    assert parse_degree("4", 1) == (4,)
    assert parse_degree("3", 3) == (3, 3, 3)
    assert parse_degree("2,3", 2) == (2, 3)
    assert parse_degree(5) == (5,)
    with pytest.raises(ConfigError):
        parse_degree("2,3", 3)
    with pytest.raises(ConfigError):
        parse_degree("0", 1)
    with pytest.raises(ConfigError):
        parse_degree("two", 1)


def test_geometry_from_config_builtin():
    g = geometry_from_config({"geometry": "x_k", "k": 2})
    assert g.name == "x_k(2,antidiagonal)"
    g2 = geometry_from_config({"family": "a_n", "n": 3})
    assert g2.name == "a_n(3)"
    with pytest.raises(ConfigError):
        geometry_from_config({})


def test_geometry_from_config_explicit():
    cfg = {
        "name": "conifold",
        "family": "x_k",
        "mori": ((1, 1, -1, -1),),
        "weights": (None, None, ("lam1", 1), ("lam2", 1)),
        "generators": ("p",),
        "relations": ({(2,): 1},),
        "lambda_names": ("lam1", "lam2"),
    }
    g = geometry_from_config(cfg)
    assert g.name == "conifold"
    assert g.family == "x_k"
    with pytest.raises(ConfigError):
        geometry_from_config({"mori": ((1, -1),), "weights": (17,)})


def test_parse_rat():
    assert _parse_rat("-7/48") == rat(-7, 48)
    assert _parse_rat("3") == rat(3)
    assert _parse_rat(2) == rat(2)


def test_render_text_sorted():
    lines = render_text({"b": {"y": 1}, "a": [1, 2], "c": "x"})
    assert lines == ["a: 1 2", "b:", "  y: 1", "c: x"]


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_gw_command_json(capsys):
    rc, out, err = run_cli(
        capsys, "gw", "--geometry", "a_n", "--n", "2", "--degree", "2", "--format", "json"
    )
    assert rc == 0
    report = json.loads(out)
    assert report["invariants"] == {"0,1": "1", "1,0": "1", "1,1": "1"}
    assert report["degree"] == [2, 2]
    assert "elapsed" in err


def test_gw_output_is_deterministic(capsys):
    args = ("gw", "--geometry", "x_k", "--k", "-1", "--degree", "3", "--format", "json")
    rc1, out1, _ = run_cli(capsys, *args)
    rc2, out2, _ = run_cli(capsys, *args)
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_gw_with_config_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("geometry = x_k\nk = 1\ndegree = 2\n")
    rc, out, _ = run_cli(
        capsys, "gw", "--config", str(cfg), "--degree", "3", "--format", "json"
    )
    assert rc == 0
    report = json.loads(out)
    assert report["degree"] == [3]
    assert report["invariants"] == {"1": "-1", "2": "1", "3": "-2"}


def test_gw_explicit_geometry_config(capsys, tmp_path):
    cfg = tmp_path / "conifold.cfg"
    cfg.write_text(
        "name = conifold\n"
        "family = x_k\n"
        "mori = ((1, 1, -1, -1),)\n"
        "weights = (None, None, ('lam1', 1), ('lam2', 1))\n"
        "generators = ('p',)\n"
        "relations = ({(2,): 1},)\n"
        "lambda_names = ('lam1', 'lam2')\n"
        "degree = 3\n"
    )
    rc, out, _ = run_cli(capsys, "gw", "--config", str(cfg), "--format", "json")
    assert rc == 0
    assert json.loads(out)["invariants"] == {"1": "1"}


def test_verification_commands_pass(capsys):
    rc, out, _ = run_cli(capsys, "verify-genus0", "--k", "1", "--degree", "4")
    assert rc == 0
    assert "verdict: pass" in out
    rc, out, _ = run_cli(capsys, "verify-genus1", "--k", "2", "--degree", "4")
    assert rc == 0
    rc, out, _ = run_cli(capsys, "verify-factored", "--k", "1", "--degree", "2")
    assert rc == 0
    rc, out, _ = run_cli(capsys, "verify-fibration", "--degree", "3")
    assert rc == 0
    rc, out, _ = run_cli(capsys, "pf-check", "--k", "2", "--degree", "4")
    assert rc == 0


def test_genus1_fit_command(capsys):
    rc, out, _ = run_cli(capsys, "genus1-fit", "--k", "3", "--format", "json")
    assert rc == 0
    report = json.loads(out)
    assert report["log unit"] == "1/4"
    assert report["log shifted unit"] == "11/24"
    assert report["log jacobian"] == "1/2"


def test_an_command_includes_bracket_check(capsys):
    rc, out, _ = run_cli(capsys, "an", "--n", "2", "--degree", "2", "--format", "json")
    assert rc == 0
    report = json.loads(out)
    assert report["invariants"] == {"0,1": "1", "1,0": "1", "1,1": "1"}
    assert any("double bracket" in key for key in report)


def test_trivalent_command_runs_both_actions(capsys):
    rc, out, _ = run_cli(capsys, "trivalent", "--degree", "2", "--format", "json")
    assert rc == 0
    report = json.loads(out)
    assert len(report) == 2
    assert all(body["verdict"] == "pass" for body in report.values())


def test_a2_genus1_exit_codes(capsys):
    rc, out, _ = run_cli(capsys, "a2-genus1", "--format", "json")
    assert rc == 1
    report = json.loads(out)
    assert report["verdict"] == "fail"
    assert report["measured target exponent"] == "-1/48"
    assert report["delta exponent closing the identity"] == "-7/48"
    rc2, out2, _ = run_cli(
        capsys, "a2-genus1", "--delta-exponent=-7/48", "--format", "json"
    )
    assert rc2 == 0
    assert json.loads(out2)["verdict"] == "pass"


def test_unusable_configuration_exits_2(capsys):
    rc, _, err = run_cli(capsys, "gw", "--geometry", "nope", "--k", "1")
    assert rc == 2
    assert "error:" in err
    rc2, _, err2 = run_cli(capsys, "verify-genus0")
    assert rc2 == 2
    assert "--k" in err2


def test_shallow_window_exits_3(capsys):
    rc, _, err = run_cli(
        capsys,
        "gw", "--geometry", "x_k", "--k", "1", "--degree", "4", "--lambda-depth", "3",
    )
    assert rc == 3
    assert "retention windows too shallow" in err


def test_out_file_respects_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("EQMIRROR_OUT_DIR", str(tmp_path))
    rc, out, _ = run_cli(
        capsys,
        "gw", "--geometry", "x_k", "--k", "-1", "--degree", "2",
        "--format", "json", "--out", "report.json",
    )
    assert rc == 0
    written = (tmp_path / "report.json").read_text()
    assert written == out
