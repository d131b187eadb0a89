import json

import pytest

from dyadmorrey.cli import CSV_HEADER, OUTPUT_ENV, ConfigError, build_settings, load_config, main

SMALL = {"j_max": 6, "corpus": {"pairs": 4, "families": 4, "items": 4, "scaling_pairs": 2}}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_empty_check_list(tmp_path):
    out = tmp_path / "out"
    rc = main(["verify", write_cfg(tmp_path, {"checks": []}), "--output-dir", str(out)])
    assert rc == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert lines == [",".join(CSV_HEADER)]
    assert json.loads((out / "report.json").read_text())["checks"] == {}


def test_verify_rows_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, {**SMALL, "checks": ["lem2.4", "thm1.3"]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", cfg, "--output-dir", str(a)]) == 0
    assert main(["verify", cfg, "--output-dir", str(b)]) == 0
    text = (a / "report.csv").read_text()
    assert text == (b / "report.csv").read_text()
    rows = text.splitlines()[1:]
    assert any(r.startswith("lem2.4,") for r in rows) and any(r.startswith("thm1.3,") for r in rows)
    assert not list(a.glob("*.partial"))


def test_seed_flag_changes_rows(tmp_path):
    cfg = write_cfg(tmp_path, {**SMALL, "checks": ["thm1.3"]})
    main(["verify", cfg, "--output-dir", str(tmp_path / "a")])
    main(["verify", cfg, "--seed", "7", "--output-dir", str(tmp_path / "b")])
    assert (tmp_path / "a" / "report.csv").read_text() != (tmp_path / "b" / "report.csv").read_text()


def test_level_cap_is_config_error(tmp_path, capsys):
    rc = main(["verify", write_cfg(tmp_path, {"j_max": 20}), "--output-dir", str(tmp_path)])
    assert rc == 2
    assert "j_max" in capsys.readouterr().err


def test_flag_overrides_config(tmp_path):
    s, _, _ = build_settings({"j_max": 20}, {"j_max": 5})
    assert s.j_max == 5


def test_bad_json_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "seed": 1,\n  "j_max": ,\n}')
    assert main(["verify", str(p)]) == 2
    err = capsys.readouterr().err
    assert "bad.json:3:" in err


@pytest.mark.parametrize("cfg, field", [
    ({"bogus": 1}, "bogus"),
    ({"seed": "x"}, "seed"),
    ({"checks": ["nope"]}, "checks"),
    ({"n": 2, "j_max": 6, "checks": ["ialpha_majorant"]}, "ialpha_majorant"),
    ({"theorems": {"thm1.3": {"alpha": 1}}}, "theorems.thm1.3"),
    ({"corpus": {"pairs": 0}}, "corpus.pairs"),
    ({"maximal": {"eta_fractions": [1.5]}}, "eta_fractions"),
])
def test_config_errors_name_field(cfg, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        build_settings(cfg)


def test_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    _, _, out = build_settings({})
    assert out == tmp_path / "env"
    _, _, out = build_settings({}, {"output_dir": str(tmp_path / "flag")})
    assert out == tmp_path / "flag"


def test_report_subcommand(tmp_path, capsys):
    out = tmp_path / "out"
    main(["verify", write_cfg(tmp_path, {**SMALL, "checks": ["thm1.3"]}), "--output-dir", str(out)])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert "thm1.3" in capsys.readouterr().out
    assert main(["report", str(tmp_path / "empty")]) == 2


def test_oracle_subcommand(tmp_path):
    out = tmp_path / "out"
    rc = main(["oracle", write_cfg(tmp_path, {"j_max": 6}), "--items", "3", "--output-dir", str(out)])
    assert rc == 0
    assert (out / "oracle.csv").exists()


def test_sweep_subcommand(tmp_path):
    cfg = {**SMALL, "checks": [], "sweep": {"alpha": [1 / 6, 0.9]}}
    out = tmp_path / "out"
    assert main(["sweep", write_cfg(tmp_path, cfg), "--output-dir", str(out)]) == 0
    data = json.loads((out / "sweep.json").read_text())
    assert len(data["checks"]) >= 1


def test_load_config_requires_object(tmp_path):
    p = tmp_path / "list.json"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(p)
