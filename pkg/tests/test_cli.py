import json

import pytest

from ubbcert.block_cube import parse_states
from ubbcert.cli import main
from ubbcert.exact_linalg import format_rmat, parse_rmat
from ubbcert.reports import CLAIMS, OUT_ENV, RunConfig, load_fixture


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    return tmp_path


def test_construct_upb(out, capsys):
    assert main(["construct", "upb", "--d", "3"]) == 0
    stdout = capsys.readouterr().out
    assert "complement dim 8" in stdout
    states = parse_states((out / "upb_d3.states").read_text(), 3)
    assert len(states) == 19


def test_construct_ubb_sym_d5(out, capsys):
    assert main(["construct", "--set", "ubb-sym", "--d", "5"]) == 0
    assert "complement dim 10" in capsys.readouterr().out
    assert len((out / "ubb-sym_d5.states").read_text().splitlines()) == 115


def test_construct_topb_d4(out, capsys):
    assert main(["construct", "topb", "--d", "4", "--diagram"]) == 0
    stdout = capsys.readouterr().out
    assert "64 states" in stdout and "A=0" in stdout
    assert len((out / "topb_d4.states").read_text().splitlines()) == 64


@pytest.mark.parametrize("argv", [
    ["construct", "upb", "--d", "2"],
    ["construct", "nonsense", "--d", "3"],
    ["construct", "ubb-asym", "--d", "3"],
    ["construct", "ubb-asym", "--d", "3", "--cut", "A|B"],
    ["verify", "--d", "3"],
    ["certify", "--d", "3", "--claim", "prop3"],
    ["certify", "--d", "3", "--claim", "prop1", "--set", "ubb-sym"],
    ["certify", "--d", "3", "--claim", "prop1", "--restarts", "0"],
    ["report", "--criterion", "11"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(out, argv, capsys):
    assert main(argv) == 2


def test_verify_theorem1(out, capsys):
    assert main(["verify", "--d", "3", "--set", "ubb-sym", "--claim", "theorem1", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"]
    assert rep["rank_profiles"]["ubb-sym_d3"]["bimarginal"] == {"A|BC": 6, "AC|B": 6, "AB|C": 6}
    assert all(c["anchor"] == CLAIMS[c["claim"]] for c in rep["certificates"])
    assert (out / "verify_ubb-sym_d3_theorem1.json").exists()


def test_verify_ppt_upb(out, capsys):
    assert main(["verify", "projector", "--d", "3", "--set", "upb", "--claim", "ppt", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert all(v["psd"] for v in rep["pt_reports"]["upb_d3"].values())


def test_verify_asymmetric(out, capsys):
    assert main(["verify", "--d", "3", "--set", "ubb-asym", "--cut", "AB|C", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    pt = rep["pt_reports"]["ubb-asym_d3_AB-C"]
    assert pt["AB|C"]["pt_invariant"] and pt["AB|C"]["psd"]
    assert not pt["A|BC"]["psd"] and not pt["AC|B"]["psd"]
    prof = rep["rank_profiles"]["ubb-asym_d3_AB-C"]["bimarginal"]
    assert prof["A|BC"] == 7 and prof["AC|B"] == 7
    golden = [c for c in rep["certificates"] if c["claim"] == "golden-marginal"]
    assert len(golden) == 2 and all(c["verdict"] == "pass" for c in golden)


def test_certify_prop1_reports_seed(out, capsys):
    assert main(["certify", "--d", "3", "--claim", "prop1", "--seed", "17", "--restarts", "10",
                 "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    num = [c for c in rep["certificates"] if c["method"] == "randomized-numerical"]
    assert num and all(c["seed"] == 17 and c["restarts"] == 10 for c in num)


def test_certify_report_deterministic_modulo_timings(out, capsys):
    argv = ["certify", "--d", "3", "--claim", "prop2", "--restarts", "5", "--format", "json"]
    main(argv)
    a = json.loads(capsys.readouterr().out)
    main(argv)
    b = json.loads(capsys.readouterr().out)
    a.pop("timings"), b.pop("timings")
    assert a == b


def test_certify_facts(out, capsys):
    assert main(["certify", "--d", "3", "--claim", "facts", "--samples", "5"]) == 0
    text = capsys.readouterr().out
    assert text.count("[PASS]") == 4 and "overall: PASS" in text


def test_export_matches_fixtures_byte_for_byte(out, capsys):
    assert main(["export", "--d", "3", "--set", "ubb-sym"]) == 0
    fixture = format_rmat(load_fixture("appendix_a_rho_beta"))
    assert (out / "ubb-sym_d3.marginal_BC.rmat").read_text() == fixture
    assert (out / "ubb-sym_d3.marginal_AB.rmat").read_text() == fixture
    assert main(["export", "--d", "3", "--set", "ubb-asym", "--cut", "AB|C"]) == 0
    assert (out / "ubb-asym_d3_AB-C.marginal_BC.rmat").read_text() == format_rmat(load_fixture("appendix_b_rho_bc"))
    assert (out / "ubb-asym_d3_AB-C.marginal_AC.rmat").read_text() == format_rmat(load_fixture("appendix_b_rho_ac"))


def test_export_round_trip(out, capsys):
    main(["export", "--d", "3", "--set", "upb"])
    for path in out.glob("*.rmat"):
        text = path.read_text()
        assert format_rmat(parse_rmat(text)) == text


def test_export_zero_projector(out, capsys):
    assert main(["export", "--d", "3", "--set", "topb"]) == 0
    m = parse_rmat((out / "topb_d3.projector.rmat").read_text())
    assert m.shape == (27, 27) and m.is_zero()
    assert not (out / "topb_d3.rho.rmat").exists()


def test_export_unwritable_path(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["export", "--d", "3", "--set", "upb", "--out", str(blocker / "sub")]) == 1
    assert str(blocker) in capsys.readouterr().err


def test_report_single_criterion(out, capsys):
    assert main(["report", "--criterion", "1"]) == 0
    assert capsys.readouterr().out.startswith("[PASS] criterion  1")


def test_run_config_defaults(monkeypatch):
    monkeypatch.delenv(OUT_ENV, raising=False)
    cfg = RunConfig(set_kind="ubb-asym", cut="ab|c").validate()
    assert cfg.set_kind == "ubb_asymmetric" and str(cfg.cut) == "AB|C"
    assert str(cfg.out_dir) == "ubbcert-out"
    assert cfg.seesaw().restarts == 200 and cfg.seesaw().overlap_threshold == 1 - 1e-6
