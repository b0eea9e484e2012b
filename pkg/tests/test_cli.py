import csv
import json
import math
import xml.etree.ElementTree as ET

import pytest

from psc_tsa.cli import main
from psc_tsa.config import bundled_path

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def polylines(path):
    root = ET.parse(path).getroot()
    assert root.tag == SVG_NS + "svg"
    return root.findall(f".//{SVG_NS}polyline")


def test_equilibria(capsys, tmp_path):
    out = tmp_path / "eq.json"
    code, text, _ = run(capsys, "equilibria", "--config", "case1", "--out", str(out))
    assert code == 0
    assert "26.423 deg" in text and "60.459 deg" in text
    report = json.loads(out.read_text())
    assert report["provenance"]["tool"] == "psc-tsa"
    assert len(report["provenance"]["config_sha256"]) == 64
    assert math.degrees(report["equilibria"]["PostFault"]["sep_rad"]) == pytest.approx(60.4586, abs=1e-3)


def test_cca(capsys):
    code, text, _ = run(capsys, "cca", "--config", "case2")
    assert code == 0 and "108.195 deg" in text


def test_cct_json(capsys, tmp_path):
    out = tmp_path / "cct.json"
    code, _, _ = run(capsys, "cct", "--config", "case2", "--out", str(out))
    assert code == 0
    frag = json.loads(out.read_text())["cct"]
    assert frag["cct_analytic_s"] == pytest.approx(0.58027, abs=1e-5)
    assert abs(frag["cct_difference_s"]) < 2e-4


def test_cct_on_line_loss_is_a_domain_error(capsys):
    code, _, err = run(capsys, "cct", "--config", "case1")
    assert code == 4 and "error" in err


def test_simulate_writes_csv_svg_and_report(capsys, tmp_path):
    out = tmp_path / "run.csv"
    code, text, _ = run(
        capsys, "simulate", "--config", "case2", "--clear-at", "0.7", "--out", str(out), "--svg"
    )
    assert code == 0
    assert "ConvergedAfterSlip(1)" in text
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert ",".join(rows[0]) == "t,delta_rad,delta_dot_rad_s,p_e_pu,i_g_pu"
    assert all(len(r) == 5 for r in rows)
    lines = polylines(tmp_path / "run.svg")
    assert {pl.get("data-series") for pl in lines} == {"delta", "p_e", "i_g"}
    report = json.loads((tmp_path / "run.json").read_text())
    assert report["runs"][0]["classification"] == "ConvergedAfterSlip(1)"
    assert report["runs"][0]["clear_after_s"] == pytest.approx(0.7)
    assert report["parameters"]["fault"]["kind"] == "ThreePhaseGroundFault"


def test_simulate_never_clear(capsys):
    code, text, _ = run(capsys, "simulate", "--config", "case2", "--never-clear")
    assert code == 0 and "Unbounded" in text


def test_clear_flags_are_exclusive(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--config", "case2", "--clear-at", "0.5", "--never-clear"])
    assert exc.value.code == 2


def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["explode", "--config", "case2"])
    assert exc.value.code == 2


def test_sg_simulate(capsys, tmp_path):
    out = tmp_path / "sg.csv"
    code, text, _ = run(capsys, "sg-simulate", "--config", "case1", "--out", str(out))
    assert code == 0
    assert "model=SG" in text and "ConvergedDirect" in text
    assert out.read_text().startswith("t,delta_rad,delta_dot_rad_s,p_e_pu,i_g_pu\n")


def test_sg_simulate_needs_sg_block(capsys):
    code, _, err = run(capsys, "sg-simulate", "--config", "lab_case2")
    assert code == 3 and "sg" in err


def test_portrait(capsys, tmp_path):
    out = tmp_path / "por.csv"
    code, text, _ = run(
        capsys, "portrait", "--config", "case2", "--state", "post", "--n", "361",
        "--out", str(out), "--svg",
    )
    assert code == 0
    assert "SEP at 71.805" in text and "UEP at 108.195" in text
    rows = out.read_text().splitlines()
    assert rows[0] == "delta_rad,delta_dot_rad_s" and len(rows) == 362
    assert len(polylines(tmp_path / "por.svg")) == 1


def test_portrait_state_missing_for_line_loss(capsys):
    code, _, _ = run(capsys, "portrait", "--config", "case1", "--state", "during")
    assert code == 3


def test_sweep(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys, "sweep", "--config", "case2", "--clear-from", "0.5", "--clear-to", "0.7",
        "--steps", "2", "--out", str(out), "--svg",
    )
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["classification"] for r in rows] == [
        "ConvergedDirect", "ConvergedAfterSlip", "ConvergedAfterSlip",
    ]
    assert [int(r["cycle_slips"]) for r in rows] == [0, 1, 1]
    assert (tmp_path / "sweep.svg").exists()


def test_sweep_rejects_non_positive_duration(capsys):
    code, _, _ = run(capsys, "sweep", "--config", "case2", "--clear-from", "0",
                     "--clear-to", "1", "--steps", "2")
    assert code == 3


def test_bad_config_exit_code(capsys, tmp_path):
    cfg = json.loads(bundled_path("case2").read_text())
    cfg["elements"]["L_T"]["unit"] = "furlong"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "equilibria", "--config", str(path))
    assert code == 3 and "furlong" in err


def test_missing_config_exit_code(capsys, tmp_path):
    code, _, _ = run(capsys, "cca", "--config", str(tmp_path / "nope.json"))
    assert code == 3


def test_unwritable_output_is_io_error(capsys, tmp_path):
    code, _, _ = run(capsys, "cca", "--config", "case2", "--out", str(tmp_path / "no" / "x.json"))
    assert code == 5


def test_no_post_fault_equilibrium_is_domain_error(capsys, tmp_path):
    cfg = json.loads(bundled_path("case2").read_text())
    cfg["elements"]["L_g1"]["value"] = 0.5
    path = tmp_path / "weak.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "cca", "--config", str(path))
    assert code == 4 and "equilibrium" in err
