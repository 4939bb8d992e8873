import csv
import io
import json
import math


from homogeodesy.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_list_command(capsys):
    code, out = run_cli(capsys, "list")
    assert code == 0
    doc = json.loads(out)
    assert "berger" in doc["families"]
    assert "conj" in doc["reproduce"]


def test_verify_b13(capsys):
    code, out = run_cli(capsys, "verify", "b13")
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert doc["results"]["bi-invariance"]["pass"] is True


def test_verify_round_notes_constant_curvature(capsys):
    code, out = run_cli(capsys, "verify", "berger:m=1,s=1")
    assert code == 0
    doc = json.loads(out)
    assert any("constant curvature" in note for note in doc["notes"])


def test_verify_space_without_split(capsys):
    code, out = run_cli(capsys, "verify", "round:n=3,kappa=1")
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert doc["results"]["lts"].get("skipped")
    assert doc["results"]["m-transitivity"]["transitive"] is True


def test_verify_reports_non_transitive_m0(capsys):
    code, out = run_cli(capsys, "verify", "spsphere:m=1,s=1", "--check", "m0-transitivity")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["m0-transitivity"]["transitive"] is False


def test_conjugate_empty_table(capsys):
    code, out = run_cli(capsys, "conjugate", "b13", "--tmax", "0.1", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "space"
    assert len(rows) == 1


def test_conjugate_b13_horizontal_tan_event(capsys):
    code, out = run_cli(
        capsys, "conjugate", "b13", "--theta", repr(math.pi / 2), "--tmax", "3.0"
    )
    assert code == 0
    doc = json.loads(out)
    tan_rows = [r for r in doc["rows"] if r["closed_form_match"] == "tan-family"]
    assert len(tan_rows) == 1
    assert abs(tan_rows[0]["t"] - 2.86909685) < 1e-6
    assert tan_rows[0]["isotropic_exists"] is False


def test_berger_vertical_rows(capsys):
    code, out = run_cli(
        capsys, "conjugate", "berger:m=2,s=0.5", "--theta", "0", "--tmax", "11"
    )
    assert code == 0
    doc = json.loads(out)
    assert [r["multiplicity"] for r in doc["rows"]] == [4, 4]
    assert all(r["isotropic_exists"] is False for r in doc["rows"])


def test_closedform_command(capsys):
    code, out = run_cli(
        capsys, "closedform", "w7:s=0.5", "--theta", repr(math.pi / 2), "--tmax", "7"
    )
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["lambda"] - 1.0 / 3.0) < 1e-9
    assert abs(doc["rho"] - 2.0 / 3.0) < 1e-9
    assert any(t["family"] == "tan-family" for t in doc["times"])


def test_brackets_export(capsys):
    code, out = run_cli(capsys, "brackets", "berger:m=1,s=0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["algebra"]["dim"] == 4
    pairs = {(row["left"], row["right"]) for row in doc["table"]}
    assert ("d_s", "e_1") in pairs


def test_bad_descriptor_exit_code(capsys):
    code, _ = run_cli(capsys, "verify", "flag:m=1")
    assert code == 3


def test_bad_arguments_exit_code(capsys):
    assert main(["reproduce", "nonsense"]) == 3


def test_deterministic_json_output(capsys, tmp_path):
    argv = ["closedform", "berger:m=2,s=0.5", "--theta", "0.5", "--tmax", "6"]
    code1, out1 = run_cli(capsys, *argv)
    code2, out2 = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    strip = lambda text: "\n".join(
        line for line in text.splitlines() if "generated_at" not in line
    )
    assert strip(out1) == strip(out2)


def test_out_file_written(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out = run_cli(capsys, "verify", "w7:s=0.5", "--out", str(target))
    assert code == 0
    assert out == ""
    doc = json.loads(target.read_text())
    assert doc["pass"] is True


def test_pinching_cli_single_space(capsys):
    code, out = run_cli(
        capsys, "pinching", "round:n=3,kappa=1", "--multistarts", "32", "--seed", "1"
    )
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["delta"] - 1.0) < 1e-6


def test_pinching_cli_requires_space_or_family(capsys):
    assert main(["pinching"]) == 3
