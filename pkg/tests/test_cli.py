import csv
import json
import math

import pytest

from wpa.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_report_segment(capsys):
    code, out, _ = run(capsys, "report", "--family", "segment", "--x0", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["alpha_k_closed_form"] == 1.0
    assert doc["alpha_k_limit"] == pytest.approx(1.0, abs=1e-3)
    assert "dist_minus1_paper_formula" not in doc
    for key in ("m_k_closed_form", "m_k_numeric", "solynin_bound_at_minus1", "dist_minus1_numeric"):
        assert key in doc


def test_report_disc_both_alpha_values(capsys):
    code, out, _ = run(capsys, "report", "--family", "disc", "--x0", "3")
    doc = json.loads(out)
    assert code == 0 and doc["m_k_closed_form"] == 2.0
    assert doc["alpha_k_closed_form"] == 0.2
    assert doc["alpha_k_criterion_limit_exact"] == 0.25


def test_report_arc_distances(capsys):
    code, out, _ = run(capsys, "report", "--family", "arc", "--theta0", "3.14159265")
    doc = json.loads(out)
    assert code == 0 and doc["m_k_closed_form"] is None
    assert doc["dist_minus1_paper_formula"] == pytest.approx(1.0, abs=1e-8)
    assert doc["dist_minus1_numeric"] == pytest.approx(math.sqrt(2), abs=1e-8)


def test_twelve_digits(capsys):
    _, out, _ = run(capsys, "report", "--family", "segment", "--x0", "3")
    doc = json.loads(out)
    assert doc["m_k_closed_form"] == 5.82842712475


def test_invalid_config_exit_two(capsys, tmp_path):
    assert run(capsys, "report", "--family", "disc", "--x0", "0.5")[0] == 2
    assert run(capsys, "criterion", "--family", "disc", "--x0", "2", "--alpha", "0.3")[0] == 2
    assert run(capsys, "region", "--grid", "2001")[0] == 2
    assert run(capsys, "region", "--out", str(tmp_path / "missing" / "r.csv"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"nope": 1}')
    assert run(capsys, "report", "--config", str(bad))[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["report", "--family", "square"])
    assert info.value.code == 2


def test_criterion_exit_codes(capsys):
    code, out, _ = run(capsys, "criterion", "--family", "disc", "--x0", "2", "--rho", "1.2", "--alpha", "0.5")
    doc = json.loads(out)
    assert code == 1 and doc["min_density"] < 0 and not doc["passed"]
    assert doc["threshold"] == pytest.approx(1 / 3, abs=1e-9)
    code, out, _ = run(capsys, "criterion", "--family", "disc", "--x0", "2", "--rho", "1.2", "--alpha", "0.3")
    assert code == 0 and json.loads(out)["passed"]


def test_region_counts_and_cells(capsys, tmp_path):
    out = tmp_path / "r.csv"
    svg = tmp_path / "r.svg"
    code, _, _ = run(capsys, "region", "--family", "segment", "--x0", "3", "--sigma", "1", "--tau", "2",
                     "--grid", "100", "--out", str(out), "--svg", str(svg))
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10000
    xs = sorted({float(r["x"]) for r in rows})
    ys = sorted({float(r["y"]) for r in rows})
    hx, hy = (xs[1] - xs[0]) / 2, (ys[1] - ys[0]) / 2

    def cells(z):
        return {r["member"] for r in rows
                if abs(float(r["x"]) - z.real) <= hx + 1e-12 and abs(float(r["y"]) - z.imag) <= hy + 1e-12}

    assert cells(1 + 0j) == {"1"}
    assert cells(3 + 0j) == {"0"}
    text = svg.read_text()
    assert text.startswith("<svg") and "<circle" in text


def test_region_byte_identical_across_threads(capsys, tmp_path, monkeypatch):
    blobs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("WPA_THREADS", threads)
        path = tmp_path / f"r{len(blobs)}.csv"
        assert run(capsys, "region", "--family", "arc", "--grid", "60", "--out", str(path))[0] == 0
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]


def test_json_reports_byte_identical(capsys):
    a = run(capsys, "fit", "--family", "segment", "--x0", "4", "--n", "6")
    b = run(capsys, "fit", "--family", "segment", "--x0", "4", "--n", "6")
    assert a == b and a[0] == 0


def test_fit_fail_exit_one(capsys):
    code, out, _ = run(capsys, "fit", "--family", "segment", "--x0", "4", "--n", "1", "--eps", "1e-9")
    assert code == 1 and not json.loads(out)["passed"]


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "disc", "x0": 2.0, "rho": 1.2, "alpha": 0.5}))
    assert run(capsys, "criterion", "--config", str(cfg))[0] == 1
    assert run(capsys, "criterion", "--config", str(cfg), "--alpha", "0.3")[0] == 0


def test_construct_default_instance(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _, _ = run(capsys, "construct", "--family", "segment", "--x0", "3", "--sigma", "1", "--tau", "2",
                     "--eps", "0.1", "--B", "10", "--out", str(out))
    doc = json.loads(out.read_text())
    assert code == 0 and doc["passed"]
    assert doc["certificate"]["passed"] and doc["certificate"]["n_used"] >= 5


def test_construct_shortfall_exit_one(capsys):
    code, out, _ = run(capsys, "construct", "--eps", "1e-14", "--N", "60")
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_verify_subset_and_json(capsys, tmp_path):
    path = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--only", "pi-identities", "--json", str(path))
    assert code == 0 and "PASS" in out and "[pi-identities]" in out
    doc = json.loads(path.read_text())
    assert doc["passed"] and [c["key"] for c in doc["criteria"]] == ["pi-identities"]
    assert run(capsys, "verify", "--only", "unknown")[0] == 2
