import json
import subprocess
import sys

import numpy as np
import pytest

from g2deform import algebra, cli, gallery


def small_config(**kw):
    base = dict(resolution=8, subdivisions=2)
    base.update(kw)
    return gallery.RunConfig(**base)


@pytest.mark.parametrize("name", sorted(gallery.EXAMPLES))
def test_run_example_passes_and_validates(name, tmp_path):
    config = small_config(out_dir=str(tmp_path), formats=("json", "csv"))
    report = gallery.run_example(name, config)
    assert report["example"] == name
    assert all(c["pass"] for c in report["checks"]), report["checks"]
    gallery.validate_report(report)   # schema round trip
    assert (tmp_path / f"{name}.json").exists()


def test_unknown_example_raises():
    with pytest.raises(KeyError):
        gallery.run_example("klein-bottle")


def test_report_schema_rejects_tampering():
    import jsonschema

    report = gallery.run_example("joyce-involutions", small_config())
    bad = dict(report)
    bad["schema_version"] = "0"
    with pytest.raises(jsonschema.ValidationError):
        gallery.validate_report(bad)
    bad2 = dict(report)
    bad2["extra_field"] = 1
    with pytest.raises(jsonschema.ValidationError):
        gallery.validate_report(bad2)


def test_bit_reproducible_reports_identical(tmp_path):
    cfg = small_config(bit_reproducible=True, seed=5)
    a = gallery.run_example("torus3-closed", cfg)
    b = gallery.run_example("torus3-closed", cfg)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["wall_time_ms"] == 0.0


def test_csv_spectrum_ascending(tmp_path):
    cfg = small_config(out_dir=str(tmp_path), formats=("json", "csv"))
    gallery.run_example("torus3-closed", cfg)
    lines = (tmp_path / "torus3-closed.csv").read_text().strip().splitlines()
    vals = [float(x) for x in lines]
    assert vals == sorted(vals)
    assert len(vals) == min(512, 4 * 8 ** 3)


def test_cli_example_and_exit_codes(tmp_path):
    rc = cli.main(["example", "joyce-involutions", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "joyce-involutions.json").exists()
    with pytest.raises(SystemExit) as exc:
        cli.main(["example", "not-a-name"])
    assert exc.value.code == 2   # argparse rejects unknown catalog names


def test_cli_config_file(tmp_path):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"resolution": 8, "out": str(tmp_path),
                                   "bit_reproducible": True}))
    rc = cli.main(["example", "torus3-closed", "--config", str(cfgfile)])
    assert rc == 0
    report = json.loads((tmp_path / "torus3-closed.json").read_text())
    assert report["resolution"] == [8, 8, 8]
    assert report["wall_time_ms"] == 0.0


def test_cli_bad_config_file(tmp_path):
    cfgfile = tmp_path / "broken.json"
    cfgfile.write_text("{not json")
    rc = cli.main(["example", "torus3-closed", "--config", str(cfgfile)])
    assert rc == 2


def test_cli_fault_injection(monkeypatch):
    # a cross-product table that loses antisymmetry must fail the exact
    # identity checks and surface as a nonzero exit code
    def broken_standard_phi(exact=False):
        st = algebra.standard_phi(exact=exact)
        st._cross_tensor = st._cross_tensor.copy()
        st._cross_tensor[1, 0, 2] = st._cross_tensor[0, 1, 2]
        return st

    monkeypatch.setattr(gallery, "standard_phi", broken_standard_phi)
    rc = cli.main(["verify-algebra"])
    assert rc == 1


def test_cli_parallel_examples(capsys):
    rc = cli.main(["boundary", "--parallel", "--n", "8", "--subdivisions", "2"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "ball-constant-e" in out and "ellipsoid" in out


def test_cli_entry_point_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "g2deform.cli", "example", "joyce-involutions"],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout


def test_catalog_covers_gallery():
    expected = {"torus3-closed", "strip-coassoc", "ball-constant-e", "sphere-rho",
                "ellipsoid", "cy-torus-s1", "cy-torus-perturbed", "joyce-involutions"}
    assert set(gallery.EXAMPLES) == expected
    for name in expected:
        assert name in cli.EXAMPLE_HELP


def test_strip_example_report_contents():
    report = gallery.run_example("strip-coassoc", small_config())
    assert report["dim_ker"] == 2
    assert report["dim_coker"] == 2
    assert report["index"] == 0
    assert report["residuals"]["bochner"] <= 1e-10
    assert report["residuals"]["weitzenbock"] < 1.0


def test_refine_flag_checks_stability():
    cfg = small_config(refine=1)
    report = gallery.run_example("torus3-closed", cfg)
    stability = [c for c in report["checks"] if c["name"].startswith("refinement")]
    assert stability and all(c["pass"] for c in stability)


def test_verify_all_summary_report(tmp_path):
    rc = cli.main(["verify-all", "--out", str(tmp_path), "--n", "8"])
    assert rc == 0
    summary = json.loads((tmp_path / "verify-all.json").read_text())
    gallery.validate_report(summary)
    assert len(summary["checks"]) >= 12


def test_write_report_atomic(tmp_path):
    cfg = small_config(out_dir=str(tmp_path))
    report = gallery.run_example("joyce-involutions", cfg)
    text = (tmp_path / "joyce-involutions.json").read_text()
    parsed = json.loads(text)
    assert parsed["example"] == "joyce-involutions"
    leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
    assert not leftovers
