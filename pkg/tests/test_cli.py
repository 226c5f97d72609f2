import json

import pytest

from embcom.cli import main
from embcom.config import load_config


SMALL_SIM = ["--set", "scene.snr_db=20", "--set", "sim.trials_per_codeword=300"]


def run(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


def test_unknown_key_rejected(tmp_path):
    assert run(tmp_path, "--set", "scene.bogus=1", "field") == 1
    assert run(tmp_path, "--set", "nosection.x=1", "field") == 1
    assert run(tmp_path, "--set", "scene.snapshots=oops", "field") == 1


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "nosuchcommand")
    assert exc.value.code == 1


def test_out_of_domain_value_rejected(tmp_path):
    assert run(tmp_path, "--set", "scene.distance_m=-5", "field") == 1
    assert run(tmp_path, "--set", "design.epsilon=2", "codebook") == 1


def test_conflicting_snr_keys_rejected(tmp_path):
    assert run(tmp_path, "--set", "scene.snr_db=10",
               "--set", "scene.snr_gamma0=10", "field") == 1


def test_empty_field_grid_rejected(tmp_path):
    assert run(tmp_path, "--set", "field.grid_points=1", "field") == 1


def test_config_file_parsing(tmp_path):
    cfg_file = tmp_path / "run.ini"
    cfg_file.write_text("[scene]\nsnr_db = 20\nsnapshots = 4\n")
    cfg = load_config(str(cfg_file))
    assert cfg.scene.snr_gamma0 == pytest.approx(100.0)
    assert cfg.scene.snapshots_l == 4
    bad = tmp_path / "bad.ini"
    bad.write_text("[scene]\nunknown_key = 3\n")
    with pytest.raises(ValueError):
        load_config(str(bad))
    with pytest.raises(OSError):
        load_config(str(tmp_path / "missing.ini"))


def test_field_outputs_and_headers(tmp_path):
    assert run(tmp_path, "--set", "field.grid_points=9",
               "--set", "field.profile_points=12", "field") == 0
    grid = (tmp_path / "field_grid.csv").read_text()
    assert grid.startswith("# array.m_y = 64\n")
    header = [l for l in grid.splitlines() if not l.startswith("#")][0]
    assert header == "dy,dz,b_exact,b_quadratic"
    rows = [l for l in grid.splitlines() if not l.startswith(("#", "dy"))]
    assert len(rows) == 81
    prof = (tmp_path / "field_profile.csv").read_text()
    assert "psi_rad,b_exact" in prof


def test_field_rerun_byte_identical(tmp_path):
    args = ["--set", "field.grid_points=9", "--set", "field.profile_points=12",
            "field"]
    assert run(tmp_path, *args) == 0
    first = (tmp_path / "field_grid.csv").read_bytes()
    assert run(tmp_path, *args) == 0
    assert (tmp_path / "field_grid.csv").read_bytes() == first


def test_codebook_design_and_verify_roundtrip(tmp_path):
    assert run(tmp_path, "--set", "scene.snr_db=20", "codebook") == 0
    manifest = json.loads((tmp_path / "design_manifest.json").read_text())
    assert manifest["feasible"] is True
    assert manifest["j"] >= 2
    assert manifest["greedy_j"] >= 1
    assert manifest["verification_passed"] is True
    # re-verify the emitted CSV through the import path
    assert run(tmp_path, "--set", "scene.snr_db=20", "codebook",
               "--verify", str(tmp_path / "codebook.csv")) == 0
    verified = json.loads((tmp_path / "design_manifest.json").read_text())
    assert verified["mode"] == "verify"
    assert verified["j"] == manifest["j"]
    assert verified["feasible"] is True


def test_codebook_asymmetric_array_manifest(tmp_path):
    # 64x32 array with enough snapshots for a two-dimensional lattice: the
    # manifest must record the denser spacing along the finer-resolution axis
    assert run(tmp_path, "--set", "array.m_z=32", "--set", "scene.snr_db=20",
               "--set", "scene.snapshots=20", "codebook") == 0
    manifest = json.loads((tmp_path / "design_manifest.json").read_text())
    assert manifest["j"] >= 5
    assert manifest["denser_along_finer_axis"] is True
    assert manifest["nn_gap_y_m"] < manifest["nn_gap_z_m"]


def test_simulate_gate_and_negative_control(tmp_path):
    assert run(tmp_path, *SMALL_SIM, "--seed", "5", "simulate") == 0
    rep = json.loads((tmp_path / "sim_report.json").read_text())
    assert rep["bound_violations"] == []
    assert (tmp_path / "sim_pairwise.csv").exists()
    # deliberately corrupted bound must trip the gate
    assert run(tmp_path, *SMALL_SIM, "--seed", "5", "simulate",
               "--self-test-corrupt") == 2


def test_simulate_rejects_singleton_design(tmp_path):
    # at 0 dB the design collapses to one codeword: validation error
    assert run(tmp_path, "--set", "scene.snr_db=0", "simulate") == 1


def test_sweep_and_lstar_outputs(tmp_path):
    assert run(tmp_path, "--set", "sweep.snr_db_list=10,20",
               "--set", "sweep.l_list=1,5,14", "sweep") == 0
    text = (tmp_path / "rate_sweep.csv").read_text()
    rows = [l.split(",") for l in text.splitlines()
            if l and not l.startswith(("#", "gamma0_db"))]
    assert len(rows) == 6
    cols = [l for l in text.splitlines() if l.startswith("gamma0_db")][0]
    assert cols.split(",") == ["gamma0_db", "gamma0", "l", "j_hex",
                               "rate_bits_per_pulse", "rate_bits_per_second",
                               "feasible", "c_info_universal", "c_geo",
                               "sandwich_ok", "monotone_snr_ok"]
    assert all(r[-2] == "1" for r in rows)  # sandwich holds on every row
    assert all(r[-1] == "1" for r in rows)  # rate monotone in SNR per L
    assert (tmp_path / "lstar.csv").exists()


def test_bounds_csv(tmp_path):
    assert run(tmp_path, "--set", "sweep.snr_db_list=20",
               "--set", "sweep.l_list=5", "--set", "solver.support_grid_n=11",
               "--set", "solver.dnec_rays=90", "bounds") == 0
    text = (tmp_path / "bounds.csv").read_text()
    header = [l for l in text.splitlines() if l.startswith("gamma0_db")][0]
    assert header.split(",") == ["gamma0_db", "gamma0", "l", "rate_lower",
                                 "c_info_universal", "c_info_support_grid",
                                 "c_geo", "c_geo_mainlobe", "d_nec",
                                 "l_star_cont", "l_star_int"]
    row = [l for l in text.splitlines()
           if l and not l.startswith(("#", "gamma0_db"))][0].split(",")
    rate, univ, sup, geo = (float(row[3]), float(row[4]), float(row[5]),
                            float(row[6]))
    assert rate <= univ and rate <= geo and sup <= univ


def test_lstar_command(tmp_path):
    assert run(tmp_path, "--set", "sweep.snr_db_list=15,20", "lstar") == 0
    text = (tmp_path / "lstar.csv").read_text()
    rows = [l for l in text.splitlines()
            if l and not l.startswith(("#", "gamma0_db"))]
    assert len(rows) == 2


def test_seed_flag_overrides(tmp_path):
    cfg = load_config(None, [], None, 777)
    assert cfg.get("sim", "seed") == 777
