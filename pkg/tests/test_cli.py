"""Command-line interface: exit codes, report files, determinism."""
import json
import os

import pytest
from click.testing import CliRunner

from rpcheck.cli import build_model, main
from rpcheck.errors import InvalidModelError


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


HEIS_AF = {"family": "heisenberg", "sites_per_side": 2, "spin": 0.5,
           "J": -1.0, "v": 1.0, "beta": [0.0, 0.5, 1.0]}
HEIS_F = dict(HEIS_AF, J=1.0)


def test_verify_rp_exit_zero(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["verify", "--model", cfg, "--out", out])
    assert result.exit_code == 0, result.output
    payload = json.loads(open(os.path.join(out, "verdict.json")).read())
    assert payload["status"] == "rp"
    assert payload["coupling_psd"] is True
    assert payload["agreement"] is True
    assert {"model", "zeta", "betas", "coupling_psd", "agreement", "witness"} <= set(payload)
    for entry in payload["betas"]:
        assert {"beta", "blocks"} <= set(entry)
        for block in entry["blocks"]:
            assert {"degree", "min_eig", "psd"} <= set(block)
    assert os.path.exists(os.path.join(out, "verdict_min_eigs.png"))


def test_verify_not_rp_exit_two_with_witness(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_F)
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["verify", "--model", cfg, "--out", out])
    assert result.exit_code == 2
    payload = json.loads(open(os.path.join(out, "verdict.json")).read())
    assert payload["status"] == "not-rp"
    assert payload["witness"]["found"] is True
    assert payload["witness"]["beta_star"] is not None


def test_verify_malformed_beta_exit_one(tmp_path):
    cfg = write_config(tmp_path, "m.json", dict(HEIS_AF, beta=[-1.0]))
    result = CliRunner().invoke(main, ["verify", "--model", cfg,
                                       "--out", str(tmp_path / "o")])
    assert result.exit_code == 1
    assert "beta" in result.output


def test_verify_unknown_family_exit_one(tmp_path):
    cfg = write_config(tmp_path, "m.json", {"family": "nope"})
    result = CliRunner().invoke(main, ["verify", "--model", cfg,
                                       "--out", str(tmp_path / "o")])
    assert result.exit_code == 1
    assert "family" in result.output


def test_verify_beta_flag_overrides(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["verify", "--model", cfg, "--out", out,
                                       "--beta", "0,0.25"])
    assert result.exit_code == 0
    payload = json.loads(open(os.path.join(out, "verdict.json")).read())
    assert [e["beta"] for e in payload["betas"]] == [0.0, 0.25]


def test_verify_csv_format(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["verify", "--model", cfg, "--out", out,
                                       "--format", "csv"])
    assert result.exit_code == 0
    lines = open(os.path.join(out, "verdict.csv")).read().strip().splitlines()
    assert lines[0] == "beta,degree,min_eig,psd,hermiticity_dev"
    assert len(lines) == 4  # three betas, one degree block each


def test_json_reports_byte_identical(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    outs = []
    for tag in ("a", "b"):
        out = str(tmp_path / tag)
        result = CliRunner().invoke(main, ["verify", "--model", cfg, "--out", out])
        assert result.exit_code == 0
        outs.append(open(os.path.join(out, "verdict.json"), "rb").read())
    assert outs[0] == outs[1]


def test_couplings_outputs(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["couplings", "--model", cfg, "--out", out])
    assert result.exit_code == 0
    payload = json.loads(open(os.path.join(out, "couplings.json")).read())
    assert payload["identity_index"] == 0
    assert any(r["is_identity"] for r in payload["indices"])
    assert min(payload["cross_plane_spectrum"]) > -1e-9
    csv_lines = open(os.path.join(out, "couplings.csv")).read().splitlines()
    assert csv_lines[0].startswith("row,col,row_label")
    assert os.path.exists(os.path.join(out, "coupling_spectrum.png"))


def test_couplings_non_factorizing_exit_one(tmp_path):
    cfg = write_config(tmp_path, "m.json", {
        "family": "nearest_neighbor",
        "lattice": {"sites_per_side": 1, "include_origin": True},
        "points": [1, -1], "weights": [0.5, 0.5],
        "bonds": [{"pair": [0, 1], "values": [[0.5, 0.1], [0.1, -0.3]]},
                  {"pair": [0, -1], "values": [[0.5, 0.1], [0.1, -0.3]]}],
        "beta": [0.1, 1.0]})
    result = CliRunner().invoke(main, ["couplings", "--model", cfg,
                                       "--out", str(tmp_path / "o")])
    assert result.exit_code == 1
    assert "factoriz" in result.output


def test_hilbert_report(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["hilbert", "--model", cfg, "--out", out,
                                       "--beta", "0.5"])
    assert result.exit_code == 0
    payload = json.loads(open(os.path.join(out, "hilbert.json")).read())
    entry = payload["betas"][0]
    assert entry["sum_rule"] is True
    assert entry["total_dim"] + entry["null_dim"] == entry["plus_dim"]


def test_hilbert_non_rp_exit_two(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_F)
    result = CliRunner().invoke(main, ["hilbert", "--model", cfg,
                                       "--out", str(tmp_path / "o"), "--beta", "1.0"])
    assert result.exit_code == 2


def test_props_smoke(tmp_path):
    out = str(tmp_path / "out")
    result = CliRunner().invoke(main, ["props", "--seed", "1", "--trials", "2",
                                       "--out", out])
    assert result.exit_code == 0, result.output
    payload = json.loads(open(os.path.join(out, "props.json")).read())
    assert payload["all_pass"] is True
    assert set(payload["families"]) >= {"clifford", "grassmann", "parafermion",
                                        "spin", "gauge", "control"}
    for fam in payload["families"].values():
        assert fam["checks"] > 0


def test_build_model_families(tmp_path):
    run = build_model({"family": "wilson", "group": "Z2", "extents": [2, 2],
                       "g0": 1.0})
    assert run.double.family == "gauge"
    run2 = build_model({"family": "parafermion_chain", "p": 3, "sites_per_side": 1,
                        "preset": {"kind": "degree_identity", "degree": 1}})
    assert run2.double.family == "parafermion"
    run3 = build_model({"family": "fermion",
                        "lattice": {"sites_per_side": 1},
                        "quadratic": [{"generators": [[-0.5, 0], [0.5, 0]],
                                       "value": [0.0, -0.8]}]})
    assert run3.double.family == "clifford"
    with pytest.raises(InvalidModelError):
        build_model({"family": "wilson", "group": "SU9"})


def test_zeta_flag_parse_error(tmp_path):
    cfg = write_config(tmp_path, "m.json", HEIS_AF)
    result = CliRunner().invoke(main, ["verify", "--model", cfg,
                                       "--out", str(tmp_path / "o"),
                                       "--zeta", "bogus"])
    assert result.exit_code == 1
    assert "zeta" in result.output
