import json

import numpy as np
import pytest
import yaml

from polychain.cli import main
from polychain.config import DEFAULTS, ExperimentConfig, build_chain, chain_from_flag, load_config
from polychain.errors import ConfigurationError


def test_defaults_and_hash_stable():
    a, b = ExperimentConfig(), ExperimentConfig()
    assert a.hash() == b.hash()
    assert a.get("disc_nt") == DEFAULTS["disc_nt"]
    assert ExperimentConfig(nu=2).hash() != a.hash()


@pytest.mark.parametrize("bad", [dict(nt=100), dict(samples=64, band=40), dict(tol=0.0), dict(params={"zzz": 1}),
                                 dict(chain={"kind": "spiral"})])
def test_validation(bad):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(**bad)


def test_load_yaml_with_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"function": "abs2", "nu": 1, "disc_nt": 256, "chain": {"kind": "mixed"}}))
    cfg = load_config(path, nt=128)
    assert cfg.function == "abs2" and cfg.nt == 128 and cfg.get("disc_nt") == 256
    assert build_chain(cfg.chain).kind == "mixed"
    path.write_text("bogus: 1\n")
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_chain_flags():
    for name in ("hyperbolic", "horicycle", "mixed", "linear", "segment"):
        assert build_chain(chain_from_flag(name)).kind == name
    with pytest.raises(ConfigurationError):
        chain_from_flag("nope")


def test_custom_chain_table(tmp_path):
    path = tmp_path / "chain.csv"
    ts = np.linspace(0, 1, 11)
    rows = np.column_stack([ts, ts, 0 * ts, 0.2 * np.sin(np.pi * ts)])
    np.savetxt(path, rows, delimiter=",", header="t,re_c,im_c,r", comments="")
    ch = build_chain({"kind": "custom", "table": str(path)})
    assert abs(ch.center_fn(0.5) - 0.5) < 1e-9


def _json(path):
    return json.loads(path.read_text())


def test_cli_discriminant(tmp_path):
    out = tmp_path / "d"
    assert main(["discriminant", "--chain", "mixed", "--nt", "256", "--out", str(out)]) == 0
    v = _json(out / "verdict.json")
    assert v["condition_star"] and v["n_components"] == 2 and len(v["config_hash"]) == 16
    assert (out / "cloud.csv").read_text().startswith("t,re_s,im_s,abs_w,component_id")
    assert (out / "discriminant.svg").read_text().startswith("<svg")
    assert main(["discriminant", "--chain", "segment", "--nt", "512", "--out", str(out)]) == 2


def test_cli_moment_test(tmp_path):
    out = tmp_path / "m"
    assert main(["moment-test", "--function", "conj", "--nu", "1", "--nt", "32", "--samples", "256",
                 "--out", str(out)]) == 0
    assert main(["moment-test", "--function", "conj", "--nu", "0", "--nt", "32", "--samples", "256",
                 "--out", str(out)]) == 2
    header = (out / "moments.csv").read_text().splitlines()[0]
    assert header == "t,m,abs_moment"
    assert _json(out / "summary.json")["seed"] == 0


def test_cli_track(tmp_path):
    out = tmp_path / "t"
    assert main(["track", "--function", "conj_sq", "--nu", "2", "--chain", "linear", "--nt", "128",
                 "--out", str(out)]) == 0
    s = _json(out / "summary.json")
    assert (s["N_g"], s["M_g"]) == (2, 2)
    assert (out / "branches.csv").read_text().startswith("branch_id,kind,t,re_z,im_z,multiplicity,traveling")
    assert main(["track", "--function", "exp_conj", "--nu", "1", "--nt", "32", "--out", str(out)]) == 2


def test_cli_verify(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--function", "conj", "--nu", "1", "--nt", "64", "--out", str(out)]) == 0
    s = _json(out / "summary.json")
    assert s["order_detect"]["order"] == 1
    assert (out / "decomposition.json").exists()
    assert main(["verify", "--function", "exp_conj", "--nu", "3", "--nt", "64", "--out", str(out)]) == 2


def test_cli_iq(tmp_path):
    out = tmp_path / "i"
    assert main(["iq", "--function", "conj", "--nt", "64", "--ntheta", "64", "--out", str(out)]) == 0
    b = _json(out / "balance.json")
    assert len(b["balance"]) == 4 and "config_hash" in b


def test_cli_errors(tmp_path, capsys):
    assert main(["moment-test", "--function", "nope", "--out", str(tmp_path)]) == 1
    assert main(["moment-test", "--nt", "100", "--out", str(tmp_path)]) == 1
    assert main(["list-functions"]) == 0
    assert "exp_conj" in capsys.readouterr().out


def test_cli_is_deterministic(tmp_path):
    for k in (1, 2):
        main(["verify", "--function", "abs2", "--nu", "1", "--nt", "32", "--out", str(tmp_path / str(k))])
    a, b = (_json(tmp_path / str(k) / "summary.json") for k in (1, 2))
    assert a.pop("config")["out"] != b.pop("config")["out"]
    assert a == b
