import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frachardy import BumpSpec, Interval, sample_bump
from frachardy.cli import RunConfig, main

INTERVAL = '{"type":"interval","a":0,"b":1}'
SQUARE = '{"type":"box","lo":[0,0],"hi":[1,1]}'
HALFPLANE = '{"type":"halfspace","normal":[0,1],"offset":0}'


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_no_arguments_prints_usage():
    code, _, err = run()
    assert code == 2 and "usage" in err


def test_unknown_flag_is_usage_error():
    assert run("constants", "--n", "1", "--alpha", "1.5", "--bogus")[0] == 2


def test_constants_kappa_zero():
    code, out, _ = run("constants", "--n", "1", "--alpha", "1")
    assert code == 0
    assert json.loads(out.splitlines()[0])["kappa"] == 0.0


def test_constants_show_two_kappa():
    code, out, _ = run("constants", "--n", "2", "--alpha", "1.5", "--p", "2")
    table = json.loads(out.splitlines()[0])
    assert code == 0
    assert table["fs_constant"] == pytest.approx(table["two_kappa"], rel=1e-9)
    assert "fs_constant" in out.splitlines()[-2] or "two_kappa" in out


def test_constants_window_violation():
    assert run("constants", "--n", "1", "--alpha", "2.5")[0] == 2


def _weight_rows(text):
    lines = text.splitlines()
    assert lines[0] == "# frachardy-weight schema_version=1"
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def test_weight_halfspace_columns():
    code, out, _ = run("weight", "--domain", HALFPLANE, "--alpha", "1.5", "--h", "0.25",
                       "--window", "-1", "0", "1", "2")
    assert code == 0
    cols = _weight_rows(out)
    assert cols["inv_M_alpha"] == pytest.approx(cols["d"] ** -1.5, rel=1e-4)


def test_weight_square_bound_every_row(tmp_path):
    path = tmp_path / "w.csv"
    code, _, _ = run("weight", "--domain", SQUARE, "--alpha", "1.25", "--h", "0.05", "--out", str(path))
    assert code == 0
    cols = _weight_rows(path.read_text())
    assert len(cols["d"]) >= 200
    assert np.all(cols["inv_M_alpha"] >= cols["convex_bound"] * (1 - 1e-6))


def test_weight_errors():
    empty = ('{"type":"polytope","interior_point":[0,0],"halfspaces":'
             '[{"normal":[1,0],"offset":0},{"normal":[-1,0],"offset":0}]}')
    code, _, err = run("weight", "--domain", empty, "--alpha", "1.5")
    assert code == 2 and "interior" in err
    assert run("weight", "--domain", HALFPLANE, "--alpha", "1.5")[0] == 2
    assert run("weight", "--domain", "{not json", "--alpha", "1.5")[0] == 2
    assert run("weight", "--domain", SQUARE, "--alpha", "1.5", "--h", "1e-4")[0] == 2


def test_verify_interval_passes(tmp_path):
    out = tmp_path / "rep"
    code, text, _ = run("verify", "--domain", INTERVAL, "--alpha", "1.5", "--kind",
                        "one_d_two_sided", "--out", str(out))
    assert code == 0
    lines = (tmp_path / "rep.jsonl").read_text().splitlines()
    assert len(lines) == 3 and all(json.loads(l)["passed"] for l in lines)
    assert (tmp_path / "rep.csv").read_text().startswith("schema_version,kind")
    config = (tmp_path / "rep.config.json").read_text().strip()
    assert RunConfig.from_json(config).to_json() == config


def test_verify_negative_control(tmp_path):
    code, _, _ = run("verify", "--family", "sharpness", "--alpha", "1.5", "--kind", "half_line",
                     "--constant-scale", "1.1", "--out", str(tmp_path / "neg"))
    assert code == 1


def test_verify_alpha_one_refused(tmp_path):
    code, _, err = run("verify", "--domain", INTERVAL, "--alpha", "1", "--kind", "one_d_two_sided",
                       "--out", str(tmp_path / "x"))
    assert code == 2 and "vacuous" in err


def test_verify_kind_mismatch(tmp_path):
    code, _, _ = run("verify", "--domain", SQUARE, "--alpha", "1.5", "--kind", "one_d_two_sided",
                     "--out", str(tmp_path / "x"))
    assert code == 2


def test_verify_custom_families(tmp_path):
    bumps = '[{"center":[0.5],"radius":0.4},[{"center":[0.3],"radius":0.2},{"center":[0.7],"radius":0.2,"amplitude":-1}]]'
    code, _, _ = run("verify", "--domain", INTERVAL, "--alpha", "1.5", "--kind", "one_d_two_sided",
                     "--family", bumps, "--h", "0.01", "--out", str(tmp_path / "b"))
    assert code == 0
    f = sample_bump(BumpSpec([0.5], 0.4), Interval(0, 1), 1 / 64)
    for name, payload in (("f.csv", None), ("f.bin", f.to_bytes())):
        path = tmp_path / name
        if payload is None:
            f.to_csv(path)
        else:
            path.write_bytes(payload)
        code, _, _ = run("verify", "--domain", INTERVAL, "--alpha", "1.5", "--p", "3",
                         "--kind", "min_dist", "--family", str(path), "--out", str(tmp_path / "g"))
        assert code == 0


def test_selftest_tampered_constant_fails():
    code, out, _ = run("selftest", "--criteria", "9", "--constant-scale", "1.1")
    assert code == 1 and "FAIL" in out


def test_selftest_subset_passes(tmp_path):
    path = tmp_path / "st.json"
    code, out, _ = run("selftest", "--criteria", "1", "3", "--out", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert [d["number"] for d in data] == [1, 3] and all(d["passed"] for d in data)


configs = st.builds(
    RunConfig,
    command=st.sampled_from(["constants", "weight", "verify", "selftest"]),
    domain=st.sampled_from([None, {"type": "interval", "a": 0.0, "b": 1.0}]),
    n=st.one_of(st.none(), st.integers(1, 4)),
    alpha=st.one_of(st.none(), st.floats(1.01, 1.99)),
    p=st.one_of(st.none(), st.floats(1.5, 4.0)),
    h=st.one_of(st.none(), st.floats(1e-4, 0.5)),
    kind=st.one_of(st.none(), st.sampled_from(["m_alpha", "dist"])),
    tol=st.floats(0.0, 0.1),
    workers=st.integers(1, 8),
    criteria=st.one_of(st.none(), st.lists(st.integers(1, 12), max_size=3)),
)


@given(configs)
def test_run_config_round_trip(config):
    text = config.to_json()
    again = RunConfig.from_json(text)
    assert again == config
    assert again.to_json() == text


def test_run_config_rejects_unknown_fields():
    with pytest.raises(ValueError):
        RunConfig.from_json('{"command":"verify","colour":"red"}')
