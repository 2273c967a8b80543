import json
import os
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

from conftest import write_toy_panel
from esgvine.cli import EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_OK, main
from esgvine.config import load_config, write_config

SECTORS = [f"S{j // 4}" for j in range(16)]
PERIODS = [("2006-2007", 2006, 2007)]


def make_run(directory, scores=None, catalogs="itau", mode="quartile", days=150, seed=0, **model):
    os.makedirs(directory, exist_ok=True)
    if scores is None:
        # within each sector of four the ranking is fixed: one asset per class
        base = np.tile([10.0, 30.0, 60.0, 90.0], 4) + np.arange(16) * 0.1
        scores = [base, base + 1.0]
    paths = write_toy_panel(str(directory), n_assets=16, years=(2006, 2007), days_per_year=days,
                            sectors=SECTORS, caps=list(np.arange(1, 17) * 10.0), scores=scores, seed=seed)
    cfg = os.path.join(str(directory), "config.ini")
    write_config(cfg, {k: os.path.basename(v) for k, v in paths.items()}, PERIODS, output="out",
                 catalogs=catalogs, classification_mode=mode, **model)
    return cfg, paths


def out(cfg, name):
    return os.path.join(os.path.dirname(cfg), "out", name)


@pytest.fixture(scope="module")
def fitted_run(tmp_path_factory):
    cfg, paths = make_run(tmp_path_factory.mktemp("run"), catalogs="itau, gaussian")
    for cmd in ("classify", "fit", "risk", "report"):
        assert main([cmd, "--config", cfg]) == EXIT_OK
    return cfg, paths


def test_classify_outputs(fitted_run):
    cfg, _ = fitted_run
    sizes = pd.read_csv(out(cfg, "class_sizes.csv"), comment="#")
    assert sizes.loc[0, ["A", "B", "C", "D"]].tolist() == [4, 4, 4, 4]
    classes = pd.read_csv(out(cfg, "classes.csv"), comment="#")
    assert (classes.groupby("sector")["class"].apply(lambda s: "".join(sorted(s))) == "ABCD").all()
    weights = pd.read_csv(out(cfg, "weights.csv"), comment="#")
    assert weights.groupby("class")["weight"].sum().tolist() == pytest.approx([1, 1, 1, 1], abs=1e-12)
    idx = pd.read_csv(out(cfg, "indices.csv"), comment="#")
    assert list(idx.columns) == ["date", "period", "I_A", "I_B", "I_C", "I_D", "I_M"] and len(idx) == 300
    for name in ("var_table.csv", "esg_dist.csv"):
        assert open(out(cfg, name)).readline().startswith("# config_digest: ")


def test_fit_outputs(fitted_run):
    cfg, _ = fitted_run
    comp = pd.read_csv(out(cfg, "comparison.csv"), comment="#", dtype={"logLik": str, "mBIC": str})
    assert list(comp.columns[:6]) == ["model", "year", "nobs", "logLik", "npars", "mBIC"]
    assert set(comp["model"]) == {"itau", "gaus"} and comp["nobs"].eq(300).all()
    assert all(len(v.split(".")[1]) == 2 for v in comp["logLik"])
    lines = open(out(cfg, "census_tree1.csv")).read().splitlines()
    assert lines[1] == "Copula Family & Rotation,Itau Copula Families,Gaussian Copula Families"
    assert lines[2] == "Year,2006-2007,2006-2007"
    body = {l.split(",")[0]: l.split(",")[1:] for l in lines[3:]}
    assert int(body["Gaussian"][1]) == 20
    assert sum(int(v[0]) for v in body.values()) == 20
    for cat in ("itau", "gaussian"):
        assert os.path.exists(out(cfg, f"archives/2006-2007__{cat}.json"))


def test_risk_and_report_outputs(fitted_run):
    cfg, _ = fitted_run
    lines = open(out(cfg, "aggregate.csv")).read().splitlines()
    assert lines[1].startswith("Type of Risk,ESG Risk")
    assert lines[2] == "Year," + ",".join("ABCD" * 3)
    rr = pd.read_csv(out(cfg, "riskreport.csv"), comment="#")
    assert len(rr) == 16
    total = rr["r_esg_tau"] + rr["r_market_tau"] + rr["r_idio_tau"]
    assert np.allclose(total[~rr["degenerate_tau"]], 1.0)
    for name in ("aggregate_std.csv", "aggregate_emp.csv", "aggregate_lambda.csv",
                 "aggregate_lambda_nozeros.csv", "boxplot.csv", "risk_models.csv"):
        assert os.path.exists(out(cfg, name))
    report = open(out(cfg, "report.md")).read()
    assert "## Model comparison (mBIC)" in report and "2006-2007 &" in report


def test_rerun_is_byte_identical(fitted_run, tmp_path):
    cfg, _ = fitted_run
    assert main(["fit", "--config", cfg, "--output", str(tmp_path), "--workers", "2"]) == EXIT_OK
    for name in ("comparison.csv", "census_tree3.csv", "archives/2006-2007__itau.json"):
        assert open(out(cfg, name), "rb").read() == open(tmp_path / name, "rb").read()


def test_digest_refusal(fitted_run, tmp_path):
    cfg, paths = fitted_run
    tampered = tmp_path / "returns.csv"
    df = pd.read_csv(paths["returns"])
    df.iloc[5, 3] += 0.001
    df.to_csv(tampered, index=False, float_format="%.17g")
    text = open(cfg).read().replace("returns = returns.csv", f"returns = {tampered}")
    text = text.replace("directory = out", f"directory = {os.path.dirname(out(cfg, 'x'))}")
    alt = tmp_path / "config.ini"
    alt.write_text(text)
    assert load_config(alt).returns == str(tampered)
    assert main(["risk", "--config", str(alt)]) == EXIT_DATA


def test_all_independence_archive_gives_degenerate_rows(fitted_run, tmp_path):
    cfg, _ = fitted_run
    import shutil
    shutil.copytree(os.path.dirname(out(cfg, "x")), tmp_path / "o")
    arch = tmp_path / "o" / "archives" / "2006-2007__itau.json"
    d = json.loads(arch.read_text())
    for tree in d["vine"]["trees"]:
        for it in tree:
            it["family"], it["params"] = "independence@0", []
    arch.write_text(json.dumps(d))
    os.remove(tmp_path / "o" / "archives" / "2006-2007__gaussian.json")
    assert main(["risk", "--config", cfg, "--output", str(tmp_path / "o")]) == EXIT_OK
    rr = pd.read_csv(tmp_path / "o" / "riskreport.csv", comment="#")
    assert rr["degenerate_tau"].all() and rr["degenerate_lambda"].all()
    lines = (tmp_path / "o" / "aggregate.csv").read_text().splitlines()
    assert lines[3] == "2006-2007" + "," * 12


def test_threshold_mode_flags_empty_classes(tmp_path, capsys):
    low = np.random.default_rng(1).uniform(0, 24, (2, 16)).round(2)
    cfg, _ = make_run(tmp_path, scores=low, mode="threshold")
    assert main(["classify", "--config", cfg]) == EXIT_OK
    sizes = pd.read_csv(out(cfg, "class_sizes.csv"), comment="#")
    assert sizes.loc[0, ["A", "B", "C", "D"]].tolist() == [0, 0, 0, 16]
    assert sizes.loc[0, "empty_classes"] == "A B C"
    assert main(["fit", "--config", cfg]) == EXIT_DATA
    assert "empty" in capsys.readouterr().err


def test_exit_code_config(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nseed = 1\n")
    assert main(["classify", "--config", str(bad)]) == EXIT_CONFIG
    assert "[data]" in capsys.readouterr().err
    cfg, _ = make_run(tmp_path / "r", psi0=1.5)
    assert main(["classify", "--config", cfg]) == EXIT_CONFIG
    cfg, _ = make_run(tmp_path / "r2")
    assert main(["fit", "--config", cfg, "--catalog", "vinecop"]) == EXIT_CONFIG


def test_exit_code_data(tmp_path, capsys):
    scores = [[50.0] * 16, [50.0] * 15 + [101.0]]
    cfg, _ = make_run(tmp_path, scores=scores)
    assert main(["classify", "--config", cfg]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "x15" in err and "2007" in err


def test_exit_code_numeric(tmp_path, capsys):
    cfg, paths = make_run(tmp_path)
    df = pd.read_csv(paths["returns"])
    df["x03"] = 0.001
    df.to_csv(paths["returns"], index=False, float_format="%.17g")
    assert main(["fit", "--config", cfg]) == EXIT_NUMERIC
    assert "x03" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "esgvine", "init-sim", str(tmp_path / "sim")],
                       capture_output=True, text=True, check=True)
    assert r.stdout.strip().endswith("config.ini")
    assert load_config(r.stdout.strip()).truth.endswith("truth.json")
    r = subprocess.run([sys.executable, "-m", "esgvine", "--help"], capture_output=True, text=True)
    for cmd in ("classify", "fit", "risk", "simulate", "report"):
        assert cmd in r.stdout
