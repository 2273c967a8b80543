import os
import sys

import numpy as np
import pandas as pd
import pytest


def write_toy_panel(directory, n_assets=3, years=(2006, 2007), days_per_year=5, sectors=None, caps=None,
                    scores=None, seed=0, ids=None):
    """Write returns/esg/meta/market CSVs and return their paths."""
    rng = np.random.default_rng(seed)
    ids = ids or [f"x{j:02d}" for j in range(n_assets)]
    sectors = sectors or ["S1"] * n_assets
    caps = caps if caps is not None else list(range(1, n_assets + 1))
    dates = []
    for y in years:
        dates.extend(pd.bdate_range(f"{y}-01-02", periods=days_per_year).strftime("%Y-%m-%d"))
    ret = pd.DataFrame(rng.normal(0, 0.01, (len(dates), n_assets)), columns=ids)
    ret.insert(0, "date", dates)
    if scores is None:
        scores = rng.uniform(0, 100, (len(years), n_assets)).round(2)
    esg = pd.DataFrame(np.asarray(scores, dtype=float), columns=ids)
    esg.insert(0, "year", list(years))
    meta = pd.DataFrame({"asset_id": ids, "sector": sectors, "market_cap": caps})
    mkt = pd.DataFrame({"date": dates, "return": rng.normal(0, 0.01, len(dates))})
    paths = {}
    for name, df in (("returns", ret), ("esg", esg), ("meta", meta), ("market", mkt)):
        paths[name] = os.path.join(directory, f"{name}.csv")
        df.to_csv(paths[name], index=False, float_format="%.17g")
    return paths


@pytest.fixture
def toy_panel_files(tmp_path):
    return lambda **kw: write_toy_panel(str(tmp_path), **kw)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
