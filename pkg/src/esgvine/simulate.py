"""Synthetic panels with a known vine and known GARCH margins.

A truth file (JSON) describes the generator::

    {
      "seed": 7,
      "start_year": 2006,
      "periods": [["p1", 2006, 2008], ["p2", 2009, 2010]],
      "days_per_year": 250,
      "assets_per_class": 2,
      "garch": {"gamma0": 0.02, "gamma1": 0.06, "beta1": 0.90, "nu": 6.0},
      "asset_edges": [{"family": "clayton@0", "params": [2.0]}, ... five entries, tree 1 to 5],
      "index_edges": {"I_A,I_M": {"family": "student_t@0", "params": [0.7, 5.0]}, ... ten entries}
    }

Every truth asset uses the same five edge copulas (by tree). Class
indices and the market come straight from the vine sample.

To make the class indices computed from the panel coincide with the
sampled ones, each class also gets one balancing asset (sector ``BAL``)
whose return closes the cap-weighted sum. Truth assets sit in sectors of
four (one per class) with ESG scores that place them in their class
under both the quartile and the threshold rule.
"""
import json
import os

import numpy as np
import pandas as pd

from .copula.pair import PairCopula
from .marginals import MarginalFit, simulate_garch_t
from .panel import CLASSES, PeriodSpec
from .store import ModelArchive
from .vine import INDEX, MARKET, build_structure, model_from_copulas, sample_vine

SCORE_BANDS = {"A": (80.0, 95.0), "B": (55.0, 70.0), "C": (30.0, 45.0), "D": (10.0, 20.0)}
BALANCE_SCORES = {"A": 85.0, "B": 60.0, "C": 35.0, "D": 10.0}
BALANCE_SECTOR = "BAL"


class TruthError(ValueError):
    """Malformed truth file."""


def default_truth():
    """A small generator setup with Clayton asset edges in tree 1."""
    t = lambda r, nu=6.0: {"family": "student_t@0", "params": [r, nu]}  # noqa: E731
    return {
        "seed": 7,
        "start_year": 2006,
        "periods": [["2006-2008", 2006, 2008], ["2009-2010", 2009, 2010]],
        "days_per_year": 250,
        "assets_per_class": 2,
        "garch": {"gamma0": 0.02, "gamma1": 0.06, "beta1": 0.90, "nu": 6.0},
        "asset_edges": [{"family": "clayton@0", "params": [2.0]},
                        {"family": "gumbel@0", "params": [1.5]},
                        {"family": "frank@0", "params": [2.0]},
                        {"family": "gaussian@0", "params": [0.2]},
                        {"family": "clayton@180", "params": [0.4]}],
        "index_edges": {"I_A,I_M": t(0.8), "I_B,I_M": t(0.75), "I_C,I_M": t(0.7), "I_D,I_M": t(0.65),
                        "I_A,I_B|I_M": t(0.4), "I_B,I_C|I_M": t(0.35), "I_C,I_D|I_M": t(0.3),
                        "I_A,I_C|I_M,I_B": {"family": "gaussian@0", "params": [0.2]},
                        "I_B,I_D|I_M,I_C": {"family": "gaussian@0", "params": [0.15]},
                        "I_A,I_D|I_M,I_B,I_C": {"family": "frank@0", "params": [1.0]}},
    }


def load_truth(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise TruthError(f"truth file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise TruthError(f"truth file {path} is not valid JSON: {exc}") from None


def truth_model(truth):
    """The truth vine over truth assets, class indices and the market."""
    try:
        n_per = int(truth["assets_per_class"])
        asset_specs = truth["asset_edges"]
        index_specs = truth["index_edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise TruthError(f"truth file lacks field {exc}") from None
    if n_per < 1:
        raise TruthError("assets_per_class must be >= 1")
    if len(asset_specs) != 5:
        raise TruthError("asset_edges needs exactly five entries (trees 1 to 5)")
    membership = {_truth_id(k, i): k for k in CLASSES for i in range(n_per)}
    structure = build_structure(membership)
    copulas = {}
    try:
        for e in structure.edges:
            if e.a in membership:
                spec = asset_specs[e.tree - 1]
            else:
                spec = index_specs[str(e)]
            copulas[e] = PairCopula(spec["family"], tuple(spec["params"]))
    except KeyError as exc:
        raise TruthError(f"index_edges lacks an entry for edge {exc}") from None
    except ValueError as exc:
        raise TruthError(f"invalid edge copula: {exc}") from None
    return model_from_copulas(structure, copulas)


def _truth_id(k, i):
    return f"{k.lower()}{i + 1:03d}"


def _dates(periods, days_per_year):
    out = []
    for _, y0, y1 in periods:
        for y in range(int(y0), int(y1) + 1):
            days = pd.bdate_range(f"{y}-01-01", f"{y}-12-31")
            if len(days) < days_per_year:
                raise TruthError(f"days_per_year {days_per_year} exceeds the business days of {y}")
            out.extend(days[:days_per_year])
    return pd.DatetimeIndex(out)


def simulate_panel(truth, directory):
    """Write ``returns.csv``, ``esg.csv``, ``meta.csv``, ``market.csv`` and
    ``config.ini`` into ``directory``; return (paths dict, truth model).
    """
    os.makedirs(directory, exist_ok=True)
    periods = [tuple(p) for p in truth.get("periods", [])]
    if not periods:
        raise TruthError("truth file needs a non-empty periods list")
    try:
        PeriodSpec(periods)
    except ValueError as exc:
        raise TruthError(f"periods: {exc}") from None
    dpy = int(truth.get("days_per_year", 250))
    dates = _dates(periods, dpy)
    n = len(dates)
    seed = int(truth.get("seed", 0))
    model = truth_model(truth)
    u = sample_vine(model, n, seed=seed, return_frame=True)

    g = truth.get("garch", {"gamma0": 0.02, "gamma1": 0.06, "beta1": 0.90, "nu": 6.0})
    gp = (float(g["gamma0"]), float(g["gamma1"]), float(g["beta1"]), float(g["nu"]))
    if gp[1] + gp[2] >= 1 or gp[0] <= 0 or gp[3] <= 2:
        raise TruthError("garch parameters must satisfy gamma0 > 0, gamma1 + beta1 < 1, nu > 2")
    scale = 0.01  # returns in fractional units
    series = {v: scale * simulate_garch_t(n, *gp, u=u[v].to_numpy()) for v in u.columns}

    n_per = int(truth["assets_per_class"])
    rng = np.random.default_rng(seed + 1)
    ids, sectors, caps, scores = [], {}, {}, {}
    years = [y for _, y0, y1 in periods for y in range(int(y0), int(y1) + 1)]
    returns = {}
    for k in CLASSES:
        members = [_truth_id(k, i) for i in range(n_per)]
        for i, a in enumerate(members):
            ids.append(a)
            sectors[a] = f"S{i + 1:02d}"
            caps[a] = 1.0
            lo, hi = SCORE_BANDS[k]
            scores[a] = np.round(rng.uniform(lo, hi, len(years)), 2)
            returns[a] = series[a]
        bal = f"bal_{k.lower()}"
        ids.append(bal)
        sectors[bal] = BALANCE_SECTOR
        caps[bal] = 1.0
        scores[bal] = np.full(len(years), BALANCE_SCORES[k])
        # index = mean of the n_per + 1 equally capped members
        returns[bal] = (n_per + 1) * series[INDEX[k]] - np.sum([series[a] for a in members], axis=0)

    paths = {k: os.path.join(directory, f"{k}.csv") for k in ("returns", "esg", "meta", "market")}
    day_str = [d.strftime("%Y-%m-%d") for d in dates]
    ret = pd.DataFrame({"date": day_str, **{a: returns[a] for a in ids}})
    ret.to_csv(paths["returns"], index=False, float_format="%.17g", lineterminator="\n")
    esg = pd.DataFrame({"year": years, **{a: scores[a] for a in ids}})
    esg.to_csv(paths["esg"], index=False, float_format="%.17g", lineterminator="\n")
    meta = pd.DataFrame({"asset_id": ids, "sector": [sectors[a] for a in ids], "market_cap": [caps[a] for a in ids]})
    meta.to_csv(paths["meta"], index=False, float_format="%.17g", lineterminator="\n")
    mkt = pd.DataFrame({"date": day_str, "return": series[MARKET]})
    mkt.to_csv(paths["market"], index=False, float_format="%.17g", lineterminator="\n")
    return paths, model, gp


def truth_archive(model, garch_params, panel_digest, period=""):
    """Archive of the generating model (marginals hold the true parameters)."""
    g0, g1, b1, nu = garch_params
    marg = {v: MarginalFit(g0 * 1e-4, g1, b1, nu, 0.0, float("nan"), True) for v in model.structure.nodes}
    model.period = period
    model.catalog_name = "truth"
    return ModelArchive(model, marg, {"mode": "quartile", "assets": []}, panel_digest)
