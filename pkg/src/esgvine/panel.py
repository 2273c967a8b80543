"""Data panel ingestion, ESG classification and class-index construction.

Input files (CSV, header row required):

* ``returns.csv``: ``date`` then one column per asset id, daily log returns.
* ``esg.csv``: ``year`` then one column per asset id, scores in [0, 100].
* ``meta.csv``: ``asset_id, sector, market_cap``.
* ``market.csv``: ``date, return``.
"""
import hashlib
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

CLASSES = ("A", "B", "C", "D")
DEFAULT_THRESHOLDS = (25.0, 50.0, 75.0)
DEFAULT_PERIODS = (("2006-2010", 2006, 2010), ("2011-2015", 2011, 2015), ("2016-2018", 2016, 2018))


class DataError(ValueError):
    """Input data violates the panel schema or its invariants."""


@dataclass(frozen=True)
class Period:
    label: str
    start_year: int
    end_year: int

    @property
    def years(self):
        return list(range(self.start_year, self.end_year + 1))


@dataclass(frozen=True)
class PeriodSpec:
    """Study periods and the classification rule.

    Periods are given as ``(label, first_year, last_year)``; they must be
    ordered, disjoint and contiguous.
    """

    periods: Tuple[Period, ...] = tuple(Period(*p) for p in DEFAULT_PERIODS)
    classification_mode: str = "quartile"
    thresholds: Tuple[float, float, float] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        periods = tuple(p if isinstance(p, Period) else Period(str(p[0]), int(p[1]), int(p[2]))
                        for p in self.periods)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if not periods:
            raise ValueError("at least one period is required")
        labels = [p.label for p in periods]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate period labels {labels}")
        for p in periods:
            if p.start_year > p.end_year:
                raise ValueError(f"period {p.label}: first year after last year")
        for a, b in zip(periods, periods[1:]):
            if b.start_year != a.end_year + 1:
                raise ValueError(f"periods {a.label} and {b.label} are not contiguous and disjoint")
        if self.classification_mode not in ("quartile", "threshold"):
            raise ValueError(f"classification_mode must be quartile or threshold, got {self.classification_mode!r}")
        t = self.thresholds
        if len(t) != 3 or not (0.0 < t[0] < t[1] < t[2] < 100.0):
            raise ValueError(f"thresholds must be three increasing values inside (0, 100), got {t}")

    @property
    def labels(self):
        return [p.label for p in self.periods]

    @property
    def years(self):
        return [y for p in self.periods for y in p.years]

    def period_of_year(self, year):
        for p in self.periods:
            if p.start_year <= year <= p.end_year:
                return p.label
        return None

    def get(self, label) -> Period:
        for p in self.periods:
            if p.label == label:
                return p
        raise KeyError(label)


@dataclass(frozen=True)
class AssetPanel:
    """Validated inputs for one study window.

    Attributes
    ----------
    asset_ids : list of str
    sectors : dict
        Asset id to sector label.
    returns : ndarray, shape (n_days, n_assets)
    dates : ndarray of str
    day_years : ndarray of int
        Calendar year of each trading day.
    esg_years : list of int
    esg_scores : ndarray, shape (n_years, n_assets)
    market_caps : ndarray, shape (n_assets,)
    market_returns : ndarray, shape (n_days,)
    spec : PeriodSpec
    """

    asset_ids: List[str]
    sectors: Dict[str, str]
    returns: np.ndarray
    dates: np.ndarray
    day_years: np.ndarray
    esg_years: List[int]
    esg_scores: np.ndarray
    market_caps: np.ndarray
    market_returns: np.ndarray
    spec: PeriodSpec = field(default_factory=PeriodSpec)

    def __post_init__(self):
        _validate_panel(self)

    @property
    def n_assets(self):
        return len(self.asset_ids)

    @property
    def n_days(self):
        return self.returns.shape[0]

    @property
    def day_periods(self):
        return np.array([self.spec.period_of_year(int(y)) for y in self.day_years], dtype=object)

    def period_days(self, label):
        """Trading-day index range ``(first, stop)`` of a period."""
        p = self.spec.get(label)
        idx = np.flatnonzero((self.day_years >= p.start_year) & (self.day_years <= p.end_year))
        return int(idx[0]), int(idx[-1]) + 1

    def cap_of(self, asset):
        return float(self.market_caps[self.asset_ids.index(asset)])

    def column(self, asset):
        return self.returns[:, self.asset_ids.index(asset)]

    def digest(self):
        """SHA-256 over the panel contents (ids, sectors, arrays, calendar)."""
        h = hashlib.sha256()
        for a in self.asset_ids:
            h.update(f"{a}\x1f{self.sectors[a]}\x1e".encode())
        for arr in (self.returns, self.esg_scores, self.market_caps, self.market_returns, self.day_years):
            a = np.ascontiguousarray(arr, dtype=float)
            h.update(str(a.shape).encode())
            h.update(a.tobytes())
        h.update("\x1e".join(map(str, self.dates)).encode())
        h.update(",".join(map(str, self.esg_years)).encode())
        return h.hexdigest()


def _validate_panel(p: AssetPanel):
    n = len(p.asset_ids)
    if len(set(p.asset_ids)) != n:
        dup = sorted({a for a in p.asset_ids if p.asset_ids.count(a) > 1})
        raise DataError(f"duplicate asset id(s): {dup}")
    if p.returns.ndim != 2 or p.returns.shape[1] != n:
        raise DataError(f"returns must be (days x {n} assets), got {p.returns.shape}")
    t = p.returns.shape[0]
    if len(p.market_returns) != t or len(p.day_years) != t or len(p.dates) != t:
        raise DataError("calendar gap: returns, market returns and calendar have different day counts")
    for a in p.asset_ids:
        if a not in p.sectors or p.sectors[a] in ("", None):
            raise DataError(f"asset {a}: missing sector label")
    if len(p.market_caps) != n or not np.all(np.asarray(p.market_caps) > 0):
        bad = [a for a, c in zip(p.asset_ids, p.market_caps) if not c > 0]
        raise DataError(f"market caps must be positive; offending assets {bad}")
    if np.any(~np.isfinite(p.returns)):
        j = int(np.argwhere(~np.isfinite(p.returns))[0][1])
        raise DataError(f"calendar gap: missing return for asset {p.asset_ids[j]}")
    if np.any(~np.isfinite(p.market_returns)):
        raise DataError("calendar gap: missing market return")
    scores = np.asarray(p.esg_scores, dtype=float)
    if scores.shape != (len(p.esg_years), n):
        raise DataError(f"esg scores must be (years x {n} assets), got {scores.shape}")
    bad = np.argwhere(~((scores >= 0) & (scores <= 100)) & np.isfinite(scores))
    if len(bad):
        i, j = bad[0]
        raise DataError(f"score out of range: asset {p.asset_ids[j]}, year {p.esg_years[i]}, value {scores[i, j]}")
    if np.any(np.diff(p.day_years) < 0):
        raise DataError("calendar: dates are not in increasing order")
    day_years = set(int(y) for y in p.day_years)
    for y in day_years:
        if p.spec.period_of_year(y) is None:
            raise DataError(f"calendar: trading year {y} is not covered by any period")
    for y in p.spec.years:
        if y not in day_years:
            raise DataError(f"calendar gap: no trading days in year {y}")
        if y not in p.esg_years:
            raise DataError(f"missing ESG scores for year {y}")
        row = scores[p.esg_years.index(y)]
        if np.any(~np.isfinite(row)):
            j = int(np.flatnonzero(~np.isfinite(row))[0])
            raise DataError(f"missing ESG score for asset {p.asset_ids[j]}, year {y}")


def _read_csv(path, what):
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, comment="#")
    except FileNotFoundError:
        raise DataError(f"{what} file not found: {path}") from None
    except pd.errors.ParserError as exc:
        raise DataError(f"{what} file {path}: {exc}") from None
    except pd.errors.EmptyDataError:
        raise DataError(f"{what} file {path} is empty") from None


def _numeric(df, cols, what):
    out = np.empty((len(df), len(cols)))
    for k, c in enumerate(cols):
        col = df[c].str.strip()
        vals = pd.to_numeric(col.replace("", np.nan), errors="coerce")
        bad = vals.isna() & (col != "")
        if bad.any():
            i = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataError(f"{what}: non-numeric cell {col.iloc[i]!r} in column {c!r}, row {i + 2}")
        out[:, k] = vals.to_numpy(dtype=float)
    return out


def _require_columns(df, cols, what, path):
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise DataError(f"schema violation in {what} file {path}: missing column(s) {missing}")


def _check_unique_header(df, what, path):
    # pandas mangles duplicate headers into "x.1"; compare against the raw header
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                header = [h.strip() for h in line.rstrip("\r\n").split(",")]
                break
    seen = set()
    for h in header:
        if h in seen:
            raise DataError(f"duplicate asset id {h!r} in {what} file {path}")
        seen.add(h)


def load_panel(returns_file, esg_file, meta_file, spec: PeriodSpec = None, market_file=None) -> AssetPanel:
    """Read and validate the CSV panel.

    Raises
    ------
    DataError
        Schema violation, non-numeric cell, duplicate asset id, score out
        of range, or calendar gap. The message names the offending item.
    """
    spec = spec or PeriodSpec()
    if market_file is None:
        raise DataError("a market index file is required")
    ret = _read_csv(returns_file, "returns")
    esg = _read_csv(esg_file, "esg")
    meta = _read_csv(meta_file, "meta")
    _require_columns(ret, ["date"], "returns", returns_file)
    _require_columns(esg, ["year"], "esg", esg_file)
    _require_columns(meta, ["asset_id", "sector", "market_cap"], "meta", meta_file)
    _check_unique_header(ret, "returns", returns_file)
    _check_unique_header(esg, "esg", esg_file)

    ids = [c for c in ret.columns if c != "date"]
    if not ids:
        raise DataError(f"schema violation in returns file {returns_file}: no asset columns")
    meta_ids = list(meta["asset_id"].str.strip())
    if len(set(meta_ids)) != len(meta_ids):
        dup = sorted({a for a in meta_ids if meta_ids.count(a) > 1})
        raise DataError(f"duplicate asset id(s) in meta file: {dup}")
    for a in ids:
        if a not in meta_ids:
            raise DataError(f"asset {a}: missing from meta file (sector, market_cap)")
        if a not in esg.columns:
            raise DataError(f"asset {a}: missing from esg file")
    meta = meta.set_index(meta["asset_id"].str.strip())
    caps = _numeric(meta.loc[ids].reset_index(drop=True), ["market_cap"], "meta")[:, 0]
    sectors = {a: str(meta.loc[a, "sector"]).strip() for a in ids}

    returns = _numeric(ret, ids, "returns")
    dates = pd.to_datetime(ret["date"].str.strip(), errors="coerce")
    if dates.isna().any():
        i = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise DataError(f"returns: unparseable date {ret['date'].iloc[i]!r}, row {i + 2}")
    if dates.duplicated().any():
        raise DataError(f"returns: duplicate date {dates[dates.duplicated()].iloc[0].date()}")
    if not dates.is_monotonic_increasing:
        raise DataError("returns: dates are not in increasing order")
    date_str = np.array([d.strftime("%Y-%m-%d") for d in dates], dtype=object)

    mkt = _read_csv(market_file, "market")
    _require_columns(mkt, ["date", "return"], "market", market_file)
    mdates = pd.to_datetime(mkt["date"].str.strip(), errors="coerce")
    if len(mdates) != len(dates) or not np.all(mdates.to_numpy() == dates.to_numpy()):
        raise DataError("calendar gap: market dates do not match return dates")
    market = _numeric(mkt, ["return"], "market")[:, 0]

    years_num = _numeric(esg, ["year"], "esg")[:, 0]
    if np.any(years_num != np.round(years_num)):
        raise DataError("esg: year column must hold integers")
    esg_years = [int(y) for y in years_num]
    if len(set(esg_years)) != len(esg_years):
        raise DataError("esg: duplicate year rows")
    scores = _numeric(esg, ids, "esg")

    return AssetPanel(ids, sectors, returns, date_str, dates.dt.year.to_numpy().astype(int),
                      esg_years, scores, caps, market, spec)


# -- classification ------------------------------------------------------------

def mean_esg(panel: AssetPanel, spec: PeriodSpec = None):
    """Mean ESG score of every asset in every period.

    Returns
    -------
    dict
        ``(asset, period_label) -> score``.
    """
    spec = spec or panel.spec
    out = {}
    for p in spec.periods:
        missing = [y for y in p.years if y not in panel.esg_years]
        if missing:
            raise DataError(f"missing ESG year(s) {missing} for period {p.label}")
        rows = [panel.esg_years.index(y) for y in p.years]
        means = panel.esg_scores[rows].mean(axis=0)
        for a, m in zip(panel.asset_ids, means):
            out[(a, p.label)] = float(m)
    return out


def quartile_block_sizes(n_s):
    """Class sizes for a sector of ``n_s`` assets sorted by mean score.

    Blocks are cut at cumulative positions: D ends at ``int(n_s / 4)``,
    C at ``2 * n_D`` (plus one if ``n_s % 4 == 3``), B at ``3 * n_D``
    (plus one if ``n_s % 4`` is 2 or 3), and A takes the rest.
    """
    if n_s < 4:
        raise ValueError(f"quartile classification needs at least 4 assets per sector, got {n_s}")
    n_d, r = divmod(n_s, 4)
    end_c = 2 * n_d + (r == 3)
    end_b = 3 * n_d + (r in (2, 3))
    return {"D": n_d, "C": end_c - n_d, "B": end_b - end_c, "A": n_s - end_b}


def threshold_class(score, thresholds=DEFAULT_THRESHOLDS):
    """Label for a score: D below the first cut, A at or above the last."""
    t1, t2, t3 = thresholds
    if not 0.0 <= score <= 100.0:
        raise ValueError(f"score out of range: {score}")
    if score < t1:
        return "D"
    if score < t2:
        return "C"
    if score < t3:
        return "B"
    return "A"


def assign_classes(mean_scores, sectors, spec: PeriodSpec = None):
    """ESG class of every (asset, period).

    Parameters
    ----------
    mean_scores : dict
        ``(asset, period) -> mean score``.
    sectors : dict
        ``asset -> sector``.
    spec : PeriodSpec
        Supplies the mode and thresholds.

    Returns
    -------
    dict
        ``(asset, period) -> "A" | "B" | "C" | "D"``.
    """
    spec = spec or PeriodSpec()
    out = {}
    if spec.classification_mode == "threshold":
        for key, s in mean_scores.items():
            out[key] = threshold_class(s, spec.thresholds)
        return out
    groups = {}
    for (a, q), s in mean_scores.items():
        groups.setdefault((sectors[a], q), []).append((s, a))
    for (sector, q), members in sorted(groups.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        if len(members) < 4:
            raise ValueError(f"sector {sector!r} has {len(members)} assets in period {q}; quartile mode needs >= 4")
        members.sort(key=lambda sa: (sa[0], sa[1]))
        sizes = quartile_block_sizes(len(members))
        pos = 0
        for k in ("D", "C", "B", "A"):
            for _, a in members[pos:pos + sizes[k]]:
                out[(a, q)] = k
            pos += sizes[k]
    return out


def class_weights(classes, market_caps):
    """Market-cap weight of each asset within its (class, period).

    ``market_caps`` maps asset to cap. Weights of each non-empty
    (class, period) cell sum to one.
    """
    totals = {}
    for (a, q), k in classes.items():
        cap = float(market_caps[a])
        if not cap > 0:
            raise ValueError(f"asset {a}: market cap must be positive")
        totals[(k, q)] = totals.get((k, q), 0.0) + cap
    return {(a, q): float(market_caps[a]) / totals[(k, q)] for (a, q), k in classes.items()}


def class_indices(panel: AssetPanel, classes, weights):
    """Cap-weighted class index return series per period.

    Returns
    -------
    dict
        ``period -> {class: ndarray}``; empty classes are absent.
    """
    out = {}
    for q in panel.spec.labels:
        t0, t1 = panel.period_days(q)
        block = panel.returns[t0:t1]
        out[q] = {}
        for k in CLASSES:
            members = [j for j, a in enumerate(panel.asset_ids) if classes.get((a, q)) == k]
            if not members:
                continue
            w = np.array([weights[(panel.asset_ids[j], q)] for j in members])
            out[q][k] = block[:, members] @ w
    return out


@dataclass(frozen=True)
class EsgClassification:
    """Mean scores, classes, weights and class indices for every period."""

    mean_scores: dict
    classes: dict
    weights: dict
    indices: dict
    mode: str = "quartile"

    def members(self, period, k):
        return sorted(a for (a, q), c in self.classes.items() if q == period and c == k)

    def class_sizes(self, period):
        return {k: len(self.members(period, k)) for k in CLASSES}

    def empty_classes(self, period):
        return [k for k, n in self.class_sizes(period).items() if n == 0]

    def membership(self, period):
        return {a: c for (a, q), c in self.classes.items() if q == period}


def classify(panel: AssetPanel, spec: PeriodSpec = None) -> EsgClassification:
    """Run mean scores, class assignment, weights and indices in one go."""
    spec = spec or panel.spec
    means = mean_esg(panel, spec)
    classes = assign_classes(means, panel.sectors, spec)
    caps = dict(zip(panel.asset_ids, panel.market_caps))
    weights = class_weights(classes, caps)
    return EsgClassification(means, classes, weights, class_indices(panel, classes, weights),
                             spec.classification_mode)


# -- descriptive statistics ----------------------------------------------------

def empirical_var_es(series, level=0.95):
    """Empirical Value at Risk and Expected Shortfall.

    VaR is the lower empirical quantile: the ``k``-th smallest observation
    with ``k = ceil((1 - level) * n)``. ES is the mean of all observations
    at or below VaR. Both are returns (negative for losses).
    """
    x = np.sort(np.asarray(series, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("empirical_var_es: empty series")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    # round first so that 0.05 * 100 lands on 5 rather than 5.000000000000001
    k = max(1, math.ceil(round((1.0 - level) * n, 9)))
    var = float(x[k - 1])
    es = float(np.mean(x[x <= var]))
    return var, es


def var_table(panel: AssetPanel, levels=(0.95, 0.99), thresholds=None):
    """Per-asset VaR/ES per period, grouped by threshold class of the mean score."""
    thresholds = thresholds or panel.spec.thresholds
    spec = PeriodSpec(panel.spec.periods, "threshold", thresholds)
    means = mean_esg(panel, spec)
    rows = []
    for q in spec.labels:
        t0, t1 = panel.period_days(q)
        for j, a in enumerate(panel.asset_ids):
            k = threshold_class(means[(a, q)], thresholds)
            for lev in levels:
                v, e = empirical_var_es(panel.returns[t0:t1, j], lev)
                rows.append({"asset": a, "period": q, "class": k, "mean_esg": means[(a, q)],
                             "level": lev, "VaR": v, "ES": e})
    return pd.DataFrame(rows, columns=["asset", "period", "class", "mean_esg", "level", "VaR", "ES"])


def esg_distribution_summary(panel: AssetPanel, spec: PeriodSpec = None):
    """Yearly distribution of ESG scores (mean, std, quartiles, range)."""
    spec = spec or panel.spec
    rows = []
    for i, y in enumerate(panel.esg_years):
        s = panel.esg_scores[i]
        s = s[np.isfinite(s)]
        q = np.quantile(s, [0.0, 0.25, 0.5, 0.75, 1.0])
        rows.append({"year": y, "period": spec.period_of_year(y) or "", "n": len(s), "mean": float(s.mean()),
                     "std": float(s.std(ddof=1)) if len(s) > 1 else 0.0,
                     "min": q[0], "q25": q[1], "median": q[2], "q75": q[3], "max": q[4]})
    return pd.DataFrame(rows)
