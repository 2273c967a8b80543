"""ESG, market and idiosyncratic risk shares of each asset.

For an asset the five template edges (own class index; market given the
class; then the three other class indices) carry dependence measures
``d_1 .. d_5``: absolute Kendall's tau, or the lower tail dependence
coefficient. With ``S = sum(d)`` the shares are

    ESG = d_1 / S,   market = d_2 / S,   idiosyncratic = 1 - ESG - market.
"""
import math
from dataclasses import asdict, dataclass
from typing import List

import numpy as np
import pandas as pd

from .panel import CLASSES
from .vine import INDEX, MARKET, VineModel

SHORT = {v: k for k, v in INDEX.items()}
SHORT[MARKET] = "M"
MEASURES = ("esg", "market", "idio")
VARIANTS = ("tau", "tau_emp", "lambda")
POLICIES = ("include_all", "drop_zeros_and_ones")
RISK_LABELS = {"esg": "ESG Risk", "market": "Market Risk", "idio": "Idiosyncratic Risk"}


@dataclass(frozen=True)
class EdgeDependence:
    """Dependence carried by one of an asset's five template edges."""

    partner: str
    given: tuple
    tau: float
    lambda_lower: float
    tau_emp: float = float("nan")
    family: str = ""

    @property
    def label(self):
        g = ",".join(self.given)
        return f"{self.partner}|{g}" if g else self.partner


@dataclass(frozen=True)
class RiskShares:
    esg: float
    market: float
    idio: float
    degenerate: bool = False
    boundary: bool = False

    def as_tuple(self):
        return (self.esg, self.market, self.idio)


def edge_dependence(model: VineModel, asset) -> List[EdgeDependence]:
    """The asset's tree 1-5 edges in canonical order.

    Partners are reported by short name (``A``-``D``, ``M``). Raises
    ``KeyError`` if the asset is not a node of the model.
    """
    asset = str(asset)
    if asset not in model.structure.nodes or asset in SHORT:
        raise KeyError(f"asset {asset!r} is not in the model")
    out = []
    for tree in model.structure.trees:
        edge = next((e for e in tree if asset in (e.a, e.b)), None)
        if edge is None:
            break
        pc = model.copulas[edge]
        other = edge.b if edge.a == asset else edge.a
        out.append(EdgeDependence(SHORT.get(other, other), tuple(SHORT.get(g, g) for g in edge.given),
                                  pc.tau, pc.lambda_lower, model.empirical_tau.get(edge, float("nan")),
                                  str(pc.family)))
    return out


def _values(items, attr):
    vals = []
    for it in items:
        vals.append(float(getattr(it, attr)) if isinstance(it, EdgeDependence) else float(it))
    return vals


def _shares(vals):
    total = math.fsum(vals)
    if not total > 0:
        nan = float("nan")
        return RiskShares(nan, nan, nan, degenerate=True)
    esg = vals[0] / total
    market = vals[1] / total if len(vals) > 1 else 0.0
    idio = max(0.0, 1.0 - esg - market)
    boundary = any(s in (0.0, 1.0) for s in (esg, market, idio))
    return RiskShares(esg, market, idio, False, boundary)


def risk_shares_tau(triples, attr="tau"):
    """Shares from absolute Kendall's taus.

    ``triples`` holds :class:`EdgeDependence` records or plain numbers in
    canonical order. A zero total gives a degenerate result (NaN shares).
    """
    return _shares([abs(v) for v in _values(triples, attr)])


def risk_shares_lambda(triples):
    """Shares from lower tail dependence coefficients.

    ``boundary`` marks results with a share of exactly 0 or 1.
    """
    vals = _values(triples, "lambda_lower")
    if any(v < 0 for v in vals):
        raise ValueError("tail dependence coefficients must be non-negative")
    return _shares(vals)


@dataclass(frozen=True)
class AssetRiskRow:
    """Risk shares of one asset in one period."""

    asset: str
    klass: str
    period: str
    r_esg_tau: float
    r_market_tau: float
    r_idio_tau: float
    r_esg_tau_emp: float
    r_market_tau_emp: float
    r_idio_tau_emp: float
    r_esg_lambda: float
    r_market_lambda: float
    r_idio_lambda: float
    degenerate_tau: bool
    degenerate_tau_emp: bool
    degenerate_lambda: bool
    boundary_lambda: bool

    def share(self, measure, variant):
        return getattr(self, f"r_{measure}_{variant}")


def risk_report(model: VineModel, period=None) -> List[AssetRiskRow]:
    """Risk shares for every asset of a template model."""
    period = period if period is not None else (model.period or "")
    rows = []
    membership = model.structure.membership
    for asset in sorted(membership):
        deps = edge_dependence(model, asset)
        t = risk_shares_tau(deps)
        te = risk_shares_tau(deps, attr="tau_emp") if all(np.isfinite(d.tau_emp) for d in deps) \
            else RiskShares(float("nan"), float("nan"), float("nan"), True)
        lam = risk_shares_lambda(deps)
        rows.append(AssetRiskRow(asset, membership[asset], period, *t.as_tuple(), *te.as_tuple(),
                                 *lam.as_tuple(), t.degenerate, te.degenerate, lam.degenerate, lam.boundary))
    return rows


def rows_to_frame(rows):
    df = pd.DataFrame([asdict(r) for r in rows])
    return df.rename(columns={"klass": "class"})


def rows_from_frame(df) -> List[AssetRiskRow]:
    out = []
    for rec in df.rename(columns={"class": "klass"}).to_dict("records"):
        for k in list(rec):
            if k.startswith("degenerate") or k.startswith("boundary"):
                rec[k] = bool(rec[k]) if not isinstance(rec[k], str) else rec[k] == "True"
        rec["asset"], rec["period"] = str(rec["asset"]), str(rec["period"])
        out.append(AssetRiskRow(**rec))
    return out


def long_format(rows):
    """One line per (asset, period, class, variant, measure) for box plots."""
    recs = []
    for r in rows:
        for v in VARIANTS:
            for m in MEASURES:
                val = r.share(m, v)
                recs.append({"asset": r.asset, "period": r.period, "class": r.klass, "variant": v,
                             "measure": m, "value": val, "is_boundary": val in (0.0, 1.0)})
    return pd.DataFrame(recs, columns=["asset", "period", "class", "variant", "measure", "value", "is_boundary"])


# -- aggregation ---------------------------------------------------------------

@dataclass(frozen=True)
class RiskAggregate:
    """Per (period, class, measure) mean, sample std and count.

    ``table`` has columns ``period, class, variant, measure, mean, std, n,
    excluded``.
    """

    table: pd.DataFrame
    policy: str

    def value(self, period, klass, measure, variant="tau", stat="mean"):
        t = self.table
        sel = t[(t.period == period) & (t["class"] == klass) & (t.measure == measure) & (t.variant == variant)]
        return float(sel[stat].iloc[0]) if len(sel) else float("nan")


def _keep(val, variant, policy):
    if not np.isfinite(val):
        return False
    if policy == "drop_zeros_and_ones" and variant == "lambda":
        return val not in (0.0, 1.0)
    return True


def aggregate(rows, policy="include_all", variants=VARIANTS) -> RiskAggregate:
    """Mean and sample standard deviation of the shares per class and period.

    Degenerate (NaN) shares never enter. With ``drop_zeros_and_ones`` the
    lambda shares equal to exactly 0 or 1 are dropped, measure by measure.
    Empty cells report NaN with ``n = 0``.
    """
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")
    periods = list(dict.fromkeys(r.period for r in rows))
    recs = []
    for q in periods:
        for k in CLASSES:
            cell = [r for r in rows if r.period == q and r.klass == k]
            for v in variants:
                for m in MEASURES:
                    vals = [r.share(m, v) for r in cell]
                    kept = np.array([x for x in vals if _keep(x, v, policy)], dtype=float)
                    n = len(kept)
                    mean = float(np.mean(kept)) if n else float("nan")
                    std = float(np.std(kept, ddof=1)) if n > 1 else (0.0 if n == 1 else float("nan"))
                    recs.append({"period": q, "class": k, "variant": v, "measure": m, "mean": mean,
                                 "std": std, "n": n, "excluded": len(vals) - n})
    return RiskAggregate(pd.DataFrame(recs), policy)


def aggregate_table(agg: RiskAggregate, variant="tau", stat="mean"):
    """Wide table: one row per period, columns (measure, class)."""
    t = agg.table[agg.table.variant == variant]
    periods = list(dict.fromkeys(t.period))
    data = []
    for q in periods:
        row = []
        for m in MEASURES:
            for k in CLASSES:
                sel = t[(t.period == q) & (t["class"] == k) & (t.measure == m)]
                row.append(float(sel[stat].iloc[0]) if len(sel) else float("nan"))
        data.append(row)
    cols = pd.MultiIndex.from_tuples([(RISK_LABELS[m], k) for m in MEASURES for k in CLASSES])
    return pd.DataFrame(data, index=pd.Index(periods, name="Year"), columns=cols)


def write_aggregate_csv(table: pd.DataFrame, path, header_comment=None, digits=3):
    """CSV with the two header rows ``Type of Risk`` / ``Year``."""
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append(",".join(["Type of Risk"] + [m for m, _ in table.columns]))
    lines.append(",".join(["Year"] + [k for _, k in table.columns]))
    for q, row in table.iterrows():
        lines.append(",".join([str(q)] + [_fmt(v, digits) for v in row]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt(v, digits):
    return "" if not np.isfinite(v) else f"{v:.{digits}f}"


def latex_rows(table: pd.DataFrame, digits=3):
    """Table body rows ``period & v1 & ... & v12 \\\\``."""
    return [" & ".join([str(q)] + [_fmt(v, digits) or "--" for v in row]) + r" \\"
            for q, row in table.iterrows()]


def format_row(period, values, digits=3):
    """``period & v1 & v2 ...`` with fixed decimals."""
    return " & ".join([str(period)] + [_fmt(float(v), digits) for v in values])

