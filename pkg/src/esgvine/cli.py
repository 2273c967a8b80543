"""Command line pipeline: classify -> fit -> risk -> report, plus simulate.

Every subcommand takes ``--config path.ini``. Outputs go to the
configured directory; each CSV starts with a ``# config_digest: ...``
comment line. Exit codes: 0 success, 2 configuration error, 3 data
error, 4 numerical failure.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

from . import __version__
from .config import ConfigError, load_config, write_config
from .copula.fitting import CopulaFitError
from .marginals import GarchFitError, fit_garch_t
from .panel import CLASSES, DataError, classify, esg_distribution_summary, load_panel, var_table
from .risk import aggregate, aggregate_table, latex_rows, long_format, risk_report, rows_to_frame, \
    write_aggregate_csv
from .simulate import TruthError, load_truth, simulate_panel, truth_archive
from .store import ArchiveError, ModelArchive, load, save
from .vine import INDEX, MARKET, VineFitError, build_structure, compare_models, family_census, fit_vine

log = logging.getLogger("esgvine")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
CATALOG_TITLES = {"itau": "Itau Copula Families", "parametric": "Parametric Copula Families",
                  "gaussian": "Gaussian Copula Families"}


# -- helpers -----------------------------------------------------------------------

def _digest_line(cfg):
    return f"config_digest: {cfg.digest()}"


def _write_csv(df, path, cfg, **kw):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {_digest_line(cfg)}\n")
        df.to_csv(fh, index=False, float_format="%.17g", lineterminator="\n", **kw)


def _read_csv(path):
    return pd.read_csv(path, comment="#")


def _prepare(cfg):
    os.makedirs(cfg.output, exist_ok=True)
    with open(os.path.join(cfg.output, "run_config.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"config_digest": cfg.digest(), "config": cfg.as_dict(), "version": __version__},
                  fh, sort_keys=True, indent=1)
        fh.write("\n")
    return load_panel(cfg.returns, cfg.esg, cfg.meta, cfg.period_spec, cfg.market)


def _archive_path(cfg, period, catalog):
    return os.path.join(cfg.output, "archives", f"{period}__{catalog}.json")


def _classification_section(cls, period, mode):
    assets = [{"asset": a, "class": k, "mean_esg": cls.mean_scores[(a, q)], "weight": cls.weights[(a, q)]}
              for (a, q), k in sorted(cls.classes.items()) if q == period]
    return {"mode": mode, "assets": assets}


# -- subcommands ---------------------------------------------------------------------

def cmd_classify(cfg):
    """Class assignments, weights, class indices, VaR/ES table and ESG score summary."""
    panel = _prepare(cfg)
    cls = classify(panel, cfg.period_spec)
    recs = [{"asset": a, "sector": panel.sectors[a], "period": q, "mean_esg": cls.mean_scores[(a, q)],
             "class": k} for (a, q), k in sorted(cls.classes.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
    _write_csv(pd.DataFrame(recs), os.path.join(cfg.output, "classes.csv"), cfg)
    caps = dict(zip(panel.asset_ids, panel.market_caps))
    recs = [{"asset": a, "period": q, "class": cls.classes[(a, q)], "market_cap": caps[a], "weight": w}
            for (a, q), w in sorted(cls.weights.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
    _write_csv(pd.DataFrame(recs), os.path.join(cfg.output, "weights.csv"), cfg)

    frames = []
    for q in cfg.period_spec.labels:
        t0, t1 = panel.period_days(q)
        df = pd.DataFrame({"date": panel.dates[t0:t1], "period": q})
        for k in CLASSES:
            df[INDEX[k]] = cls.indices[q].get(k, np.full(t1 - t0, np.nan))
        df[MARKET] = panel.market_returns[t0:t1]
        frames.append(df)
    _write_csv(pd.concat(frames, ignore_index=True), os.path.join(cfg.output, "indices.csv"), cfg)

    sizes = []
    for q in cfg.period_spec.labels:
        s = cls.class_sizes(q)
        sizes.append({"period": q, **s, "empty_classes": " ".join(cls.empty_classes(q))})
        if cls.empty_classes(q):
            log.warning("period %s: empty ESG class(es) %s", q, ", ".join(cls.empty_classes(q)))
    _write_csv(pd.DataFrame(sizes), os.path.join(cfg.output, "class_sizes.csv"), cfg)
    _write_csv(var_table(panel, cfg.var_levels, cfg.thresholds), os.path.join(cfg.output, "var_table.csv"), cfg)
    _write_csv(esg_distribution_summary(panel, cfg.period_spec), os.path.join(cfg.output, "esg_dist.csv"), cfg)
    return cls


def _u_data(panel, cls, q, cfg):
    t0, t1 = panel.period_days(q)
    series = {a: panel.returns[t0:t1, j] for j, a in enumerate(panel.asset_ids)}
    for k, s in cls.indices[q].items():
        series[INDEX[k]] = s
    series[MARKET] = panel.market_returns[t0:t1]
    fits, u = {}, {}
    for name in sorted(series):
        try:
            f = fit_garch_t(series[name], min_obs=cfg.min_obs)
        except (GarchFitError, ValueError) as exc:
            raise GarchFitError(f"period {q}, series {name}: {exc}") from exc
        fits[name], u[name] = f, f.u
    return fits, pd.DataFrame(u)


def cmd_fit(cfg):
    """Marginal fits, one vine per (period, catalog), comparison and census tables."""
    panel = _prepare(cfg)
    cls = classify(panel, cfg.period_spec)
    os.makedirs(os.path.join(cfg.output, "archives"), exist_ok=True)
    digest = panel.digest()
    comparison, census = [], {}
    for q in cfg.period_spec.labels:
        membership = cls.membership(q)
        if cls.empty_classes(q):
            raise DataError(f"period {q}: ESG class(es) {cls.empty_classes(q)} are empty; the vine needs all four")
        structure = build_structure(membership)
        fits, u = _u_data(panel, cls, q, cfg)
        models = []
        for cat in cfg.catalogs:
            log.info("fitting %s vine for %s (%d edges)", cat, q, structure.n_edges)
            model = fit_vine(u, structure, cat, workers=cfg.workers, period=q)
            models.append(model)
            arch = ModelArchive(model, fits, _classification_section(cls, q, cfg.classification_mode),
                                digest, cfg.psi0, config_digest=cfg.digest())
            save(arch, _archive_path(cfg, q, cat))
            for m in range(1, structure.truncation_level + 1):
                census.setdefault(m, {})[(cat, q)] = family_census(model, m)
        comparison.append(compare_models(models, cfg.psi0))
    comp = pd.concat(comparison, ignore_index=True)
    for col in ("logLik", "mBIC"):
        comp[col] = comp[col].map(lambda v: f"{v:.2f}")
    _write_csv(comp, os.path.join(cfg.output, "comparison.csv"), cfg)
    for m, table in census.items():
        _write_census(table, cfg, os.path.join(cfg.output, f"census_tree{m}.csv"))
    return comp


def _write_census(table, cfg, path):
    keys = [(c, q) for c in cfg.catalogs for q in cfg.period_spec.labels if (c, q) in table]
    labels = []
    for k in keys:
        for lab in table[k]:
            if lab not in labels:
                labels.append(lab)
    lines = [f"# {_digest_line(cfg)}",
             ",".join(["Copula Family & Rotation"] + [CATALOG_TITLES.get(c, c) for c, _ in keys]),
             ",".join(["Year"] + [q for _, q in keys])]
    for lab in labels:
        lines.append(",".join([lab] + [str(table[k].get(lab, 0)) for k in keys]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _select_archive(cfg, q, digest):
    cats = cfg.catalogs if cfg.risk_catalog == "best" else (cfg.risk_catalog,)
    found = []
    for c in cats:
        path = _archive_path(cfg, q, c)
        if os.path.exists(path):
            found.append(load(path, expected_digest=digest))
    if not found:
        raise DataError(f"no model archive for period {q} in {os.path.join(cfg.output, 'archives')}; run fit first")
    return min(found, key=lambda a: a.model.mbic(cfg.psi0))  # first wins ties


def cmd_risk(cfg):
    """Risk shares per asset and their class/period aggregates."""
    panel = _prepare(cfg)
    digest = panel.digest()
    rows, used = [], []
    for q in cfg.period_spec.labels:
        arch = _select_archive(cfg, q, digest)
        used.append({"period": q, "catalog": arch.model.catalog_name, "mBIC": arch.model.mbic(cfg.psi0)})
        rows.extend(risk_report(arch.model, q))
    _write_csv(rows_to_frame(rows), os.path.join(cfg.output, "riskreport.csv"), cfg)
    _write_csv(pd.DataFrame(used), os.path.join(cfg.output, "risk_models.csv"), cfg)
    _write_csv(long_format(rows), os.path.join(cfg.output, "boxplot.csv"), cfg)
    digest_line = _digest_line(cfg)
    outputs = {}
    base = aggregate(rows, "include_all")
    for variant, suffix in (("tau", ""), ("tau_emp", "_emp")):
        for stat, tail in (("mean", ""), ("std", "_std")):
            t = aggregate_table(base, variant, stat)
            write_aggregate_csv(t, os.path.join(cfg.output, f"aggregate{suffix}{tail}.csv"), digest_line)
            outputs[f"{variant}_{stat}"] = t
    for policy in cfg.lambda_policies:
        agg = aggregate(rows, policy, variants=("lambda",))
        suffix = "" if policy == "include_all" else "_nozeros"
        for stat, tail in (("mean", ""), ("std", "_std")):
            t = aggregate_table(agg, "lambda", stat)
            write_aggregate_csv(t, os.path.join(cfg.output, f"aggregate_lambda{suffix}{tail}.csv"), digest_line)
            outputs[f"lambda{suffix}_{stat}"] = t
        counts = agg.table[["period", "class", "measure", "n", "excluded"]]
        _write_csv(counts, os.path.join(cfg.output, f"aggregate_lambda{suffix}_counts.csv"), cfg)
    return rows, outputs


def cmd_report(cfg):
    """Collect the CSV outputs into ``report.md`` with LaTeX table rows."""
    out = cfg.output
    parts = ["# ESG vine risk report", "", f"`{_digest_line(cfg)}`", ""]
    sizes = os.path.join(out, "class_sizes.csv")
    if os.path.exists(sizes):
        parts += ["## Class sizes", "", "```", _read_csv(sizes).to_string(index=False), "```", ""]
    comp = os.path.join(out, "comparison.csv")
    if os.path.exists(comp):
        df = _read_csv(comp)
        parts += ["## Model comparison (mBIC)", "", "```"] + \
                 [" & ".join(str(r[c]) for c in ("model", "year", "nobs", "logLik", "npars", "mBIC")) + r" \\"
                  for _, r in df.iterrows()] + ["```", ""]
    found = False
    for name, title in (("aggregate", "Mean risk shares (tau)"), ("aggregate_std", "Standard deviations (tau)"),
                        ("aggregate_lambda", "Mean lower tail risk shares"),
                        ("aggregate_lambda_nozeros", "Mean lower tail risk shares without 0s and 1s"),
                        ("aggregate_lambda_std", "Standard deviations (lower tail)")):
        path = os.path.join(out, f"{name}.csv")
        if not os.path.exists(path):
            continue
        found = True
        t = pd.read_csv(path, comment="#", header=[0, 1], index_col=0)
        parts += [f"## {title}", "", "```"] + latex_rows(t) + ["```", ""]
    if not found and not os.path.exists(comp):
        raise DataError(f"nothing to report in {out}; run classify/fit/risk first")
    text = "\n".join(parts) + "\n"
    with open(os.path.join(out, "report.md"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def cmd_simulate(cfg):
    """Write a synthetic panel to the configured data paths plus the truth archive."""
    if not cfg.truth:
        raise ConfigError("simulate needs [simulate] truth = <file>")
    truth = load_truth(cfg.truth)
    directory = os.path.dirname(cfg.returns)
    paths, model, gp = simulate_panel(truth, directory)
    for key in ("returns", "esg", "meta", "market"):
        target = getattr(cfg, key)
        if os.path.abspath(paths[key]) != os.path.abspath(target):
            os.replace(paths[key], target)
    panel = _prepare(cfg)
    model.nobs = panel.n_days
    save(truth_archive(model, gp, panel.digest()), os.path.join(cfg.output, "truth_archive.json"))
    return panel


def init_simulation(directory, truth=None, **model):
    """Create ``directory`` with a truth file and a config ready for simulate."""
    from .simulate import default_truth
    os.makedirs(directory, exist_ok=True)
    truth = truth or default_truth()
    with open(os.path.join(directory, "truth.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(truth, fh, indent=1, sort_keys=True)
        fh.write("\n")
    settings = {"classification_mode": "quartile", "catalogs": "itau, parametric, gaussian", "seed": truth["seed"]}
    settings.update(model)
    path = os.path.join(directory, "config.ini")
    write_config(path, {k: f"{k}.csv" for k in ("returns", "esg", "meta", "market")},
                 [tuple(p) for p in truth["periods"]], output="out", truth="truth.json", **settings)
    return path


COMMANDS = {"classify": cmd_classify, "fit": cmd_fit, "risk": cmd_risk, "report": cmd_report,
            "simulate": cmd_simulate}


def build_parser():
    p = argparse.ArgumentParser(prog="esgvine", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--output", help="override [output] directory")
        sp.add_argument("--workers", type=int, help="override [model] workers")
        sp.add_argument("--seed", type=int, help="override [model] seed")
        if name == "fit":
            sp.add_argument("--catalog", help="override [model] catalogs (comma list or 'all')")
    init = sub.add_parser("init-sim", help="write a default truth file and config into a directory")
    init.add_argument("directory")
    return p


def _apply_overrides(cfg, args):
    from dataclasses import replace
    changes = {}
    if getattr(args, "output", None):
        changes["output"] = os.path.abspath(args.output)
    if getattr(args, "workers", None):
        changes["workers"] = args.workers
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "catalog", None):
        from .copula.fitting import CATALOGS
        cats = tuple(CATALOGS) if args.catalog == "all" else tuple(c.strip() for c in args.catalog.split(","))
        for c in cats:
            if c not in CATALOGS:
                raise ConfigError(f"unknown catalog {c!r}")
        changes["catalogs"] = cats
    return replace(cfg, **changes) if changes else cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "init-sim":
            print(init_simulation(args.directory))
            return EXIT_OK
        cfg = _apply_overrides(load_config(args.config), args)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ArchiveError, TruthError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (GarchFitError, VineFitError, CopulaFitError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
