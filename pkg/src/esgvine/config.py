"""Run configuration (INI format).

Example::

    [data]
    returns = returns.csv
    esg = esg.csv
    meta = meta.csv
    market = market.csv

    [periods]
    2006-2010 = 2006:2010
    2011-2015 = 2011:2015
    2016-2018 = 2016:2018

    [model]
    classification_mode = quartile
    thresholds = 25, 50, 75
    catalogs = itau, parametric, gaussian
    risk_catalog = best
    psi0 = 0.9
    var_levels = 0.95, 0.99
    lambda_policy = both
    seed = 1
    workers = 1
    min_obs = 100

    [output]
    directory = out

    [simulate]
    truth = truth.json

Relative paths are resolved against the directory of the config file.
"""
import configparser
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

from .copula.fitting import CATALOGS
from .panel import DEFAULT_PERIODS, PeriodSpec
from .risk import POLICIES


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


@dataclass(frozen=True)
class RunConfig:
    returns: str
    esg: str
    meta: str
    market: str
    output: str
    periods: Tuple[Tuple[str, int, int], ...] = DEFAULT_PERIODS
    classification_mode: str = "quartile"
    thresholds: Tuple[float, float, float] = (25.0, 50.0, 75.0)
    catalogs: Tuple[str, ...] = ("itau", "parametric", "gaussian")
    risk_catalog: str = "best"
    psi0: float = 0.9
    var_levels: Tuple[float, ...] = (0.95, 0.99)
    lambda_policy: str = "both"
    seed: int = 1
    workers: int = 1
    min_obs: int = 100
    truth: Optional[str] = None
    source: str = field(default="", compare=False)

    @property
    def period_spec(self):
        return PeriodSpec(self.periods, self.classification_mode, self.thresholds)

    @property
    def lambda_policies(self):
        return POLICIES if self.lambda_policy == "both" else (self.lambda_policy,)

    def as_dict(self):
        d = asdict(self)
        d.pop("source")
        d["periods"] = [list(p) for p in self.periods]
        for k in ("thresholds", "catalogs", "var_levels"):
            d[k] = list(d[k])
        return d

    def digest(self):
        """SHA-256 of the canonical JSON form of the settings.

        The output directory and the worker count are left out: neither
        changes any result. Data paths enter relative to the config file,
        so a copied run directory keeps its digest.
        """
        d = self.as_dict()
        d.pop("output")
        d.pop("workers")
        base = os.path.dirname(os.path.abspath(self.source)) if self.source else None
        for key in ("returns", "esg", "meta", "market", "truth"):
            if base and d[key]:
                d[key] = os.path.relpath(d[key], base).replace(os.sep, "/")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _floats(text, key):
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"[model] {key}: expected comma-separated numbers, got {text!r}") from None


def _int(sec, key, default):
    try:
        return sec.getint(key, fallback=default)
    except ValueError:
        raise ConfigError(f"[model] {key}: expected an integer, got {sec.get(key)!r}") from None


def load_config(path) -> RunConfig:
    """Parse and validate an INI run configuration.

    Raises
    ------
    ConfigError
        Missing sections or keys, malformed values, or inconsistent settings.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # period labels keep their case
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.normpath(os.path.join(base, p))

    if "data" not in cp:
        raise ConfigError("missing [data] section")
    data = cp["data"]
    paths = {}
    for key in ("returns", "esg", "meta", "market"):
        if not data.get(key):
            raise ConfigError(f"[data] {key} is required")
        paths[key] = resolve(data[key])

    if "periods" in cp and len(cp["periods"]):
        periods = []
        for label, rng in cp["periods"].items():
            try:
                y0, y1 = (int(x) for x in rng.split(":"))
            except ValueError:
                raise ConfigError(f"[periods] {label}: expected 'first:last' years, got {rng!r}") from None
            periods.append((label, y0, y1))
        periods = tuple(periods)
    else:
        periods = DEFAULT_PERIODS

    model = cp["model"] if "model" in cp else cp[cp.default_section]
    mode = model.get("classification_mode", "quartile").strip()
    thresholds = _floats(model.get("thresholds", "25, 50, 75"), "thresholds")
    cat_text = model.get("catalogs", "itau, parametric, gaussian").strip()
    catalogs = tuple(CATALOGS) if cat_text == "all" else tuple(c.strip() for c in cat_text.split(",") if c.strip())
    for c in catalogs:
        if c not in CATALOGS:
            raise ConfigError(f"[model] catalogs: unknown catalog {c!r} (choose from {sorted(CATALOGS)} or all)")
    if not catalogs:
        raise ConfigError("[model] catalogs: at least one catalog is required")
    risk_catalog = model.get("risk_catalog", "best").strip()
    if risk_catalog != "best" and risk_catalog not in catalogs:
        raise ConfigError(f"[model] risk_catalog {risk_catalog!r} is neither 'best' nor a fitted catalog")
    try:
        psi0 = model.getfloat("psi0", fallback=0.9)
    except ValueError:
        raise ConfigError("[model] psi0 must be a number") from None
    if not 0.0 < psi0 < 1.0:
        raise ConfigError(f"[model] psi0 must lie in (0, 1), got {psi0}")
    levels = _floats(model.get("var_levels", "0.95, 0.99"), "var_levels")
    if not levels or any(not 0.0 < v < 1.0 for v in levels):
        raise ConfigError(f"[model] var_levels must lie in (0, 1), got {levels}")
    policy = model.get("lambda_policy", "both").strip()
    if policy != "both" and policy not in POLICIES:
        raise ConfigError(f"[model] lambda_policy must be both or one of {POLICIES}, got {policy!r}")
    seed = _int(model, "seed", 1)
    workers = _int(model, "workers", 1)
    min_obs = _int(model, "min_obs", 100)
    if workers < 1 or min_obs < 30:
        raise ConfigError("[model] workers must be >= 1 and min_obs >= 30")

    out = cp["output"].get("directory", "out") if "output" in cp else "out"
    truth = cp["simulate"].get("truth") if "simulate" in cp else None

    try:
        PeriodSpec(periods, mode, thresholds)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(paths["returns"], paths["esg"], paths["meta"], paths["market"], resolve(out), periods,
                     mode, thresholds, catalogs, risk_catalog, psi0, levels, policy, seed, workers, min_obs,
                     resolve(truth) if truth else None, path)


def write_config(path, data_paths, periods, output="out", truth=None, **model):
    """Write an INI config (used by the simulator)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["data"] = dict(data_paths)
    cp["periods"] = {label: f"{y0}:{y1}" for label, y0, y1 in periods}
    cp["model"] = {k: (", ".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v)) for k, v in model.items()}
    cp["output"] = {"directory": output}
    if truth:
        cp["simulate"] = {"truth": truth}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        cp.write(fh)
