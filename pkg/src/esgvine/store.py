"""Versioned JSON archives of fitted models.

An archive holds one vine model (one period, one catalog) with the
classification and marginal fits it was built from. Files are written
with sorted keys and shortest round-trip float text, so the same model
always produces the same bytes and reloads bit-exactly.
"""
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Optional

import jsonschema

from .copula.pair import PairCopula
from .marginals import MarginalFit
from .vine import Edge, VineModel, VineStructure, validate_proximity

FORMAT_VERSION = 1


class ArchiveError(ValueError):
    """Base class for archive load failures."""


class SchemaError(ArchiveError):
    pass


class VersionError(ArchiveError):
    pass


class DigestError(ArchiveError):
    pass


class DomainError(ArchiveError):
    pass


def schema():
    """The published JSON Schema of the archive format."""
    text = resources.files("esgvine").joinpath("archive.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass
class ModelArchive:
    """Everything needed to reuse a fitted model.

    Attributes
    ----------
    model : VineModel
    marginals : dict
        Variable name to :class:`MarginalFit`.
    classification : dict
        ``{"mode": ..., "assets": [{"asset", "class", "mean_esg", "weight"}]}``.
    panel_digest : str
        Hash of the input panel, see :meth:`AssetPanel.digest`.
    psi0 : float
        Prior used for the stored mBIC.
    reports : dict
        Free-form report payloads (e.g. risk rows).
    """

    model: VineModel
    marginals: Dict[str, MarginalFit] = field(default_factory=dict)
    classification: dict = field(default_factory=lambda: {"mode": "quartile", "assets": []})
    panel_digest: str = ""
    psi0: float = 0.9
    reports: dict = field(default_factory=dict)
    config_digest: Optional[str] = None
    format_version: int = FORMAT_VERSION

    def to_dict(self):
        m = self.model
        trees = []
        for tree in m.structure.trees:
            items = []
            for e in tree:
                pc = m.copulas[e]
                items.append({"edge": str(e), "family": str(pc.family), "params": list(pc.params),
                              "loglik": _num(pc.loglik), "nobs": pc.nobs,
                              "tau_emp": _num(m.empirical_tau.get(e))})
            trees.append(items)
        d = {
            "format_version": self.format_version,
            "panel_digest": self.panel_digest,
            "config_digest": self.config_digest,
            "period": m.period or "",
            "catalog": m.catalog_name,
            "classification": {"mode": self.classification.get("mode", "quartile"),
                               "assets": sorted(self.classification.get("assets", []),
                                                key=lambda r: r["asset"])},
            "marginals": {k: v.to_dict() for k, v in sorted(self.marginals.items())},
            "vine": {"nodes": list(m.structure.nodes), "membership": dict(sorted(m.structure.membership.items())),
                     "trees": trees},
            "fit": {"nobs": int(m.nobs), "loglik": m.loglik, "npars": m.npars, "aic": m.aic, "bic": m.bic,
                    "mbic": m.mbic(self.psi0), "psi0": self.psi0},
        }
        if self.reports:
            d["reports"] = self.reports
        return d

    @classmethod
    def from_dict(cls, d):
        v = d["vine"]
        trees, copulas, emp = [], {}, {}
        for m, items in enumerate(v["trees"], start=1):
            level = []
            for it in items:
                e = Edge.parse(it["edge"], tree=m)
                try:
                    pc = PairCopula(it["family"], tuple(it["params"]), it.get("loglik"), it.get("nobs"))
                except ValueError as exc:
                    raise DomainError(f"edge {e} (tree {m}): {exc}") from None
                level.append(e)
                copulas[e] = pc
                if it.get("tau_emp") is not None:
                    emp[e] = float(it["tau_emp"])
            trees.append(tuple(level))
        structure = VineStructure(tuple(v["nodes"]), tuple(trees), dict(v["membership"]))
        try:
            validate_proximity(structure)
        except ValueError as exc:
            raise DomainError(f"vine structure: {exc}") from None
        model = VineModel(structure, copulas, int(d["fit"]["nobs"]), d["catalog"], d["period"] or None, emp)
        marg = {k: MarginalFit.from_dict(x) for k, x in d["marginals"].items()}
        return cls(model, marg, d["classification"], d["panel_digest"], float(d["fit"]["psi0"]),
                   d.get("reports", {}), d.get("config_digest"), int(d["format_version"]))

    def __eq__(self, other):
        return isinstance(other, ModelArchive) and self.to_dict() == other.to_dict()


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def dumps(archive: ModelArchive) -> str:
    return json.dumps(archive.to_dict(), sort_keys=True, indent=1, allow_nan=False, ensure_ascii=False) + "\n"


def save(archive: ModelArchive, path):
    """Write ``archive`` to ``path`` atomically (temp file, then rename).

    Raises
    ------
    OSError
        With the target path in the message.
    """
    path = os.fspath(path)
    text = dumps(archive)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".archive-", suffix=".tmp", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
        tmp = None
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write archive {path}: {exc.strerror or exc}") from exc
    finally:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)


def validate(data):
    """Check a decoded archive against the version and the schema."""
    if not isinstance(data, dict):
        raise SchemaError("archive root must be a JSON object")
    ver = data.get("format_version")
    if isinstance(ver, int) and ver > FORMAT_VERSION:
        raise VersionError(f"archive format_version {ver} is newer than supported version {FORMAT_VERSION}")
    if isinstance(ver, int) and ver < 1:
        raise VersionError(f"unknown archive format_version {ver}")
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"schema violation at {where}: {err.message}")


def load(path, expected_digest=None) -> ModelArchive:
    """Read and validate an archive.

    Parameters
    ----------
    path : str or path-like
    expected_digest : str, optional
        If given, the archive's panel digest must match it.

    Raises
    ------
    SchemaError, VersionError, DigestError, DomainError
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"archive {path} is not valid JSON (truncated?): {exc}") from None
    validate(data)
    if expected_digest is not None and data["panel_digest"] != expected_digest:
        raise DigestError(f"archive {path} was built from a different panel "
                          f"(digest {data['panel_digest'][:12]}..., expected {expected_digest[:12]}...)")
    return ModelArchive.from_dict(data)
