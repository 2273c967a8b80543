"""Pair copulas: a family, a rotation and a parameter vector.

Rotations are counterclockwise. With ``c`` the unrotated density,

* 90 degrees:  ``c(1 - u2, u1)``
* 180 degrees: ``c(1 - u1, 1 - u2)``
* 270 degrees: ``c(u2, 1 - u1)``
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .families import FAMILIES, FAMILY_ORDER, Family

U_EPS = 1e-10
ROTATIONS = (0, 90, 180, 270)


def clamp(u):
    """Clip probabilities to ``[1e-10, 1 - 1e-10]``."""
    return np.clip(np.asarray(u, dtype=float), U_EPS, 1.0 - U_EPS)


@dataclass(frozen=True, order=True)
class FamilyId:
    """A base family name together with a rotation in degrees."""

    base: str
    rotation: int = 0

    def __post_init__(self):
        if self.base not in FAMILIES:
            raise ValueError(f"unknown copula family {self.base!r}")
        if self.rotation not in ROTATIONS:
            raise ValueError(f"rotation must be one of {ROTATIONS}, got {self.rotation}")
        if self.rotation and not FAMILIES[self.base].asymmetric:
            raise ValueError(f"{self.base} admits only the 0 degree rotation")

    @classmethod
    def parse(cls, text):
        """Parse ``"clayton@180"`` (a bare name means 0 degrees)."""
        base, _, rot = str(text).partition("@")
        return cls(base.strip().lower(), int(rot) if rot else 0)

    def __str__(self):
        return f"{self.base}@{self.rotation}"

    @property
    def family(self) -> Family:
        return FAMILIES[self.base]

    @property
    def label(self):
        """Display name as used in census tables, e.g. ``"Gumbel 180°"``."""
        lab = self.family.label
        return lab if self.rotation == 0 else f"{lab} {self.rotation}°"

    @property
    def sort_key(self):
        return (self.rotation != 0, FAMILY_ORDER.index(self.base), self.rotation)


@dataclass(frozen=True)
class PairCopula:
    """A fully specified bivariate copula.

    Parameters
    ----------
    family : FamilyId
    params : tuple of float
    loglik : float, optional
        Log-likelihood at the fitted parameters, if the copula was estimated.
    nobs : int, optional
        Sample size used for estimation.
    """

    family: FamilyId
    params: tuple = ()
    loglik: Optional[float] = None
    nobs: Optional[int] = None
    _fam: Family = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fam = self.family if isinstance(self.family, FamilyId) else FamilyId.parse(self.family)
        object.__setattr__(self, "family", fam)
        params = tuple(float(p) for p in np.atleast_1d(self.params)) if len(np.atleast_1d(self.params)) else ()
        object.__setattr__(self, "params", params)
        fam.family.check(params)
        object.__setattr__(self, "_fam", fam.family)

    @classmethod
    def independence(cls):
        return cls(FamilyId("independence"), ())

    @property
    def n_params(self):
        return self._fam.n_params

    @property
    def rotation(self):
        return self.family.rotation

    @property
    def is_independence(self):
        return self.family.base == "independence"

    @property
    def aic(self):
        return -2.0 * self.loglik + 2.0 * self.n_params

    # -- dependence measures -------------------------------------------------

    @property
    def tau(self):
        t = float(self._fam.tau(self.params))
        return -t if self.rotation in (90, 270) else t

    @property
    def lambda_lower(self):
        if self.rotation in (90, 270):
            return 0.0
        if self.rotation == 180:
            return float(self._fam.lambda_upper(self.params))
        return float(self._fam.lambda_lower(self.params))

    @property
    def lambda_upper(self):
        if self.rotation in (90, 270):
            return 0.0
        if self.rotation == 180:
            return float(self._fam.lambda_lower(self.params))
        return float(self._fam.lambda_upper(self.params))

    # -- distribution functions ----------------------------------------------

    def cdf(self, u1, u2):
        f, p, r = self._fam, self.params, self.rotation
        u1, u2 = np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)
        if r == 0:
            return f.cdf(u1, u2, p)
        if r == 90:
            return u1 - f.cdf(1.0 - u2, u1, p)
        if r == 180:
            return u1 + u2 - 1.0 + f.cdf(1.0 - u1, 1.0 - u2, p)
        return u2 - f.cdf(u2, 1.0 - u1, p)

    def logpdf(self, u1, u2):
        f, p, r = self._fam, self.params, self.rotation
        u1, u2 = clamp(u1), clamp(u2)
        if r == 0:
            return f.logpdf(u1, u2, p)
        if r == 90:
            return f.logpdf(1.0 - u2, u1, p)
        if r == 180:
            return f.logpdf(1.0 - u1, 1.0 - u2, p)
        return f.logpdf(u2, 1.0 - u1, p)

    def pdf(self, u1, u2):
        return np.exp(self.logpdf(u1, u2))

    def loglik_of(self, u1, u2):
        return float(np.sum(self.logpdf(u1, u2)))

    def hfunc1(self, u1, u2):
        """``dC/du1``: conditional cdf of ``U2`` at ``u2`` given ``U1 = u1``."""
        f, p, r = self._fam, self.params, self.rotation
        u1, u2 = clamp(u1), clamp(u2)
        if r == 0:
            out = f.hfunc(u2, u1, p)
        elif r == 90:
            out = 1.0 - f.hfunc(1.0 - u2, u1, p)
        elif r == 180:
            out = 1.0 - f.hfunc(1.0 - u2, 1.0 - u1, p)
        else:
            out = f.hfunc(u2, 1.0 - u1, p)
        return clamp(out)

    def hfunc2(self, u1, u2):
        """``dC/du2``: conditional cdf of ``U1`` at ``u1`` given ``U2 = u2``."""
        f, p, r = self._fam, self.params, self.rotation
        u1, u2 = clamp(u1), clamp(u2)
        if r == 0:
            out = f.hfunc(u1, u2, p)
        elif r == 90:
            out = f.hfunc(u1, 1.0 - u2, p)
        elif r == 180:
            out = 1.0 - f.hfunc(1.0 - u1, 1.0 - u2, p)
        else:
            out = 1.0 - f.hfunc(1.0 - u1, u2, p)
        return clamp(out)

    def hinv1(self, w, u1):
        """Inverse of :meth:`hfunc1` in ``u2``."""
        f, p, r = self._fam, self.params, self.rotation
        w, u1 = clamp(w), clamp(u1)
        if r == 0:
            out = f.hinv(w, u1, p)
        elif r == 90:
            out = 1.0 - f.hinv(1.0 - w, u1, p)
        elif r == 180:
            out = 1.0 - f.hinv(1.0 - w, 1.0 - u1, p)
        else:
            out = f.hinv(w, 1.0 - u1, p)
        return clamp(out)

    def hinv2(self, w, u2):
        """Inverse of :meth:`hfunc2` in ``u1``."""
        f, p, r = self._fam, self.params, self.rotation
        w, u2 = clamp(w), clamp(u2)
        if r == 0:
            out = f.hinv(w, u2, p)
        elif r == 90:
            out = f.hinv(w, 1.0 - u2, p)
        elif r == 180:
            out = 1.0 - f.hinv(1.0 - w, 1.0 - u2, p)
        else:
            out = 1.0 - f.hinv(1.0 - w, u2, p)
        return clamp(out)

    def sample(self, n, seed=None):
        """Draw ``n`` pairs by inverting :meth:`hfunc1`."""
        rng = np.random.default_rng(seed)
        u1 = rng.random(n)
        w = rng.random(n)
        return np.column_stack([u1, self.hinv1(w, u1)])

    def to_dict(self):
        return {"family": str(self.family), "params": list(self.params),
                "loglik": self.loglik, "nobs": self.nobs}

    @classmethod
    def from_dict(cls, d):
        return cls(FamilyId.parse(d["family"]), tuple(d.get("params", ())),
                   d.get("loglik"), d.get("nobs"))


# -- functional interface ------------------------------------------------------

def density(pc: PairCopula, u1, u2):
    """Copula density ``c(u1, u2)``."""
    return pc.pdf(u1, u2)


def hfunc(pc: PairCopula, u_target, u_cond, direction=1):
    """Conditional distribution function of one margin given the other.

    ``direction=1`` treats ``u_target`` as the first copula argument and
    returns ``P(U1 <= u_target | U2 = u_cond)``; ``direction=2`` returns
    ``P(U2 <= u_target | U1 = u_cond)``.
    """
    if direction == 1:
        return pc.hfunc2(u_target, u_cond)
    if direction == 2:
        return pc.hfunc1(u_cond, u_target)
    raise ValueError("direction must be 1 or 2")


def tau_of(pc: PairCopula):
    return pc.tau


def lambda_lower_of(pc: PairCopula):
    return pc.lambda_lower


def params_from_tau(family, tau, **kwargs):
    """Invert Kendall's tau for ``family`` (a :class:`FamilyId` or ``"name@rot"``).

    Raises ``ValueError`` if ``tau`` is not attainable under the rotation.
    """
    fid = family if isinstance(family, FamilyId) else FamilyId.parse(family)
    base_tau = -tau if fid.rotation in (90, 270) else tau
    fam = fid.family
    if fam.n_params == 0:
        if tau != 0:
            raise ValueError("independence: only tau = 0 is attainable")
        return ()
    lo, hi = fam.tau_range()
    if not lo <= base_tau < hi or (fid.rotation in (90, 270) and tau >= 0) or \
            (fid.rotation in (0, 180) and fam.asymmetric and tau < 0):
        raise ValueError(f"{fid}: tau={tau} outside attainable range")
    return tuple(fam.params_from_tau(base_tau, **kwargs))


def sample_pair(pc: PairCopula, n, seed=None):
    return pc.sample(n, seed)
