"""Pair-copula estimation and AIC-based family selection."""
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .families import FAMILIES
from .pair import FamilyId, PairCopula, clamp

MIN_PAIR_OBS = 30


class CopulaFitError(RuntimeError):
    """No candidate family produced a finite likelihood."""


@dataclass(frozen=True)
class Catalog:
    """A named set of candidate base families and an estimation method.

    ``method='itau'`` inverts Kendall's tau for one-parameter families
    (Student-t: rho by inversion, nu by profile likelihood) and uses
    maximum likelihood only for families without a tau inversion.
    ``method='mle'`` maximises the likelihood for every family.
    """

    name: str
    families: tuple
    method: str = "itau"

    def candidates(self, tau_hat):
        """Family ids eligible for an empirical tau of ``tau_hat``.

        Tail-asymmetric families enter at 0/180 degrees for non-negative
        dependence and at 90/270 degrees for negative dependence.
        """
        out = []
        for name in self.families:
            fam = FAMILIES[name]
            if fam.asymmetric:
                rots = (0, 180) if tau_hat >= 0 else (90, 270)
                out.extend(FamilyId(name, r) for r in rots)
            else:
                out.append(FamilyId(name, 0))
        return sorted(out, key=lambda f: f.sort_key)


ITAU = Catalog("itau", ("independence", "gaussian", "student_t", "frank", "clayton", "gumbel", "joe"), "itau")
PARAMETRIC = Catalog("parametric", ITAU.families + ("bb1", "bb7", "bb8"), "mle")
GAUSSIAN = Catalog("gaussian", ("gaussian",), "itau")
CATALOGS = {c.name: c for c in (ITAU, PARAMETRIC, GAUSSIAN)}


def get_catalog(catalog):
    if isinstance(catalog, Catalog):
        return catalog
    try:
        return CATALOGS[catalog]
    except KeyError:
        raise ValueError(f"unknown catalog {catalog!r}; choose from {sorted(CATALOGS)}") from None


def empirical_tau(x, y):
    """Kendall's tau-b with tie correction, O(n log n).

    Raises ``ValueError`` for fewer than two observations or a constant input.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("empirical_tau needs two 1-d arrays of equal length")
    if len(x) < 2:
        raise ValueError("empirical_tau needs at least two observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("empirical_tau: zero-variance input")
    return float(stats.kendalltau(x, y, variant="b").statistic)


def _clip_to_bounds(fam, params):
    return tuple(float(np.clip(p, lo, hi)) for p, (lo, hi) in zip(params, fam.bounds))


def _rotated_base_tau(fid, tau):
    return -tau if fid.rotation in (90, 270) else tau


def _nll(fid, u1, u2):
    def f(p):
        try:
            with np.errstate(all="ignore"):  # saturated tails give -inf, penalised below
                val = -PairCopula(fid, tuple(p)).loglik_of(u1, u2)
        except ValueError:
            return 1e300
        return val if np.isfinite(val) else 1e300
    return f


def _itau_params(fid, tau, u1, u2):
    fam = fid.family
    base_tau = abs(_rotated_base_tau(fid, tau)) if fam.asymmetric else _rotated_base_tau(fid, tau)
    if fam.name == "student_t":
        rho = _clip_to_bounds(fam, fam.params_from_tau(base_tau))[0]
        lo, hi = fam.bounds[1]
        nll = _nll(fid, u1, u2)
        # profile nu on the log scale; the likelihood is flat in nu, so 1e-3 suffices
        res = optimize.minimize_scalar(lambda ln: nll((rho, np.exp(ln))), bounds=(np.log(lo), np.log(hi)),
                                       method="bounded", options={"xatol": 1e-3})
        return (rho, float(np.clip(np.exp(res.x), lo, hi)))
    if fam.name == "frank" and base_tau == 0:
        raise ValueError("frank: tau = 0")
    if fam.asymmetric and base_tau == 0:
        base_tau = 1e-6
    return _clip_to_bounds(fam, fam.params_from_tau(base_tau))


def _mle_params(fid, tau, u1, u2):
    fam = fid.family
    nll = _nll(fid, u1, u2)
    if fam.itau:
        try:
            starts = [_itau_params(fid, tau, u1, u2)]
        except ValueError:
            starts = []
        if fam.name == "student_t":
            starts.append((starts[0][0] if starts else 0.0, 8.0))
    else:
        base_tau = abs(_rotated_base_tau(fid, tau))
        starts = [_clip_to_bounds(fam, p) for p in fam.start_points(base_tau)]
    if not starts:
        raise ValueError(f"{fid}: no admissible starting value")
    starts.sort(key=nll)
    best = None
    for x0 in starts[:2]:
        if fam.n_params == 1:
            lo, hi = fam.bounds[0]
            width = 0.5 * (hi - lo)
            a, b = max(lo, x0[0] - width), min(hi, x0[0] + width)
            res = optimize.minimize_scalar(lambda t: nll((t,)), bounds=(a, b), method="bounded",
                                           options={"xatol": 1e-7})
            cand = ((float(res.x),), float(res.fun))
        else:
            res = optimize.minimize(nll, np.asarray(x0), method="L-BFGS-B", bounds=fam.bounds,
                                    options={"maxiter": 200})
            cand = (tuple(float(v) for v in res.x), float(res.fun))
        if nll(x0) < cand[1]:
            cand = (tuple(x0), nll(x0))
        if best is None or cand[1] < best[1]:
            best = cand
    return best[0]


def fit_family(fid, u1, u2, method="itau", tau=None):
    """Estimate the parameters of one candidate family.

    Returns a :class:`PairCopula` with ``loglik`` filled in.
    """
    fid = fid if isinstance(fid, FamilyId) else FamilyId.parse(fid)
    u1, u2 = clamp(u1), clamp(u2)
    n = len(u1)
    if fid.base == "independence":
        return PairCopula(fid, (), 0.0, n)
    if tau is None:
        tau = empirical_tau(u1, u2)
    if method == "itau" and fid.family.itau:
        params = _itau_params(fid, tau, u1, u2)
    else:
        params = _mle_params(fid, tau, u1, u2)
    pc = PairCopula(fid, params)
    with np.errstate(all="ignore"):
        ll = pc.loglik_of(u1, u2)
    return PairCopula(fid, params, ll, n)


def fit_pair(u1, u2, catalog="itau", method=None, return_candidates=False):
    """Select a pair copula by AIC among the catalog candidates.

    Parameters
    ----------
    u1, u2 : array_like
        Pseudo-observations in (0, 1) of equal length (at least 30).
    catalog : str or Catalog
        ``"itau"``, ``"parametric"``, ``"gaussian"`` or a :class:`Catalog`.
    method : {"itau", "mle"}, optional
        Overrides the catalog's estimation method.

    Returns
    -------
    PairCopula
        The minimum-AIC candidate; ties go to the earlier catalog entry.
    """
    cat = get_catalog(catalog)
    method = method or cat.method
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != u2.shape or u1.ndim != 1:
        raise ValueError("fit_pair needs two 1-d arrays of equal length")
    if len(u1) < MIN_PAIR_OBS:
        raise ValueError(f"fit_pair needs at least {MIN_PAIR_OBS} observations, got {len(u1)}")
    if np.any((u1 <= 0) | (u1 >= 1) | (u2 <= 0) | (u2 >= 1)):
        raise ValueError("fit_pair: pseudo-observations must lie strictly inside (0, 1)")
    tau = empirical_tau(u1, u2)
    if abs(tau) >= 1.0 - 1e-12:
        # every catalog family has |tau| < 1, so perfect concordance has no admissible fit
        raise CopulaFitError(f"no feasible copula family: empirical tau {tau:.6f} is at the boundary")
    fits = []
    for fid in cat.candidates(tau):
        try:
            pc = fit_family(fid, u1, u2, method, tau)
        except ValueError:
            continue
        if pc.loglik is not None and np.isfinite(pc.loglik):
            fits.append(pc)
    if not fits:
        raise CopulaFitError(f"no feasible copula family in catalog {cat.name!r} (empirical tau {tau:.4f})")
    best = min(fits, key=lambda pc: pc.aic)  # min keeps the first of equal AICs
    return (best, fits) if return_candidates else best
