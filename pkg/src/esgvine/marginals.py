"""GARCH(1,1) with standardized Student-t innovations, and the PIT.

The return series is demeaned by its sample mean (no ARMA mean
equation). The variance recursion is

    sigma2[t] = gamma0 + gamma1 * eps[t-1]**2 + beta1 * sigma2[t-1]

with ``sigma2[0]`` set to the sample variance. Innovations
``z = eps / sigma`` follow a Student-t with ``nu > 2`` degrees of freedom
rescaled to unit variance.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal, special, stats

from .copula.pair import clamp

MIN_SERIES_LENGTH = 100
_MAX_PERSISTENCE = 1.0 - 1e-6
_NU_MAX = 200.0


class GarchFitError(RuntimeError):
    """Estimation failed (degenerate data, non-convergence, non-stationarity)."""


@dataclass(frozen=True)
class MarginalFit:
    """A fitted GARCH(1,1)-t marginal.

    Attributes
    ----------
    gamma0, gamma1, beta1 : float
        Variance-equation parameters.
    nu : float
        Degrees of freedom of the standardized Student-t innovation.
    mu : float
        Sample mean removed before fitting.
    sigma : ndarray
        Conditional volatility path.
    u : ndarray
        Pseudo-copula observations from the PIT.
    loglik : float
    converged : bool
    """

    gamma0: float
    gamma1: float
    beta1: float
    nu: float
    mu: float = 0.0
    loglik: float = float("nan")
    converged: bool = True
    sigma: np.ndarray = field(default=None, repr=False, compare=False)
    u: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def params(self):
        return (self.gamma0, self.gamma1, self.beta1, self.nu)

    def to_dict(self):
        ll = self.loglik if np.isfinite(self.loglik) else None
        return {"gamma0": self.gamma0, "gamma1": self.gamma1, "beta1": self.beta1, "nu": self.nu,
                "mu": self.mu, "loglik": ll, "converged": self.converged}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["gamma0"]), float(d["gamma1"]), float(d["beta1"]), float(d["nu"]),
                   float(d.get("mu", 0.0)), float("nan") if d.get("loglik") is None else float(d["loglik"]),
                   bool(d.get("converged", True)))


def variance_path(eps, gamma0, gamma1, beta1, sigma2_init=None):
    """Run the GARCH(1,1) variance recursion over residuals ``eps``."""
    eps = np.asarray(eps, dtype=float)
    s0 = float(np.var(eps)) if sigma2_init is None else float(sigma2_init)
    drive = gamma0 + gamma1 * eps[:-1] ** 2
    # sigma2[t] - beta1 * sigma2[t-1] = drive[t-1], seeded with sigma2[0] = s0
    tail, _ = signal.lfilter([1.0], [1.0, -beta1], drive, zi=[beta1 * s0])
    return np.concatenate([[s0], tail])


def std_t_logpdf(z, nu):
    """Log density of the unit-variance Student-t."""
    scale = np.sqrt(nu / (nu - 2.0))
    return stats.t.logpdf(z * scale, nu) + np.log(scale)


def std_t_cdf(z, nu):
    """CDF of the unit-variance Student-t."""
    return special.stdtr(nu, np.asarray(z, dtype=float) * np.sqrt(nu / (nu - 2.0)))


def std_t_ppf(p, nu):
    """Quantile function of the unit-variance Student-t."""
    return special.stdtrit(nu, np.asarray(p, dtype=float)) * np.sqrt((nu - 2.0) / nu)


def garch_t_loglik(params, eps, sigma2_init=None):
    """Conditional log-likelihood of demeaned residuals ``eps``."""
    gamma0, gamma1, beta1, nu = params
    s2 = variance_path(eps, gamma0, gamma1, beta1, sigma2_init)
    sig = np.sqrt(s2)
    return float(np.sum(std_t_logpdf(eps / sig, nu) - np.log(sig)))


def _to_natural(x, var0):
    # x = (log gamma0/var0, logit persistence, logit share of gamma1, log(nu - 2))
    gamma0 = var0 * np.exp(x[0])
    pers = _MAX_PERSISTENCE * special.expit(x[1])
    share = special.expit(x[2])
    nu = 2.0 + min(np.exp(x[3]), _NU_MAX)
    return gamma0, pers * share, pers * (1.0 - share), nu


def _from_natural(gamma0, gamma1, beta1, nu, var0):
    pers = gamma1 + beta1
    return np.array([np.log(gamma0 / var0), special.logit(pers / _MAX_PERSISTENCE),
                     special.logit(gamma1 / pers), np.log(nu - 2.0)])


def fit_garch_t(series, min_obs=MIN_SERIES_LENGTH, maxiter=2000):
    """Maximum-likelihood fit of a GARCH(1,1) with standardized t innovations.

    Parameters
    ----------
    series : array_like
        Returns, finite, at least ``min_obs`` long.
    min_obs : int
        Minimum admissible length.
    maxiter : int
        Iteration cap passed to the optimizer.

    Returns
    -------
    MarginalFit
        Including the volatility path and the PIT series.

    Raises
    ------
    ValueError
        Too short or non-finite input.
    GarchFitError
        Degenerate series, non-convergence, or a non-stationary optimum.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or len(x) < min_obs:
        raise ValueError(f"GARCH fit needs a 1-d series of length >= {min_obs}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("GARCH fit: series contains non-finite values")
    mu = float(np.mean(x))
    eps = x - mu
    var0 = float(np.var(eps))
    if not var0 > 1e-14 * max(1.0, mu * mu):
        raise GarchFitError("degenerate series: zero variance")

    def nll(z):
        val = -garch_t_loglik(_to_natural(z, var0), eps, var0)
        return val if np.isfinite(val) else 1e300

    # starting values on a small grid of persistence / ARCH shares
    starts = []
    for g1, b1 in ((0.05, 0.90), (0.10, 0.80), (0.02, 0.50)):
        for nu in (5.0, 10.0):
            starts.append(_from_natural(var0 * (1.0 - g1 - b1), g1, b1, nu, var0))
    x0 = min(starts, key=nll)
    res = optimize.minimize(nll, x0, method="L-BFGS-B", options={"maxiter": maxiter, "gtol": 1e-7})
    if not res.success:
        alt = optimize.minimize(nll, res.x, method="Nelder-Mead",
                                options={"maxiter": maxiter, "xatol": 1e-8, "fatol": 1e-10})
        if alt.fun <= res.fun:
            res = alt
    if not res.success and res.nit >= maxiter:
        raise GarchFitError(f"GARCH fit did not converge in {maxiter} iterations")
    gamma0, gamma1, beta1, nu = (float(v) for v in _to_natural(res.x, var0))
    if gamma1 + beta1 >= _MAX_PERSISTENCE:
        raise GarchFitError(f"non-stationary optimum: gamma1 + beta1 = {gamma1 + beta1:.8f}")
    sigma = np.sqrt(variance_path(eps, gamma0, gamma1, beta1, var0))
    u = clamp(std_t_cdf(eps / sigma, nu))
    return MarginalFit(gamma0, gamma1, beta1, nu, mu, -float(res.fun), bool(res.success), sigma, u)


def pit(fit: MarginalFit, series):
    """Probability integral transform of ``series`` under ``fit``.

    Standardized residuals are mapped through the unit-variance Student-t
    CDF and clamped to ``[1e-10, 1 - 1e-10]``.
    """
    x = np.asarray(series, dtype=float)
    eps = x - fit.mu
    if fit.sigma is not None and len(fit.sigma) == len(x):
        sigma = fit.sigma
    else:
        sigma = np.sqrt(variance_path(eps, fit.gamma0, fit.gamma1, fit.beta1))
    return clamp(std_t_cdf(eps / sigma, fit.nu))


def simulate_garch_t(n, gamma0, gamma1, beta1, nu, seed=None, u=None, burn=500, mu=0.0):
    """Simulate a GARCH(1,1)-t path.

    If ``u`` is given its values are used as innovation probabilities
    (so copula samples become returns) and no burn-in is applied.
    """
    if u is None:
        rng = np.random.default_rng(seed)
        z = rng.standard_t(nu, n + burn) * np.sqrt((nu - 2.0) / nu)
    else:
        z = std_t_ppf(clamp(u), nu)
        burn = 0
    total = len(z)
    eps = np.empty(total)
    s2 = gamma0 / (1.0 - gamma1 - beta1)
    for t in range(total):
        eps[t] = np.sqrt(s2) * z[t]
        s2 = gamma0 + gamma1 * eps[t] ** 2 + beta1 * s2
    return mu + eps[burn:]
