"""Bivariate copula families at 0 degree rotation.

Every family here is exchangeable, ``C(u, v) == C(v, u)``, so a single
conditional distribution function ``hfunc(u, v) = dC(u, v)/dv`` covers
both conditioning directions. Rotations are handled one level up in
:mod:`esgvine.copula.pair`.

Archimedean families are evaluated through their generator ``phi`` in
log space. Each probability argument travels as the pair
``(log t, log(1 - t))`` so that both tails keep full relative precision.
"""
import numpy as np
from scipy import integrate, optimize, special

_LOGIT_BOUND = 40.0
_BISECT_STEPS = 64


def _log_pair(t):
    t = np.asarray(t, dtype=float)
    return np.log(t), np.log1p(-t)


def _log1mexp(x):
    """log(1 - exp(x)) for x <= 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > -0.693, np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


def _t_ppf(nu, p):
    """Student-t quantile through the inverse regularized incomplete beta.

    Faster than ``special.stdtrit``; the central branch uses the
    complementary form to avoid cancellation near ``p = 0.5``.
    """
    p = np.asarray(p, dtype=float)
    q = np.minimum(p, 1.0 - p)
    t = np.empty_like(q)
    tail = q < 0.25
    x = special.betaincinv(0.5 * nu, 0.5, 2.0 * q[tail])
    t[tail] = np.sqrt(nu * (1.0 - x) / x)
    y = special.betaincinv(0.5, 0.5 * nu, 1.0 - 2.0 * q[~tail])
    t[~tail] = np.sqrt(nu * y / (1.0 - y))
    return np.where(p < 0.5, -t, t)


class Family:
    """Base class for a one- or two-parameter bivariate copula family.

    Attributes
    ----------
    name : str
        Serialisation key (``"clayton"``, ``"student_t"``, ...).
    label : str
        Display name used in census tables.
    n_params : int
        Number of free parameters.
    itau : bool
        Whether the parameter is recoverable from Kendall's tau alone.
    asymmetric : bool
        Tail-asymmetric families admit 90/180/270 degree rotations.
    negative : bool
        Whether the unrotated family covers negative dependence.
    bounds : tuple of (float, float)
        Box used when estimating parameters.
    """

    name = ""
    label = ""
    n_params = 0
    itau = False
    asymmetric = False
    negative = False
    bounds = ()

    def check(self, params):
        """Raise ``ValueError`` if ``params`` lies outside the family domain."""
        if len(params) != self.n_params:
            raise ValueError(f"{self.name}: expected {self.n_params} parameters, got {len(params)}")
        if not all(np.isfinite(params)):
            raise ValueError(f"{self.name}: non-finite parameter {tuple(params)}")
        self._check(params)

    def _check(self, params):
        pass

    def cdf(self, u, v, params):
        raise NotImplementedError

    def logpdf(self, u, v, params):
        raise NotImplementedError

    def pdf(self, u, v, params):
        return np.exp(self.logpdf(u, v, params))

    def hfunc(self, u, v, params):
        """Conditional distribution ``P(U <= u | V = v) = dC(u, v)/dv``."""
        raise NotImplementedError

    def hinv(self, w, v, params):
        """Solve ``hfunc(u, v) = w`` for ``u`` by bisection on the logit scale."""
        w = np.asarray(w, dtype=float)
        v = np.broadcast_to(np.asarray(v, dtype=float), w.shape)
        lo = np.full(w.shape, -_LOGIT_BOUND)
        hi = np.full(w.shape, _LOGIT_BOUND)
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            below = self.hfunc(special.expit(mid), v, params) < w
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return special.expit(0.5 * (lo + hi))

    def tau(self, params):
        raise NotImplementedError

    def params_from_tau(self, tau):
        raise ValueError(f"{self.name}: no Kendall's tau inversion")

    def tau_range(self):
        """Open interval of attainable Kendall's tau values."""
        return (0.0, 1.0) if not self.negative else (-1.0, 1.0)

    def lambda_lower(self, params):
        return 0.0

    def lambda_upper(self, params):
        return 0.0

    def start_points(self, tau):
        """Candidate starting values for likelihood maximisation."""
        return [tuple(self.params_from_tau(tau))]


class Independence(Family):
    name = "independence"
    label = "Independence"

    def cdf(self, u, v, params):
        return np.asarray(u, dtype=float) * np.asarray(v, dtype=float)

    def logpdf(self, u, v, params):
        return np.zeros(np.broadcast(np.asarray(u), np.asarray(v)).shape)

    def hfunc(self, u, v, params):
        return np.broadcast_to(np.asarray(u, dtype=float), np.broadcast(np.asarray(u), np.asarray(v)).shape).copy()

    def hinv(self, w, v, params):
        return self.hfunc(w, v, params)

    def tau(self, params):
        return 0.0

    def tau_range(self):
        return (0.0, 0.0)

    def params_from_tau(self, tau):
        return ()


def _bvn_cdf(x, y, rho):
    """Bivariate standard normal cdf via Owen's T function."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    tiny = 1e-300
    x = np.where(x == 0.0, tiny, x)
    y = np.where(y == 0.0, tiny, y)
    s = np.sqrt(1.0 - rho * rho)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ax = (y - rho * x) / (x * s)
        ay = (x - rho * y) / (y * s)
    beta = np.where(x * y > 0, 0.0, 0.5)
    out = 0.5 * (special.ndtr(x) + special.ndtr(y)) - special.owens_t(x, ax) - special.owens_t(y, ay) - beta
    return np.clip(out, 0.0, 1.0)


class Gaussian(Family):
    name = "gaussian"
    label = "Gaussian"
    n_params = 1
    itau = True
    negative = True
    bounds = ((-0.9999, 0.9999),)

    def _check(self, params):
        if not -1.0 < params[0] < 1.0:
            raise ValueError(f"gaussian: rho={params[0]} outside (-1, 1)")

    def cdf(self, u, v, params):
        return _bvn_cdf(special.ndtri(u), special.ndtri(v), params[0])

    def logpdf(self, u, v, params):
        rho = params[0]
        x, y = special.ndtri(u), special.ndtri(v)
        r2 = 1.0 - rho * rho
        return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)

    def hfunc(self, u, v, params):
        rho = params[0]
        x, y = special.ndtri(u), special.ndtri(v)
        return special.ndtr((x - rho * y) / np.sqrt(1.0 - rho * rho))

    def hinv(self, w, v, params):
        rho = params[0]
        y = special.ndtri(v)
        return special.ndtr(special.ndtri(w) * np.sqrt(1.0 - rho * rho) + rho * y)

    def tau(self, params):
        return 2.0 / np.pi * np.arcsin(params[0])

    def params_from_tau(self, tau):
        return (float(np.sin(np.pi * tau / 2.0)),)


class StudentT(Family):
    name = "student_t"
    label = "Studentst"
    n_params = 2
    itau = True
    negative = True
    # nu is fitted on (2, 30]; evaluation accepts any nu > 0
    bounds = ((-0.9999, 0.9999), (2.0001, 30.0))

    def _check(self, params):
        rho, nu = params
        if not -1.0 < rho < 1.0:
            raise ValueError(f"student_t: rho={rho} outside (-1, 1)")
        if not nu > 0:
            raise ValueError(f"student_t: nu={nu} must be positive")

    def cdf(self, u, v, params):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        uf, vf = u.ravel(), v.ravel()
        if not uf.size:
            return np.empty(u.shape)
        tiny = np.finfo(float).tiny

        # integrate the conditional cdf over the conditioning margin, s = v * t,
        # all points at once on a shared adaptive subdivision
        def integrand(t):
            return vf * self.hfunc(uf, np.maximum(vf * t, tiny), params)

        val, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, norm="max", limit=400)
        return np.where(vf > 0, val, 0.0).reshape(u.shape)

    def logpdf(self, u, v, params):
        rho, nu = params
        x, y = _t_ppf(nu, u), _t_ppf(nu, v)
        r2 = 1.0 - rho * rho
        q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2)
        const = (special.gammaln((nu + 2.0) / 2.0) + special.gammaln(nu / 2.0)
                 - 2.0 * special.gammaln((nu + 1.0) / 2.0) - 0.5 * np.log(r2))
        return (const - (nu + 2.0) / 2.0 * np.log1p(q)
                + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu)))

    def hfunc(self, u, v, params):
        rho, nu = params
        x, y = _t_ppf(nu, u), _t_ppf(nu, v)
        scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
        return special.stdtr(nu + 1.0, (x - rho * y) / scale)

    def hinv(self, w, v, params):
        rho, nu = params
        y = _t_ppf(nu, v)
        scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
        return special.stdtr(nu, _t_ppf(nu + 1.0, w) * scale + rho * y)

    def tau(self, params):
        return 2.0 / np.pi * np.arcsin(params[0])

    def params_from_tau(self, tau, nu=4.0):
        return (float(np.sin(np.pi * tau / 2.0)), float(nu))

    def lambda_lower(self, params):
        rho, nu = params
        if rho <= -1.0:
            return 0.0
        arg = -np.sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho))
        return float(2.0 * special.stdtr(nu + 1.0, arg))

    lambda_upper = lambda_lower


class Archimedean(Family):
    """Archimedean copula ``C(u, v) = psi(phi(u) + phi(v))``.

    Subclasses supply, in log space, the generator ``phi``, its inverse,
    ``-phi'`` and ``phi''``; arguments are ``(lt, l1m) = (log t, log(1-t))``.
    """

    def _log_phi(self, lt, l1m, params):
        raise NotImplementedError

    def _inv(self, ls, params):
        """Return ``(log t, log(1 - t))`` for ``t = psi(exp(ls))``."""
        raise NotImplementedError

    def _log_ndphi(self, lt, l1m, params):
        raise NotImplementedError

    def _log_d2phi(self, lt, l1m, params):
        raise NotImplementedError

    def _log_s(self, u, v, params):
        return np.logaddexp(self._log_phi(*_log_pair(u), params), self._log_phi(*_log_pair(v), params))

    def cdf(self, u, v, params):
        lt, _ = self._inv(self._log_s(u, v, params), params)
        return np.exp(lt)

    def logpdf(self, u, v, params):
        lc = self._inv(self._log_s(u, v, params), params)
        return (self._log_d2phi(*lc, params) + self._log_ndphi(*_log_pair(u), params)
                + self._log_ndphi(*_log_pair(v), params) - 3.0 * self._log_ndphi(*lc, params))

    def hfunc(self, u, v, params):
        lc = self._inv(self._log_s(u, v, params), params)
        return np.exp(self._log_ndphi(*_log_pair(v), params) - self._log_ndphi(*lc, params))

    def tau(self, params):
        # tau = 1 + 4 * int_0^1 phi(t) / phi'(t) dt
        def ratio(t):
            lt, l1m = _log_pair(t)
            return float(np.exp(self._log_phi(lt, l1m, params) - self._log_ndphi(lt, l1m, params)))
        val, _ = integrate.quad(ratio, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 1.0 - 4.0 * val


class Clayton(Archimedean):
    name = "clayton"
    label = "Clayton"
    n_params = 1
    itau = True
    asymmetric = True
    bounds = ((1e-4, 28.0),)

    def _check(self, params):
        if not params[0] > 0:
            raise ValueError(f"clayton: theta={params[0]} must be > 0")

    def _log_phi(self, lt, l1m, params):
        th = params[0]
        return -th * lt + _log1mexp(th * lt)

    def _inv(self, ls, params):
        lt = -np.logaddexp(0.0, ls) / params[0]
        return lt, _log1mexp(lt)

    def _log_ndphi(self, lt, l1m, params):
        th = params[0]
        return np.log(th) - (th + 1.0) * lt

    def _log_d2phi(self, lt, l1m, params):
        th = params[0]
        return np.log(th) + np.log1p(th) - (th + 2.0) * lt

    def hinv(self, w, v, params):
        th = params[0]
        w = np.asarray(w, dtype=float)
        lv = np.log(v)
        # u^-th = (w v^(th+1))^(-th/(th+1)) + 1 - v^-th, in log space
        a = -th / (th + 1.0) * (np.log(w) + (th + 1.0) * lv)
        b = -th * lv
        log_ut = a + np.log1p(-np.exp(b - a) + np.exp(-a))
        return np.exp(-log_ut / th)

    def tau(self, params):
        return params[0] / (params[0] + 2.0)

    def params_from_tau(self, tau):
        if not 0.0 < tau < 1.0:
            raise ValueError(f"clayton: tau={tau} outside attainable range (0, 1)")
        return (2.0 * tau / (1.0 - tau),)

    def lambda_lower(self, params):
        return float(2.0 ** (-1.0 / params[0]))


class Gumbel(Archimedean):
    name = "gumbel"
    label = "Gumbel"
    n_params = 1
    itau = True
    asymmetric = True
    bounds = ((1.0, 17.0),)

    def _check(self, params):
        if not params[0] >= 1.0:
            raise ValueError(f"gumbel: theta={params[0]} must be >= 1")

    def _log_phi(self, lt, l1m, params):
        return params[0] * np.log(-lt)

    def _inv(self, ls, params):
        lt = -np.exp(ls / params[0])
        return lt, _log1mexp(lt)

    def _log_ndphi(self, lt, l1m, params):
        th = params[0]
        return np.log(th) + (th - 1.0) * np.log(-lt) - lt

    def _log_d2phi(self, lt, l1m, params):
        th = params[0]
        return np.log(th) + (th - 2.0) * np.log(-lt) - 2.0 * lt + np.log(th - 1.0 - lt)

    def tau(self, params):
        return 1.0 - 1.0 / params[0]

    def params_from_tau(self, tau):
        if not 0.0 <= tau < 1.0:
            raise ValueError(f"gumbel: tau={tau} outside attainable range [0, 1)")
        return (1.0 / (1.0 - tau),)

    def lambda_upper(self, params):
        return float(2.0 - 2.0 ** (1.0 / params[0]))


def _debye1(x):
    if x == 0:
        return 1.0
    val, _ = integrate.quad(lambda t: t / np.expm1(t) if t != 0 else 1.0, 0.0, x, epsabs=1e-14, epsrel=1e-13)
    return val / x


class Frank(Archimedean):
    name = "frank"
    label = "Frank"
    n_params = 1
    itau = True
    negative = True
    bounds = ((-35.0, 35.0),)

    def _check(self, params):
        if params[0] == 0:
            raise ValueError("frank: theta must be non-zero")

    def _log_phi(self, lt, l1m, params):
        th = params[0]
        t = np.exp(lt)
        one_minus_r = np.exp(-th * t) * np.expm1(-th * np.exp(l1m)) / np.expm1(-th)
        return np.log(-np.log1p(-one_minus_r))

    def _inv(self, ls, params):
        th = params[0]
        t = np.clip(-np.log1p(np.expm1(-th) * np.exp(-np.exp(ls))) / th, 0.0, 1.0)
        return np.log(t), np.log1p(-t)

    def _log_ndphi(self, lt, l1m, params):
        th = params[0]
        return np.log(th / np.expm1(th * np.exp(lt)))

    def _log_d2phi(self, lt, l1m, params):
        th = params[0]
        t = np.exp(lt)
        return 2.0 * np.log(abs(th)) + th * t - 2.0 * np.log(np.abs(np.expm1(th * t)))

    def hinv(self, w, v, params):
        th = params[0]
        w = np.asarray(w, dtype=float)
        ev = np.exp(-th * np.asarray(v, dtype=float))
        a = w * np.expm1(-th) / (w + (1.0 - w) * ev)
        return -np.log1p(a) / th

    def tau(self, params):
        th = params[0]
        a = abs(th)
        tau = 1.0 - 4.0 / a * (1.0 - _debye1(a))
        return float(np.sign(th) * tau)

    def params_from_tau(self, tau):
        if not -1.0 < tau < 1.0 or tau == 0:
            raise ValueError(f"frank: tau={tau} outside attainable range (-1, 0) U (0, 1)")
        a = abs(tau)
        hi = 1.0
        while self.tau((hi,)) < a:
            hi *= 2.0
            if hi > 1e4:
                raise ValueError(f"frank: tau={tau} too close to 1")
        th = optimize.brentq(lambda t: self.tau((t,)) - a, 1e-12, hi, xtol=1e-12, rtol=1e-14)
        return (float(np.sign(tau) * th),)


class Joe(Archimedean):
    name = "joe"
    label = "Joe"
    n_params = 1
    itau = True
    asymmetric = True
    bounds = ((1.0, 30.0),)

    def _check(self, params):
        if not params[0] >= 1.0:
            raise ValueError(f"joe: theta={params[0]} must be >= 1")

    @staticmethod
    def _parts(l1m, th):
        wth = np.exp(th * l1m)          # (1-t)^theta
        la = _log1mexp(th * l1m)         # log(1 - (1-t)^theta)
        return wth, la

    def _log_phi(self, lt, l1m, params):
        wth, la = self._parts(l1m, params[0])
        return np.log(-la)

    def _inv(self, ls, params):
        th = params[0]
        l1m = _log1mexp(-np.exp(ls)) / th
        return _log1mexp(l1m), l1m

    def _log_ndphi(self, lt, l1m, params):
        th = params[0]
        _, la = self._parts(l1m, th)
        return np.log(th) + (th - 1.0) * l1m - la

    def _log_d2phi(self, lt, l1m, params):
        th = params[0]
        wth, la = self._parts(l1m, th)
        return np.log(th) + (th - 2.0) * l1m + np.log(th - 1.0 + wth) - 2.0 * la

    def tau(self, params):
        th = params[0]
        if abs(th - 2.0) < 1e-6:
            return super().tau(params)
        return float(1.0 + 2.0 / (2.0 - th) * (special.digamma(2.0) - special.digamma(2.0 / th + 1.0)))

    def params_from_tau(self, tau):
        if not 0.0 <= tau < 1.0:
            raise ValueError(f"joe: tau={tau} outside attainable range [0, 1)")
        if tau == 0:
            return (1.0,)
        hi = 2.0
        while self.tau((hi,)) < tau:
            hi *= 2.0
            if hi > 1e5:
                raise ValueError(f"joe: tau={tau} too close to 1")
        th = optimize.brentq(lambda t: self.tau((t,)) - tau, 1.0, hi, xtol=1e-13, rtol=1e-14)
        return (float(th),)

    def lambda_upper(self, params):
        return float(2.0 - 2.0 ** (1.0 / params[0]))


class BB1(Archimedean):
    name = "bb1"
    label = "BB1"
    n_params = 2
    asymmetric = True
    bounds = ((1e-4, 7.0), (1.0, 7.0))

    def _check(self, params):
        th, de = params
        if not (th > 0 and de >= 1.0):
            raise ValueError(f"bb1: (theta, delta)=({th}, {de}) requires theta > 0, delta >= 1")

    @staticmethod
    def _log_g(lt, th):
        return -th * lt + _log1mexp(th * lt)

    def _log_phi(self, lt, l1m, params):
        th, de = params
        return de * self._log_g(lt, th)

    def _inv(self, ls, params):
        th, de = params
        lt = -np.logaddexp(0.0, ls / de) / th
        return lt, _log1mexp(lt)

    def _log_ndphi(self, lt, l1m, params):
        th, de = params
        return np.log(de * th) + (de - 1.0) * self._log_g(lt, th) - (th + 1.0) * lt

    def _log_d2phi(self, lt, l1m, params):
        th, de = params
        return (np.log(de * th) + (de - 2.0) * self._log_g(lt, th) - (2.0 * th + 2.0) * lt
                + np.log(de * th + 1.0 - (th + 1.0) * np.exp(th * lt)))

    def tau(self, params):
        th, de = params
        return 1.0 - 2.0 / (de * (th + 2.0))

    def lambda_lower(self, params):
        th, de = params
        return float(2.0 ** (-1.0 / (th * de)))

    def lambda_upper(self, params):
        return float(2.0 - 2.0 ** (1.0 / params[1]))

    def start_points(self, tau):
        tau = min(max(tau, 0.02), 0.95)
        pts = []
        for de in (1.1, 1.5, 2.5):
            th = 2.0 / (de * (1.0 - tau)) - 2.0
            pts.append((float(np.clip(th, 0.05, 6.9)), de))
        return pts


class BB7(Archimedean):
    name = "bb7"
    label = "BB7"
    n_params = 2
    asymmetric = True
    bounds = ((1.0, 7.0), (1e-4, 7.0))

    def _check(self, params):
        th, de = params
        if not (th >= 1.0 and de > 0):
            raise ValueError(f"bb7: (theta, delta)=({th}, {de}) requires theta >= 1, delta > 0")

    def _log_phi(self, lt, l1m, params):
        th, de = params
        la = _log1mexp(th * l1m)
        return np.log(np.expm1(-de * la))

    def _inv(self, ls, params):
        th, de = params
        la = -np.logaddexp(0.0, ls) / de
        l1m = _log1mexp(la) / th
        return _log1mexp(l1m), l1m

    def _log_ndphi(self, lt, l1m, params):
        th, de = params
        la = _log1mexp(th * l1m)
        return np.log(de * th) - (de + 1.0) * la + (th - 1.0) * l1m

    def _log_d2phi(self, lt, l1m, params):
        th, de = params
        la = _log1mexp(th * l1m)
        wth = np.exp(th * l1m)
        return (np.log(de * th) - (de + 2.0) * la + (th - 2.0) * l1m
                + np.log((de + 1.0) * th * wth + (th - 1.0) * np.exp(la)))

    def lambda_lower(self, params):
        return float(2.0 ** (-1.0 / params[1]))

    def lambda_upper(self, params):
        return float(2.0 - 2.0 ** (1.0 / params[0]))

    def start_points(self, tau):
        return [(1.3, 0.5), (1.8, 1.0), (2.5, 1.5), (1.2, 2.0)]


class BB8(Archimedean):
    name = "bb8"
    label = "BB8"
    n_params = 2
    asymmetric = True
    bounds = ((1.0, 7.0), (1e-3, 1.0))

    def _check(self, params):
        th, de = params
        if not (th >= 1.0 and 0.0 < de <= 1.0):
            raise ValueError(f"bb8: (theta, delta)=({th}, {de}) requires theta >= 1, 0 < delta <= 1")

    @staticmethod
    def _log_x(lt, l1m, de):
        # log(1 - delta * t)
        return l1m if de == 1.0 else np.log1p(-de * np.exp(lt))

    @staticmethod
    def _log_eta(th, de):
        return np.log(-np.expm1(th * np.log1p(-de))) if de < 1.0 else 0.0

    def _log_phi(self, lt, l1m, params):
        th, de = params
        lx = self._log_x(lt, l1m, de)
        eta = np.exp(self._log_eta(th, de))
        base = np.exp(th * np.log1p(-de)) if de < 1.0 else 0.0
        ratio = (base - np.exp(th * lx)) / eta          # b/eta - 1, in [-1, 0]
        lb = _log1mexp(th * lx)
        phi = np.where(ratio < -0.5, -(lb - np.log(eta)), -np.log1p(ratio))
        return np.log(phi)

    def _inv(self, ls, params):
        th, de = params
        lb = self._log_eta(th, de) - np.exp(ls)
        lx = _log1mexp(lb) / th
        t = np.clip(-np.expm1(lx) / de, 0.0, 1.0)
        lt = np.log(t)
        return lt, (lx if de == 1.0 else np.log1p(-t))

    def _log_ndphi(self, lt, l1m, params):
        th, de = params
        lx = self._log_x(lt, l1m, de)
        return np.log(th * de) + (th - 1.0) * lx - _log1mexp(th * lx)

    def _log_d2phi(self, lt, l1m, params):
        th, de = params
        lx = self._log_x(lt, l1m, de)
        lb = _log1mexp(th * lx)
        return (np.log(th) + 2.0 * np.log(de) + (th - 2.0) * lx
                + np.log(th * np.exp(th * lx) + (th - 1.0) * np.exp(lb)) - 2.0 * lb)

    def lambda_upper(self, params):
        th, de = params
        return float(2.0 - 2.0 ** (1.0 / th)) if de == 1.0 else 0.0

    def start_points(self, tau):
        return [(1.5, 0.9), (2.5, 0.8), (4.0, 0.6), (6.0, 0.5)]


FAMILIES = {f.name: f for f in (Independence(), Gaussian(), StudentT(), Frank(), Clayton(),
                                Gumbel(), Joe(), BB1(), BB7(), BB8())}

#: deterministic order used to break AIC ties
FAMILY_ORDER = ("independence", "gaussian", "student_t", "frank", "clayton", "gumbel",
                "joe", "bb1", "bb7", "bb8")
