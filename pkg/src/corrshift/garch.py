"""
ARMA(ar, ma) mean with GARCH(p, q) conditional variance, Gaussian QML.

Parameter vectors are laid out as::

    [mu, phi_1..phi_ar, theta_1..theta_ma, omega, alpha_1..alpha_p, beta_1..beta_q]

with the mean equation written in deviations from ``mu``::

    r_t - mu = sum_i phi_i (r_{t-i} - mu) + e_t + sum_j theta_j e_{t-j}
    h_t      = omega + sum_i alpha_i e_{t-i}^2 + sum_j beta_j h_{t-j}

Pre-sample deviations and innovations are zero; pre-sample ``e^2`` and ``h``
are both the sample variance of the series being fit.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter, lfiltic

from corrshift.errors import DomainError, InsufficientDataError, NonConvergenceError
from corrshift.numerics import PENALTY, BoundBox, OptimResult, minimize, normal_sf
from corrshift.series import ReturnSeries

logger = logging.getLogger(__name__)

__all__ = [
    "GarchFit",
    "GarchSpec",
    "filter_garch",
    "fit_garch",
    "garch_loglik",
    "simulate_garch",
    "starting_values",
]

STATIONARITY_MARGIN = 1e-4
MAX_ORDER = 5
HARD_MIN_OBS = 50
RECOMMENDED_OBS = 150
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GarchSpec:
    ar: int = 1
    ma: int = 1
    p: int = 1
    q: int = 1
    distribution: str = "normal"

    def __post_init__(self):
        for name in ("ar", "ma", "p", "q"):
            v = getattr(self, name)
            if int(v) != v:
                raise DomainError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.ar < 0 or self.ma < 0 or self.ar > MAX_ORDER or self.ma > MAX_ORDER:
            raise DomainError(f"ARMA orders must lie in 0..{MAX_ORDER}, got ({self.ar}, {self.ma})")
        if self.p < 1 or self.q < 1 or self.p > MAX_ORDER or self.q > MAX_ORDER:
            raise DomainError(f"GARCH orders must lie in 1..{MAX_ORDER}, got ({self.p}, {self.q})")
        if self.distribution != "normal":
            raise DomainError(f"only normal innovations are supported, got {self.distribution!r}")

    @property
    def n_params(self) -> int:
        return 1 + self.ar + self.ma + 1 + self.p + self.q

    @property
    def param_names(self) -> list:
        names = ["Mu"]
        names += [f"AR {i}" for i in range(1, self.ar + 1)]
        names += [f"MA {i}" for i in range(1, self.ma + 1)]
        names += ["Omega"]
        names += [f"Alpha {i}" for i in range(1, self.p + 1)]
        names += [f"Beta {i}" for i in range(1, self.q + 1)]
        return names

    def split(self, params):
        """Unpack a parameter vector into ``(mu, phi, theta, omega, alpha, beta)``."""
        params = np.asarray(params, dtype=float)
        i = 0
        mu = params[i]
        i += 1
        phi = params[i : i + self.ar]
        i += self.ar
        theta = params[i : i + self.ma]
        i += self.ma
        omega = params[i]
        i += 1
        alpha = params[i : i + self.p]
        i += self.p
        beta = params[i : i + self.q]
        return mu, phi, theta, omega, alpha, beta

    def variance_slice(self) -> slice:
        start = 1 + self.ar + self.ma
        return slice(start, start + 1 + self.p + self.q)


def _innovations(params, r, spec):
    mu, phi, theta, _, _, _ = spec.split(params)
    b = np.concatenate([[1.0], -phi])
    a = np.concatenate([[1.0], theta])
    return lfilter(b, a, r - mu)


def _variances(e, omega, alpha, beta, backcast):
    p, q = alpha.size, beta.size
    e2 = np.concatenate([np.full(p, backcast), e * e])
    arch = lfilter(np.concatenate([[0.0], alpha]), [1.0], e2)[p:]
    a = np.concatenate([[1.0], -beta])
    zi = lfiltic([1.0], a, np.full(q, backcast))
    h, _ = lfilter([1.0], a, omega + arch, zi=zi)
    return h


def filter_garch(params, returns, spec: GarchSpec, backcast: float | None = None):
    """Innovations ``e_t`` and conditional variances ``h_t`` implied by ``params``.

    ``backcast`` defaults to the (population) sample variance of ``returns``.
    """
    r = np.asarray(returns, dtype=float)
    if backcast is None:
        backcast = float(np.var(r))
    _, _, _, omega, alpha, beta = spec.split(params)
    e = _innovations(params, r, spec)
    h = _variances(e, omega, alpha, beta, backcast)
    return e, h


def garch_loglik(params, returns, spec: GarchSpec, backcast: float | None = None) -> float:
    """Gaussian log-likelihood ``sum_t -0.5 (ln 2pi + ln h_t + e_t^2 / h_t)``.

    Returns ``-PENALTY`` when the recursion produces a non-positive or
    non-finite variance.
    """
    e, h = filter_garch(params, returns, spec, backcast)
    if not np.all(np.isfinite(h)) or np.any(h <= 0) or not np.all(np.isfinite(e)):
        return -PENALTY
    ll = -0.5 * float(np.sum(_LOG_2PI + np.log(h) + e * e / h))
    return ll if math.isfinite(ll) else -PENALTY


def _check_invariants(spec, params):
    _, phi, theta, omega, alpha, beta = spec.split(params)
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if np.any(alpha < 0) or np.any(beta < 0):
        raise DomainError("alpha and beta must be non-negative")
    if alpha.sum() + beta.sum() > 1.0 - STATIONARITY_MARGIN:
        raise DomainError(
            f"sum(alpha) + sum(beta) = {alpha.sum() + beta.sum():.6f} exceeds 1 - {STATIONARITY_MARGIN}"
        )
    if not (_stationary_ar(phi) and _stationary_ar(-theta)):
        raise DomainError("ARMA part must be stationary and invertible")


def _stationary_ar(coef):
    """All roots of ``1 - c_1 z - ... - c_k z^k`` outside the unit circle."""
    coef = np.asarray(coef, dtype=float)
    if coef.size == 0 or not np.any(coef):
        return True
    if coef.size == 1:
        return abs(coef[0]) < 1.0
    roots = np.roots(np.concatenate([-coef[::-1], [1.0]]))
    return bool(np.all(np.abs(roots) > 1.0))


def simulate_garch(spec: GarchSpec, params, n: int, seed=None, burn: int = 500) -> np.ndarray:
    """Draw ``n`` observations from the model, discarding ``burn`` warm-up draws.

    The variance recursion starts at the unconditional level
    ``omega / (1 - sum(alpha) - sum(beta))``.
    """
    params = np.asarray(params, dtype=float)
    if params.size != spec.n_params:
        raise DomainError(f"expected {spec.n_params} parameters, got {params.size}")
    _check_invariants(spec, params)
    mu, phi, theta, omega, alpha, beta = spec.split(params)
    rng = np.random.default_rng(seed)
    total = int(n) + int(burn)
    z = rng.standard_normal(total)
    lag = max(spec.ar, spec.ma, spec.p, spec.q)
    hbar = omega / (1.0 - alpha.sum() - beta.sum())
    x = np.zeros(total + lag)  # r - mu
    e = np.zeros(total + lag)
    h = np.full(total + lag, hbar)
    e2 = np.full(total + lag, hbar)
    for t in range(lag, total + lag):
        ht = omega
        for i in range(spec.p):
            ht += alpha[i] * e2[t - 1 - i]
        for j in range(spec.q):
            ht += beta[j] * h[t - 1 - j]
        h[t] = ht
        e[t] = math.sqrt(ht) * z[t - lag]
        e2[t] = e[t] * e[t]
        xt = e[t]
        for i in range(spec.ar):
            xt += phi[i] * x[t - 1 - i]
        for j in range(spec.ma):
            xt += theta[j] * e[t - 1 - j]
        x[t] = xt
    return mu + x[lag + burn :]


def starting_values(returns, spec: GarchSpec) -> np.ndarray:
    r = np.asarray(returns, dtype=float)
    var = float(np.var(r))
    return np.concatenate(
        [
            [float(np.mean(r))],
            np.full(spec.ar, 0.05),
            np.full(spec.ma, 0.05),
            [0.1 * var],
            np.full(spec.p, 0.05 / spec.p),
            np.full(spec.q, 0.85 / spec.q),
        ]
    )


def _bounds(spec, r):
    sd = float(np.std(r))
    m = float(np.mean(r))
    var = sd * sd
    lo = [m - 10 * sd] + [-0.999] * (spec.ar + spec.ma) + [1e-8 * var] + [0.0] * (spec.p + spec.q)
    hi = [m + 10 * sd] + [0.999] * (spec.ar + spec.ma) + [10.0 * var] + [1.0] * (spec.p + spec.q)
    return BoundBox(np.array(lo), np.array(hi))


def _numerical_hessian(f, x):
    """Central-difference Hessian of a scalar function."""
    n = x.size
    step = np.finfo(float).eps ** 0.25 * np.maximum(np.abs(x), 0.1)
    H = np.empty((n, n))
    fx = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step[i]
        H[i, i] = (f(x + ei) - 2 * fx + f(x - ei)) / step[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step[j]
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4 * step[i] * step[j]
            )
            H[i, j] = H[j, i] = v
    return H


@dataclass(frozen=True)
class GarchFit:
    """Fitted ARMA-GARCH model.

    ``params``, ``bse`` and ``conditional_variance`` are on the scale the model
    was fit on (``scale`` times the input returns, percent by default).
    """

    spec: GarchSpec
    params: np.ndarray
    bse: np.ndarray
    tvalues: np.ndarray
    pvalues: np.ndarray
    se_available: bool
    loglik: float
    conditional_variance: np.ndarray
    std_resid: np.ndarray
    resid: np.ndarray
    scale: float
    backcast: float
    optim: OptimResult
    start_loglik: float
    asset_id: str = ""
    dates: np.ndarray | None = None
    notes: list = field(default_factory=list)

    @property
    def param_names(self) -> list:
        return self.spec.param_names

    @property
    def nobs(self) -> int:
        return int(self.std_resid.size)

    def _part(self, idx):
        return self.spec.split(self.params)[idx]

    @property
    def mu(self) -> float:
        return float(self._part(0))

    @property
    def ar_params(self) -> np.ndarray:
        return self._part(1)

    @property
    def ma_params(self) -> np.ndarray:
        return self._part(2)

    @property
    def omega(self) -> float:
        return float(self._part(3))

    @property
    def alpha(self) -> np.ndarray:
        return self._part(4)

    @property
    def beta(self) -> np.ndarray:
        return self._part(5)

    @property
    def persistence(self) -> float:
        return float(self.alpha.sum() + self.beta.sum())

    def scaled_returns(self, returns) -> np.ndarray:
        return np.asarray(returns, dtype=float) * self.scale


def fit_garch(
    returns,
    spec: GarchSpec | None = None,
    scale: float = 100.0,
    tol: float = 1e-9,
    max_iter: int = 20000,
) -> GarchFit:
    """Maximum-likelihood fit of an ARMA-GARCH model.

    Parameters
    ----------
    returns : ReturnSeries or array_like
        Raw returns; they are multiplied by ``scale`` before fitting.
    spec : GarchSpec, optional
        Model orders, ARMA(1,1)-GARCH(1,1) by default.
    scale : float
        100 fits percent returns. Pass 1.0 for data already on the target scale.
    tol, max_iter
        Passed to :func:`corrshift.numerics.minimize`.

    Notes
    -----
    The search runs on the series divided by its standard deviation, which
    makes the optimiser path independent of the data's units; estimates are
    mapped back afterwards. Standard errors come from the inverse of a
    central-difference Hessian of the log-likelihood and are reported as NaN
    (``se_available=False``) when that Hessian is not negative definite.
    """
    spec = spec or GarchSpec()
    asset_id = ""
    dates = None
    if isinstance(returns, ReturnSeries):
        asset_id = returns.asset_id
        dates = returns.dates
        returns = returns.values
    r = np.asarray(returns, dtype=float).ravel() * float(scale)
    n = r.size
    if n < HARD_MIN_OBS:
        raise InsufficientDataError(f"GARCH fit needs at least {HARD_MIN_OBS} observations, got {n}")
    if n < 10 * (spec.n_params + 1):
        raise InsufficientDataError(
            f"{n} observations is too few for {spec.n_params} parameters"
        )
    notes = []
    if n < RECOMMENDED_OBS:
        notes.append(f"only {n} observations (< {RECOMMENDED_OBS} recommended)")
    sd = float(np.std(r))
    if not sd > 0:
        raise InsufficientDataError("GARCH input is constant")

    z = r / sd
    bc = float(np.var(z))
    vs = spec.variance_slice()
    box = _bounds(spec, z)

    def negll(x):
        _, phi, theta, omega, alpha, beta = spec.split(x)
        if omega <= 0 or alpha.sum() + beta.sum() > 1.0 - STATIONARITY_MARGIN:
            return PENALTY
        if spec.ar > 1 and not _stationary_ar(phi):
            return PENALTY
        if spec.ma > 1 and not _stationary_ar(-theta):
            return PENALTY
        return -garch_loglik(x, z, spec, bc) / n

    x0 = box.clip(starting_values(z, spec))
    start_ll = -negll(x0) * n
    res = minimize(negll, x0, box, tol=tol, max_iter=max_iter)
    if not res.converged:
        best = _to_original(spec, res.x, sd)
        raise NonConvergenceError(
            f"GARCH fit did not converge ({res.message}, {res.nit} iterations)",
            best=best,
            context=asset_id or None,
        )
    x = res.x

    H = _numerical_hessian(lambda v: garch_loglik(v, z, spec, bc), x)
    se_z = np.full(x.size, np.nan)
    se_ok = False
    try:
        cov = np.linalg.inv(-H)
        d = np.diag(cov)
        if np.all(np.isfinite(cov)) and np.all(d > 0) and np.all(np.linalg.eigvalsh(-H) > 0):
            se_z = np.sqrt(d)
            se_ok = True
    except np.linalg.LinAlgError:
        pass
    if not se_ok:
        notes.append("Hessian not negative definite; standard errors unavailable")

    params = _to_original(spec, x, sd)
    jac = _jacobian_scale(spec, sd)
    bse = se_z * jac
    with np.errstate(divide="ignore", invalid="ignore"):
        tvalues = params / bse
    pvalues = np.array([2.0 * normal_sf(abs(t)) if np.isfinite(t) else np.nan for t in tvalues])

    backcast = float(np.var(r))
    e, h = filter_garch(params, r, spec, backcast)
    ll = garch_loglik(params, r, spec, backcast)
    return GarchFit(
        spec=spec,
        params=params,
        bse=bse,
        tvalues=tvalues,
        pvalues=pvalues,
        se_available=se_ok,
        loglik=ll,
        conditional_variance=h,
        std_resid=e / np.sqrt(h),
        resid=e,
        scale=float(scale),
        backcast=backcast,
        optim=res,
        start_loglik=start_ll - n * math.log(sd),
        asset_id=asset_id,
        dates=dates,
        notes=notes,
    )


def _jacobian_scale(spec, sd):
    jac = np.ones(spec.n_params)
    jac[0] = sd
    jac[spec.variance_slice().start] = sd * sd
    return jac


def _to_original(spec, x, sd):
    return np.asarray(x, dtype=float) * _jacobian_scale(spec, sd)
