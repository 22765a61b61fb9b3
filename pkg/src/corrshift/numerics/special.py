"""
Special functions and tail probabilities used by the hypothesis tests.

Everything here is scalar and pure-Python on top of :mod:`math`; the callers
evaluate a handful of p-values per run, so vectorisation buys nothing.
"""
import math

from corrshift.errors import DomainError

__all__ = [
    "f_cdf",
    "f_sf",
    "ln_gamma",
    "normal_cdf",
    "normal_sf",
    "reg_incomplete_beta",
    "t_cdf",
    "t_sf",
]

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients)
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling series coefficients B_{2k} / (2k (2k-1))
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
)

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXIT = 20000


def ln_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0 or math.isinf(x):
        raise DomainError(f"ln_gamma requires 0 < x < inf, got {x}")
    if x < 0.5:
        # shift up once; the Lanczos sum is tuned for x >= 0.5
        return ln_gamma(x + 1.0) - math.log(x)
    if x >= 20.0:
        inv = 1.0 / x
        inv2 = inv * inv
        series = 0.0
        for c in reversed(_STIRLING):
            series = series * inv2 + c
        return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series * inv
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def _ln_beta(a, b):
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)


def _beta_cf(a, b, x):
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _check_ab(a, b):
    if not (a > 0 and b > 0) or math.isinf(a) or math.isinf(b):
        raise DomainError(f"incomplete beta requires a, b > 0, got a={a}, b={b}")


def _incbeta(a, b, x, y):
    # y is 1 - x supplied by the caller, who can often form it without the
    # cancellation that 1.0 - x suffers when x is close to 1
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(y) - _ln_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, math.exp(log_front) * _beta_cf(a, b, x) / a)
    return max(0.0, 1.0 - math.exp(log_front) * _beta_cf(b, a, y) / b)


def reg_incomplete_beta(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``.

    Uses the continued fraction directly when ``x < (a + 1) / (a + b + 2)`` and
    the reflection ``1 - I_{1-x}(b, a)`` otherwise.
    """
    a = float(a)
    b = float(b)
    x = float(x)
    _check_ab(a, b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta requires 0 <= x <= 1, got {x}")
    return _incbeta(a, b, x, 1.0 - x)


def _check_dof(*dofs):
    for d in dofs:
        if not d > 0 or math.isinf(d):
            raise DomainError(f"degrees of freedom must be positive and finite, got {d}")


def _check_stat(stat):
    stat = float(stat)
    if math.isnan(stat) or stat < 0:
        raise DomainError(f"F statistic must be >= 0, got {stat}")
    return stat


def f_sf(stat, d1, d2):
    """Upper tail ``P(F_{d1,d2} >= stat)``."""
    _check_dof(d1, d2)
    stat = _check_stat(stat)
    if stat == 0.0:
        return 1.0
    if math.isinf(stat):
        return 0.0
    den = d2 + d1 * stat
    return _incbeta(d2 / 2.0, d1 / 2.0, d2 / den, d1 * stat / den)


def f_cdf(stat, d1, d2):
    _check_dof(d1, d2)
    stat = _check_stat(stat)
    if stat == 0.0:
        return 0.0
    if math.isinf(stat):
        return 1.0
    den = d2 + d1 * stat
    return _incbeta(d1 / 2.0, d2 / 2.0, d1 * stat / den, d2 / den)


def normal_sf(z):
    return 0.5 * math.erfc(float(z) / math.sqrt(2.0))


def normal_cdf(z):
    return 0.5 * math.erfc(-float(z) / math.sqrt(2.0))


def t_sf(stat, dof):
    """Upper tail of Student's t with ``dof >= 1`` degrees of freedom."""
    dof = float(dof)
    if not dof >= 1 or math.isinf(dof):
        raise DomainError(f"t distribution requires dof >= 1, got {dof}")
    stat = float(stat)
    if math.isinf(stat):
        return 0.0 if stat > 0 else 1.0
    t2 = stat * stat
    tail = 0.5 * _incbeta(dof / 2.0, 0.5, dof / (dof + t2), t2 / (dof + t2))
    return tail if stat >= 0 else 1.0 - tail


def t_cdf(stat, dof):
    return t_sf(-float(stat), dof)
