"""Gamma and incomplete gamma functions for real arguments.

Every routine has a log-domain twin (``log_*``) because the capacity formulas
multiply these values by powers of the average SNR that overflow a double
long before the products themselves do. The upper incomplete function also
accepts its argument as a logarithm, which matters when the power-control
cutoff is far below the smallest representable double.
"""
import math

from effcap.errors import ConvergenceError
from effcap.specfun.expint import log_e1

_MAX_ITER = 10_000
_EPS = 1e-17
_TINY = 1e-300


def ln_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def _check(a, x, allow_zero_a=False):
    if not (a > 0 or (allow_zero_a and a == 0)):
        raise ValueError(f"incomplete gamma requires a > 0, got a={a!r}")
    if not x >= 0:
        raise ValueError(f"incomplete gamma requires x >= 0, got x={x!r}")


def _lower_series_log(a, x, log_x):
    """log gamma(a, x) from the power series; best for x < a + 1."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return a * log_x - x + math.log(total)
    raise ConvergenceError(f"lower incomplete gamma series failed for a={a}, x={x}")


def _upper_cf_log(a, x):
    """log Gamma(a, x) from the Legendre continued fraction (modified Lentz)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return -x + a * math.log(x) + math.log(h)
    raise ConvergenceError(f"upper incomplete gamma fraction failed for a={a}, x={x}")


def _gamma1p_m1(a):
    """Gamma(1 + a) - 1 for small a."""
    return math.expm1(math.lgamma(1.0 + a))


def _upper_small_a(a, x, log_x):
    """Gamma(a, x) for 0 < a < 1 and x < 2.

    Gamma(a, x) = [Gamma(1+a) - 1 - (x^a - 1)] / a - x^a * sum_{n>=1} (-x)^n / (n! (a+n)),
    which avoids subtracting two values of size 1/a.
    """
    head = (_gamma1p_m1(a) - math.expm1(a * log_x)) / a
    tail = 0.0
    term = 1.0
    for n in range(1, _MAX_ITER):
        term *= -x / n
        piece = term / (a + n)
        tail += piece
        if abs(piece) <= _EPS * max(abs(tail), _TINY):
            break
    else:
        raise ConvergenceError(f"small-a incomplete gamma failed for a={a}, x={x}")
    return head - math.exp(a * log_x) * tail


def log_upper_inc_gamma(a, x, log_x=None):
    """log Gamma(a, x) for ``a >= 0``, ``x >= 0``.

    ``log_x`` may be passed instead of (or alongside) ``x`` when ``x`` itself
    underflows; it takes precedence. ``a = 0`` gives the exponential integral
    E1(x).
    """
    if log_x is None:
        log_x = math.log(x) if x > 0 else -math.inf
    else:
        x = math.exp(log_x)
    _check(a, x, allow_zero_a=True)
    if a == 0:
        return log_e1(x, log_x=log_x)
    if log_x == -math.inf:
        return math.lgamma(a)
    if x >= a + 1.0 or (a < 1.0 and x >= 2.0):
        return _upper_cf_log(a, x)
    if a < 1.0:
        return math.log(_upper_small_a(a, x, log_x))
    # a >= 1, x < a + 1: Q is bounded away from zero here.
    p = math.exp(_lower_series_log(a, x, log_x) - math.lgamma(a))
    return math.lgamma(a) + math.log1p(-p)


def log_lower_inc_gamma(a, x, log_x=None):
    """log gamma(a, x) for ``a > 0``, ``x >= 0`` (``-inf`` at ``x = 0``)."""
    if log_x is None:
        log_x = math.log(x) if x > 0 else -math.inf
    else:
        x = math.exp(log_x)
    _check(a, x)
    if log_x == -math.inf:
        return -math.inf
    if x < a + 1.0:
        return _lower_series_log(a, x, log_x)
    q = math.exp(log_upper_inc_gamma(a, x) - math.lgamma(a))
    return math.lgamma(a) + math.log1p(-q)


def lower_inc_gamma(a, x):
    """Lower incomplete gamma gamma(a, x) = int_0^x t^(a-1) e^-t dt."""
    a, x = float(a), float(x)
    _check(a, x)
    return math.exp(log_lower_inc_gamma(a, x))


def upper_inc_gamma(a, x):
    """Upper incomplete gamma Gamma(a, x) = int_x^inf t^(a-1) e^-t dt.

    ``a = 0`` is accepted for ``x > 0`` and returns E1(x).
    """
    a, x = float(a), float(x)
    _check(a, x, allow_zero_a=True)
    if a == 0 and x == 0:
        raise ValueError("Gamma(0, 0) diverges")
    return math.exp(log_upper_inc_gamma(a, x))


def reg_lower_inc_gamma(a, x):
    """Regularized P(a, x) = gamma(a, x) / Gamma(a)."""
    a, x = float(a), float(x)
    _check(a, x)
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return math.exp(_lower_series_log(a, x, math.log(x)) - math.lgamma(a))
    return -math.expm1(log_upper_inc_gamma(a, x) - math.lgamma(a))


def reg_upper_inc_gamma(a, x):
    """Regularized Q(a, x) = Gamma(a, x) / Gamma(a)."""
    a, x = float(a), float(x)
    _check(a, x)
    return math.exp(log_upper_inc_gamma(a, x) - math.lgamma(a))
