"""Exponential integrals E1 and Ei on the negative real axis."""
import math

from effcap.errors import ConvergenceError

EULER_GAMMA = 0.57721566490153286060651209008240243
_MAX_ITER = 10_000
_EPS = 1e-17
_TINY = 1e-300


def _e1_series(x, log_x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_ITER):
        term *= -x / k
        piece = term / k
        total += piece
        if abs(piece) <= _EPS * max(abs(total), _TINY):
            return -EULER_GAMMA - log_x - total
    raise ConvergenceError(f"E1 series failed for x={x}")


def _e1_scaled_cf(x):
    # e^x E1(x) by the continued fraction 1/(x+1-1/(x+3-4/(x+5-...))).
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ConvergenceError(f"E1 continued fraction failed for x={x}")


def e1_scaled(x):
    """Return ``exp(x) * E1(x)`` for ``x > 0`` without overflow."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"e1_scaled requires x > 0, got {x!r}")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x, math.log(x))
    return _e1_scaled_cf(x)


def log_e1(x, log_x=None):
    """log E1(x) for ``x > 0``; ``log_x`` lets ``x`` lie below the double range."""
    if log_x is None:
        if not x > 0:
            raise ValueError(f"E1 requires x > 0, got {x!r}")
        log_x = math.log(x)
    if log_x < -40.0:
        # x^1 terms are below double resolution relative to -gamma - ln x.
        return math.log(-EULER_GAMMA - log_x)
    x = math.exp(log_x)
    if x <= 1.0:
        return math.log(_e1_series(x, log_x))
    return math.log(_e1_scaled_cf(x)) - x


def exp_integral_e1(x):
    """E1(x) = int_x^inf e^-t / t dt for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"E1 requires x > 0, got {x!r}")
    return math.exp(log_e1(x))


def exp_integral_ei(x):
    """Ei(x) for ``x < 0``, where Ei(x) = -E1(-x)."""
    x = float(x)
    if not x < 0:
        raise ValueError(f"exp_integral_ei only supports x < 0, got {x!r}")
    return -exp_integral_e1(-x)
