"""Tricomi's confluent hypergeometric function U(a, b; z) for a, z > 0.

Evaluated from

    U(a, b; z) = 1/Gamma(a) int_0^inf e^(-z t) t^(a-1) (1+t)^(b-a-1) dt

by adaptive quadrature of the integrand rescaled by its peak value, so the
result is available in log form even when it over- or underflows.
"""
import math

import numpy as np

from effcap.specfun.quadrature import QuadratureSpec, integrate

DEFAULT_SPEC = QuadratureSpec()


def _peak(a, b, z):
    """Location of the maximum of t^(a-1) (1+t)^(b-a-1) e^(-z t) for a >= 1.

    Stationary points solve z t^2 + (z - b + 2) t - (a - 1) = 0, which has a
    single nonnegative root when a >= 1.
    """
    lin = z - b + 2.0
    disc = math.sqrt(lin * lin + 4.0 * z * (a - 1.0))
    if lin > 0:
        return 2.0 * (a - 1.0) / (lin + disc)
    return (disc - lin) / (2.0 * z)


def log_tricomi_u(a, b, z, spec=DEFAULT_SPEC):
    """log U(a, b; z); see :func:`tricomi_u`."""
    a, b, z = float(a), float(b), float(z)
    if not a > 0:
        raise ValueError(f"tricomi_u requires a > 0, got {a!r}")
    if not z > 0:
        raise ValueError(f"tricomi_u requires z > 0, got {z!r}")
    c = b - a - 1.0
    cutoff = math.log(max(spec.abs_tol, 1e-300))

    if a >= 1.0:
        def log_f(t):
            return -z * t + (a - 1.0) * np.log(t) + c * np.log1p(t)

        t_star = _peak(a, b, z)
        log_peak = float(log_f(t_star)) if t_star > 0 else 0.0
        jacobian = 0.0
    else:
        # t = u^(1/a) removes the t^(a-1) endpoint singularity.
        def log_f(u):
            t = u ** (1.0 / a)
            return -z * t + c * np.log1p(t)

        grid = np.geomspace(1e-12, 1e6, 400) ** a
        vals = log_f(grid)
        i = int(np.argmax(vals))
        t_star = float(grid[i]) if vals[i] > 0 else 0.0
        log_peak = max(float(vals[i]), 0.0)
        jacobian = -math.log(a)

    # March out until the rescaled integrand is negligible.
    step = max(t_star, 1.0 / z if a >= 1.0 else 1.0, 1e-300)
    t_end = max(t_star, 1e-300) + step
    while float(log_f(t_end)) - log_peak > cutoff - 5.0:
        t_end = t_star + 2.0 * (t_end - t_star)

    points = [0.0]
    if t_star > 0:
        points += [0.5 * t_star, t_star]
    width = t_end - t_star
    for frac in (1 / 64, 1 / 16, 1 / 4):
        p = t_star + frac * width
        if p > points[-1]:
            points.append(p)
    points.append(t_end)

    # Kronrod nodes are interior, so log(t) is never evaluated at t = 0.
    value, _ = integrate(lambda t: np.exp(log_f(t) - log_peak), points, spec)
    return log_peak + math.log(value) + jacobian - math.lgamma(a)


def tricomi_u(a, b, z, spec=DEFAULT_SPEC):
    """Tricomi U(a, b; z) for ``a > 0``, ``z > 0`` and any real ``b``.

    Raises:
        ConvergenceError: if the adaptive quadrature exhausts
            ``spec.max_subdivisions``.
    """
    return math.exp(log_tricomi_u(a, b, z, spec))
