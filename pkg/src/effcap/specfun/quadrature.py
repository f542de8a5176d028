"""Globally adaptive Gauss-Kronrod (7/15) quadrature.

A small QUADPACK-QAG style integrator: the interval with the largest error
estimate is bisected until the summed estimate meets the tolerance. The
integrand is called with a numpy array of abscissae.
"""
import heapq
import math
from dataclasses import dataclass

import numpy as np

from effcap.errors import ConvergenceError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full symmetric node set on [-1, 1] and the matching weights.
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for adaptive quadrature.

    ``rel_tol`` bounds the relative error of the estimate, ``abs_tol`` is the
    absolute floor below which integrand values are treated as negligible,
    ``max_subdivisions`` caps the number of bisections.
    """

    rel_tol: float = 1e-13
    abs_tol: float = 1e-30
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be nonnegative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


def _gk15(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    values = np.asarray(f(center + half * _NODES), dtype=float)
    kronrod = half * float(np.dot(_KRONROD, values))
    gauss = half * float(np.dot(_GAUSS, values))
    return kronrod, abs(kronrod - gauss)


def integrate(f, breakpoints, spec=QuadratureSpec()):
    """Integrate ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    ``breakpoints`` is an increasing sequence; each piece is an initial
    interval of the adaptive scheme. Returns ``(value, error_estimate)``.

    Raises:
        ConvergenceError: if ``spec.max_subdivisions`` bisections do not
            bring the error estimate under ``max(rel_tol*|value|, abs_tol)``.
    """
    points = [float(p) for p in breakpoints]
    if len(points) < 2:
        raise ValueError("need at least two breakpoints")
    heap = []
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        value, err = _gk15(f, a, b)
        heapq.heappush(heap, (-err, a, b, value))
    if not heap:
        return 0.0, 0.0

    for _ in range(spec.max_subdivisions):
        total = math.fsum(item[3] for item in heap)
        error = math.fsum(-item[0] for item in heap)
        if error <= max(spec.rel_tol * abs(total), spec.abs_tol):
            return total, error
        _, a, b, value = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            # Interval exhausted at machine precision; keep it as is.
            heapq.heappush(heap, (0.0, a, b, value))
            continue
        for lo, hi in ((a, mid), (mid, b)):
            value, err = _gk15(f, lo, hi)
            heapq.heappush(heap, (-err, lo, hi, value))

    total = math.fsum(item[3] for item in heap)
    error = math.fsum(-item[0] for item in heap)
    if error <= max(spec.rel_tol * abs(total), spec.abs_tol):
        return total, error
    raise ConvergenceError(
        f"quadrature did not converge after {spec.max_subdivisions} subdivisions "
        f"(estimate {total!r}, error {error!r})"
    )
