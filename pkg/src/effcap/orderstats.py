"""Distribution of the selected-antenna SNR.

A candidate antenna's SNR is gamma0 times a sum of ``k`` unit-mean exponential
branch gains, i.e. Gamma(k, gamma0). Selection keeps the largest of
``num_candidates`` independent candidates. The maximum's density is expanded
as a finite double sum

    f_(L)(x) = L / (gamma0^k Gamma(k)) * sum_m C(L-1, m) (-1)^m
               * sum_q c_q^(m) x^(q+k-1) exp(-(m+1) x / gamma0)

whose coefficients ``c_q^(m)`` are the powers of the truncated exponential
series, built by repeated discrete convolution. Every closed form downstream
integrates this expansion term by term.
"""
import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from effcap._summation import neumaier_sum
from effcap.errors import CancellationWarning
from effcap.specfun import QuadratureSpec, integrate, reg_lower_inc_gamma

#: Antenna counts beyond this are outside the validated range of the expansion.
SUPPORTED_MAX_ANTENNAS = 8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class BranchSnrDist:
    """SNR of one candidate antenna: ``gamma0 * sum_{i<k} |h_i|^2``."""

    k: int
    gamma0: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not self.gamma0 > 0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "gamma0", float(self.gamma0))


@dataclass(frozen=True)
class SelectionConfig:
    """Largest of ``num_candidates`` i.i.d. draws of ``branch``."""

    num_candidates: int
    branch: BranchSnrDist

    def __post_init__(self):
        if int(self.num_candidates) != self.num_candidates or self.num_candidates < 1:
            raise ValueError(f"num_candidates must be a positive integer, got {self.num_candidates!r}")
        object.__setattr__(self, "num_candidates", int(self.num_candidates))


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Coefficients ``c_q^(m)`` for ``m = 0..m_max``; ``rows[m]`` has ``m(k-1)+1`` entries."""

    k: int
    gamma0: float
    m_max: int
    rows: tuple

    def row(self, m):
        return self.rows[m]


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("SNR argument must be nonnegative")
    return x


def snr_pdf(dist, x):
    """Gamma(k, gamma0) density of one candidate's SNR."""
    x = _check_x(x)
    k, g = dist.k, dist.gamma0
    log_pdf = -x / g - k * math.log(g) - math.lgamma(k)
    if k > 1:
        with np.errstate(divide="ignore"):
            log_pdf = log_pdf + (k - 1) * np.log(x)
    out = np.exp(log_pdf)
    return out[()] if out.ndim == 0 else out


def snr_cdf(dist, x):
    """CDF ``P(k, x / gamma0)`` via the regularized lower incomplete gamma."""
    x = _check_x(x)
    out = np.vectorize(lambda v: reg_lower_inc_gamma(dist.k, v / dist.gamma0), otypes=[float])(x)
    return out[()] if out.ndim == 0 else out


def snr_cdf_finite_sum(dist, x):
    """CDF as ``1 - exp(-y) sum_{i<k} y^i / i!`` with ``y = x / gamma0``.

    Exact for integer ``k``; loses relative accuracy for ``y << 1``.
    """
    y = _check_x(x) / dist.gamma0
    partial = np.zeros_like(y)
    term = np.ones_like(y)
    for i in range(dist.k):
        if i:
            term = term * y / i
        partial = partial + term
    out = 1.0 - np.exp(-y) * partial
    return out[()] if out.ndim == 0 else out


def _log_cdf_vec(k, y):
    """log P(k, y) for integer k, vectorised and accurate for small y."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y < k + 10.0
    if np.any(small):
        ys = y[small]
        # P(k, y) = exp(-y) sum_{i>=k} y^i / i!  (no cancellation)
        with np.errstate(divide="ignore"):
            log_first = k * np.log(ys) - ys - math.lgamma(k + 1)
        total = np.ones_like(ys)
        term = np.ones_like(ys)
        for i in range(1, 400):
            term = term * ys / (k + i)
            total = total + term
            if np.all(term <= _EPS * total):
                break
        out[small] = log_first + np.log(total)
    if np.any(~small):
        yb = y[~small]
        partial = np.zeros_like(yb)
        term = np.ones_like(yb)
        for i in range(k):
            if i:
                term = term * yb / i
            partial = partial + term
        out[~small] = np.log1p(-np.exp(-yb) * partial)
    return out


def log_max_order_pdf_direct(sel, x):
    """log of ``L F(x)^(L-1) f(x)``, vectorised; ``-inf`` where the density is 0."""
    x = np.asarray(x, dtype=float)
    k, g, L = sel.branch.k, sel.branch.gamma0, sel.num_candidates
    with np.errstate(divide="ignore", invalid="ignore"):
        log_f = (k - 1) * np.log(x) - x / g - k * math.log(g) - math.lgamma(k)
        if k == 1:
            log_f = np.where(x == 0, -math.log(g), log_f)
        log_cdf = _log_cdf_vec(k, x / g)
        out = math.log(L) + log_f
        if L > 1:
            out = out + (L - 1) * log_cdf
    return out


@functools.lru_cache(maxsize=256)
def _coefficient_rows(k, gamma0, m_max):
    first = np.array([1.0 / (gamma0 ** i * math.factorial(i)) for i in range(k)])
    rows = [np.ones(1)]
    for _ in range(m_max):
        rows.append(np.convolve(rows[-1], first))
    for r in rows:
        r.setflags(write=False)
    return tuple(rows)


def build_coefficients(dist, m_max):
    """Coefficient table for ``(sum_{i<k} x^i / (gamma0^i i!))^m``, ``m <= m_max``.

    Row ``m`` is row ``m-1`` convolved with row 1. Tables are cached per
    ``(k, gamma0, m_max)``.
    """
    if int(m_max) != m_max or m_max < 0:
        raise ValueError(f"m_max must be a nonnegative integer, got {m_max!r}")
    rows = _coefficient_rows(dist.k, dist.gamma0, int(m_max))
    return CoefficientTable(k=dist.k, gamma0=dist.gamma0, m_max=int(m_max), rows=rows)


def expansion_terms(sel, table=None):
    """Yield ``(sign, log_weight, a, rate)`` for each term of the expanded density.

    Each term contributes ``sign * exp(log_weight) * x^(a-1) * exp(-rate x)``,
    where ``a = q + k`` and ``rate = (m+1)/gamma0``. The weight bundles
    ``L/(gamma0^k Gamma(k)) * C(L-1, m) * c_q^(m)``.
    """
    k, g, L = sel.branch.k, sel.branch.gamma0, sel.num_candidates
    if table is None:
        table = build_coefficients(sel.branch, L - 1)
    _check_table(sel, table)
    log_lead = math.log(L) - k * math.log(g) - math.lgamma(k)
    for m in range(L):
        sign = -1 if m % 2 else 1
        log_binom = math.log(math.comb(L - 1, m))
        for q, c in enumerate(table.rows[m]):
            yield sign, log_lead + log_binom + math.log(c), q + k, (m + 1) / g


def _check_table(sel, table):
    if table.k != sel.branch.k or table.gamma0 != sel.branch.gamma0 or table.m_max < sel.num_candidates - 1:
        raise ValueError("coefficient table does not match the selection config")


def max_order_pdf(sel, table, x, warn_threshold=1e-6):
    """Density of the selected (largest) SNR from the expanded double sum.

    A :class:`CancellationWarning` is issued when the estimated relative
    rounding error of the alternating sum exceeds ``warn_threshold``.
    """
    x = _check_x(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    terms = []
    with np.errstate(divide="ignore", invalid="ignore"):
        log_x = np.log(x)
        for sign, log_w, a, rate in expansion_terms(sel, table):
            if a == 1:
                t = np.exp(log_w - rate * x)
            else:
                t = np.exp(log_w + (a - 1) * log_x - rate * x)
            terms.append(sign * t)
    terms = np.array(terms)
    total = neumaier_sum(terms, axis=0)
    magnitude = np.sum(np.abs(terms), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_err = np.where(magnitude > 0, _EPS * magnitude / np.abs(total), 0.0)
    if np.any(rel_err > warn_threshold):
        warnings.warn(
            f"order-statistic expansion lost precision (relative error up to {np.max(rel_err):.2e})",
            CancellationWarning,
            stacklevel=2,
        )
    total = np.maximum(total, 0.0)
    return total[0] if scalar else total


def max_order_pdf_direct(sel, x):
    """Density of the largest SNR as ``L F(x)^(L-1) f(x)``."""
    x = _check_x(x)
    out = np.exp(log_max_order_pdf_direct(sel, x))
    return out[()] if out.ndim == 0 else out


def general_order_pdf(sel, l, x):
    """Density of the ``l``-th smallest of the ``L`` candidate SNRs (1-based)."""
    L = sel.num_candidates
    if int(l) != l or not 1 <= l <= L:
        raise IndexError(f"order index must lie in [1, {L}], got {l!r}")
    l = int(l)
    x = _check_x(x)
    F = np.asarray(snr_cdf(sel.branch, x))
    f = np.asarray(snr_pdf(sel.branch, x))
    coef = math.factorial(L) / (math.factorial(l - 1) * math.factorial(L - l))
    out = coef * F ** (l - 1) * (1.0 - F) ** (L - l) * f
    return out[()] if out.ndim == 0 else out


def upper_limit(dist):
    """Truncation point ``gamma0 (k + 40 sqrt(k))`` used for numerical expectations."""
    return dist.gamma0 * (dist.k + 40.0 * math.sqrt(dist.k))


def log_expectation_quadrature(sel, log_g, spec=QuadratureSpec(rel_tol=1e-11), kinks=()):
    """log E{g(X)} for the selected SNR X, by adaptive quadrature.

    ``log_g`` maps an array of SNR values to ``log g``. The integrand is
    rescaled by its sampled peak so tiny expectations stay representable.
    The upper limit is widened past :func:`upper_limit` when needed so the
    neglected tail is below ``1e-16`` of the peak. ``kinks`` are extra
    breakpoints where ``g`` is not smooth.
    """
    L = sel.num_candidates
    hi = upper_limit(sel.branch) * (1.0 + math.log(L))

    def log_integrand(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return log_g(x) + log_max_order_pdf_direct(sel, x)

    grid = np.geomspace(hi * 1e-16, hi, 800)
    vals = log_integrand(grid)
    i = int(np.nanargmax(vals))
    peak, x_star = float(vals[i]), float(grid[i])
    while float(log_integrand(np.array([hi]))[0]) - peak > -40.0:
        hi *= 2.0
    # Doubling breakpoints out to ``hi``: a single panel spanning several
    # decades of a power-law tail can report a falsely small error.
    points = [0.0]
    p = x_star / 8.0
    while p < hi:
        if p > points[-1]:
            points.append(p)
        p *= 2.0
    points.append(hi)
    points = sorted(set(points) | {float(k) for k in kinks if 0.0 < k < hi})

    def f(x):
        v = np.exp(log_integrand(x) - peak)
        return np.where(np.isnan(v), 0.0, v)

    value, _ = integrate(f, points, spec)
    return peak + math.log(value)
