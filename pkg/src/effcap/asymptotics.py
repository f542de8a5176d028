"""Loose- and strict-QoS limits of TAS with power control.

As theta -> 0 the policy becomes water-filling and the effective capacity tends
to the ergodic capacity, which has a closed form in terms of Ei. As
theta -> inf, ``mu * X`` tends to a constant ``alpha = 1 / E{1/X}`` and the
effective capacity tends to ``B T log2(1 + alpha)``.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from effcap._summation import cancellation_ratio, signed_log_sum
from effcap.orderstats import log_expectation_quadrature
from effcap.specfun import QuadratureSpec, e1_scaled, integrate
from effcap.system import SystemConfig
from effcap.tas import _tas_terms, solve_cutoff, tas_selection

logger = logging.getLogger(__name__)

#: Cancellation above which the Ei closed form of an I4 term is replaced by quadrature.
I4_FALLBACK_RATIO = 1e6


def waterfilling_mu(cutoff, snr):
    """Water-filling power factor ``max(1/cutoff - 1/snr, 0)``."""
    snr = np.asarray(snr, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(snr >= cutoff, 1.0 / cutoff - 1.0 / snr, 0.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ErgodicTerms:
    """Intermediate integrals for one expansion index ``m`` and power ``q``.

    ``g0 = gamma0 / ((m+1) cutoff)``; ``i4[r] = int_0^inf ln(1 + g0 z) z^r e^-z dz``,
    ``i3[r] = g0^(r+1) i4[r]``, ``i2 = sum_r C(n, r) i3[r]`` with
    ``n = q + mr - 1``, and ``i1 = cutoff^(n+1) exp(-1/g0) i2``.
    """

    g0: float
    i4: tuple
    i3: tuple
    i2: float
    i1: float


def _i4_closed(r, g0):
    """int_0^inf ln(1 + g0 z) z^r e^-z dz from the finite Ei expansion.

    Returns ``(value, cancellation_ratio)``.
    """
    y = 1.0 / g0
    ei_scaled = -e1_scaled(y)  # exp(1/g0) Ei(-1/g0)
    terms = []
    for xi in range(r + 1):
        n = r - xi
        lead = math.factorial(r) / math.factorial(n)
        terms.append(lead * (-1) ** (n - 1) * y ** n * ei_scaled)
        for nu in range(1, n + 1):
            terms.append(lead * (-1) ** (n - nu) * math.factorial(nu - 1) * y ** (n - nu))
    return math.fsum(terms), cancellation_ratio(terms)


def _i4_quadrature(r, g0):
    def f(z):
        return np.log1p(g0 * z) * z ** r * np.exp(-z)

    hi = r + 60.0 + 10.0 * math.sqrt(r + 1)
    value, _ = integrate(f, [0.0, max(r, 1.0), hi], QuadratureSpec(rel_tol=1e-13))
    return value


def ergodic_terms(g0, n):
    """Build :class:`ErgodicTerms` for ``g0`` and binomial order ``n = q + mr - 1``.

    ``i1`` is reported without the ``cutoff^(n+1)`` factor when that factor is
    applied by the caller; here it is left as ``exp(-1/g0) * i2``.
    """
    i4 = []
    for r in range(n + 1):
        value, ratio = _i4_closed(r, g0)
        if ratio > I4_FALLBACK_RATIO or not value > 0:
            logger.debug("I4 closed form cancels (ratio %.2e) at r=%d, g0=%g; using quadrature", ratio, r, g0)
            value = _i4_quadrature(r, g0)
        i4.append(value)
    i3 = [g0 ** (r + 1) * v for r, v in enumerate(i4)]
    i2 = math.fsum(math.comb(n, r) * v for r, v in enumerate(i3))
    return ErgodicTerms(g0=g0, i4=tuple(i4), i3=tuple(i3), i2=i2, i1=math.exp(-1.0 / g0) * i2)


def ergodic_capacity(cfg, normalized=False, policy=None):
    """Ergodic capacity of TAS with water-filling power control, bits per frame.

    ``policy`` defaults to the water-filling cutoff (``theta_tilde = 0``).
    The integrand on ``[cutoff, inf)`` is ``ln(x / cutoff) x^(q+mr-1) e^(-(m+1) x / gamma0)``.
    """
    if policy is None:
        policy = solve_cutoff(cfg, theta_tilde=0.0)
    lc = policy.log_cutoff
    signs, logs = [], []
    for sign, log_w, a, rate in _tas_terms(cfg):
        g0 = 1.0 / (rate * math.exp(lc))
        t = ergodic_terms(g0, a - 1)
        signs.append(sign)
        logs.append(log_w + a * lc - 1.0 / g0 + math.log(t.i2))
    sign, log_value, _ = signed_log_sum(signs, logs)
    if sign <= 0:
        raise ArithmeticError("ergodic capacity expansion cancelled completely")
    ec = cfg.bt / math.log(2.0) * math.exp(log_value)
    return cfg.normalize(ec) if normalized else ec


def inverse_moment(cfg):
    """E{1/X} for the TAS-selected SNR ``X`` (``inf`` when it diverges).

    With ``mr >= 2`` each expansion term is finite:
    ``w r^-(a-1) Gamma(a-1)``. With ``mr = 1`` the ``q = 0`` terms involve
    Gamma(0) individually, so the moment is integrated numerically; it is
    finite for ``mt >= 2`` and infinite for a single exponential candidate.
    """
    if cfg.mr >= 2:
        signs, logs = [], []
        for sign, log_w, a, rate in _tas_terms(cfg):
            signs.append(sign)
            logs.append(log_w - (a - 1) * math.log(rate) + math.lgamma(a - 1))
        sign, log_value, _ = signed_log_sum(signs, logs)
        if sign <= 0:
            raise ArithmeticError("inverse-moment expansion cancelled completely")
        return math.exp(log_value)
    if cfg.mt == 1:
        return math.inf
    logger.info("term-wise inverse moment diverges for mr=1; integrating numerically")
    return math.exp(log_expectation_quadrature(tas_selection(cfg), lambda x: -np.log(x)))


def alpha_constant(cfg):
    """Limit of ``mu X`` as theta -> inf: ``1 / E{1/X}`` (0 when E{1/X} diverges)."""
    moment = inverse_moment(cfg)
    return 0.0 if math.isinf(moment) else 1.0 / moment


def ec_infinity(cfg, normalized=False):
    """Strict-QoS limit ``B T log2(1 + alpha)`` in bits per frame."""
    ec = cfg.bt * math.log1p(alpha_constant(cfg)) / math.log(2.0)
    return cfg.normalize(ec) if normalized else ec


# Exact identities behind the cutoff -> 1 argument.

def gamma_sum(m):
    """sum_{q=0}^m C(m, q) Gamma(2+q) / (m+1)^(1+q), exactly (equals 1)."""
    return sum(
        Fraction(math.comb(m, q) * math.factorial(q + 1), (m + 1) ** (q + 1)) for q in range(m + 1)
    )


def gamma_sum_backward(m, p):
    """Sum of the last ``p`` terms (q = m down to m-p+1) of :func:`gamma_sum`."""
    return sum(
        Fraction(math.comb(m, q) * math.factorial(q + 1), (m + 1) ** (q + 1))
        for q in range(m - p + 1, m + 1)
    )


def gamma_sum_backward_closed(m, p):
    """Closed form of :func:`gamma_sum_backward`.

    ``Gamma(m-p+3)/(m+1)^(m-p+1) * m(m-1)...(m-p+3)/(p-1)!`` where the falling
    product is read as ``m!/(m-p+2)!`` (so it is ``1/(m+1)`` when ``p = 1``).
    """
    if not 1 <= p <= m + 1:
        raise ValueError("p must lie in [1, m+1]")
    falling = Fraction(math.factorial(m), math.factorial(m - p + 2))
    return Fraction(math.factorial(m - p + 2), (m + 1) ** (m - p + 1)) * falling / math.factorial(p - 1)


def central_binomial_sum(n):
    """sum_{i=0}^n C(n+i, i) 2^(n-i), exactly (equals 4^n)."""
    return sum(math.comb(n + i, i) * 2 ** (n - i) for i in range(n + 1))


def alternating_harmonic_binomial(mt):
    """sum_{m=0}^{mt-1} C(mt-1, m) (-1)^m / (m+1), exactly (equals 1/mt)."""
    return sum(Fraction((-1) ** m * math.comb(mt - 1, m), m + 1) for m in range(mt))


def identity_suite(max_m=10, max_n=15, max_mt=10):
    """Check the exact identities; returns ``{name: passed}``."""
    report = {}
    for m in range(max_m + 1):
        report[f"gamma_sum[m={m}]"] = gamma_sum(m) == 1
        for p in range(1, m + 2):
            report[f"gamma_sum_backward[m={m},p={p}]"] = gamma_sum_backward(m, p) == gamma_sum_backward_closed(m, p)
    for n in range(max_n + 1):
        report[f"central_binomial_sum[n={n}]"] = central_binomial_sum(n) == 4 ** n
    for mt in range(1, max_mt + 1):
        report[f"alternating_harmonic_binomial[mt={mt}]"] = alternating_harmonic_binomial(mt) == Fraction(1, mt)
    return report


CUTOFF_UNITY_CONFIGS = ((1, 3), (2, 2), (2, 3), (3, 1), (3, 2))


@dataclass(frozen=True)
class CutoffUnityRow:
    mt: int
    mr: int
    snr_db: tuple
    deviation: tuple
    monotone: bool
    final_below: bool

    @property
    def passed(self):
        return self.monotone and self.final_below


def cutoff_unity_check(configs=CUTOFF_UNITY_CONFIGS, theta=1e-5, snr_db=(0, 10, 20, 30, 40), tol=0.05, **cfg_kwargs):
    """Track ``|cutoff - 1|`` over an SNR sweep for near-zero QoS exponent.

    For every ``(mt, mr)`` the deviation should shrink monotonically with SNR
    and end below ``tol``.
    """
    rows = []
    for mt, mr in configs:
        dev = []
        for db in snr_db:
            cfg = SystemConfig.from_db(mt, mr, db, theta, **cfg_kwargs)
            dev.append(abs(solve_cutoff(cfg).cutoff - 1.0))
        monotone = all(b < a for a, b in zip(dev, dev[1:]))
        rows.append(CutoffUnityRow(mt, mr, tuple(snr_db), tuple(dev), monotone, dev[-1] < tol))
    return rows
