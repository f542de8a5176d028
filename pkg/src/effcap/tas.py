"""Transmit antenna selection with QoS-driven power control.

The transmitter uses the antenna whose SIMO SNR (sum over the ``mr`` receive
branches) is largest and scales its power by

    mu(x) = 0                                           x < cutoff
            cutoff^(-1/(tt+1)) x^(-tt/(tt+1)) - 1/x      x >= cutoff

with ``tt = theta_tilde``. The cutoff is the root of the average-power
constraint ``E{mu} = 1``. For moderate QoS exponents the cutoff already falls
below 1e-20, and near theta = 10 it is around exp(-2300), so the policy stores
and solves for ``log(cutoff)``.
"""
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from effcap._summation import signed_log_sum
from effcap.errors import BracketError, CancellationWarning
from effcap.orderstats import (
    BranchSnrDist,
    SelectionConfig,
    build_coefficients,
    expansion_terms,
    log_expectation_quadrature,
)
from effcap.ras import METHODS, WARN_RATIO, log_expected_power_law
from effcap.specfun import log_lower_inc_gamma, log_upper_inc_gamma
from effcap.system import effective_capacity_from_log

CUTOFF_TOL = 1e-9
#: Cancellation above which ``method="auto"`` integrates numerically instead.
#: Term errors near 1e-16 times this ratio stay well inside CUTOFF_TOL.
FALLBACK_RATIO = 1e6


@dataclass(frozen=True)
class PowerPolicy:
    """Cutoff (held as its logarithm) and the normalized QoS exponent.

    ``theta_tilde = 0`` is the water-filling policy.
    """

    log_cutoff: float
    theta_tilde: float

    def __post_init__(self):
        if not math.isfinite(self.log_cutoff):
            raise ValueError("cutoff must be positive and finite")
        if not self.theta_tilde >= 0:
            raise ValueError("theta_tilde must be nonnegative")

    @classmethod
    def from_cutoff(cls, cutoff, theta_tilde):
        if not cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {cutoff!r}")
        return cls(math.log(cutoff), theta_tilde)

    @property
    def cutoff(self):
        """Linear cutoff SNR; underflows to 0.0 for very strict QoS."""
        return math.exp(self.log_cutoff)


def tas_selection(cfg):
    """Order-statistic setup for TAS: ``mt`` candidates, each summing ``mr`` branches."""
    return SelectionConfig(num_candidates=cfg.mt, branch=BranchSnrDist(k=cfg.mr, gamma0=cfg.gamma0))


def joint_selection_config(cfg):
    """Joint transmit/receive selection as TAS over ``mt*mr`` single-branch candidates."""
    return replace(cfg, mt=cfg.mt * cfg.mr, mr=1)


def _log_gain(policy, snr):
    """log(1 + mu x) = (log x - log cutoff) / (tt + 1) above the cutoff, else 0."""
    snr = np.asarray(snr, dtype=float)
    with np.errstate(divide="ignore"):
        excess = np.log(snr) - policy.log_cutoff
    return np.where(excess >= 0, excess / (policy.theta_tilde + 1.0), 0.0)


def mu_coefficient(policy, snr):
    """Power scaling of the selected antenna at instantaneous SNR ``snr``."""
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0):
        raise ValueError("snr must be nonnegative")
    gain = _log_gain(policy, snr)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(gain > 0, np.expm1(gain) / snr, 0.0)
    return out[()] if out.ndim == 0 else out


def simo_service_rate(cfg, policy, snr):
    """Bits per frame ``B T log2(1 + mu(snr) snr)``."""
    out = cfg.bt * _log_gain(policy, snr) / math.log(2.0)
    return out[()] if np.ndim(out) == 0 else out


def _tas_terms(cfg):
    sel = tas_selection(cfg)
    return list(expansion_terms(sel, build_coefficients(sel.branch, sel.num_candidates - 1)))


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _use_closed(method, sign, ratio):
    return method == "closed" or (method == "auto" and sign > 0 and ratio <= FALLBACK_RATIO)


def _mean_mu_closed(cfg, log_cutoff, theta_tilde, terms=None):
    # For a term w x^(a-1) e^(-r x):
    #   int_c^inf mu(x) w x^(a-1) e^(-rx) dx
    #     = w [c^(-1/(tt+1)) r^-(a-s) Gamma(a-s, rc) - r^-(a-1) Gamma(a-1, rc)],
    # with s = tt/(tt+1). Gamma(0, .) is E1.
    s = theta_tilde / (theta_tilde + 1.0)
    signs, logs = [], []
    for sign, log_w, a, rate in terms or _tas_terms(cfg):
        log_rate = math.log(rate)
        log_x0 = log_rate + log_cutoff
        signs.append(sign)
        logs.append(
            log_w - log_cutoff / (theta_tilde + 1.0) - (a - s) * log_rate
            + log_upper_inc_gamma(a - s, 0.0, log_x=log_x0)
        )
        signs.append(-sign)
        logs.append(log_w - (a - 1) * log_rate + log_upper_inc_gamma(a - 1, 0.0, log_x=log_x0))
    return signed_log_sum(signs, logs)


def _mean_mu_quadrature(cfg, log_cutoff, theta_tilde):
    policy = PowerPolicy(log_cutoff, theta_tilde)

    def log_g(x):
        gain = _log_gain(policy, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.expm1(gain)) - np.log(x)

    cutoff = math.exp(log_cutoff)
    return math.exp(log_expectation_quadrature(tas_selection(cfg), log_g, kinks=(cutoff,)))


def _mean_mu_log_cutoff(cfg, log_cutoff, theta_tilde, terms=None, method="auto"):
    if method != "quadrature":
        sign, log_value, ratio = _mean_mu_closed(cfg, log_cutoff, theta_tilde, terms)
        if _use_closed(method, sign, ratio):
            return sign * math.exp(log_value) if sign else 0.0
    return _mean_mu_quadrature(cfg, log_cutoff, theta_tilde)


def mean_mu(cfg, cutoff, theta_tilde=None, method="auto"):
    """Closed-form average power factor E{mu} for a given linear cutoff.

    ``theta_tilde`` defaults to ``cfg.theta_tilde``; pass 0 for water-filling.
    ``method`` selects the route as for :func:`tas_log_expectation`.
    """
    if not cutoff > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff!r}")
    return mean_mu_log_cutoff(cfg, math.log(cutoff), theta_tilde, method)


def mean_mu_log_cutoff(cfg, log_cutoff, theta_tilde=None, method="auto"):
    """As :func:`mean_mu`, parameterised by ``log(cutoff)``."""
    _check_method(method)
    tt = cfg.theta_tilde if theta_tilde is None else theta_tilde
    return _mean_mu_log_cutoff(cfg, log_cutoff, tt, method=method)


def solve_cutoff(cfg, theta_tilde=None):
    """Solve ``E{mu} = 1`` for the cutoff and return the :class:`PowerPolicy`.

    E{mu} is strictly decreasing in the cutoff. The bracket starts at
    [1e-12, 1] and is widened geometrically (doubling ``|log cutoff|`` below,
    stepping up above) until it changes sign; Brent's method then finishes in
    ``log(cutoff)``.

    Raises:
        BracketError: if no sign change is found.
    """
    tt = cfg.theta_tilde if theta_tilde is None else theta_tilde
    terms = _tas_terms(cfg)

    def h(u):
        return _mean_mu_log_cutoff(cfg, u, tt, terms) - 1.0

    lo, hi = math.log(1e-12), 0.0
    f_lo, f_hi = h(lo), h(hi)
    while f_lo <= 0:
        hi, f_hi = lo, f_lo
        lo *= 2.0
        if lo < -1e6:
            raise BracketError("cutoff bracket failed below", lo, hi, f_lo, f_hi)
        f_lo = h(lo)
    step = 1.0
    while f_hi >= 0:
        lo, f_lo = hi, f_hi
        hi += step
        step *= 2.0
        if hi > 700.0:
            raise BracketError("cutoff bracket failed above", lo, hi, f_lo, f_hi)
        f_hi = h(hi)
    u = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    policy = PowerPolicy(u, tt)
    residual = h(u)
    if abs(residual) > CUTOFF_TOL:
        raise BracketError(f"cutoff solve residual {residual:.3e} exceeds tolerance", lo, hi, f_lo, f_hi)
    return policy


def _tas_expectation_closed(cfg, policy):
    tt = policy.theta_tilde
    s = tt / (tt + 1.0)
    lc = policy.log_cutoff
    signs, logs = [], []
    for sign, log_w, a, rate in _tas_terms(cfg):
        log_rate = math.log(rate)
        log_x0 = log_rate + lc
        signs.append(sign)
        logs.append(log_w - a * log_rate + log_lower_inc_gamma(a, 0.0, log_x=log_x0))
        signs.append(sign)
        logs.append(log_w + s * lc - (a - s) * log_rate + log_upper_inc_gamma(a - s, 0.0, log_x=log_x0))
    return signed_log_sum(signs, logs)


def tas_log_expectation(cfg, policy, method="auto"):
    """log E{(1 + mu X)^(-theta_tilde)} under ``policy``.

    Below the cutoff the integrand is 1; above it equals
    ``(x / cutoff)^(-s)``, so each expansion term yields a lower and an upper
    incomplete gamma function. ``method="auto"`` switches to quadrature of
    the same integrand when the signed sum cancels by more than
    :data:`FALLBACK_RATIO`; ``"closed"`` and ``"quadrature"`` force a route.
    """
    _check_method(method)
    if method != "quadrature":
        sign, log_value, ratio = _tas_expectation_closed(cfg, policy)
        if _use_closed(method, sign, ratio):
            if ratio > WARN_RATIO:
                warnings.warn(f"TAS expansion cancels by a factor {ratio:.2e}", CancellationWarning, stacklevel=2)
            if sign <= 0:
                raise ArithmeticError("TAS expansion cancelled completely")
            return log_value

    def log_g(x):
        return -policy.theta_tilde * _log_gain(policy, x)

    return log_expectation_quadrature(tas_selection(cfg), log_g, kinks=(policy.cutoff,))


def tas_expectation(cfg, policy, method="auto"):
    return math.exp(tas_log_expectation(cfg, policy, method))


def tas_effective_capacity(cfg, normalized=False, policy=None, method="auto"):
    """Effective capacity with TAS and optimal power control, bits per frame."""
    if policy is None:
        policy = solve_cutoff(cfg)
    ec = effective_capacity_from_log(cfg, tas_log_expectation(cfg, policy, method))
    return cfg.normalize(ec) if normalized else ec


def constant_power_log_expectation(cfg, method="auto"):
    return log_expected_power_law(tas_selection(cfg), cfg.theta_tilde, scale=1.0, method=method)


def constant_power_effective_capacity(cfg, normalized=False, method="auto"):
    """TAS effective capacity with ``mu = 1`` on the selected antenna."""
    ec = effective_capacity_from_log(cfg, constant_power_log_expectation(cfg, method))
    return cfg.normalize(ec) if normalized else ec
