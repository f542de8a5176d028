"""Effective capacity with receive antenna selection and equal transmit power.

The receiver keeps the antenna whose MISO SNR (sum over the ``mt`` transmit
branches) is largest, and the service rate is ``B T log2(1 + snr / mt)``.
The moment ``E{(1 + X/mt)^(-theta_tilde)}`` is integrated term by term against
the expanded order-statistic density, each term reducing to a Tricomi
function.
"""
import math
import warnings

import numpy as np

from effcap._summation import signed_log_sum
from effcap.errors import CancellationWarning
from effcap.orderstats import (
    BranchSnrDist,
    SelectionConfig,
    build_coefficients,
    expansion_terms,
    log_expectation_quadrature,
)
from effcap.specfun import QuadratureSpec, log_tricomi_u
from effcap.system import effective_capacity_from_log

#: Cancellation ratio above which a warning is issued.
WARN_RATIO = 1e6
#: Cancellation ratio above which ``method="auto"`` switches to quadrature.
FALLBACK_RATIO = 1e8
METHODS = ("auto", "closed", "quadrature")


def miso_service_rate(cfg, snr):
    """Bits per frame ``B T log2(1 + snr / mt)`` on the selected receive antenna."""
    snr = np.asarray(snr, dtype=float)
    out = cfg.bt * np.log1p(snr / cfg.mt) / math.log(2.0)
    return out[()] if out.ndim == 0 else out


def ras_selection(cfg):
    """Order-statistic setup for RAS: ``mr`` candidates, each summing ``mt`` branches."""
    return SelectionConfig(num_candidates=cfg.mr, branch=BranchSnrDist(k=cfg.mt, gamma0=cfg.gamma0))


def closed_form_log_sum(sel, theta_tilde, scale=1.0, spec=QuadratureSpec()):
    """Signed Tricomi-term sum for E{(1 + X/scale)^(-theta_tilde)}.

    Each expansion term ``w x^(a-1) e^(-r x)`` integrates to
    ``w scale^a Gamma(a) U(a, a - theta_tilde + 1, r scale)``. Returns
    ``(sign, log|sum|, cancellation_ratio)``.
    """
    table = build_coefficients(sel.branch, sel.num_candidates - 1)
    signs, logs = [], []
    for sign, log_w, a, rate in expansion_terms(sel, table):
        signs.append(sign)
        logs.append(
            log_w + a * math.log(scale) + math.lgamma(a)
            + log_tricomi_u(a, a - theta_tilde + 1.0, rate * scale, spec)
        )
    return signed_log_sum(signs, logs)


def log_expected_power_law(sel, theta_tilde, scale=1.0, method="auto", spec=QuadratureSpec()):
    """log E{(1 + X/scale)^(-theta_tilde)} for the selected SNR ``X``.

    ``method="closed"`` uses :func:`closed_form_log_sum`. ``"auto"`` does the
    same but falls back to direct quadrature of ``L F^(L-1) f`` when the
    alternating sum cancels by more than :data:`FALLBACK_RATIO`;
    ``"quadrature"`` forces the fallback.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if method != "quadrature":
        sign, log_value, ratio = closed_form_log_sum(sel, theta_tilde, scale, spec)
        if method == "closed" or (sign > 0 and ratio <= FALLBACK_RATIO):
            if ratio > WARN_RATIO:
                warnings.warn(
                    f"alternating expansion cancels by a factor {ratio:.2e}",
                    CancellationWarning,
                    stacklevel=2,
                )
            if sign <= 0:
                raise ArithmeticError("alternating expansion cancelled completely")
            return log_value

    def log_g(x):
        return -theta_tilde * np.log1p(x / scale)

    return log_expectation_quadrature(sel, log_g)


def ras_log_expectation(cfg, method="auto"):
    return log_expected_power_law(ras_selection(cfg), cfg.theta_tilde, scale=cfg.mt, method=method)


def ras_expectation(cfg, method="auto"):
    """E{(1 + X/mt)^(-theta_tilde)} for the RAS-selected SNR ``X``; lies in (0, 1]."""
    return math.exp(ras_log_expectation(cfg, method))


def ras_effective_capacity(cfg, normalized=False, method="auto"):
    """Effective capacity under RAS in bits per frame (bits/s/Hz if ``normalized``)."""
    ec = effective_capacity_from_log(cfg, ras_log_expectation(cfg, method))
    return cfg.normalize(ec) if normalized else ec
