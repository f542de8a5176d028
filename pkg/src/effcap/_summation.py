"""Compensated and sign-tracked summation helpers.

The order-statistic expansions are alternating sums whose terms can be many
orders of magnitude larger than the result, so every reduction in the package
goes through one of these.
"""
import math

import numpy as np


def neumaier_sum(terms, axis=0):
    """Compensated (Kahan-Babuska-Neumaier) sum of ``terms`` along ``axis``.

    Vectorised counterpart of :func:`math.fsum` for stacked arrays of terms.
    """
    terms = np.moveaxis(np.asarray(terms, dtype=float), axis, 0)
    total = np.zeros(terms.shape[1:])
    comp = np.zeros(terms.shape[1:])
    for t in terms:
        s = total + t
        big = np.abs(total) >= np.abs(t)
        comp += np.where(big, (total - s) + t, (t - s) + total)
        total = s
    return total + comp


def cancellation_ratio(terms):
    """Return ``sum(|t|) / |sum(t)|`` (``inf`` when the sum vanishes)."""
    terms = list(terms)
    magnitude = math.fsum(abs(t) for t in terms)
    total = abs(math.fsum(terms))
    if magnitude == 0.0:
        return 1.0
    if total == 0.0:
        return math.inf
    return magnitude / total


def signed_log_sum(signs, logs):
    """Sum ``sign_i * exp(log_i)`` without overflow.

    Returns ``(sign, log_abs, ratio)`` where ``ratio`` is the cancellation
    ratio ``sum|t| / |sum t|``. Terms with ``log = -inf`` are ignored.
    A vanishing sum is returned as ``(0, -inf, inf)``.
    """
    pairs = [(s, l) for s, l in zip(signs, logs) if s != 0 and l != -math.inf]
    if not pairs:
        return 0, -math.inf, 1.0
    top = max(l for _, l in pairs)
    scaled = [s * math.exp(l - top) for s, l in pairs]
    total = math.fsum(scaled)
    magnitude = math.fsum(abs(t) for t in scaled)
    if total == 0.0:
        return 0, -math.inf, math.inf
    sign = 1 if total > 0 else -1
    return sign, top + math.log(abs(total)), magnitude / abs(total)
