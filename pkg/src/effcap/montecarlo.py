"""Monte Carlo oracle for the closed forms.

Channel coefficients are circularly-symmetric complex Gaussians with
``E|h|^2 = 1``, drawn from Philox counter-based streams. Trials are split
into fixed-size chunks, each with its own stream spawned from
``SeedSequence(seed)``; chunk results are reduced in chunk order. The
estimate for a given ``(seed, n)`` is therefore independent of how many
workers evaluate the chunks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from effcap.system import Power, Scheme
from effcap.tas import _log_gain, joint_selection_config, mu_coefficient, solve_cutoff

CHUNK = 1 << 16
DEFAULT_TRIALS = 1_000_000


@dataclass(frozen=True)
class ChannelDraw:
    """One channel realisation (``mt x mr`` gains) and the selected SNR."""

    gains: np.ndarray
    selected_snr: float


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")

    def contains(self, value, k=3.0, rel=0.0):
        """True if ``value`` lies within ``max(k std errors, rel*|mean|)`` of the mean."""
        return abs(value - self.mean) <= max(k * self.std_error, rel * abs(self.mean))


def make_rng(seed, chunk=0):
    """Philox generator for chunk ``chunk`` of the stream family ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.Philox(ss))


def channel_gains(cfg, rng, n):
    """``n`` draws of the ``mt x mr`` channel matrix, shape ``(n, mt, mr)``."""
    parts = rng.standard_normal((n, cfg.mt, cfg.mr, 2)) * math.sqrt(0.5)
    return parts[..., 0] + 1j * parts[..., 1]


def selected_snr_from_gains(cfg, scheme, gains):
    """Apply the selection rule of ``scheme`` to channel matrices ``(n, mt, mr)``."""
    power = gains.real ** 2 + gains.imag ** 2
    scheme = Scheme(scheme)
    if scheme is Scheme.RAS:
        per_candidate = power.sum(axis=1)  # one candidate per receive antenna
    elif scheme is Scheme.TAS:
        per_candidate = power.sum(axis=2)  # one candidate per transmit antenna
    else:
        per_candidate = power.reshape(power.shape[0], -1)
    return cfg.gamma0 * per_candidate.max(axis=1)


def sample_selected_snr(cfg, scheme, rng, n=None):
    """Selected SNR for ``n`` independent channels (a scalar if ``n`` is None)."""
    gains = channel_gains(cfg, rng, 1 if n is None else n)
    snr = selected_snr_from_gains(cfg, scheme, gains)
    return float(snr[0]) if n is None else snr


def draw_channel(cfg, scheme, rng):
    gains = channel_gains(cfg, rng, 1)
    return ChannelDraw(gains=gains[0], selected_snr=float(selected_snr_from_gains(cfg, scheme, gains)[0]))


def _chunk_sizes(n):
    full, rest = divmod(n, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _map_chunks(fn, n, seed, jobs):
    sizes = _chunk_sizes(n)
    args = [(make_rng(seed, i), size) for i, size in enumerate(sizes)]
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda a: fn(*a), args))
    return [fn(*a) for a in args]


def _selected_chunks(cfg, scheme, n, seed, jobs):
    return _map_chunks(lambda rng, size: sample_selected_snr(cfg, scheme, rng, size), n, seed, jobs)


def mc_mean(cfg, scheme, fn, n=DEFAULT_TRIALS, seed=0, jobs=1):
    """Sample mean of ``fn(selected_snr)`` with its standard error."""
    chunks = _selected_chunks(cfg, scheme, n, seed, jobs)
    values = [np.asarray(fn(x), dtype=float) for x in chunks]
    s1 = math.fsum(float(np.sum(v)) for v in values)
    s2 = math.fsum(float(np.sum(v * v)) for v in values)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return McEstimate(mean=mean, std_error=math.sqrt(var / n), n=n, seed=seed)


def rate_function(cfg, scheme, power=Power.CONSTANT, policy=None):
    """Service rate (bits per frame) as a function of the selected SNR."""
    scheme, power = Scheme(scheme), Power(power)
    if scheme is Scheme.RAS:
        return lambda x: cfg.bt * np.log1p(x / cfg.mt) / math.log(2.0)
    if power is Power.CONSTANT:
        return lambda x: cfg.bt * np.log1p(x) / math.log(2.0)
    if policy is None:
        policy = solve_cutoff(_tas_like(cfg, scheme))
    return lambda x: cfg.bt * _log_gain(policy, x) / math.log(2.0)


def _tas_like(cfg, scheme):
    return joint_selection_config(cfg) if Scheme(scheme) is Scheme.JOINT else cfg


def mc_effective_capacity(cfg, scheme, power=Power.CONSTANT, n=DEFAULT_TRIALS, seed=0, policy=None, jobs=1):
    """Monte Carlo E_C = -(1/theta) ln mean(exp(-theta R)), bits per frame.

    ``exp(-theta R)`` is accumulated relative to its largest sample so strict
    QoS exponents do not underflow. The standard error is the delta-method
    error of the log-mean divided by theta.
    """
    rate = rate_function(cfg, scheme, power, policy)
    chunks = _selected_chunks(cfg, scheme, n, seed, jobs)
    exponents = [-cfg.theta * rate(x) for x in chunks]
    top = max(float(np.max(e)) for e in exponents)
    scaled = [np.exp(e - top) for e in exponents]
    s1 = math.fsum(float(np.sum(w)) for w in scaled)
    s2 = math.fsum(float(np.sum(w * w)) for w in scaled)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    log_mean = top + math.log(mean)
    se_log = math.sqrt(var / n) / mean
    return McEstimate(mean=-log_mean / cfg.theta, std_error=se_log / cfg.theta, n=n, seed=seed)


def mc_ergodic_rate(cfg, scheme, power=Power.CONSTANT, n=DEFAULT_TRIALS, seed=0, policy=None, jobs=1):
    """Monte Carlo mean service rate E{R}, bits per frame."""
    return mc_mean(cfg, scheme, rate_function(cfg, scheme, power, policy), n, seed, jobs)


def mc_mean_mu(cfg, policy, n=DEFAULT_TRIALS, seed=0, scheme=Scheme.TAS, jobs=1):
    """Monte Carlo average of the power factor under ``policy``."""
    return mc_mean(cfg, scheme, lambda x: mu_coefficient(policy, x), n, seed, jobs)
