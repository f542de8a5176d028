"""Link parameterisation shared by the RAS, TAS and Monte Carlo code.

All rates are in bits per frame. Divide by ``bandwidth_hz * frame_s`` (see
:meth:`SystemConfig.normalize`) for bits/s/Hz.
"""
import enum
import math
from dataclasses import dataclass, replace

DEFAULT_BANDWIDTH_HZ = 100e3
DEFAULT_FRAME_S = 1e-3


class Scheme(str, enum.Enum):
    RAS = "ras"
    TAS = "tas"
    JOINT = "joint"


class Power(str, enum.Enum):
    OPTIMAL = "optimal"
    CONSTANT = "constant"


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, bandwidth, frame length, average SNR and QoS exponent.

    ``gamma0`` is the linear average SNR. ``theta`` is the QoS exponent in
    1/bits; ``theta_tilde = theta * B * T / ln 2`` is derived.
    """

    mt: int
    mr: int
    gamma0: float
    theta: float
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    frame_s: float = DEFAULT_FRAME_S

    def __post_init__(self):
        for name in ("mt", "mr"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        for name in ("gamma0", "theta", "bandwidth_hz", "frame_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_db(cls, mt, mr, gamma0_db, theta, **kwargs):
        return cls(mt=mt, mr=mr, gamma0=db_to_linear(gamma0_db), theta=theta, **kwargs)

    @property
    def bt(self):
        """Bandwidth-time product, the bits-per-frame scale of the rates."""
        return self.bandwidth_hz * self.frame_s

    @property
    def theta_tilde(self):
        return self.theta * self.bt / math.log(2.0)

    def normalize(self, bits_per_frame):
        return bits_per_frame / self.bt

    def with_(self, **changes):
        return replace(self, **changes)


def db_to_linear(db):
    return 10.0 ** (float(db) / 10.0)


def effective_capacity_from_log(cfg, log_expectation):
    """E_C = -(1/theta) ln E{exp(-theta R)} given ``ln E{...}``."""
    return -log_expectation / cfg.theta
