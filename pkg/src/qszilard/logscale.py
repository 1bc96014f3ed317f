"""Sign-aware log-scaled scalars and stable log-space reductions.

Partition functions in this problem span hundreds of orders of magnitude
(a squeezed segment at low temperature has ln Z ~ -1e8), so every sum of
Boltzmann weights is accumulated as (log magnitude, sign) with a max-shift
before exponentiation.  Sign 0 encodes an exact zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")


def logsumexp(log_terms, axis=0):
    """Stable log of a sum of nonnegative terms given by their logs.

    Entries equal to -inf are exact zeros.  Returns -inf where every term
    along ``axis`` is zero.
    """
    a = np.asarray(log_terms, dtype=float)
    shift = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(shift), shift, 0.0)
    total = np.sum(np.exp(a - safe), axis=axis)
    with np.errstate(divide="ignore"):
        out = np.squeeze(safe, axis=axis) + np.log(total)
    return out if out.ndim else float(out)


def signed_logsumexp(log_terms, signs, axis=0):
    """Log of a signed sum: returns (log magnitude, sign) arrays.

    The shift uses the largest nonzero term, so cancellation between
    near-equal terms of opposite sign is exposed as a small residual
    magnitude (or sign 0 on complete cancellation) instead of overflow.
    """
    a = np.asarray(log_terms, dtype=float)
    s = np.asarray(signs, dtype=float)
    live = np.where(s != 0.0, a, NEG_INF)
    shift = np.max(live, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(shift), shift, 0.0)
    total = np.sum(s * np.exp(live - safe), axis=axis)
    mag = np.abs(total)
    with np.errstate(divide="ignore"):
        out_log = np.squeeze(safe, axis=axis) + np.log(np.where(mag > 0.0, mag, 1.0))
    out_log = np.where(mag > 0.0, out_log, NEG_INF)
    out_sign = np.sign(total)
    if out_log.ndim == 0:
        return float(out_log), float(out_sign)
    return out_log, out_sign


@dataclass(frozen=True)
class LogScaledValue:
    """A real number stored as sign * exp(log_magnitude).

    ``sign`` is +1, -1, or 0; for sign 0 the magnitude field is ignored.
    """

    log_magnitude: float
    sign: int

    @classmethod
    def from_value(cls, value: float) -> "LogScaledValue":
        if value == 0.0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = 1) -> "LogScaledValue":
        if sign == 0 or log_magnitude == NEG_INF:
            return cls.zero()
        return cls(float(log_magnitude), 1 if sign > 0 else -1)

    @classmethod
    def zero(cls) -> "LogScaledValue":
        return cls(NEG_INF, 0)

    @classmethod
    def one(cls) -> "LogScaledValue":
        return cls(0.0, 1)

    def value(self) -> float:
        """Plain float value; may under/overflow for extreme magnitudes."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def log(self) -> float:
        """Natural log; only defined for strictly positive values."""
        if self.sign <= 0:
            raise ValueError("log of a nonpositive log-scaled value")
        return self.log_magnitude

    def __mul__(self, other: "LogScaledValue") -> "LogScaledValue":
        if self.sign == 0 or other.sign == 0:
            return LogScaledValue.zero()
        return LogScaledValue(self.log_magnitude + other.log_magnitude,
                              self.sign * other.sign)

    def __add__(self, other: "LogScaledValue") -> "LogScaledValue":
        log, sign = signed_logsumexp(
            [self.log_magnitude, other.log_magnitude],
            [self.sign, other.sign])
        return LogScaledValue.from_log(log, int(sign))

    def __neg__(self) -> "LogScaledValue":
        return LogScaledValue(self.log_magnitude, -self.sign)
