"""Mantissa / base-2-exponent arithmetic for sums spanning hundreds of decades.

The weighted Hermite sums behind the finite-n correlation kernels multiply
quantities whose individual magnitudes overflow double precision long before
the final (weighted) result does.  Values are therefore carried as
``mantissa * 2**exp2`` pairs, with the exponent stored separately as a float
array, and renormalized periodically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = float(np.log(2.0))

# exp2 arguments beyond which a float64 conversion is pointless
_EXP2_UNDERFLOW = -1060.0
_EXP2_OVERFLOW = 1020.0


@dataclass(frozen=True)
class ScaledArray:
    """Complex values ``mantissa * 2**exp2`` with elementwise exponents."""

    mantissa: np.ndarray
    exp2: np.ndarray

    def to_complex(self):
        """Collapse to plain complex128; magnitudes below the double range
        become exact 0, magnitudes above raise."""
        e = np.asarray(self.exp2, dtype=float)
        if np.any((e > _EXP2_OVERFLOW) & (self.mantissa != 0)):
            raise OverflowError("scaled value exceeds double-precision range")
        safe = np.where(e < _EXP2_UNDERFLOW, 0.0, np.exp2(np.minimum(e, _EXP2_OVERFLOW)))
        return self.mantissa * safe

    def underflows(self):
        """True where the value is nonzero but too small for a float64."""
        return (self.exp2 < _EXP2_UNDERFLOW) & (self.mantissa != 0)

    def log_abs(self):
        """Natural log of |value| (``-inf`` for exact zeros)."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa)) + self.exp2 * LN2


def renormalize(mant, exp2, *companions):
    """Scale ``mant`` to unit binary magnitude, folding the shift into exp2.

    ``companions`` are arrays sharing the same exponent (e.g. the previous
    chain element); they receive the same shift.  Zero entries are left alone.
    """
    mag = np.abs(mant)
    _, e = np.frexp(mag)
    e = e.astype(float)
    scale = np.exp2(-e)
    out = [mant * scale, exp2 + e]
    for c in companions:
        out.append(c * scale)
    return tuple(out)


def scaled_from_log(log_value, shape=()):
    """ScaledArray equal to exp(log_value) (natural log, real)."""
    lv = np.broadcast_to(np.asarray(log_value, dtype=float), shape).copy()
    return ScaledArray(np.ones(shape, dtype=complex), lv / LN2)
