"""Scalar special functions backing the closed-form bath kernels.

The only nontrivial function needed is the cosine integral

    Ci(x) = gamma + ln(x) + integral_0^x (cos(u) - 1)/u du,

evaluated here by a convergent power series for small arguments and by a
complex continued fraction for the exponential integral E1(i*x) beyond the
series branch point.  The combination Ci(x) - ln(x), which is finite at
x = 0, is exposed separately so callers can form light-cone differences
without catastrophic cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["EULER_GAMMA", "SpecFunResult", "cosint", "cosint_minus_log"]

# Euler-Mascheroni constant, 17 significant digits.
EULER_GAMMA = 0.57721566490153286

# Branch point between the power series and the continued fraction.
_SERIES_MAX = 4.0

_EPS = 2.220446049250313e-16
_MAX_CF_ITER = 400


@dataclass(frozen=True)
class SpecFunResult:
    """Value of a special function together with an absolute error estimate."""

    value: float
    est_error: float


def _series_tail(x: float) -> tuple[float, float]:
    """Sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!), with an error estimate.

    Converges for all x; used only for x <= _SERIES_MAX where the terms never
    grow large enough to lose precision.
    """
    x2 = x * x
    term = -x2 / 4.0  # k = 1
    total = term
    magsum = abs(term)
    k = 1
    while abs(term) > _EPS * max(1.0, abs(total)):
        term *= -x2 * (2 * k) / ((2 * k + 2) * (2 * k + 2) * (2 * k + 1))
        k += 1
        total += term
        magsum += abs(term)
        if k > 200:  # unreachable for x <= 4, defensive
            break
    err = abs(term) + _EPS * magsum
    return total, err


def _e1_imag_cf(x: float) -> tuple[complex, float]:
    """E1(i*x) for real x > 0 by a modified Lentz continued fraction.

    Returns (value, error estimate).  Stable and overflow-free because the
    prefactor exp(-i*x) has unit modulus.
    """
    tiny = 1e-300
    b = complex(1.0, x)
    c = complex(1.0 / tiny)
    d = 1.0 / b
    h = d
    delta_off = 1.0
    for i in range(1, _MAX_CF_ITER + 1):
        a = -float(i * i)
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = complex(tiny)
        d = 1.0 / d
        c = b + a / c
        if abs(c) < tiny:
            c = complex(tiny)
        delta = c * d
        h *= delta
        delta_off = abs(delta - 1.0)
        if delta_off < _EPS:
            break
    value = complex(math.cos(x), -math.sin(x)) * h
    err = (delta_off + _EPS) * abs(value)
    return value, err


def cosint(x: float) -> SpecFunResult:
    """Cosine integral Ci(x) for x > 0.

    Raises ValueError for x <= 0 (Ci diverges logarithmically at the origin
    and is complex for negative arguments).  Arguments up to ~1e8 are safe;
    the continued fraction converges in a handful of iterations there.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"cosint requires x > 0, got {x!r}")
    if x <= _SERIES_MAX:
        tail, tail_err = _series_tail(x)
        value = EULER_GAMMA + math.log(x) + tail
        err = tail_err + _EPS * (abs(math.log(x)) + EULER_GAMMA)
        return SpecFunResult(value, err)
    e1, e1_err = _e1_imag_cf(x)
    # Ci(x) = -Re E1(i x) for real x > 0.
    return SpecFunResult(-e1.real, e1_err + _EPS)


def cosint_minus_log(x: float) -> SpecFunResult:
    """Ci(x) - ln(x), extended continuously to x = 0 where it equals gamma.

    Total on x >= 0; this is the cancellation-free building block for
    Ci(kappa*|t - r|) - ln|t - r| combinations near the light cone.
    """
    x = float(x)
    if x < 0.0:
        raise ValueError(f"cosint_minus_log requires x >= 0, got {x!r}")
    if x == 0.0:
        return SpecFunResult(EULER_GAMMA, _EPS)
    if x <= _SERIES_MAX:
        tail, tail_err = _series_tail(x)
        return SpecFunResult(EULER_GAMMA + tail, tail_err + _EPS)
    e1, e1_err = _e1_imag_cf(x)
    value = -e1.real - math.log(x)
    return SpecFunResult(value, e1_err + _EPS * (1.0 + math.log(x)))
