"""Continuum-limit bath kernels for parallel-dipole atom pairs.

All quantities are in reduced units: lengths in dipole lengths, times in
(dipole length)/c, and the ultraviolet cutoff ``kappa`` is the dimensionless
maximum wave number.  The pair dephasing kernel decomposes as

    pair_kernel(t, r, theta) =
        alpha/(2*pi*r^2) * (S(t, r)*sin(theta)^2 + C(t, r)*cos(theta)^2)

at zero temperature, where ``theta`` is the angle between the common dipole
direction and the separation vector.  S and C are the transverse and
longitudinal radial kernels, with closed forms built from the cosine
integral; both have a removable singularity on the light cone t = r that is
handled by an analytically cancelled series.  At finite temperature, and for
the secular phase kernel (which has no closed form), the one-dimensional
radial integral is evaluated by panelled adaptive quadrature with explicit
subdivision at the oscillation scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .model import BathParams
from .specfun import cosint_minus_log

__all__ = [
    "KernelValue",
    "QuadratureError",
    "CLOSED_FORM",
    "NEAR_LIGHTCONE",
    "QUADRATURE",
    "transverse_kernel",
    "longitudinal_kernel",
    "pair_kernel",
    "self_kernel",
    "phase_kernel",
]

CLOSED_FORM = "closed_form"
NEAR_LIGHTCONE = "near_lightcone_series"
QUADRATURE = "quadrature"

# Relative half-width of the light-cone window |t - r| < width * max(t, r)
# inside which the removable singularity is evaluated by series.
_LIGHTCONE_WIDTH = 1e-4

# Below kappa*r ~ 1e-6 the closed forms cancel to ~10 digits; the pair kernel
# is then indistinguishable from the single-atom kernel (gap of order
# (kappa*r)^2), so fall through to it.
_COINCIDENT_X = 1e-6

_QUAD_RELTOL = 1e-8
_MAX_PANELS = 200_000


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class KernelValue:
    """Dimensionless kernel value tagged with the evaluation strategy."""

    value: float
    regime: str

    def __float__(self) -> float:
        return self.value


def _one_minus_cos(z: float) -> float:
    # 1 - cos(z) without cancellation at small z
    s = math.sin(0.5 * z)
    return 2.0 * s * s


def _z_minus_sin(z: float) -> float:
    # z - sin(z), series below the cancellation region
    if abs(z) < 1e-2:
        z2 = z * z
        return z * z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    return z - math.sin(z)


def _sinc(z: float) -> float:
    # sin(z)/z with the z = 0 limit
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0)
    return math.sin(z) / z


def _angular_weights(x: float) -> tuple[float, float]:
    """Transverse and longitudinal angular weights of the mode integrand.

    These are the closed angular averages of the dipole projection factor
    against cos(k.R): transverse = j0(x) - j1(x)/x, longitudinal = 2 j1(x)/x
    in terms of spherical Bessel functions, evaluated by series near x = 0.
    Both tend to 2/3 as x -> 0, which is what makes the pair kernel
    continuous at zero separation.
    """
    ax = abs(x)
    if ax < 0.35:
        x2 = x * x
        ws = 2.0 / 3.0 + x2 * (-2.0 / 15.0 + x2 * (1.0 / 140.0 + x2 * (-1.0 / 5670.0 + x2 / 399168.0)))
        wc = 2.0 / 3.0 + x2 * (-1.0 / 15.0 + x2 * (1.0 / 420.0 + x2 * (-1.0 / 22680.0 + x2 / 1995840.0)))
        return ws, wc
    s, c = math.sin(x), math.cos(x)
    j1_over_x = (s - x * c) / (x * x * x)
    return s / x - j1_over_x, 2.0 * j1_over_x


def _coth(z: float) -> float:
    if z > 19.0:
        return 1.0
    if z < 1e-4:
        return 1.0 / z + z / 3.0
    return 1.0 / math.tanh(z)


def _cone_gap(t: float, r: float, kappa: float) -> float:
    """The stable Ci/log combination (t/r)*(g(k(t+r)) - g(k|t-r|)).

    g(x) = Ci(x) - ln(x) extended by g(0) = gamma; the explicit logarithms of
    the raw closed forms cancel exactly against the ones inside Ci, so this
    is finite and accurate through the light cone.
    """
    g_plus = cosint_minus_log(kappa * (t + r)).value
    g_minus = cosint_minus_log(kappa * abs(t - r)).value
    return (t / r) * (g_plus - g_minus)


def transverse_kernel(t: float, r: float, kappa: float) -> KernelValue:
    """Radial kernel for the dipole component transverse to the separation.

    Vanishes at t = 0; finite on the light cone t = r, where the pole of the
    leading rational term is removable and evaluated by Taylor expansion.
    """
    t, r, kappa = float(t), float(r), float(kappa)
    if r <= 0.0:
        raise ValueError("transverse_kernel requires r > 0")
    if t == 0.0:
        return KernelValue(0.0, CLOSED_FORM)

    a = kappa * r
    sin_a, cos_a = math.sin(a), math.cos(a)
    b = kappa * t
    sin_b, cos_b = math.sin(b), math.cos(b)
    u = t / r

    omc_b = _one_minus_cos(b)
    term_sinc = 2.0 * (_sinc(a) * omc_b - cos_a)
    term_ci = _cone_gap(t, r, kappa)

    if abs(t - r) < _LIGHTCONE_WIDTH * max(t, r):
        # 2*B(u)/(1-u^2) with B(1) = 0: divided-difference Taylor around u=1.
        eps = u - 1.0
        sin2a = math.sin(2.0 * a)
        d1 = sin_a * sin_a - 2.0
        d2 = -a * a + a * sin2a - 2.0
        d3 = -3.0 * a * a * sin_a * sin_a
        d4 = a * a * a * (a - 2.0 * sin2a)
        bracket = d1 + eps * (d2 / 2.0 + eps * (d3 / 6.0 + eps * d4 / 24.0))
        term_pole = -2.0 * bracket / (2.0 + eps)
        return KernelValue(term_pole + term_sinc + term_ci, NEAR_LIGHTCONE)

    numer = cos_a * cos_b + u * sin_a * sin_b - u * u
    term_pole = 2.0 * numer / (1.0 - u * u)
    return KernelValue(term_pole + term_sinc + term_ci, CLOSED_FORM)


def longitudinal_kernel(t: float, r: float, kappa: float) -> KernelValue:
    """Radial kernel for the dipole component along the separation.

    The Ci/log combination is evaluated in cancelled form, so no special
    light-cone handling is needed.
    """
    t, r, kappa = float(t), float(r), float(kappa)
    if r <= 0.0:
        raise ValueError("longitudinal_kernel requires r > 0")
    if t == 0.0:
        return KernelValue(0.0, CLOSED_FORM)
    a = kappa * r
    value = -2.0 * _cone_gap(t, r, kappa) - 4.0 * _sinc(a) * _one_minus_cos(kappa * t)
    regime = NEAR_LIGHTCONE if abs(t - r) < _LIGHTCONE_WIDTH * max(t, r) else CLOSED_FORM
    return KernelValue(value, regime)


def _panel_quadrature(integrand, kappa: float, osc_scale: float, label: str) -> float:
    """Integrate over [0, kappa] with panels at the oscillation scale."""
    width = math.pi / max(osc_scale, 1.0)
    n_panels = max(1, math.ceil(kappa / width))
    if n_panels > _MAX_PANELS:
        raise QuadratureError(f"{label}: integrand oscillates too fast to subdivide", math.inf)
    edges = [kappa * i / n_panels for i in range(n_panels + 1)]
    total = 0.0
    comp = 0.0
    err_total = 0.0
    abs_total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-10, limit=100)
        # Neumaier-compensated accumulation
        s = total + val
        if abs(total) >= abs(val):
            comp += (total - s) + val
        else:
            comp += (val - s) + total
        total = s
        err_total += err
        abs_total += abs(val)
    total += comp
    scale = max(abs_total, abs(total), 1e-300)
    if err_total > _QUAD_RELTOL * scale:
        raise QuadratureError(f"{label}: quadrature did not converge", err_total / scale)
    return total


def _dephasing_quadrature(t: float, r: float, theta: float, bath: BathParams) -> float:
    sin2 = math.sin(theta) ** 2
    cos2 = math.cos(theta) ** 2
    theta_t = bath.theta_T
    two_theta = 2.0 * theta_t

    def integrand(q: float) -> float:
        if q == 0.0:
            return 0.0
        ws, wc = _angular_weights(q * r)
        thermal = _coth(q / two_theta) if theta_t > 0.0 else 1.0
        return q * (ws * sin2 + wc * cos2) * _one_minus_cos(q * t) * thermal

    raw = _panel_quadrature(integrand, bath.kappa, max(t, r), "dephasing kernel")
    return bath.alpha / math.pi * raw


def pair_kernel(t: float, r: float, theta: float, bath: BathParams) -> KernelValue:
    """Dephasing kernel for a pair of atoms at separation r, angle theta.

    theta is the angle between the common dipole direction and the
    separation; only even functions of it enter.  Zero temperature routes to
    the closed forms, finite temperature to quadrature with the same sharp
    cutoff.
    """
    t, r, theta = float(t), float(r), float(theta)
    if r <= 0.0:
        raise ValueError("pair_kernel requires r > 0; use self_kernel for coincident atoms")
    if t == 0.0:
        return KernelValue(0.0, CLOSED_FORM)
    if bath.theta_T > 0.0:
        return KernelValue(_dephasing_quadrature(t, r, theta, bath), QUADRATURE)
    if bath.kappa * r < _COINCIDENT_X and r < 1e-3 * t:
        return KernelValue(self_kernel(t, bath).value, CLOSED_FORM)
    s_val = transverse_kernel(t, r, bath.kappa)
    c_val = longitudinal_kernel(t, r, bath.kappa)
    amp = bath.alpha / (2.0 * math.pi * r * r)
    value = amp * (s_val.value * math.sin(theta) ** 2 + c_val.value * math.cos(theta) ** 2)
    regime = NEAR_LIGHTCONE if NEAR_LIGHTCONE in (s_val.regime, c_val.regime) else CLOSED_FORM
    return KernelValue(value, regime)


def self_kernel(t: float, bath: BathParams) -> KernelValue:
    """Single-atom dephasing kernel (zero-separation limit of pair_kernel).

    Closed form at zero temperature; quadrature of the same radial integral
    at zero separation otherwise.
    """
    t = float(t)
    if t < 0.0:
        raise ValueError("self_kernel requires t >= 0")
    if t == 0.0:
        return KernelValue(0.0, CLOSED_FORM)
    if bath.theta_T > 0.0:
        return KernelValue(_dephasing_quadrature(t, 0.0, 0.0, bath), QUADRATURE)
    x = bath.kappa * t
    x2 = x * x
    if x < 0.1:
        h = x2 / 8.0 - x2 * x2 / 144.0 + x2 * x2 * x2 / 5760.0
    else:
        h = 0.5 + (_one_minus_cos(x) - x * math.sin(x)) / x2
    value = 2.0 * bath.alpha / (3.0 * math.pi) * bath.kappa**2 * h
    return KernelValue(value, CLOSED_FORM)


def phase_kernel(t: float, r: float, theta: float, bath: BathParams) -> KernelValue:
    """Secular phase kernel between two atoms (temperature independent).

    No closed form is available; the radial integral with weight
    (q*t - sin(q*t)) is evaluated by panelled quadrature.  Accepts r = 0, in
    which case the result is independent of theta.
    """
    t, r, theta = float(t), float(r), float(theta)
    if r < 0.0:
        raise ValueError("phase_kernel requires r >= 0")
    if t == 0.0:
        return KernelValue(0.0, QUADRATURE)
    sin2 = math.sin(theta) ** 2
    cos2 = math.cos(theta) ** 2

    def integrand(q: float) -> float:
        if q == 0.0:
            return 0.0
        ws, wc = _angular_weights(q * r)
        return q * (ws * sin2 + wc * cos2) * _z_minus_sin(q * t)

    raw = _panel_quadrature(integrand, bath.kappa, max(t, r), "phase kernel")
    return KernelValue(2.0 * bath.alpha / math.pi * raw, QUADRATURE)
