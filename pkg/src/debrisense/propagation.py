"""Per-mechanism complex transfer functions of the inter-satellite channel.

Implements the free-space line-of-sight response, specular reflection with
a Rayleigh roughness factor, Beckmann-Kirchhoff rough-surface scattering,
piecewise knife-edge diffraction and the Doppler phase factor.  Molecular
absorption is taken as unity: at LEO altitudes the water/oxygen content is
negligible across the band of interest.

All functions are pure; phases of delay and Doppler terms are wrapped to
the principal value before exponentiation so that multi-gigacycle phase
arguments do not lose the complex value to floating-point cancellation.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import (FREE_SPACE_IMPEDANCE, SPEED_OF_LIGHT,
                        VACUUM_PERMEABILITY, VACUUM_PERMITTIVITY)
from .errors import GrazingGeometryError, ConvergenceWarning
from .materials import MaterialProperties
from .scene import diffraction_excess_path, incidence_angle


class Polarization(enum.Enum):
    TE = "te"
    TM = "tm"


@dataclass(frozen=True)
class ScatterGeometry:
    """Bistatic scattering angles: incidence, scatter elevation, azimuth."""

    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        if not (0.0 <= self.theta1 < math.pi / 2 and 0.0 <= self.theta2 < math.pi / 2):
            raise ValueError("theta1/theta2 must lie in [0, pi/2)")
        if not (0.0 <= self.theta3 < 2 * math.pi):
            raise ValueError("theta3 must lie in [0, 2*pi)")


def wrapped_phase_factor(cycles: float) -> complex:
    """exp(-2j*pi*cycles) with the cycle count reduced to [-1/2, 1/2].

    Raw phase arguments at THz reach 1e9+ cycles; reducing first keeps the
    complex value exact instead of evaluating sin/cos of a huge argument.
    """
    frac = math.remainder(cycles, 1.0)
    return cmath.exp(-2j * math.pi * frac)


def fspl_amplitude(f_hz: float, r_m: float) -> float:
    """Free-space amplitude factor c / (4*pi*f*r)."""
    if f_hz <= 0 or r_m <= 0:
        raise ValueError(f"frequency and range must be > 0, got f={f_hz}, r={r_m}")
    return SPEED_OF_LIGHT / (4.0 * math.pi * f_hz * r_m)


def doppler_factor(f_hz: float, v_m_s: float) -> complex:
    """Unit-modulus Doppler phasor for the link's relative radial velocity."""
    if f_hz <= 0:
        raise ValueError(f"frequency must be > 0, got {f_hz}")
    return wrapped_phase_factor(f_hz * v_m_s / SPEED_OF_LIGHT)


def los_response(f_hz: float, distance_m: float) -> complex:
    """Direct-path transfer function: FSPL amplitude and delay phase."""
    amp = fspl_amplitude(f_hz, distance_m)
    tau = distance_m / SPEED_OF_LIGHT
    return amp * wrapped_phase_factor(f_hz * tau)


# ---------------------------------------------------------------------------
# Reflection
# ---------------------------------------------------------------------------

def complex_refractive_index(f_hz: float, material: MaterialProperties) -> complex:
    """n - j*kappa with kappa = alpha*c/(4*pi*f)."""
    n = material.refractive_index(f_hz)
    kappa = material.absorption(f_hz) * SPEED_OF_LIGHT / (4.0 * math.pi * f_hz)
    return complex(n, -kappa)


def wave_impedance(f_hz: float, material: MaterialProperties) -> complex:
    """Intrinsic wave impedance of the (lossy) reflecting medium, ohms."""
    if f_hz <= 0:
        raise ValueError(f"frequency must be > 0, got {f_hz}")
    n = material.refractive_index(f_hz)
    alpha = material.absorption(f_hz)
    k = alpha * SPEED_OF_LIGHT / (4.0 * math.pi * f_hz)
    eps_rel = complex(n * n - k * k, -2.0 * n * k)
    return cmath.sqrt(VACUUM_PERMEABILITY / (VACUUM_PERMITTIVITY * eps_rel))


def fresnel_coefficients(f_hz: float, theta_i: float,
                         material: MaterialProperties) -> tuple[complex, complex]:
    """(Gamma_TE, Gamma_TM) for a vacuum / material planar interface.

    Uses the impedance-ratio form with the transmission angle from Snell's
    law evaluated with the complex refractive index.
    """
    if not (0.0 <= theta_i < math.pi / 2):
        raise ValueError(f"incidence angle must lie in [0, pi/2), got {theta_i}")
    n_c = complex_refractive_index(f_hz, material)
    z1 = FREE_SPACE_IMPEDANCE
    z2 = wave_impedance(f_hz, material)
    cos_i = math.cos(theta_i)
    sin_t = math.sin(theta_i) / n_c
    cos_t = cmath.sqrt(1.0 - sin_t * sin_t)
    gamma_te = (z2 * cos_i - z1 * cos_t) / (z2 * cos_i + z1 * cos_t)
    gamma_tm = (z2 * cos_t - z1 * cos_i) / (z2 * cos_t + z1 * cos_i)
    return gamma_te, gamma_tm


def roughness_coefficient(f_hz: float, sigma_m: float, theta_i: float) -> float:
    """Rayleigh roughness attenuation exp(-g/2), g = (4*pi*sigma*cos(theta)/lambda)^2."""
    if sigma_m < 0:
        raise ValueError(f"surface sigma must be >= 0, got {sigma_m}")
    lam = SPEED_OF_LIGHT / f_hz
    g = (4.0 * math.pi * sigma_m * math.cos(theta_i) / lam) ** 2
    return math.exp(-0.5 * g)


def reflection_coefficient(f_hz: float, theta_i: float,
                           material: MaterialProperties,
                           pol: Polarization) -> complex:
    """Roughness-modified reflection coefficient rho(f) * Gamma_p."""
    gamma_te, gamma_tm = fresnel_coefficients(f_hz, theta_i, material)
    gamma = gamma_te if pol is Polarization.TE else gamma_tm
    return roughness_coefficient(f_hz, material.roughness_sigma_m, theta_i) * gamma


def reflected_response(f_hz: float, s1_m: float, s2_m: float, d_m: float,
                       material: MaterialProperties,
                       pol: Polarization) -> complex:
    """Reflected-path transfer function.

    Magnitude is the FSPL of the unfolded path times |R|; the delay is the
    direct-path delay plus the geometric excess.
    """
    total = s1_m + s2_m
    amp = fspl_amplitude(f_hz, total)
    theta_i = incidence_angle(s1_m, s2_m, d_m)
    r = reflection_coefficient(f_hz, theta_i, material, pol)
    tau = total / SPEED_OF_LIGHT
    return amp * r * wrapped_phase_factor(f_hz * tau)


# ---------------------------------------------------------------------------
# Beckmann-Kirchhoff scattering
# ---------------------------------------------------------------------------

SERIES_MAX_TERMS = 200
SERIES_REL_TOL = 1e-10
SERIES_WARN_TOL = 1e-6


def scattering_series_sum(g_sca: float, vxy_sq_lcorr_sq: float,
                          max_terms: int = SERIES_MAX_TERMS) -> float:
    """Diffuse-lobe series  sum_m g^m/(m!*m) * exp(-vxy^2*lcorr^2/(4m)).

    Evaluated in log space (terms overflow float64 long before convergence
    for rough surfaces).  Truncates once the next term's relative
    contribution drops below SERIES_REL_TOL; hitting ``max_terms`` with a
    relative term above SERIES_WARN_TOL emits a ConvergenceWarning.
    """
    if g_sca < 0:
        raise ValueError(f"roughness factor must be >= 0, got {g_sca}")
    if g_sca == 0.0:
        return 0.0
    log_g = math.log(g_sca)
    log_sum = None
    last_rel = math.inf
    for m in range(1, max_terms + 1):
        log_term = (m * log_g - math.lgamma(m + 1) - math.log(m)
                    - vxy_sq_lcorr_sq / (4.0 * m))
        if log_sum is None:
            log_sum = log_term
        else:
            hi = max(log_sum, log_term)
            log_sum = hi + math.log(math.exp(log_sum - hi) + math.exp(log_term - hi))
        last_rel = math.exp(log_term - log_sum)
        if last_rel < SERIES_REL_TOL:
            break
    else:
        if last_rel > SERIES_WARN_TOL:
            # fixed text so the default warning filter deduplicates it
            warnings.warn(
                f"scattering series hit the {max_terms}-term cap before the "
                f"{SERIES_WARN_TOL:g} relative tolerance", ConvergenceWarning)
    return math.exp(log_sum)


def scattering_coefficient(f_hz: float, geom: ScatterGeometry,
                           material: MaterialProperties, pol: Polarization,
                           max_terms: int = SERIES_MAX_TERMS) -> complex:
    """Beckmann-Kirchhoff bistatic scattering coefficient.

    Combines the specular reflectance ``rho0`` with the diffuse-lobe series
    and applies the Rayleigh attenuation exp(-g) of the incidence angle to
    the bracket (the growing-exponential variant is unphysical: it diverges
    for rough surfaces).
    """
    lam = SPEED_OF_LIGHT / f_hz
    if material.facet_lx_m < 10 * lam or material.facet_ly_m < 10 * lam:
        raise ValueError(
            f"facet dims ({material.facet_lx_m}, {material.facet_ly_m}) m must be "
            f">= 10 wavelengths ({10 * lam:.4g} m) for the physical-optics model")
    k = 2.0 * math.pi / lam
    c1, c2 = math.cos(geom.theta1), math.cos(geom.theta2)
    s1, s2 = math.sin(geom.theta1), math.sin(geom.theta2)
    denom = c2 * (c1 + c2)
    if abs(denom) < 1e-12:
        raise GrazingGeometryError(
            f"geometrical factor denominator {denom} too close to zero")
    f_geom = (1.0 + c1 * c2 - s1 * s2 * math.cos(geom.theta3)) / denom

    vx = k * (s1 - s2 * math.cos(geom.theta3))
    vy = k * (-s2 * math.sin(geom.theta3))
    vxy_sq = vx * vx + vy * vy
    # unnormalized sinc: sin(x)/x
    rho0 = np.sinc(vx * material.facet_lx_m / math.pi) * \
        np.sinc(vy * material.facet_ly_m / math.pi)

    sigma = material.roughness_sigma_m
    g_sca = (k * sigma * (c1 + c2)) ** 2
    lcorr = material.correlation_length_m
    series = scattering_series_sum(g_sca, vxy_sq * lcorr * lcorr, max_terms)
    diffuse = math.pi * lcorr * lcorr * f_geom * f_geom / material.facet_area_m2 * series

    g_rayleigh = (4.0 * math.pi * sigma * c1 / lam) ** 2
    bracket = (rho0 * rho0 + diffuse) * math.exp(-g_rayleigh)

    gamma_te, gamma_tm = fresnel_coefficients(f_hz, geom.theta1, material)
    gamma = gamma_te if pol is Polarization.TE else gamma_tm
    return gamma * math.sqrt(bracket)


def scattered_response(f_hz: float, s1_m: float, s2_m: float, d_m: float,
                       geom: ScatterGeometry, material: MaterialProperties,
                       pol: Polarization) -> complex:
    """Scattered-path transfer function; same FSPL/delay structure as reflection."""
    total = s1_m + s2_m
    amp = fspl_amplitude(f_hz, total)
    s = scattering_coefficient(f_hz, geom, material, pol)
    tau = total / SPEED_OF_LIGHT
    return amp * s * wrapped_phase_factor(f_hz * tau)


# ---------------------------------------------------------------------------
# Knife-edge diffraction
# ---------------------------------------------------------------------------

def fresnel_kirchhoff_parameter(h_d_m: float, f_hz: float,
                                s1_m: float, s2_m: float) -> float:
    """Dimensionless knife-edge obstruction parameter
    v = h * sqrt(2*(s1+s2) / (lambda*s1*s2))."""
    if s1_m <= 0 or s2_m <= 0:
        raise ValueError("path legs must be > 0")
    lam = SPEED_OF_LIGHT / f_hz
    return h_d_m * math.sqrt(2.0 * (s1_m + s2_m) / (lam * s1_m * s2_m))


def diffraction_loss(v: float, mu1: float = 1.0, mu2: float = 1.0,
                     mu3: float = 1.0) -> float:
    """Piecewise empirical knife-edge loss coefficient.

    The three branches carry per-frequency fit parameters mu1..mu3
    (unity by default).  The v = 2.4 branch boundary is discontinuous by
    construction; it is a property of the fitted model, not smoothed here.
    """
    if v <= 0:
        raise ValueError(f"diffraction parameter must be > 0, got {v}")
    if v <= 1.0:
        return mu1 * 0.5 * math.exp(-0.95 * v)
    if v <= 2.4:
        return mu2 * (0.4 - math.sqrt(0.12 - (0.38 - 0.1 * v) ** 2))
    return mu3 * 0.225 / v


def diffracted_response(f_hz: float, s1_m: float, s2_m: float, h_d_m: float,
                        mu: tuple[float, float, float] = (1.0, 1.0, 1.0)) -> complex:
    """Diffracted-path transfer function.

    ``s1``/``s2`` are the along-axis splits of the direct path at the
    obstruction, so the baseline delay is (s1+s2)/c and the detour adds
    the quadratic excess of the clearance.
    """
    total = s1_m + s2_m
    amp = fspl_amplitude(f_hz, total)
    v = fresnel_kirchhoff_parameter(h_d_m, f_hz, s1_m, s2_m)
    loss = diffraction_loss(v, *mu)
    delta_m = diffraction_excess_path(h_d_m, s1_m * 1e-3, s2_m * 1e-3)
    tau = (total + delta_m) / SPEED_OF_LIGHT
    return amp * loss * wrapped_phase_factor(f_hz * tau)
