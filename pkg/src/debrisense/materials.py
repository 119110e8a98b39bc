"""Surface material definitions for debris interaction modelling.

A material carries a frequency-tabulated refractive index and absorption
coefficient (linearly interpolated between breakpoints, error outside the
tabulated range) plus the surface-roughness statistics used by the
reflection and scattering models.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MaterialError


def _interp_table(table: tuple[tuple[float, float], ...], f: float, what: str,
                  name: str) -> float:
    freqs = [p[0] for p in table]
    vals = [p[1] for p in table]
    if not (freqs[0] <= f <= freqs[-1]):
        raise MaterialError(
            f"material '{name}': {what} not tabulated at {f:.4g} Hz "
            f"(range {freqs[0]:.4g}..{freqs[-1]:.4g} Hz)")
    return float(np.interp(f, freqs, vals))


@dataclass(frozen=True)
class MaterialProperties:
    """Electromagnetic and roughness description of a debris surface.

    Attributes
    ----------
    name : str
        Material identifier (also the config section name).
    n_table, alpha_table : tuple of (frequency_hz, value)
        Breakpoints of the refractive index and absorption coefficient
        (1/m).  Must be sorted by frequency.
    roughness_sigma_m : float
        Standard deviation of the Gaussian surface height, metres.
    correlation_length_m : float
        Correlation length of the surface roughness, metres.
    facet_lx_m, facet_ly_m : float
        Lateral dimensions of the illuminated facet; the scattering model
        requires both to be large against the wavelength.
    """

    name: str
    n_table: tuple[tuple[float, float], ...]
    alpha_table: tuple[tuple[float, float], ...]
    roughness_sigma_m: float
    correlation_length_m: float
    facet_lx_m: float
    facet_ly_m: float

    def __post_init__(self):
        for label, table in (("n", self.n_table), ("alpha", self.alpha_table)):
            if len(table) < 1:
                raise ConfigError(f"material '{self.name}': empty {label} table")
            freqs = [p[0] for p in table]
            if sorted(freqs) != freqs:
                raise ConfigError(
                    f"material '{self.name}': {label} table not sorted by frequency")
        if any(v < 1.0 for _, v in self.n_table):
            raise ConfigError(f"material '{self.name}': refractive index < 1")
        if self.roughness_sigma_m < 0:
            raise ConfigError(f"material '{self.name}': negative roughness sigma")
        if self.correlation_length_m <= 0:
            raise ConfigError(f"material '{self.name}': correlation length <= 0")
        if self.facet_lx_m <= 0 or self.facet_ly_m <= 0:
            raise ConfigError(f"material '{self.name}': facet dimensions <= 0")

    def refractive_index(self, f_hz: float) -> float:
        return _interp_table(self.n_table, f_hz, "refractive index", self.name)

    def absorption(self, f_hz: float) -> float:
        return _interp_table(self.alpha_table, f_hz, "absorption", self.name)

    @property
    def facet_area_m2(self) -> float:
        return self.facet_lx_m * self.facet_ly_m


# ---------------------------------------------------------------------------
# Shipped defaults
# ---------------------------------------------------------------------------
# Smooth glass: low-loss dielectric; rough metal: high-loss conductor-like
# medium.  Tables span 20 GHz .. 6 THz so every sub-band of the campaign
# grids stays inside the interpolation range.

DEFAULT_MATERIALS_TEXT = """\
# Material definitions: one section per material.
# n / alpha_per_m are breakpoint tables "f_hz:value, f_hz:value, ..."
# interpolated linearly in frequency; lookups outside the range error out.

[smooth_glass]
n = 20e9:1.95, 6e12:1.95
alpha_per_m = 20e9:200.0, 6e12:200.0
roughness_sigma_m = 5e-6
correlation_length_m = 500e-6
facet_lx_m = 0.15
facet_ly_m = 0.15

[rough_metal]
n = 20e9:300.0, 6e12:300.0
alpha_per_m = 20e9:4e7, 6e12:4e7
roughness_sigma_m = 100e-6
correlation_length_m = 500e-6
facet_lx_m = 0.15
facet_ly_m = 0.15
"""


def _parse_breakpoints(raw: str, section: str, key: str):
    points = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            f_str, v_str = chunk.split(":")
            points.append((float(f_str), float(v_str)))
        except ValueError as exc:
            raise ConfigError(
                f"material '{section}': cannot parse {key} entry '{chunk}'") from exc
    return tuple(points)


def parse_materials(text: str) -> dict[str, MaterialProperties]:
    """Parse material definitions from INI-style text."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad material file: {exc}") from exc
    materials = {}
    for section in parser.sections():
        sec = parser[section]
        try:
            materials[section] = MaterialProperties(
                name=section,
                n_table=_parse_breakpoints(sec["n"], section, "n"),
                alpha_table=_parse_breakpoints(sec["alpha_per_m"], section,
                                               "alpha_per_m"),
                roughness_sigma_m=float(sec["roughness_sigma_m"]),
                correlation_length_m=float(sec["correlation_length_m"]),
                facet_lx_m=float(sec["facet_lx_m"]),
                facet_ly_m=float(sec["facet_ly_m"]),
            )
        except KeyError as exc:
            raise ConfigError(f"material '{section}': missing key {exc}") from exc
    if not materials:
        raise ConfigError("material file defines no materials")
    return materials


def load_materials(path) -> dict[str, MaterialProperties]:
    """Load material definitions from an INI file on disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_materials(fh.read())


def default_materials() -> dict[str, MaterialProperties]:
    """Return the shipped default material set."""
    return parse_materials(DEFAULT_MATERIALS_TEXT)
