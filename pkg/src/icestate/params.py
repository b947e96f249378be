"""Physical parameters, monthly atmospheric forcing and salinity-dependent
material coefficients for the snow/sea-ice column.

All quantities are SI. Temperatures are in degrees Celsius, times in seconds
counted from January 1st.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

SECONDS_PER_DAY = 86400.0
SECONDS_PER_YEAR = 365.0 * SECONDS_PER_DAY
SECONDS_PER_MONTH = SECONDS_PER_YEAR / 12.0
LATENT_HEAT_FUSION = 333400.0  # J/kg

MONTH_NAMES = ("jan", "feb", "mar", "apr", "may", "jun",
               "jul", "aug", "sep", "oct", "nov", "dec")


class ConfigError(ValueError):
    """Invalid parameter value or malformed configuration file."""


def _require(ok, message):
    if not ok:
        raise ConfigError(message)


@dataclass(frozen=True)
class ThermalParams:
    """Thermal constants of snow and sea ice.

    ``q_latent`` and ``F_w`` have no tabulated value; their defaults are
    ``rho * 333400 J/kg`` and 2 W/m^2.
    """

    sigma: float = 5.670e-8
    k_s: float = 0.31
    rho_s: float = 330.0
    c0: float = 2110.0
    k0: float = 2.034
    rho: float = 917.0
    gamma1: float = 18.0e3
    gamma2: float = 0.117
    I0: float = 1.59
    kappa_i: float = 1.5
    Tm1: float = -0.1
    Tm2: float = -1.8
    q_latent: float = 917.0 * LATENT_HEAT_FUSION
    F_w: float = 2.0

    def __post_init__(self):
        for name in ("sigma", "k_s", "rho_s", "c0", "k0", "rho", "q_latent"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value > 0, f"{name} > 0 (got {value})")
        for name in ("gamma1", "gamma2", "I0", "kappa_i", "F_w"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite")
        _require(self.Tm2 < self.Tm1 <= 0.0,
                 f"Tm2 < Tm1 <= 0 (got Tm1={self.Tm1}, Tm2={self.Tm2})")

    @property
    def D_i(self) -> float:
        """Diffusivity of pure ice, k0 / (rho c0)."""
        return self.k0 / (self.rho * self.c0)

    @property
    def D_s(self) -> float:
        return self.k_s / (self.rho_s * self.c0)

    @property
    def beta(self) -> float:
        return self.k0 / self.q_latent

    @property
    def Ibar0(self) -> float:
        """Source amplitude of the salinity-free model (I0 / rho c0)."""
        return self.I0 / (self.rho * self.c0)


@dataclass(frozen=True)
class MonthlyForcing:
    F_r: float
    F_L: float
    F_s: float
    F_l: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.alpha is not None:
            _require(0.0 <= self.alpha <= 1.0, f"alpha ∈ [0,1] (got {self.alpha})")
        _require(not (self.F_r > 0 and self.alpha is None),
                 "alpha must be present whenever F_r > 0")


TABLE_FORCING = (
    MonthlyForcing(0.0, 168.0, 19.0, 0.0),
    MonthlyForcing(0.0, 166.0, 12.3, -0.323),
    MonthlyForcing(30.7, 166.0, 11.6, -0.484, 0.83),
    MonthlyForcing(160.0, 187.0, 4.68, -1.45, 0.81),
    MonthlyForcing(286.0, 244.0, -7.26, -7.43, 0.82),
    MonthlyForcing(310.0, 291.0, -6.30, -11.3, 0.78),
    MonthlyForcing(220.0, 308.0, -4.84, -10.3, 0.64),
    MonthlyForcing(145.0, 302.0, -6.46, -10.7, 0.69),
    MonthlyForcing(59.7, 266.0, -2.74, -6.30, 0.84),
    MonthlyForcing(6.46, 224.0, 1.61, -3.07, 0.85),
    MonthlyForcing(0.0, 181.0, 9.04, -0.161),
    MonthlyForcing(0.0, 176.0, 12.8, -0.161),
)

LOOKUP_MODES = ("piecewise-constant", "linear-midpoint-interpolation")


@dataclass(frozen=True)
class ForcingSchedule:
    months: tuple = TABLE_FORCING
    lookup_mode: str = "piecewise-constant"

    def __post_init__(self):
        _require(len(self.months) == 12, f"exactly 12 monthly records (got {len(self.months)})")
        _require(self.lookup_mode in LOOKUP_MODES,
                 f"lookup_mode must be one of {LOOKUP_MODES}")


@dataclass(frozen=True)
class SalinityParams:
    A: float = 1.6
    n: float = 0.407
    m: float = 0.573

    def __post_init__(self):
        _require(self.A >= 0, f"A >= 0 (got {self.A})")
        _require(self.n > 0, f"n > 0 (got {self.n})")
        _require(self.m > 0, f"m > 0 (got {self.m})")


@dataclass(frozen=True)
class RunSettings:
    """Numerical and experiment settings read from the ``[run]`` section."""

    years: int = 10
    dt: float = 600.0
    N_s: int = 24
    N_i: int = 120
    theta: float = 1.0
    H0: float = 3.0
    h0: float = 0.3
    snow_annual: float = 0.3
    a: float = 1.0
    d: float = 0.25
    lam: float = 5e-6
    c: float = 3e-5
    epsilon: float = 1.0
    Ibar0: Optional[float] = None
    noise_std: float = 0.0
    seed: int = 0
    record_every: float = SECONDS_PER_DAY
    estimate_days: float = 30.0
    H_bar: float = 10.0
    M_bound: float = 1e-6

    def __post_init__(self):
        _require(self.years >= 0, "years >= 0")
        _require(self.dt > 0, "dt > 0")
        _require(self.N_s >= 16 and self.N_i >= 16, "N_s, N_i >= 16")
        _require(0.5 <= self.theta <= 1.0, "theta ∈ [0.5, 1]")
        _require(self.H0 > 0, "H0 > 0")
        _require(self.h0 >= 0, "h0 >= 0")
        _require(self.snow_annual >= 0, "snowfall annual depth must be non-negative")
        _require(0 <= self.d < 0.5, "d ∈ [0, 1/2)")
        for name in ("lam", "c", "epsilon"):
            _require(getattr(self, name) > 0, f"{name} > 0")
        _require(self.noise_std >= 0, "noise_std >= 0")
        _require(self.record_every > 0, "record_every > 0")


# ---------------------------------------------------------------------------
# forcing and material coefficients


def atmospheric_flux(f: MonthlyForcing) -> float:
    """Total downward heat flux from the air, in W/m^2."""
    if f.F_r > 0 and f.alpha is None:
        raise ConfigError("alpha must be present whenever F_r > 0")
    shortwave = 0.0 if f.alpha is None else (1.0 - f.alpha) * f.F_r
    return shortwave + f.F_L + f.F_s + f.F_l


def _blend(a: MonthlyForcing, b: MonthlyForcing, w: float) -> MonthlyForcing:
    if a.alpha is None and b.alpha is None:
        alpha = None
    elif a.alpha is None:
        alpha = b.alpha
    elif b.alpha is None:
        alpha = a.alpha
    else:
        alpha = (1 - w) * a.alpha + w * b.alpha
    return MonthlyForcing(
        (1 - w) * a.F_r + w * b.F_r,
        (1 - w) * a.F_L + w * b.F_L,
        (1 - w) * a.F_s + w * b.F_s,
        (1 - w) * a.F_l + w * b.F_l,
        alpha,
    )


def forcing_at(s: ForcingSchedule, t: float) -> MonthlyForcing:
    """Monthly record in effect at time ``t`` (seconds since Jan 1).

    Months are equal twelfths of a 365-day year and the schedule repeats
    every year.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative (got {t})")
    phase = math.fmod(t, SECONDS_PER_YEAR) / SECONDS_PER_MONTH
    if s.lookup_mode == "piecewise-constant":
        return s.months[min(int(phase), 11)]
    # anchors at month midpoints
    u = phase - 0.5
    i = math.floor(u)
    w = u - i
    if w < 1e-9:
        return s.months[i % 12]
    if w > 1 - 1e-9:
        return s.months[(i + 1) % 12]
    return _blend(s.months[i % 12], s.months[(i + 1) % 12], w)


def salinity(x, H, p: SalinityParams):
    """Bulk salinity (ppt) at depth ``x`` below the ice surface."""
    if H <= 0:
        raise ValueError(f"ice thickness must be positive (got {H})")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > H * (1 + 1e-12)):
        raise ValueError("salinity evaluated outside [0, H]")
    s = np.clip(x / H, 0.0, 1.0)
    S = p.A * (1.0 - np.cos(np.pi * s ** (p.n / (p.m + s))))
    return S if S.ndim else float(S)


def _check_frozen(T):
    T = np.asarray(T, dtype=float)
    if np.any(T >= 0):
        raise ValueError("brine coefficients are singular for T >= 0 °C")
    return T


def heat_capacity(T, S, p: ThermalParams):
    """Effective heat capacity of saline ice, c0 + gamma1 S / T^2."""
    T = _check_frozen(T)
    out = p.c0 + p.gamma1 * np.asarray(S, dtype=float) / T**2
    return out if np.ndim(out) else float(out)


def thermal_conductivity(T, S, p: ThermalParams):
    T = _check_frozen(T)
    out = p.k0 + p.gamma2 * np.asarray(S, dtype=float) / T
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# configuration file


@dataclass(frozen=True)
class Config:
    thermal: ThermalParams = field(default_factory=ThermalParams)
    forcing: ForcingSchedule = field(default_factory=ForcingSchedule)
    salinity: SalinityParams = field(default_factory=SalinityParams)
    run: RunSettings = field(default_factory=RunSettings)

    def __iter__(self):
        return iter((self.thermal, self.forcing, self.salinity, self.run))


def _convert(cls, section, items, defaults=None):
    """Build dataclass ``cls`` from string ``items`` of one config section."""
    kinds = {f.name: f.type for f in dataclasses.fields(cls)}
    values = {} if defaults is None else dict(defaults)
    for key, raw in items.items():
        if key not in kinds:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        text = raw.strip()
        try:
            if text.lower() in ("none", ""):
                values[key] = None
            elif kinds[key] in ("int",):
                values[key] = int(text)
            elif kinds[key] == "str":
                values[key] = text
            else:
                values[key] = float(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None
    try:
        return cls(**values)
    except ConfigError as err:
        raise ConfigError(f"[{section}] {err}") from None


def parse_config(text: str, source: str = "<string>") -> Config:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as err:
        raise ConfigError(f"parse error: {err}") from None

    known = {"thermal", "salinity", "run", "forcing"} | {f"forcing.{m}" for m in MONTH_NAMES}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")

    def items(name):
        return dict(parser.items(name)) if parser.has_section(name) else {}

    thermal = _convert(ThermalParams, "thermal", items("thermal"))
    sal = _convert(SalinityParams, "salinity", items("salinity"))
    run = _convert(RunSettings, "run", items("run"))

    months = []
    for name, default in zip(MONTH_NAMES, TABLE_FORCING):
        months.append(_convert(MonthlyForcing, f"forcing.{name}", items(f"forcing.{name}"),
                               dataclasses.asdict(default)))
    fitems = items("forcing")
    mode = fitems.pop("lookup_mode", "piecewise-constant").strip()
    if fitems:
        raise ConfigError(f"[forcing] unknown key(s) {sorted(fitems)}")
    forcing = _convert(ForcingSchedule, "forcing", {}, {"months": tuple(months),
                                                        "lookup_mode": mode})
    return Config(thermal, forcing, sal, run)


def load_config(path=None) -> Config:
    """Read an INI-style parameter file; missing keys take tabulated defaults.

    ``path=None`` returns the built-in defaults. The result unpacks as
    ``thermal, forcing, salinity, run``.
    """
    if path is None:
        return Config()
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))
