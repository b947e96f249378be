import dataclasses
import math

import numpy as np
import pytest

from icestate.params import (SECONDS_PER_DAY, SECONDS_PER_MONTH, SECONDS_PER_YEAR, TABLE_FORCING,
                             Config, ConfigError, ForcingSchedule, MonthlyForcing, RunSettings,
                             SalinityParams, ThermalParams, atmospheric_flux, forcing_at,
                             heat_capacity, load_config, parse_config, salinity,
                             thermal_conductivity)


def test_thermal_defaults_and_derived():
    p = ThermalParams()
    assert p.k0 == 2.034 and p.rho == 917.0 and p.c0 == 2110.0
    assert p.D_i == pytest.approx(1.0512334161985042e-06, rel=1e-15)
    assert p.beta == pytest.approx(6.652976929150701e-09, rel=1e-15)
    assert p.Ibar0 == pytest.approx(8.217606350814267e-07, rel=1e-15)


@pytest.mark.parametrize("change", [{"k0": 0.0}, {"rho": -1.0}, {"Tm1": -2.0}, {"Tm1": 0.5}])
def test_thermal_validation(change):
    with pytest.raises(ConfigError):
        ThermalParams(**change)


def test_forcing_table_fluxes():
    # (1 - alpha) F_r + F_L + F_s + F_l, frozen from the table
    expected = [187.0, 177.977, 182.335, 220.63, 280.79, 341.6, 372.06, 329.79,
                266.512, 223.509, 189.879, 188.639]
    got = [atmospheric_flux(m) for m in TABLE_FORCING]
    np.testing.assert_allclose(got, expected, rtol=1e-13)


def test_monthly_forcing_validation():
    with pytest.raises(ConfigError, match="alpha"):
        MonthlyForcing(10.0, 1.0, 1.0, 1.0, alpha=1.5)
    with pytest.raises(ConfigError, match="alpha"):
        MonthlyForcing(10.0, 1.0, 1.0, 1.0)
    assert atmospheric_flux(MonthlyForcing(0.0, 1.0, 2.0, 3.0)) == 6.0


def test_schedule_needs_twelve_months():
    with pytest.raises(ConfigError):
        ForcingSchedule(months=TABLE_FORCING[:11])
    with pytest.raises(ConfigError):
        ForcingSchedule(lookup_mode="spline")


def test_forcing_lookup_piecewise_and_periodic():
    s = ForcingSchedule()
    assert forcing_at(s, 0.0) is TABLE_FORCING[0]
    assert forcing_at(s, 6.5 * SECONDS_PER_MONTH) is TABLE_FORCING[6]
    assert forcing_at(s, SECONDS_PER_YEAR - 1.0) is TABLE_FORCING[11]
    assert forcing_at(s, 3 * SECONDS_PER_YEAR + 2.2 * SECONDS_PER_MONTH) is TABLE_FORCING[2]
    with pytest.raises(ValueError):
        forcing_at(s, -1.0)


def test_forcing_lookup_interpolated():
    s = ForcingSchedule(lookup_mode="linear-midpoint-interpolation")
    assert forcing_at(s, 0.5 * SECONDS_PER_MONTH) == TABLE_FORCING[0]
    mid = forcing_at(s, 1.0 * SECONDS_PER_MONTH)  # halfway Jan -> Feb
    assert atmospheric_flux(mid) == pytest.approx(0.5 * (187.0 + 177.977))
    wrap = forcing_at(s, 0.0)  # halfway Dec -> Jan
    assert atmospheric_flux(wrap) == pytest.approx(0.5 * (188.639 + 187.0))


def test_salinity_profile():
    p = SalinityParams()
    assert salinity(0.0, 3.0, p) == 0.0
    assert salinity(3.0, 3.0, p) == pytest.approx(3.2)
    assert salinity(0.5, 1.0, p) == pytest.approx(2.796196999970741, rel=1e-14)
    # depends on x / H only
    assert salinity(1.5, 3.0, p) == pytest.approx(salinity(0.5, 1.0, p), rel=1e-15)
    with pytest.raises(ValueError):
        salinity(4.0, 3.0, p)
    with pytest.raises(ValueError):
        salinity(0.0, 0.0, p)


def test_brine_coefficients():
    p = ThermalParams()
    assert heat_capacity(-1.0, 0.0, p) == p.c0
    assert heat_capacity(-2.0, 4.0, p) == pytest.approx(2110.0 + 18e3)
    assert thermal_conductivity(-0.5, 1.0, p) == pytest.approx(2.034 - 0.234)
    for fn in (heat_capacity, thermal_conductivity):
        with pytest.raises(ValueError):
            fn(0.0, 1.0, p)
        with pytest.raises(ValueError):
            fn(np.array([-1.0, 0.1]), 1.0, p)


def test_run_settings_validation():
    with pytest.raises(ConfigError):
        RunSettings(h0=-0.1)
    with pytest.raises(ConfigError):
        RunSettings(d=0.5)
    with pytest.raises(ConfigError):
        RunSettings(lam=0.0)


def test_parse_config_overrides_and_defaults():
    cfg = parse_config("""
[thermal]
F_w = 3.5
[run]
years = 2
lam = 1e-5
[forcing]
lookup_mode = linear-midpoint-interpolation
[forcing.jul]
F_s = -1.0
""")
    thermal, forcing, sal, run = cfg
    assert thermal.F_w == 3.5 and thermal.k0 == 2.034
    assert run.years == 2 and run.lam == 1e-5 and run.dt == 600.0
    assert forcing.lookup_mode == "linear-midpoint-interpolation"
    assert forcing.months[6].F_s == -1.0 and forcing.months[6].F_r == 220.0
    assert forcing.months[0] == TABLE_FORCING[0]
    assert sal == SalinityParams()


@pytest.mark.parametrize("text,match", [
    ("[thermal]\nbogus = 1\n", "unknown key"),
    ("[nope]\n", "unknown section"),
    ("[run]\ndt = fast\n", "not a number"),
    ("[run]\nh0 = -1\n", "h0"),
    ("[forcing.mar]\nalpha = 2\n", "alpha"),
    ("[forcing]\nfoo = 1\n", "unknown key"),
    ("not an ini", "parse error"),
])
def test_parse_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_load_config(tmp_path):
    assert load_config() == Config()
    path = tmp_path / "c.ini"
    path.write_text("[salinity]\nA = 2.0\n")
    assert load_config(path).salinity.A == 2.0


def test_time_constants():
    assert SECONDS_PER_YEAR == 365 * SECONDS_PER_DAY
    assert math.isclose(12 * SECONDS_PER_MONTH, SECONDS_PER_YEAR)
