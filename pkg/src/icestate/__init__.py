"""Snow and sea-ice column model with a backstepping temperature observer."""

from .kernels import GainParams, VolterraPair, gains
from .observer import ObserverConfig, init_observer, step_observer
from .params import Config, ConfigError, ThermalParams, load_config
from .plant import GridConfig, initial_plant_state, measure, run_annual, step_plant

__version__ = "0.1.0"

__all__ = ["Config", "ConfigError", "GainParams", "GridConfig", "ObserverConfig", "ThermalParams",
           "VolterraPair", "gains", "init_observer", "initial_plant_state", "load_config", "measure",
           "run_annual", "step_observer", "step_plant"]
