"""Discrete-event simulator for EDCA stations that sense TV white-space channels before transmitting."""

from .config import ScenarioConfig, load_config
from .runner import ResultBundle, run, sweep
from .scenarios import PRESETS, preset

__all__ = ["PRESETS", "ResultBundle", "ScenarioConfig", "load_config", "preset", "run", "sweep"]
__version__ = "0.1.0"
