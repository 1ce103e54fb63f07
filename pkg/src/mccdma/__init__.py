"""Link-level Monte Carlo simulator for STBC MC-CDMA downlinks."""

from .config import SimConfig, load_config, parse_config_text
from .simulator import (
    ErrorStats,
    FrameEngine,
    get_engine,
    link_info,
    noise_variance_for,
    run_frame,
    sweep,
)

__all__ = [
    "SimConfig",
    "load_config",
    "parse_config_text",
    "ErrorStats",
    "FrameEngine",
    "get_engine",
    "link_info",
    "noise_variance_for",
    "run_frame",
    "sweep",
]

__version__ = "0.1.0"
