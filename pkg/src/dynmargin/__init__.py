"""Dynamic probabilistic sizing of upward and downward balancing margins."""

from .core import Direction, QuantileGrid, TimeTriple, alpha
from .ingestion import default_config, load_config, load_snapshot
from .margins import MarginResult, compute_margin, compute_margin_set, deterministic_margin
from .model import EngineConfig, ForecastSnapshot
from .series import MarginRow, read_series, write_series

__version__ = "0.1.0"

__all__ = [
    "Direction", "EngineConfig", "ForecastSnapshot", "MarginResult", "MarginRow", "QuantileGrid",
    "TimeTriple", "alpha", "compute_margin", "compute_margin_set", "default_config",
    "deterministic_margin", "load_config", "load_snapshot", "read_series", "write_series",
]
