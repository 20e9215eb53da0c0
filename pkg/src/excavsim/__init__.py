"""Agent-based simulator of collective excavation in a growing narrow tunnel."""

from .config import SimConfig, parse_config
from .engine import RunResult, run
from .policy import ProtocolKind

__all__ = ["SimConfig", "parse_config", "run", "RunResult", "ProtocolKind"]
__version__ = "0.1.0"
