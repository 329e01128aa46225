"""Bounded information-flow checking of a partitioned separation-kernel model."""

from .config import ConfigError, PortIdStrategy, SysConfig, load_config, parse_config
from .kernel import ARINC, FIXED, SemanticsVariant
from .model import Model, build_model

__all__ = [
    "ARINC",
    "FIXED",
    "ConfigError",
    "Model",
    "PortIdStrategy",
    "SemanticsVariant",
    "SysConfig",
    "build_model",
    "load_config",
    "parse_config",
]
