"""Baseband UW-OFDM simulation with pilot-based CPE/CFO estimation."""

__version__ = "0.1.0"

from .sysmodel import CP_OFDM, UW_OFDM, CarrierMaps, ConfigError, SystemConfig, build_carrier_maps  # noqa: E402
from .genmat import GeneratorSet, build_G_d, build_G_p  # noqa: E402

__all__ = [
    "CP_OFDM",
    "UW_OFDM",
    "CarrierMaps",
    "ConfigError",
    "GeneratorSet",
    "SystemConfig",
    "__version__",
    "build_G_d",
    "build_G_p",
    "build_carrier_maps",
]
