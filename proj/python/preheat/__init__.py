"""Pre-heating of an elongated condensate: C++ core plus readers for run outputs."""

from ._core import (
    ConfigError,
    GroundState,
    Grid,
    InfeasibleError,
    NumericalError,
    __version__,
    cmd_ground_state,
    cmd_run,
    cmd_spectrum,
    config_get,
    ground_state,
    modulation_frequency,
    normalize_config,
    sha256_file,
    single_particle_ground_energy,
    sound_speed,
    spectrum,
    verify_manifest,
)
from .io import load_run, read_csv, read_manifest

__all__ = [
    "ConfigError",
    "GroundState",
    "Grid",
    "InfeasibleError",
    "NumericalError",
    "__version__",
    "cmd_ground_state",
    "cmd_run",
    "cmd_spectrum",
    "config_get",
    "ground_state",
    "load_run",
    "modulation_frequency",
    "normalize_config",
    "read_csv",
    "read_manifest",
    "sha256_file",
    "single_particle_ground_energy",
    "sound_speed",
    "spectrum",
    "verify_manifest",
]
