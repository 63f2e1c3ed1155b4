from .config import (
    NOISE_PRESETS,
    POLICIES,
    ConfigError,
    GewisimError,
    Kind,
    NoisePreset,
    Policy,
    ScenarioConfig,
    SweepAxes,
    default_config,
    load_config,
    parse_config,
)
from .output import emit_outputs
from .sweep import ResultSet, SweepPoint, derive_seed, expand, run_sweep
