"""Chirp multicarrier waveforms over doubly dispersive channels.

One chirp-rate parameter pair (c1, c2) spans a waveform family: c1 = c2 = 0
is plain OFDM, c1 = 1/(2n) is the chirp-spread special case, and tuned
fractional c1 gives a transform whose effective delay-Doppler channel is
sparse and separable per path. The package provides the transforms, the
prefix handling, a linear time-varying channel simulator, equalizers, a
single-pilot estimator, and analysis tools (spectral displacement
measurement, sparsity metrics, range-Doppler sensing), plus a config-driven
CLI for reproducible experiments.
"""

from .analysis import (
    RangeDopplerMap,
    SpectrogramSpec,
    measure_start_frequency_shift,
    range_doppler_map,
    sparsity_metrics,
)
from .ber import ResultRecord, run_ber_experiment, trial_seed
from .channel import (
    SPEED_OF_LIGHT_M_S,
    ChannelModel,
    PathSpec,
    apply_channel,
    normalized_doppler,
    time_channel_matrix,
)
from .config import ExperimentConfig, load_config_text, parse_config, resolve_config
from .errors import (
    AmbiguousDisplacementError,
    BandCoverageWarning,
    ChirpmuxError,
    ConfigError,
    ConfigParseError,
    ConfigValidationError,
    EmptyChannelError,
    IllConditionedError,
    ResolutionError,
    UnsupportedRegimeError,
)
from .link import (
    EffectiveChannel,
    EqualizerKind,
    EqualizerSpec,
    build_effective_channel,
    equalize,
    estimate_channel_single_pilot,
    min_c1_full_diversity,
    path_displacement,
)
from .modulation import Constellation, demap_symbols, map_bits
from .waveform import (
    Frame,
    FrameLayout,
    WaveformMode,
    WaveformParams,
    add_cpp,
    chirp_phase_vector,
    daft,
    idaft,
    strip_cpp,
    transform_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousDisplacementError",
    "BandCoverageWarning",
    "ChannelModel",
    "ChirpmuxError",
    "ConfigError",
    "ConfigParseError",
    "ConfigValidationError",
    "Constellation",
    "EffectiveChannel",
    "EmptyChannelError",
    "EqualizerKind",
    "EqualizerSpec",
    "ExperimentConfig",
    "Frame",
    "FrameLayout",
    "IllConditionedError",
    "PathSpec",
    "RangeDopplerMap",
    "ResolutionError",
    "ResultRecord",
    "SPEED_OF_LIGHT_M_S",
    "SpectrogramSpec",
    "UnsupportedRegimeError",
    "WaveformMode",
    "WaveformParams",
    "add_cpp",
    "apply_channel",
    "build_effective_channel",
    "chirp_phase_vector",
    "daft",
    "demap_symbols",
    "equalize",
    "estimate_channel_single_pilot",
    "idaft",
    "load_config_text",
    "map_bits",
    "measure_start_frequency_shift",
    "min_c1_full_diversity",
    "normalized_doppler",
    "parse_config",
    "path_displacement",
    "range_doppler_map",
    "resolve_config",
    "run_ber_experiment",
    "sparsity_metrics",
    "strip_cpp",
    "time_channel_matrix",
    "transform_matrix",
    "trial_seed",
    "__version__",
]
