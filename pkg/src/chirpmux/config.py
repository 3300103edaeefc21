"""Experiment configuration: YAML loading, strict validation, defaults.

One experiment per file. Sweeps are expressed as lists inside the file
(snr_db, shift grids, sweep values). Unknown keys are rejected so typos
fail loudly, and every validation error names the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .channel import ChannelModel, PathSpec
from .errors import ConfigParseError, ConfigValidationError
from .link import EqualizerKind, EqualizerSpec, min_c1_full_diversity
from .waveform import WaveformParams

_TOP_KEYS = {
    "experiment", "waveform", "channel", "modulation", "snr_db", "trials",
    "seed", "equalizer", "csi", "pilot", "sensing", "shift", "sweep", "figures",
}
_WAVEFORM_KEYS = {"n", "c1", "c2", "cpp_len"}
_CHANNEL_KEYS = {"paths", "profile", "normalize"}
_PATH_KEYS = {"gain", "delay", "doppler"}
_PROFILE_KEYS = {"num_paths", "l_max", "alpha_max", "fractional"}
_EQ_KEYS = {"kind", "band_halfwidth"}
_PILOT_KEYS = {"guard", "boost_db", "threshold"}
_SENSING_KEYS = {"l_max", "alpha_max"}
_SHIFT_KEYS = {"rates_2nc1", "delays", "dopplers", "window_len", "hop", "fft_len"}
_SWEEP_KEYS = {"two_n_c1_values", "rel_threshold"}
_MODULATIONS = {"qpsk", "16qam"}
_CSI_MODES = {"perfect", "estimated"}


@dataclass(frozen=True)
class RandomProfile:
    """Ensemble of random channels redrawn every trial."""

    num_paths: int
    l_max: int
    alpha_max: float
    fractional: bool = False


@dataclass(frozen=True)
class PilotSpec:
    guard: int
    boost_db: float = 0.0
    threshold: float = 0.2


@dataclass(frozen=True)
class SensingSpec:
    l_max: int
    alpha_max: int


@dataclass(frozen=True)
class ShiftSpec:
    rates_2nc1: tuple[int, ...]
    delays: tuple[int, ...]
    dopplers: tuple[float, ...]
    window_len: int | None = None
    hop: int | None = None
    fft_len: int | None = None


@dataclass(frozen=True)
class SweepSpec:
    two_n_c1_values: tuple[int, ...]
    rel_threshold: float = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description; all defaults already applied."""

    experiment_id: str
    n: int
    c1: float
    c2: float
    cpp_len: int
    paths: tuple[PathSpec, ...] | None
    profile: RandomProfile | None
    normalize: bool
    modulation: str
    snr_db: tuple[float, ...]
    trials: int
    seed: int
    equalizer: EqualizerSpec
    csi: str
    pilot: PilotSpec
    sensing: SensingSpec
    shift: ShiftSpec
    sweep: SweepSpec
    figures: bool
    l_max: int
    alpha_max: int
    raw: dict

    @property
    def waveform_params(self) -> WaveformParams:
        return WaveformParams(n=self.n, c1=self.c1, c2=self.c2, cpp_len=self.cpp_len)

    def fixed_channel(self, noise_variance: float = 0.0) -> ChannelModel:
        """The explicit channel, or a ConfigValidationError if only an ensemble was given."""
        if self.paths is None:
            raise ConfigValidationError(
                "this command needs channel.paths (an explicit path list)",
                field="channel.paths",
            )
        return ChannelModel(paths=self.paths, noise_variance=noise_variance)

    def sigma2(self, snr_db: float) -> float:
        if math.isinf(snr_db):
            return 0.0
        return 10.0 ** (-snr_db / 10.0)


def _require_mapping(obj, field: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigValidationError(f"{field} must be a mapping", field=field)
    return obj


def _reject_unknown(mapping: dict, allowed: set, scope: str) -> None:
    for key in mapping:
        if key not in allowed:
            where = f"{scope}.{key}" if scope else str(key)
            raise ConfigValidationError(f"unknown key '{where}'", field=where)


def _as_int(value, field: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(f"{field} must be an integer, got {value!r}", field=field)
    if minimum is not None and value < minimum:
        raise ConfigValidationError(f"{field} must be >= {minimum}, got {value}", field=field)
    return value


def _as_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(f"{field} must be a number, got {value!r}", field=field)
    return float(value)


def _as_bool(value, field: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigValidationError(f"{field} must be a boolean, got {value!r}", field=field)
    return value


def _as_gain(value, field: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2:
        return complex(_as_number(value[0], field), _as_number(value[1], field))
    raise ConfigValidationError(
        f"{field} must be a number or a [re, im] pair, got {value!r}", field=field
    )


def _parse_paths(raw_paths, normalize: bool) -> tuple[PathSpec, ...]:
    if not isinstance(raw_paths, list) or not raw_paths:
        raise ConfigValidationError(
            "channel.paths must be a non-empty list", field="channel.paths"
        )
    paths = []
    for idx, entry in enumerate(raw_paths):
        scope = f"channel.paths[{idx}]"
        entry = _require_mapping(entry, scope)
        _reject_unknown(entry, _PATH_KEYS, scope)
        if "gain" not in entry:
            raise ConfigValidationError(f"{scope}.gain is required", field=f"{scope}.gain")
        gain = _as_gain(entry["gain"], f"{scope}.gain")
        delay = _as_int(entry.get("delay", 0), f"{scope}.delay", minimum=0)
        doppler = _as_number(entry.get("doppler", 0.0), f"{scope}.doppler")
        try:
            paths.append(PathSpec(gain=gain, delay=delay, doppler=doppler))
        except ValueError as exc:
            raise ConfigValidationError(str(exc), field=scope) from exc
    try:
        model = ChannelModel(paths=tuple(paths))
    except ValueError as exc:
        raise ConfigValidationError(str(exc), field="channel.paths") from exc
    if normalize:
        model = model.normalized()
    return model.paths


def _parse_profile(raw_profile) -> RandomProfile:
    raw_profile = _require_mapping(raw_profile, "channel.profile")
    _reject_unknown(raw_profile, _PROFILE_KEYS, "channel.profile")
    if "num_paths" not in raw_profile:
        raise ConfigValidationError(
            "channel.profile.num_paths is required", field="channel.profile.num_paths"
        )
    num_paths = _as_int(raw_profile["num_paths"], "channel.profile.num_paths", minimum=1)
    l_max = _as_int(raw_profile.get("l_max", 0), "channel.profile.l_max", minimum=0)
    alpha_max = _as_number(raw_profile.get("alpha_max", 0), "channel.profile.alpha_max")
    if alpha_max < 0:
        raise ConfigValidationError(
            "channel.profile.alpha_max must be >= 0", field="channel.profile.alpha_max"
        )
    fractional = _as_bool(raw_profile.get("fractional", False), "channel.profile.fractional")
    if not fractional and alpha_max != int(alpha_max):
        raise ConfigValidationError(
            "channel.profile.alpha_max must be an integer unless fractional is true",
            field="channel.profile.alpha_max",
        )
    return RandomProfile(
        num_paths=num_paths, l_max=l_max, alpha_max=alpha_max, fractional=fractional
    )


def _parse_number_list(value, field: str, *, allow_empty: bool = False) -> tuple[float, ...]:
    if not isinstance(value, list) or (not value and not allow_empty):
        raise ConfigValidationError(f"{field} must be a non-empty list", field=field)
    return tuple(_as_number(v, field) for v in value)


def _parse_int_list(value, field: str, minimum: int = 0) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigValidationError(f"{field} must be a non-empty list", field=field)
    return tuple(_as_int(v, field, minimum=minimum) for v in value)


def load_config_text(text: str, *, name: str = "config") -> dict:
    """Parse YAML text to a raw mapping, attributing syntax errors to a line."""
    try:
        loaded = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = None
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            line = mark.line + 1
        where = f" at line {line}" if line is not None else ""
        raise ConfigParseError(f"invalid YAML in {name}{where}: {exc}", line=line) from exc
    if loaded is None:
        raise ConfigValidationError("configuration is empty")
    if not isinstance(loaded, dict):
        raise ConfigValidationError("top level of the configuration must be a mapping")
    return loaded


def parse_config(path: str | Path) -> ExperimentConfig:
    """Load and validate one experiment configuration file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    raw = load_config_text(text, name=path.name)
    return resolve_config(raw, default_id=path.stem)


def resolve_config(raw: dict, default_id: str = "experiment") -> ExperimentConfig:
    """Validate a raw mapping and fill in every documented default."""
    _reject_unknown(raw, _TOP_KEYS, "")

    experiment_id = raw.get("experiment", default_id)
    if not isinstance(experiment_id, str) or not experiment_id:
        raise ConfigValidationError(
            "experiment must be a non-empty string", field="experiment"
        )

    waveform = _require_mapping(raw.get("waveform"), "waveform")
    _reject_unknown(waveform, _WAVEFORM_KEYS, "waveform")
    if "n" not in waveform:
        raise ConfigValidationError("waveform.n is required", field="waveform.n")
    n = _as_int(waveform["n"], "waveform.n", minimum=2)
    c2 = _as_number(waveform.get("c2", 0.0), "waveform.c2")
    if c2 < 0:
        raise ConfigValidationError("waveform.c2 must be >= 0", field="waveform.c2")

    channel = _require_mapping(raw.get("channel"), "channel")
    _reject_unknown(channel, _CHANNEL_KEYS, "channel")
    normalize = _as_bool(channel.get("normalize", True), "channel.normalize")
    has_paths = "paths" in channel
    has_profile = "profile" in channel
    if has_paths == has_profile:
        raise ConfigValidationError(
            "channel must contain exactly one of 'paths' or 'profile'", field="channel"
        )
    paths = _parse_paths(channel["paths"], normalize) if has_paths else None
    profile = _parse_profile(channel["profile"]) if has_profile else None

    if paths is not None:
        l_max = max(p.delay for p in paths)
        alpha_bound = max((abs(p.doppler) for p in paths), default=0.0)
    else:
        l_max = profile.l_max
        alpha_bound = profile.alpha_max
    alpha_max = int(math.ceil(alpha_bound - 1e-12))

    c1_raw = waveform.get("c1", "auto")
    if isinstance(c1_raw, str):
        if c1_raw != "auto":
            raise ConfigValidationError(
                f"waveform.c1 must be a number or 'auto', got {c1_raw!r}", field="waveform.c1"
            )
        try:
            c1 = min_c1_full_diversity(alpha_max, n)
        except ValueError as exc:
            raise ConfigValidationError(str(exc), field="waveform.c1") from exc
    else:
        c1 = _as_number(c1_raw, "waveform.c1")
        if c1 < 0:
            raise ConfigValidationError("waveform.c1 must be >= 0", field="waveform.c1")

    cpp_len = waveform.get("cpp_len", l_max)
    cpp_len = _as_int(cpp_len, "waveform.cpp_len", minimum=0)
    if cpp_len >= n:
        raise ConfigValidationError(
            f"waveform.cpp_len must be < n = {n}, got {cpp_len}", field="waveform.cpp_len"
        )
    if cpp_len < l_max:
        raise ConfigValidationError(
            f"waveform.cpp_len = {cpp_len} is smaller than the largest path delay {l_max}",
            field="waveform.cpp_len",
        )

    modulation = raw.get("modulation", "qpsk")
    if not isinstance(modulation, str) or modulation.lower() not in _MODULATIONS:
        raise ConfigValidationError(
            f"modulation must be one of {sorted(_MODULATIONS)}, got {modulation!r}",
            field="modulation",
        )
    modulation = modulation.lower()

    if "snr_db" not in raw:
        raise ConfigValidationError("snr_db is required", field="snr_db")
    snr_db = _parse_number_list(raw["snr_db"], "snr_db")

    if "trials" not in raw:
        raise ConfigValidationError("trials is required", field="trials")
    trials = _as_int(raw["trials"], "trials", minimum=1)

    if "seed" not in raw:
        raise ConfigValidationError("seed is required", field="seed")
    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigValidationError(
            f"seed must be an integer in [0, 2^64), got {seed!r}", field="seed"
        )

    eq_map = _require_mapping(raw.get("equalizer"), "equalizer")
    _reject_unknown(eq_map, _EQ_KEYS, "equalizer")
    kind_name = eq_map.get("kind", "mmse")
    try:
        kind = EqualizerKind(str(kind_name).lower())
    except ValueError as exc:
        raise ConfigValidationError(
            f"equalizer.kind must be one of {[k.value for k in EqualizerKind]}, "
            f"got {kind_name!r}",
            field="equalizer.kind",
        ) from exc
    band_halfwidth = _as_int(eq_map.get("band_halfwidth", 1), "equalizer.band_halfwidth", minimum=0)
    equalizer = EqualizerSpec(kind=kind, band_halfwidth=band_halfwidth)

    csi = raw.get("csi", "perfect")
    if not isinstance(csi, str) or csi.lower() not in _CSI_MODES:
        raise ConfigValidationError(
            f"csi must be one of {sorted(_CSI_MODES)}, got {csi!r}", field="csi"
        )
    csi = csi.lower()

    pilot_map = _require_mapping(raw.get("pilot"), "pilot")
    _reject_unknown(pilot_map, _PILOT_KEYS, "pilot")
    # The default guard covers the full displacement span of the configured
    # channel, but an unused default must never make a config unresolvable,
    # so it is clamped to what a frame of length n can hold. Explicit values
    # stay strictly validated.
    guard_default = min(l_max * (2 * alpha_max + 1), (n - 1) // 2)
    guard = _as_int(pilot_map.get("guard", guard_default), "pilot.guard", minimum=0)
    if 2 * guard + 1 > n:
        raise ConfigValidationError(
            f"pilot.guard = {guard} leaves no data slots in a frame of n = {n}",
            field="pilot.guard",
        )
    boost_db = _as_number(pilot_map.get("boost_db", 0.0), "pilot.boost_db")
    pilot_threshold = _as_number(pilot_map.get("threshold", 0.2), "pilot.threshold")
    if not 0.0 < pilot_threshold <= 1.0:
        raise ConfigValidationError(
            f"pilot.threshold must lie in (0, 1], got {pilot_threshold}",
            field="pilot.threshold",
        )
    pilot = PilotSpec(guard=guard, boost_db=boost_db, threshold=pilot_threshold)

    sensing_map = _require_mapping(raw.get("sensing"), "sensing")
    _reject_unknown(sensing_map, _SENSING_KEYS, "sensing")
    sensing = SensingSpec(
        l_max=_as_int(sensing_map.get("l_max", max(l_max, 1)), "sensing.l_max", minimum=0),
        alpha_max=_as_int(
            sensing_map.get("alpha_max", max(alpha_max, 1)), "sensing.alpha_max", minimum=0
        ),
    )

    shift_map = _require_mapping(raw.get("shift"), "shift")
    _reject_unknown(shift_map, _SHIFT_KEYS, "shift")
    rates = shift_map.get("rates_2nc1", list(range(0, 8)))
    delays = shift_map.get("delays", list(range(0, 4)))
    dopplers = shift_map.get("dopplers", list(range(-2, 3)))
    shift = ShiftSpec(
        rates_2nc1=_parse_int_list(rates, "shift.rates_2nc1", minimum=0),
        delays=_parse_int_list(delays, "shift.delays", minimum=0),
        dopplers=_parse_number_list(dopplers, "shift.dopplers"),
        window_len=(
            _as_int(shift_map["window_len"], "shift.window_len", minimum=4)
            if "window_len" in shift_map
            else None
        ),
        hop=_as_int(shift_map["hop"], "shift.hop", minimum=1) if "hop" in shift_map else None,
        fft_len=(
            _as_int(shift_map["fft_len"], "shift.fft_len", minimum=4)
            if "fft_len" in shift_map
            else None
        ),
    )

    sweep_map = _require_mapping(raw.get("sweep"), "sweep")
    _reject_unknown(sweep_map, _SWEEP_KEYS, "sweep")
    sweep_values = sweep_map.get("two_n_c1_values", list(range(0, 2 * alpha_max + 2)))
    sweep_threshold = _as_number(sweep_map.get("rel_threshold", 0.01), "sweep.rel_threshold")
    if not 0.0 < sweep_threshold < 1.0:
        raise ConfigValidationError(
            f"sweep.rel_threshold must lie in (0, 1), got {sweep_threshold}",
            field="sweep.rel_threshold",
        )
    sweep = SweepSpec(
        two_n_c1_values=_parse_int_list(sweep_values, "sweep.two_n_c1_values", minimum=0),
        rel_threshold=sweep_threshold,
    )

    figures = _as_bool(raw.get("figures", True), "figures")

    try:
        WaveformParams(n=n, c1=c1, c2=c2, cpp_len=cpp_len)
    except ValueError as exc:
        raise ConfigValidationError(str(exc), field="waveform") from exc

    return ExperimentConfig(
        experiment_id=experiment_id,
        n=n,
        c1=float(c1),
        c2=float(c2),
        cpp_len=cpp_len,
        paths=paths,
        profile=profile,
        normalize=normalize,
        modulation=modulation,
        snr_db=snr_db,
        trials=trials,
        seed=seed,
        equalizer=equalizer,
        csi=csi,
        pilot=pilot,
        sensing=sensing,
        shift=shift,
        sweep=sweep,
        figures=figures,
        l_max=l_max,
        alpha_max=alpha_max,
        raw=raw,
    )
