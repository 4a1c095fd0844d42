"""Experiment configuration: a flat INI file with one section per component.

Sections: ``[experiment]``, ``[channel]``, ``[system]``, ``[sdg]``, ``[pddl]``.
:func:`dumps` writes every field explicitly so that ``loads(dumps(cfg)) == cfg``.
"""
import configparser
import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .capacity import SystemParams, rin_from_db
from .channel import ChannelParams, default_wavelengths
from .pddl import PddlConfig
from .sdg import SdgConfig

RANDOM_WEIGHTS = "random_uniform_0_1"
BUNDLED = ("fig1_m8", "fig2_m16_small", "fig2_m16_large")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"[{key}] {message}")
        self.key = key


@dataclass
class ExperimentConfig:
    m: int
    p_t: float
    p_s: float
    channel: ChannelParams
    system: SystemParams = field(default_factory=SystemParams)
    sdg: SdgConfig = field(default_factory=SdgConfig)
    pddl: PddlConfig = field(default_factory=PddlConfig)
    weights: object = RANDOM_WEIGHTS
    weight_seed: int = 0
    seed: int = 0
    eval_samples: int = 1000
    output_dir: str = "runs"
    name: str = "experiment"

    def __post_init__(self):
        if not (self.p_t > 0):
            raise ConfigError("experiment.p_t", "must be > 0")
        if not (self.p_s > 0):
            raise ConfigError("experiment.p_s", "must be > 0")
        if self.m < 1:
            raise ConfigError("experiment.m", "must be >= 1")
        if self.channel.m != self.m:
            raise ConfigError("channel.wavelengths",
                              f"{self.channel.m} wavelengths but m = {self.m}")
        if self.weights != RANDOM_WEIGHTS:
            self.weights = tuple(float(x) for x in self.weights)
            if len(self.weights) != self.m:
                raise ConfigError("experiment.weights", f"need {self.m} weights")
            if min(self.weights) < 0:
                raise ConfigError("experiment.weights", "weights must be >= 0")
        if self.eval_samples < 1:
            raise ConfigError("experiment.eval_samples", "must be >= 1")

    def resolve_weights(self):
        if self.weights == RANDOM_WEIGHTS:
            return np.random.default_rng(self.weight_seed).uniform(0.0, 1.0, self.m)
        return np.array(self.weights, float)


_CHANNEL_KEYS = {"alpha": "alpha", "distance": "d", "d_tx": "d_tx", "d_rx": "d_rx",
                 "sigma_x2": "sigma_x2", "n0": "n0"}
_SYSTEM_KEYS = {"omi": "omi", "m_p": "m_p", "responsivity": "r", "rin": "rin",
                "e_charge": "e_charge", "f_excess": "f_excess", "k_boltz": "k_boltz",
                "temperature": "temperature", "r_f": "r_f"}


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _coerce(section, key, text, default):
    where = f"{section}.{key}"
    try:
        if isinstance(default, bool):
            return _bool(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(int(x) for x in _floats(text))
        return text.strip()
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _solver_section(cp, section, cls):
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    if cp.has_section(section):
        for key, text in cp.items(section):
            if key not in names:
                raise ConfigError(f"{section}.{key}", "unknown key")
            kwargs[key] = _coerce(section, key, text, getattr(defaults, key))
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(section, str(exc)) from None


def _get(cp, section, key, conv=float, default=None):
    if not cp.has_option(section, key):
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing")
        return default
    try:
        return conv(cp.get(section, key))
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}", str(exc)) from None


def loads(text):
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("file", str(exc)) from None
    for sec in ("experiment", "channel", "system"):
        if not cp.has_section(sec):
            raise ConfigError(sec, "missing section")
    known = {"experiment", "channel", "system", "sdg", "pddl"}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(sec, "unknown section")

    ex = "experiment"
    m = _get(cp, ex, "m", int)
    if m < 1:
        raise ConfigError("experiment.m", f"must be >= 1, got {m}")
    wtext = _get(cp, ex, "weights", str, RANDOM_WEIGHTS).strip()
    weights = RANDOM_WEIGHTS if wtext == RANDOM_WEIGHTS else _floats(wtext)

    ch = "channel"
    if cp.has_option(ch, "wavelengths"):
        wavelengths = _get(cp, ch, "wavelengths", _floats)
    else:
        start = _get(cp, ch, "wavelength_start_nm", float, 1520.0)
        step = _get(cp, ch, "wavelength_step_nm", float, 5.0)
        wavelengths = default_wavelengths(m, start * 1e-9, step * 1e-9)
    chan_kwargs = {attr: _get(cp, ch, key, float, getattr(ChannelParams, attr))
                   for key, attr in _CHANNEL_KEYS.items()}
    chan_kwargs["clamp_gain_to_unity"] = _get(cp, ch, "clamp_gain_to_unity", _bool, False)
    try:
        channel = ChannelParams(wavelengths=wavelengths, **chan_kwargs)
    except ValueError as exc:
        raise ConfigError(ch, str(exc)) from None

    sy = "system"
    sys_kwargs = {}
    for key, attr in _SYSTEM_KEYS.items():
        if key == "rin":
            continue
        if cp.has_option(sy, key):
            sys_kwargs[attr] = _get(cp, sy, key)
    if cp.has_option(sy, "rin"):
        sys_kwargs["rin"] = _get(cp, sy, "rin")
    elif cp.has_option(sy, "rin_db_hz"):
        sys_kwargs["rin"] = rin_from_db(_get(cp, sy, "rin_db_hz"),
                                        _get(cp, sy, "noise_bandwidth_hz", float, 1e9))
    try:
        system = SystemParams(**sys_kwargs)
    except ValueError as exc:
        raise ConfigError(sy, str(exc)) from None

    return ExperimentConfig(
        m=m,
        p_t=_get(cp, ex, "p_t"),
        p_s=_get(cp, ex, "p_s"),
        channel=channel,
        system=system,
        sdg=_solver_section(cp, "sdg", SdgConfig),
        pddl=_solver_section(cp, "pddl", PddlConfig),
        weights=weights,
        weight_seed=_get(cp, ex, "weight_seed", int, 0),
        seed=_get(cp, ex, "seed", int, 0),
        eval_samples=_get(cp, ex, "eval_samples", int, 1000),
        output_dir=_get(cp, ex, "output_dir", str, "runs").strip(),
        name=_get(cp, ex, "name", str, "experiment").strip(),
    )


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps(cfg):
    lines = ["[experiment]"]
    for key in ("name", "m", "p_t", "p_s", "seed", "weight_seed", "eval_samples", "output_dir"):
        lines.append(f"{key} = {_fmt(getattr(cfg, key))}")
    lines.append(f"weights = {_fmt(cfg.weights)}")
    lines += ["", "[channel]", f"wavelengths = {_fmt(cfg.channel.wavelengths)}"]
    for key, attr in _CHANNEL_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(cfg.channel, attr))}")
    lines.append(f"clamp_gain_to_unity = {_fmt(cfg.channel.clamp_gain_to_unity)}")
    lines += ["", "[system]"]
    for key, attr in _SYSTEM_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(cfg.system, attr))}")
    for section, obj in (("sdg", cfg.sdg), ("pddl", cfg.pddl)):
        lines += ["", f"[{section}]"]
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def load(path_or_name):
    """Read a config file, or one of the bundled configs by name."""
    text = None
    if str(path_or_name) in BUNDLED:
        text = resources.files(__package__).joinpath(
            "configs", f"{path_or_name}.ini").read_text()
    else:
        try:
            text = Path(path_or_name).read_text()
        except OSError as exc:
            raise ConfigError("file", f"cannot read {path_or_name}: {exc}") from None
    return loads(text)


def save(cfg, path):
    Path(path).write_text(dumps(cfg))
