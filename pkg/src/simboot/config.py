"""Run configuration: flat ``key = value`` files plus command-line overrides.

Precedence, lowest first: preset defaults, config file, explicit flags.
Lines starting with ``#`` are comments. List values are comma separated.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .dgp import DgpSpec, bump_mean, flat_mean, table_mean
from .errors import ConfigError
from .models import Family, KernelSpec, ModelGrid
from .rng import RngSpec, WeightScheme

DEFAULT_ALPHAS = tuple(round(0.05 * i, 2) for i in range(1, 11))

PRESETS = {
    "paper": dict(n=400, k=71, b=10000, m=5000, reps=100),
    "desk": dict(n=400, k=71, b=2000, m=500, reps=20),
}


@dataclass(frozen=True)
class RunConfig:
    preset: str = "paper"
    family: str = "lc"
    n: int = 400
    k: int = 71
    h: float = 0.3
    b: int = 10000
    m: int = 5000
    reps: int = 100
    alphas: tuple = DEFAULT_ALPHAS
    band_alpha: float = 0.1
    scheme: str = "gauss"
    seed: int = 42
    threads: int = 1
    out: str = "."
    dgp: str = "bump"
    level: float = 5.0
    noise_sd: float = 1.0
    centers: Optional[tuple] = None
    taus: Optional[tuple] = None
    f_table: Optional[str] = None
    data: Optional[str] = None

    def grid(self):
        fam = Family(self.family)
        if fam is Family.QT:
            taus = self.taus if self.taus is not None else tuple(np.arange(1, self.k + 1) / (self.k + 1))
            return ModelGrid(fam, taus=np.array(taus))
        centers = self.centers if self.centers is not None else np.linspace(0.0, 1.0, self.k)
        return ModelGrid(fam, centers=np.array(centers), kernel=KernelSpec(self.h))

    def dgp_spec(self):
        if self.dgp == "bump":
            f = bump_mean
        elif self.dgp == "flat":
            f = flat_mean(self.level)
        else:
            xs, fs = read_two_columns(self.f_table, "f_table")
            f = table_mean(xs, fs)
        return DgpSpec(n=self.n, f=f, noise_sd=self.noise_sd)

    def rng(self):
        return RngSpec(self.seed)

    @property
    def weight_scheme(self):
        return WeightScheme(self.scheme)


_INT_KEYS = {"n", "k", "b", "m", "reps", "seed", "threads"}
_FLOAT_KEYS = {"h", "band_alpha", "noise_sd", "level"}
_LIST_KEYS = {"alphas", "centers", "taus"}
_CHOICES = {
    "preset": set(PRESETS),
    "family": {f.value for f in Family},
    "scheme": {s.value for s in WeightScheme},
    "dgp": {"bump", "flat", "table"},
}
KEYS = {f.name for f in fields(RunConfig)}


def _convert(key, raw, line=None):
    if key not in KEYS:
        raise ConfigError("unknown key", key=key, line=line)
    if raw is None:
        return None
    if not isinstance(raw, str):
        return tuple(float(v) for v in raw) if key in _LIST_KEYS else raw
    text = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _LIST_KEYS:
            if text in ("", "none", "None"):
                return None
            return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse {text!r}", key=key, line=line) from None
    if key in ("f_table", "data") and text in ("", "none", "None"):
        return None
    return text


def read_config_file(path):
    """Parse a key=value file into ``{key: (value, line_number)}``."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} does not exist")
    entries = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key = value", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key] = (_convert(key, value, lineno), lineno)
    return entries


def parse_config(path=None, overrides=None):
    """Resolve a full :class:`RunConfig` from an optional file and flag overrides."""
    file_entries = read_config_file(path) if path is not None else {}
    flags = {k: _convert(k, v) for k, v in (overrides or {}).items() if v is not None}

    preset = flags.get("preset", file_entries.get("preset", ("paper", None))[0])
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}", key="preset")
    values = dict(PRESETS[preset], preset=preset)
    lines = {}
    for key, (value, lineno) in file_entries.items():
        values[key] = value
        lines[key] = lineno
    values.update(flags)
    if values.get("centers") is not None:
        values["k"] = len(values["centers"])
    elif values.get("taus") is not None:
        values["k"] = len(values["taus"])
    cfg = RunConfig(**values)
    validate(cfg, lines)
    return cfg


def validate(cfg, lines=None):
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(msg, key=key, line=lines.get(key))

    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            fail(key, f"must be one of {sorted(choices)}, got {getattr(cfg, key)!r}")
    for key in ("n", "k", "b", "m", "reps", "threads"):
        if getattr(cfg, key) < 1:
            fail(key, "must be a positive integer")
    if cfg.n < 2:
        fail("n", "need at least two design points")
    if not 0 <= cfg.seed < 2**64:
        fail("seed", "must lie in [0, 2**64)")
    if not (cfg.h > 0 and math.isfinite(cfg.h)):
        fail("h", "bandwidth must be positive")
    if not (cfg.noise_sd > 0 and math.isfinite(cfg.noise_sd)):
        fail("noise_sd", "must be positive")
    if not cfg.alphas or not all(0 < a < 1 for a in cfg.alphas):
        fail("alphas", "every alpha must lie in (0, 1)")
    if not 0 < cfg.band_alpha < 1:
        fail("band_alpha", "must lie in (0, 1)")
    if cfg.centers is not None and any(np.diff(cfg.centers) <= 0):
        fail("centers", "centers must be strictly increasing")
    if cfg.taus is not None and not all(0 < t < 1 for t in cfg.taus):
        fail("taus", "every tau must lie in (0, 1)")
    if cfg.dgp == "table" and cfg.f_table is None:
        fail("f_table", "dgp = table needs f_table = PATH")
    if cfg.family == "qt":
        if not WeightScheme(cfg.scheme).nonnegative:
            fail("scheme", "the quantile family needs a nonnegative scheme (exp or bern)")
        if cfg.dgp == "bump":
            fail("dgp", "the quantile family needs a constant mean (dgp = flat)")


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg):
    """Text that :func:`parse_config` reads back into an identical config."""
    return "".join(f"{f.name} = {_format(getattr(cfg, f.name))}\n" for f in fields(cfg))


def replace(cfg, **changes):
    new = dataclasses.replace(cfg, **changes)
    validate(new)
    return new


def read_two_columns(path, key):
    """Two numeric columns (comma or whitespace separated); ``#`` comments allowed."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"file {path} does not exist", key=key)
    rows = []
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            a, b = (float(v) for v in parts)
        except ValueError:
            raise ConfigError(f"{path}: line {lineno} is not two numbers", key=key) from None
        rows.append((a, b))
    if not rows:
        raise ConfigError(f"{path} holds no data", key=key)
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1]
