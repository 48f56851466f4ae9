"""Flat ``key = value`` run configuration with typed fields and CLI overrides."""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

BASES = ("db8", "dct")
COLORS = ("mono", "bayer")


def _paths(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def _bool(value):
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass
class RunConfig:
    video: str | None = None
    mask: str | None = None
    schedule: str | None = None
    masks: str | None = None
    measurements: list = field(default_factory=list)
    truth: list = field(default_factory=list)
    recon: str | None = None
    out: str = "cacti_out"
    nt: int = 8
    basis_x: str = "db8"
    basis_y: str = "db8"
    basis_t: str = "dct"
    levels: int = 3
    taps: int = 8
    a0: float = 1e-6
    b0: float = 1e-6
    c0: float = 1e-6
    d0: float = 1e-6
    noise_sigma: float = 0.0
    density: float = 0.5
    seed: int = 0
    max_sweeps: int = 200
    tol: float = 1e-4
    tau_update: str = "verbatim"
    color: str = "mono"
    pattern: str = "RGGB"
    peak: float = 1.0
    preset: str = "tiny"
    trace: bool = False
    dump_levels: bool = False
    workers: int = 4

    def validate(self):
        for key in ("basis_x", "basis_y", "basis_t"):
            if getattr(self, key) not in BASES:
                raise ConfigError(f"{key}: expected one of {BASES}, got {getattr(self, key)!r}")
        if self.color not in COLORS:
            raise ConfigError(f"color: expected one of {COLORS}, got {self.color!r}")
        if self.tau_update not in ("verbatim", "mgp"):
            raise ConfigError(f"tau_update: expected verbatim or mgp, got {self.tau_update!r}")
        if self.nt < 1:
            raise ConfigError("nt: must be >= 1")
        if self.levels < 0:
            raise ConfigError("levels: must be >= 0")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma: must be >= 0")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps: must be >= 1")
        if self.peak <= 0:
            raise ConfigError("peak: must be positive")
        return self

    @property
    def basis(self):
        return (self.basis_x, self.basis_y, self.basis_t)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(key, raw):
    f = _FIELDS[key]
    default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
    try:
        if isinstance(default, list):
            return _paths(raw)
        if isinstance(default, bool):
            return _bool(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip() or None
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_config(text, base_dir=None):
    """Parse ``key = value`` lines into a dict of typed values.

    Relative file paths are resolved against ``base_dir``.
    """
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    if base_dir is not None:
        base = Path(base_dir)
        for key in ("video", "mask", "schedule", "masks", "recon", "out"):
            if values.get(key):
                values[key] = str(base / values[key])
        for key in ("measurements", "truth"):
            if key in values:
                values[key] = [str(base / p) for p in values[key]]
    return values


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), base_dir=path.parent)


def build_config(file_values=None, overrides=None):
    values = dict(file_values or {})
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values).validate()


def dump_config(path, values):
    """Write a config file; list values are comma-joined."""
    lines = []
    for key, value in values.items():
        if isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")
    return path
