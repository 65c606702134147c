"""Pipeline configuration with file and environment overrides.

A config file holds ``key = value`` lines (``#`` comments allowed); flag
values override file values. ``VPSCAPE_CONFIG`` names a default config
file path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

ENV_CONFIG = "VPSCAPE_CONFIG"


@dataclass
class PipelineConfig:
    """Tunables for the detection + retrieval pipeline.

    ``threshold_t = 150`` is calibrated for ``tau = 100`` at the 500-px
    working resolution; changing tau rescales all strength scores, so the
    threshold should move with it.
    """

    alpha: float = 0.05
    l_min: float = 40.0
    phi: float = 3.0
    n_hypotheses: int = 500
    seed: int = 0
    tau: float = 100.0
    threshold_t: float = 150.0
    w_min: float = 0.1
    gamma1: float = 0.5
    gamma2: float = 0.5
    pyramid_levels: int = 6
    image_len: int = 500
    top_k: int = 3
    raw_kernel: bool = False

    @staticmethod
    def from_file(path) -> "PipelineConfig":
        text = Path(path).read_text()
        known = {f.name: f.type for f in fields(PipelineConfig)}
        values = {}
        bad = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                bad.append(f"line {lineno}: {line!r}")
                continue
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in known:
                bad.append(key)
                continue
            try:
                values[key] = _coerce(key, val)
            except ValueError:
                bad.append(key)
        if bad:
            raise ConfigError(bad)
        return PipelineConfig(**values)

    @staticmethod
    def default(config_path=None) -> "PipelineConfig":
        """Config from an explicit path, the env default, or built-ins."""
        if config_path is None:
            config_path = os.environ.get(ENV_CONFIG)
        if config_path:
            return PipelineConfig.from_file(config_path)
        return PipelineConfig()

    def replace(self, **overrides) -> "PipelineConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        bad = [k for k in overrides if k not in values]
        if bad:
            raise ConfigError(bad)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return PipelineConfig(**values)


_INT_KEYS = {"n_hypotheses", "seed", "pyramid_levels", "image_len", "top_k"}
_BOOL_KEYS = {"raw_kernel"}


def _coerce(key: str, val: str):
    if key in _BOOL_KEYS:
        if val.lower() in ("1", "true", "yes", "on"):
            return True
        if val.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(val)
    if key in _INT_KEYS:
        return int(val)
    return float(val)
