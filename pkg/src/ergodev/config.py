"""Experiment configuration: a flat key=value file or JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import ConfigInvalid

_DEFAULTS = {
    "preset": "genus2_a",
    "matrix": None,          # JSON rows, for toral subcommands
    "observable": None,      # "preset", "constant", or JSON terms
    "starts": 20,            # seeded count, or explicit list of fractions
    "fit_tol": 0.05,         # tolerance on fitted exponents, reported in summaries
    "seed": 20,
    "tmin": 1e2,
    "tmax": 1e7,
    "tratio": 1.16,          # geometric grid ratio, > 1
    "fit_tmin": 1e4,
    "depth": 30,
    "n_max": 60,
    "max_freq": 5,
    "pairs": 20,
    "trials": 200,
    "eps": 0.01,
    "out": "out",
    "workers": 1,
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(_DEFAULTS)
        merged.update(self.values)
        self.values = merged
        if not float(self.values["tratio"]) > 1.0:
            raise ConfigInvalid("tratio must exceed 1")
        starts = self.values["starts"]
        if isinstance(starts, list):
            if not starts:
                raise ConfigInvalid("explicit start list must be nonempty")
        elif int(starts) < 1:
            raise ConfigInvalid("starts must be positive")
        if int(self.values["workers"]) < 1:
            raise ConfigInvalid("workers must be positive")
        if float(self.values["tmin"]) >= float(self.values["tmax"]):
            raise ConfigInvalid("tmin must be below tmax")

    def __getitem__(self, key: str):
        return self.values[key]

    def t_grid(self) -> list[float]:
        out = []
        t = float(self.values["tmin"])
        ratio = float(self.values["tratio"])
        while t <= float(self.values["tmax"]) * (1 + 1e-12):
            out.append(t)
            t *= ratio
        return out

    def as_dict(self) -> dict:
        return dict(self.values)


def _sniff(text: str):
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    if t.lower() in ("none", "null", ""):
        return None
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    if t.startswith("[") or t.startswith("{"):
        try:
            return json.loads(t)
        except json.JSONDecodeError:
            pass
    return t


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    """Read the flat key=value format ('#' comments) or JSON; CLI flags win."""
    values: dict = {}
    if path is not None:
        text = Path(path).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                values.update(json.loads(text))
            except json.JSONDecodeError as e:
                raise ConfigInvalid(f"bad JSON config: {e}")
        else:
            for lineno, line in enumerate(text.splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line or line.startswith("["):
                    continue
                if "=" not in line:
                    raise ConfigInvalid(f"line {lineno}: expected key = value")
                k, v = line.split("=", 1)
                values[k.strip()] = _sniff(v)
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    unknown = set(values) - set(_DEFAULTS)
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(values=values)
