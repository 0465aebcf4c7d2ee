"""Flat key=value run configuration.

One option per line, ``key = value``; ``#`` starts a comment; lists are
comma separated.  Keys map one-to-one onto SweepConfig fields and unknown
keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .initial import DataSpec
from .spectral import Grid, make_grid


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    # grid spec
    nx: int = 32
    ny: int = 32
    nz: int = 16
    l1: float = 2.0 * np.pi
    l2: float = 2.0 * np.pi
    # data spec
    data_kind: str = "random"
    smoothness_class: str = "H2"
    seed: int = 20
    max_mode: int = 5
    amplitude: float = 1.0
    h1_target: float | None = None
    h2_target: float | None = None
    # sweep axes
    alphas: tuple = (4.0,)
    eps_list: tuple = (0.2, 0.1, 0.05, 0.025)
    # horizon and dt policy
    t_end: float = 0.5
    dt: float | None = None          # None: derived from the CFL bound
    cfl_safety: float = 0.4
    dt_max: float = 2.5e-3
    # outputs
    n_outputs: int = 50
    outdir: str = "out"
    workers: int = 1
    slope_tol: float = 0.6
    lm_exponent: float = 4.0

    def __post_init__(self):
        if len(self.eps_list) < 1:
            raise ConfigError("eps_list must not be empty")
        eps = tuple(float(e) for e in self.eps_list)
        if any(e <= 0 for e in eps):
            raise ConfigError("eps values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_list must be strictly decreasing")
        object.__setattr__(self, "eps_list", eps)
        alphas = tuple(float(a) for a in self.alphas)
        if any(a <= 2 for a in alphas):
            raise ConfigError("all alphas must exceed 2")
        object.__setattr__(self, "alphas", alphas)
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if self.n_outputs < 2:
            raise ConfigError("n_outputs must be at least 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.smoothness_class not in ("H1", "H2"):
            raise ConfigError("smoothness_class must be 'H1' or 'H2'")

    def grid(self) -> Grid:
        return make_grid(self.nx, self.ny, self.nz, self.l1, self.l2)

    def data_spec(self) -> DataSpec:
        return DataSpec(kind=self.data_kind,
                        smoothness_class=self.smoothness_class,
                        seed=self.seed, max_mode=self.max_mode,
                        amplitude=self.amplitude,
                        h1_target=self.h1_target, h2_target=self.h2_target)


_FIELD_TYPES = {f.name: f.type for f in fields(SweepConfig)}

_INT_KEYS = {"nx", "ny", "nz", "seed", "max_mode", "n_outputs", "workers"}
_FLOAT_KEYS = {"l1", "l2", "amplitude", "t_end", "cfl_safety", "dt_max",
               "slope_tol", "lm_exponent"}
_OPT_FLOAT_KEYS = {"h1_target", "h2_target", "dt"}
_LIST_KEYS = {"alphas", "eps_list"}
_STR_KEYS = {"data_kind", "smoothness_class", "outdir"}


def _convert(key, raw):
    raw = raw.strip()
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _OPT_FLOAT_KEYS:
        if raw.lower() in ("auto", "none", ""):
            return None
        return float(raw)
    if key in _LIST_KEYS:
        items = [s for s in (p.strip() for p in raw.split(",")) if s]
        if not items:
            raise ConfigError(f"{key}: empty list")
        return tuple(float(s) for s in items)
    if key in _STR_KEYS:
        return raw
    raise ConfigError(f"unknown configuration key {key!r}")


def parse_config(text: str) -> SweepConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    return SweepConfig(**values)


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: SweepConfig) -> str:
    """Config file text reproducing cfg (used by the sweep manifest)."""
    lines = []
    for f in fields(SweepConfig):
        v = getattr(cfg, f.name)
        if v is None:
            s = "auto" if f.name == "dt" else "none"
        elif isinstance(v, tuple):
            s = ", ".join(f"{x:.17g}" for x in v)
        elif isinstance(v, float):
            s = f"{v:.17g}"
        else:
            s = str(v)
        lines.append(f"{f.name} = {s}")
    return "\n".join(lines) + "\n"
