"""Run configuration: flat ``key = value`` files merged with CLI flags."""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields

from .errors import InvalidInputError

# config-file key -> RunConfig attribute
FILE_KEYS = {
    "model": "model",
    "model.mu": "mu",
    "model.rho": "rho",
    "model.sigma": "sigma",
    "model.beta": "beta",
    "model.component": "component",
    "integrator.abs_tol": "abs_tol",
    "integrator.rel_tol": "rel_tol",
    "section.d": "d",
    "section.delta": "delta",
    "section.t_max": "t_max",
    "extract.grid_s": "grid_s",
    "extract.grid_y": "grid_y",
    "graph.seeds_per_band": "seeds_per_band",
    "graph.max_iters": "max_iters",
    "verify.samples": "samples",
    "verify.lambda": "lam",
    "probe.horizon": "horizon",
    "probe.U": "U",
    "probe.V": "V",
    "probe.samples": "probe_samples",
    "output.dir": "out_dir",
    "seed": "seed",
}


@dataclass
class RunConfig:
    model: str | None = None
    mu: float | None = None
    rho: float | None = None  # Lorenz rho for flows, vertical contraction for maps
    sigma: float | None = None
    beta: float | None = None
    component: str = "all"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    d: float = 0.3
    delta: float = 0.1
    t_max: float = 20.0
    grid_s: int = 8
    grid_y: int = 3
    seeds_per_band: int = 3
    max_iters: int = 12
    samples: int = 2000
    lam: float | None = None
    horizon: float = 100.0
    U: float = 2.0
    V: float = 0.5
    probe_samples: int = 200
    out_dir: str = "orbitforge-out"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvalidInputError("integrator tolerances must be positive")
        if not 0 < self.delta <= 1:
            raise InvalidInputError(f"section.delta={self.delta} must lie in (0, 1]")
        if self.d <= 0:
            raise InvalidInputError("section.d must be positive")
        if self.t_max <= 0 or self.horizon <= 0:
            raise InvalidInputError("time horizons must be positive")
        if not 0 < self.V <= self.U:
            raise InvalidInputError("probe radii need 0 < V <= U")
        if self.grid_s < 2 or self.grid_y < 1:
            raise InvalidInputError("extraction grid too small")
        if self.seeds_per_band < 1 or self.max_iters < 1 or self.samples < 1:
            raise InvalidInputError("counts must be positive")
        if self.component not in ("all", "t", "b"):
            raise InvalidInputError("component must be one of all, t, b")
        return self

    def to_json(self) -> dict:
        return asdict(self)


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds[name]
    try:
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError as exc:
        raise InvalidInputError(f"bad value {raw!r} for {name}") from exc
    return raw


def read_config_file(path: str) -> dict:
    """Parse a flat key-value file (``#`` comments, ``=`` or ``:`` separators)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for key, raw in parser["run"].items():
        if key not in FILE_KEYS:
            raise InvalidInputError(f"unknown config key {key!r}")
        name = FILE_KEYS[key]
        out[name] = _coerce(name, raw.strip())
    return out


def resolve(file_values: dict, flag_values: dict) -> RunConfig:
    """File values first, then flags that were given explicitly."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return RunConfig(**merged).validate()
