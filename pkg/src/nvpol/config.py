"""Run configuration shared by the CLI subcommands and the figure recipes."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .environment import (
    Environment,
    Explicit,
    Graded,
    Uniform,
    generate_environment,
    load_environment,
    load_table1,
    set_polarization,
)
from .errors import ConfigError, NvpolError
from .estimator import DEFAULT_POINTS, DEFAULT_SIN_FLOOR, DEFAULT_T_MAX_US, Method


def _default_grid() -> dict:
    return {"min_us": 0.0, "max_us": DEFAULT_T_MAX_US, "points": DEFAULT_POINTS}


@dataclass
class RunConfig:
    """Everything a run depends on.

    ``environment`` is one of::

        {"source": "table1", "n": 5}
        {"source": "file", "path": "env.json"}
        {"source": "generated", "seed": 1, "n": 5, "r_min_nm": 0.3, "r_max_nm": 2.5}

    ``polarization`` is ``{"kind": "uniform", "p": ...}``,
    ``{"kind": "graded", "mean": ..., "sigma": ..., "seed": ...}`` or
    ``{"kind": "explicit", "values": [...]}``. A file source keeps the stored
    polarizations when ``polarization`` is null.
    """

    environment: dict = field(default_factory=lambda: {"source": "table1", "n": 5})
    b_gauss: float = 100.0
    polarization: dict | None = field(default_factory=lambda: {"kind": "uniform", "p": 1.0})
    tau_grid: dict = field(default_factory=_default_grid)
    t_grid: dict = field(default_factory=_default_grid)
    method: str = Method.TIME_DEPENDENT.value
    sin_floor: float = DEFAULT_SIN_FLOOR
    p_values: list | None = None
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        src = self.environment.get("source")
        required = {"table1": {"n"}, "file": {"path"}, "generated": {"seed", "n"}}
        if src not in required:
            raise ConfigError(f"environment.source must be one of {sorted(required)}, got {src!r}")
        missing = required[src] - set(self.environment)
        if missing:
            raise ConfigError(f"environment ({src}) is missing {sorted(missing)}")
        if not (isinstance(self.b_gauss, (int, float)) and self.b_gauss >= 0):
            raise ConfigError(f"b_gauss must be >= 0, got {self.b_gauss!r}")
        for name in ("tau_grid", "t_grid"):
            g = getattr(self, name)
            extra = set(g) - {"min_us", "max_us", "points"}
            if extra:
                raise ConfigError(f"{name} has unknown keys {sorted(extra)}")
            lo, hi, n = g.get("min_us", 0.0), g.get("max_us", DEFAULT_T_MAX_US), g.get("points", DEFAULT_POINTS)
            if not (0 <= lo and (hi > lo or (hi == lo and n == 1)) and int(n) == n and n >= 1):
                raise ConfigError(f"invalid {name}: {g}")
        try:
            Method(self.method)
        except ValueError:
            raise ConfigError(f"unknown method {self.method!r}") from None
        if not 0 < self.sin_floor < 1:
            raise ConfigError(f"sin_floor must lie in (0, 1), got {self.sin_floor}")
        if self.polarization is not None and self.polarization.get("kind") not in ("uniform", "graded", "explicit"):
            raise ConfigError(f"unknown polarization kind in {self.polarization}")

    # --- (de)serialization ---

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**copy.deepcopy(data))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def with_overrides(self, assignments: list[str]) -> "RunConfig":
        """Apply ``key=value`` pairs; dotted keys reach into nested dicts."""
        data = self.to_dict()
        for item in assignments:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            key, raw = item.split("=", 1)
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            node = data
            parts = key.split(".")
            for part in parts[:-1]:
                if not isinstance(node.get(part), dict):
                    node[part] = {}
                node = node[part]
            node[parts[-1]] = value
        return RunConfig.from_dict(data)

    # --- materialization ---

    def grids(self) -> tuple[np.ndarray, np.ndarray]:
        out = []
        for g in (self.tau_grid, self.t_grid):
            out.append(np.linspace(g.get("min_us", 0.0), g.get("max_us", DEFAULT_T_MAX_US), int(g.get("points", DEFAULT_POINTS))))
        return out[0], out[1]

    def base_environment(self) -> Environment:
        e = self.environment
        try:
            if e["source"] == "table1":
                env = load_table1(int(e["n"]))
            elif e["source"] == "file":
                env = load_environment(e["path"])
            else:
                env = generate_environment(
                    int(e["seed"]), int(e["n"]), float(e.get("r_min_nm", 0.3)), float(e.get("r_max_nm", 2.5))
                )
        except OSError:
            raise
        except (NvpolError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot build environment from {e}: {exc}") from exc
        return env.with_field(self.b_gauss)

    def profile(self):
        pol = self.polarization
        if pol is None:
            return None
        kind = pol["kind"]
        try:
            if kind == "uniform":
                return Uniform(float(pol["p"]))
            if kind == "graded":
                return Graded(float(pol["mean"]), float(pol["sigma"]), int(pol.get("seed", self.seed)))
            return Explicit(tuple(float(v) for v in pol["values"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad polarization spec {pol}: {exc}") from exc

    def build_environment(self) -> Environment:
        env = self.base_environment()
        profile = self.profile()
        if profile is None:
            return env
        try:
            return set_polarization(env, profile)
        except NvpolError as exc:
            raise ConfigError(str(exc)) from exc
